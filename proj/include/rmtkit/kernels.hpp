#pragma once

#include "rmtkit/ensembles.hpp"
#include "rmtkit/gram.hpp"
#include "rmtkit/quadrature.hpp"

#include <utility>
#include <variant>
#include <vector>

namespace rmtkit {

enum class KernelMethod { gram_sum, contour_quadrature, residue_sum };

// Canonical gauge: the biorthogonal-sum kernel sum_i psi_i(x) C_{i+nu,j} phi_j(y).
// All methods return this same gauge; the double-contour core S(x,y) relates to
// it by K(x,y) = (x/y)^kappa S(x,y) for the coupled and product kinds.
struct FiniteKernel {
    std::variant<WishartParams, ProductParams, CoupledParams> params;
    KernelMethod method = KernelMethod::gram_sum;
    double tol = 1e-10;
};

struct KernelValue {
    double value = 0.0;
    double est_error = 0.0;
};

// Contour geometry knobs. The default nested mode tolerates coalescing
// parameter clusters; the outer circle is widened by inflate_frac times the
// full pole span so no pole sits close to it.
struct ContourOptions {
    double outer_inflate_frac = 0.75;
    double inner_margin_frac = 0.5; // of the inner cluster gap to excluded points
    int start_nodes = 64;
    int max_nodes = 1 << 12;
};

KernelValue kernel_eval(const FiniteKernel& k, double x, double y);
double rho_k(const FiniteKernel& k, const std::vector<double>& points);

// Factorised half-line form -int_0^1 du/u F1(x;u) F2(y;u); needs a positive
// gap between the two parameter clusters (separated contours).
KernelValue kernel_factorized(const FiniteKernel& k, double x, double y);

// Evaluates the coupled kernel with delta = 0 against the product kernel,
// both by contour quadrature in the canonical gauge.
std::pair<double, double> kernel_coupled_delta_zero_check(const ProductParams& p, double x,
                                                          double y);

// Gauge-free double-contour cores (the (x/y)^kappa factor stripped); used
// directly by the scaling-limit scans where the gauge is handled analytically.
KernelValue kernel_contour_S(const CoupledParams& p, double x, double y, double tol = 1e-10,
                             const ContourOptions& opt = {});
KernelValue kernel_contour_S(const ProductParams& p, double x, double y, double tol = 1e-10,
                             const ContourOptions& opt = {});
KernelValue kernel_contour_wishart(const WishartParams& p, double x, double y, double tol = 1e-10,
                                   const ContourOptions& opt = {});

// Biorthogonal families entering the determinantal densities.
double psi_function(const CoupledParams& p, int j, double y);
double phi_function(const CoupledParams& p, int i, double y);
double psi_function(const ProductParams& p, int j, double y);
double phi_function(const ProductParams& p, int i, double y);
double psi_function(const WishartParams& p, int j, double x);
double phi_function(const WishartParams& p, int i, double x);

} // namespace rmtkit
