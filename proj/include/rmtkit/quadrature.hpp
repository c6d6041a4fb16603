#pragma once
#include <complex>
#include <functional>
#include <vector>

// Closed-contour quadrature on circles with real centers.  The kernel contour
// integrals all have integrands analytic in an annulus around the contour, so
// the periodic trapezoid rule converges geometrically; node doubling with a
// two-estimate error check is the adaptive strategy throughout.

namespace rmtkit {

using cplx = std::complex<double>;

struct Contour {
    double center = 0.0; // on the real axis
    double radius = 1.0;
    bool ccw = true;
    int nodes = 256; // starting node count; power of two, >= 8
};

enum class PairKind {
    nested,   // outer strictly encloses inner (limit kernels)
    separated // disjoint circles, outer to the right (finite-N kernels)
};

struct ContourPair {
    Contour inner;
    Contour outer;
    PairKind kind = PairKind::separated;
};

struct MarginPolicy {
    double gap_fraction = 0.5; // fraction of the gap to the nearest excluded point
    double base = 0.4;         // absolute margin when there is nothing to exclude
    double inflate = 0.0;      // widen the enclosed hull by this much on each side first
};

// Circle with real center enclosing all of `enclose` and none of `exclude`.
// Throws geometry_error when no circle with positive clearance exists.
Contour make_enclosing_contour(const std::vector<double>& enclose,
                               const std::vector<double>& exclude,
                               const MarginPolicy& policy = {});

// Disjoint circles around two clusters on the real axis (outer = right one).
// The shared gap between the clusters is split between the two radii.
ContourPair make_separated_pair(const std::vector<double>& left,
                                const std::vector<double>& right,
                                const std::vector<double>& exclude_from_right = {},
                                const MarginPolicy& policy = {});

struct QuadratureResult {
    cplx value{};
    double est_error = 0.0;
    long nodes_used = 0;
};

// oint f(z) dz / (2 pi i) by node-doubling trapezoid; stops when the change
// between successive levels is below tol * max(1, |value|).
QuadratureResult integrate_contour(const std::function<cplx(cplx)>& f, const Contour& c,
                                   double tol = 1e-10, int max_nodes = 1 << 14);

// Double contour oint oint f(z_inner, z_outer) dz_i dz_o / (2 pi i)^2 with
// lock-step doubling of both node counts.
QuadratureResult integrate_double_contour(const std::function<cplx(cplx, cplx)>& f,
                                          const ContourPair& pair, double tol = 1e-10,
                                          int max_nodes = 1 << 12);

// int_0^inf f(t) dt for exponentially decaying f.
QuadratureResult integrate_halfline(const std::function<double(double)>& f, double tol = 1e-10);

} // namespace rmtkit
