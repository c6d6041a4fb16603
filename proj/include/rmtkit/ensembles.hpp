#pragma once
#include "rmtkit/logspace.hpp"

#include <cstdint>
#include <string>
#include <vector>

// The three matrix models and their joint singular-value densities.
//
//   coupled:   P(G, X) ~ exp[-alpha Tr GG* + Tr(Omega G X + h.c.) - Tr QXX*],
//              G is L x M, X is M x N, Omega has squared singular values delta,
//              Q has eigenvalues q.  Observed points: squared singular values
//              of Y = GX.
//   product:   the same with Omega = 0 (two independent factors, X correlated).
//   wishart:   P(X) ~ exp[-Tr X Sigma X* - Tr QXX*], X is M x N; the coupled
//              model reduces to it with Sigma = -delta/alpha after integrating
//              out G.
//
// kappa = L - N >= 0 and nu = M - N >= 0 throughout.

namespace rmtkit {

struct CoupledParams {
    int N = 1, M = 1, L = 1;
    double alpha = 1.0;
    std::vector<double> delta; // size N, >= 0
    std::vector<double> q;     // size M, > 0
    int kappa() const { return L - N; }
    int nu() const { return M - N; }
};

struct ProductParams {
    int N = 1, M = 1, L = 1;
    double alpha = 1.0;
    std::vector<double> q; // size M, > 0
    int kappa() const { return L - N; }
    int nu() const { return M - N; }
};

struct WishartParams {
    int N = 1, M = 1;
    std::vector<double> sigma; // size N; may dip negative down to -min q
    std::vector<double> q;     // size M, > 0
    int nu() const { return M - N; }
};

// One violated constraint; `name` is the inequality family:
//   "aqd"         alpha q_i - delta_j > 0        (coupled)
//   "constraint3" q_i + sigma_j > 0              (wishart)
//   "positivity"  q > 0, delta >= 0, alpha > 0, dimension ordering
//   "allbounds"   hard-edge perturbation bounds  (see limits module)
struct Violation {
    std::string name;
    int i = -1, j = -1;
    double value = 0.0;
    std::string detail;
};

std::vector<Violation> validate(const CoupledParams& p);
std::vector<Violation> validate(const ProductParams& p);
std::vector<Violation> validate(const WishartParams& p);

// Throws parameter_error listing every violation if any.
void require_valid(const CoupledParams& p);
void require_valid(const ProductParams& p);
void require_valid(const WishartParams& p);

// Monte Carlo draws of squared singular values, `count` rows of N values each
// (ascending within a row).  Deterministic for a fixed (seed, row index): the
// per-row generator is derived by hashing, so results do not depend on the
// number of workers.
std::vector<std::vector<double>> sample_coupled(const CoupledParams& p, std::uint64_t seed,
                                                int count, int threads = 0);
std::vector<std::vector<double>> sample_product(const ProductParams& p, std::uint64_t seed,
                                                int count, int threads = 0);
std::vector<std::vector<double>> sample_wishart(const WishartParams& p, std::uint64_t seed,
                                                int count, int threads = 0);

// Squared singular values (ascending) of a complex matrix given as a
// row-major real/imag interleaved buffer rows x cols.
std::vector<double> squared_singular_values(const std::vector<double>& reim, int rows, int cols);

// Log joint densities (natural log).  Points must be positive and the
// parameter lists mutually distinct where the formulas require it.
double log_jpdf_coupled(const CoupledParams& p, const std::vector<double>& x,
                        const std::vector<double>& y); // joint in x (X spectrum) and y (Y spectrum)
double log_jpdf_coupled_y(const CoupledParams& p, const std::vector<double>& y);
double log_jpdf_product(const ProductParams& p, const std::vector<double>& y);
double log_jpdf_wishart(const WishartParams& p, const std::vector<double>& x);

// Pearson chi-square of `values` against expected bin masses; bins are
// equal-probability under the model CDF supplied as (grid, cdf) pairs.
struct ChiSquare {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    std::vector<double> edges;
    std::vector<double> observed;
    std::vector<double> expected;
};
ChiSquare chi_square_binned(const std::vector<double>& values, const std::vector<double>& grid,
                            const std::vector<double>& cdf, int bins);

} // namespace rmtkit
