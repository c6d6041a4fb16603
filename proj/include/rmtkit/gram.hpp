#pragma once

#include "rmtkit/ensembles.hpp"
#include "rmtkit/logspace.hpp"

#include <Eigen/Dense>
#include <vector>

namespace rmtkit {

enum class Kind { wishart, product, coupled };

// M x M pairing matrix: nu monomial columns in q (alpha-scaled for the
// coupled ensemble), then N columns of cross-pairing integrals.
struct GramMatrix {
    Eigen::MatrixXd entries;
    int nu = 0;
    Kind kind = Kind::wishart;
};

struct GramInverse {
    Eigen::MatrixXd entries;
    double condition_estimate = 0.0;
};

// Closed-form pairing integrals int psi_j phi_i over the half line.
double pairing_integral(const WishartParams& p, int i, int j);
double pairing_integral(const ProductParams& p, int i, int j);
double pairing_integral(const CoupledParams& p, int i, int j);

GramMatrix build_gram(const WishartParams& p);
GramMatrix build_gram(const ProductParams& p);
GramMatrix build_gram(const CoupledParams& p);

// Closed-form inverse of the pure Cauchy matrix A_{ij} = 1/(q_i + sigma_j),
// assembled in log space so the long products cannot overflow.
GramInverse cauchy_inverse(const std::vector<double>& q, const std::vector<double>& sigma);

// Pivoted LU inverse with one step of iterative refinement. Rejects condition
// estimates above 1e12 and residuals above 1e-8 * cond * eps-scale.
GramInverse invert_gram(const GramMatrix& A);

enum class CauchyVariant {
    plus_sigma,        // det[1, q_i, ..., q_i^{nu-1}, 1/(q_i + s_j)]
    alpha_minus_delta, // det[1, q_i, ..., q_i^{nu-1}, 1/(alpha q_i - s_j)]
};

// Closed form of the mixed monomial/Cauchy determinant, M = |q| >= N = |s|.
LogVal cauchy_det_generalized(const std::vector<double>& q, const std::vector<double>& s,
                              CauchyVariant variant, double alpha = 1.0);

// Closed-form partition normalisations of the three joint densities.
LogVal log_normalization(const WishartParams& p);
LogVal log_normalization(const ProductParams& p);
LogVal log_normalization(const CoupledParams& p);

// Signed log determinant of a general real matrix (LU in scaled space).
LogVal logdet(const Eigen::MatrixXd& A);

} // namespace rmtkit
