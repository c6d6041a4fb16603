#include "rmtkit/gram.hpp"
#include "rmtkit/errors.hpp"
#include "rmtkit/specfun.hpp"

#include <cmath>
#include <sstream>

namespace rmtkit {

namespace {

void check_index(int i, int M, int j, int N) {
    if (i < 0 || i >= M || j < 0 || j >= N)
        throw parameter_error("pairing_integral: index out of range");
}

LogVal log_vandermonde(const std::vector<double>& v) {
    LogVal out = LogVal::one();
    for (size_t j = 0; j < v.size(); ++j)
        for (size_t k = j + 1; k < v.size(); ++k) out = out * LogVal::from_double(v[k] - v[j]);
    return out;
}

void require_distinct(const std::vector<double>& v, const char* what) {
    for (size_t i = 0; i < v.size(); ++i)
        for (size_t j = i + 1; j < v.size(); ++j)
            if (v[i] == v[j]) {
                std::ostringstream os;
                os << what << " must be mutually distinct (index " << i << " == " << j << ")";
                throw parameter_error(os.str());
            }
}

} // namespace

double pairing_integral(const WishartParams& p, int i, int j) {
    check_index(i, p.M, j, p.N);
    return 1.0 / (p.q[static_cast<size_t>(i)] + p.sigma[static_cast<size_t>(j)]);
}

double pairing_integral(const ProductParams& p, int i, int j) {
    check_index(i, p.M, j, p.N);
    const int kappa = p.kappa(), l = j + 1;
    const double lg = specfun::log_gamma_int(kappa + l) + specfun::log_gamma_int(l);
    return std::exp(lg - std::log(2.0) - (kappa + l) * std::log(p.alpha) -
                    l * std::log(p.q[static_cast<size_t>(i)]));
}

double pairing_integral(const CoupledParams& p, int i, int j) {
    check_index(i, p.M, j, p.N);
    const int kappa = p.kappa();
    const double d = p.delta[static_cast<size_t>(j)];
    // pow handles the delta = 0, kappa = 0 corner (0^0 = 1); exp/log would NaN
    const double pre = std::pow(d, 0.5 * kappa) / (2.0 * std::pow(p.alpha, kappa));
    return pre / (p.alpha * p.q[static_cast<size_t>(i)] - d);
}

namespace {

template <class P>
GramMatrix assemble(const P& p, Kind kind, double mono_scale) {
    GramMatrix A;
    A.nu = p.nu();
    A.kind = kind;
    A.entries.resize(p.M, p.M);
    for (int i = 0; i < p.M; ++i) {
        double m = 1.0;
        for (int j = 0; j < A.nu; ++j) {
            A.entries(i, j) = m;
            m *= mono_scale * p.q[static_cast<size_t>(i)];
        }
        for (int j = 0; j < p.N; ++j) A.entries(i, A.nu + j) = pairing_integral(p, i, j);
    }
    return A;
}

} // namespace

GramMatrix build_gram(const WishartParams& p) {
    require_valid(p);
    return assemble(p, Kind::wishart, 1.0);
}
GramMatrix build_gram(const ProductParams& p) {
    require_valid(p);
    return assemble(p, Kind::product, 1.0);
}
GramMatrix build_gram(const CoupledParams& p) {
    require_valid(p);
    return assemble(p, Kind::coupled, p.alpha);
}

GramInverse cauchy_inverse(const std::vector<double>& q, const std::vector<double>& sigma) {
    const int N = static_cast<int>(q.size());
    if (static_cast<int>(sigma.size()) != N)
        throw parameter_error("cauchy_inverse: q and sigma must have equal length");
    require_distinct(q, "cauchy_inverse: q");
    require_distinct(sigma, "cauchy_inverse: sigma");
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            if (q[static_cast<size_t>(i)] + sigma[static_cast<size_t>(j)] == 0.0)
                throw parameter_error("cauchy_inverse: q_i + sigma_j vanishes");
    GramInverse out;
    out.entries.resize(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            // C_ij = prod_l (q_l + s_i)(q_j + s_l) /
            //        [(q_j + s_i) prod_{k != i}(s_i - s_k) prod_{l != j}(q_j - q_l)]
            LogVal v = LogVal::one() / LogVal::from_double(q[static_cast<size_t>(j)] +
                                                           sigma[static_cast<size_t>(i)]);
            for (int l = 0; l < N; ++l) {
                v = v * LogVal::from_double(q[static_cast<size_t>(l)] + sigma[static_cast<size_t>(i)]);
                v = v * LogVal::from_double(q[static_cast<size_t>(j)] + sigma[static_cast<size_t>(l)]);
            }
            for (int k = 0; k < N; ++k)
                if (k != i)
                    v = v / LogVal::from_double(sigma[static_cast<size_t>(i)] -
                                                sigma[static_cast<size_t>(k)]);
            for (int l = 0; l < N; ++l)
                if (l != j)
                    v = v / LogVal::from_double(q[static_cast<size_t>(j)] - q[static_cast<size_t>(l)]);
            out.entries(i, j) = v.to_double();
        }
    Eigen::MatrixXd A(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            A(i, j) = 1.0 / (q[static_cast<size_t>(i)] + sigma[static_cast<size_t>(j)]);
    out.condition_estimate =
        A.cwiseAbs().colwise().sum().maxCoeff() * out.entries.cwiseAbs().colwise().sum().maxCoeff();
    return out;
}

GramInverse invert_gram(const GramMatrix& A) {
    const auto& a = A.entries;
    if (a.rows() != a.cols() || a.rows() < 1) throw parameter_error("invert_gram: square matrix required");
    const int n = static_cast<int>(a.rows());
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    Eigen::MatrixXd X = lu.inverse();
    // one step of iterative refinement
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    X += X * (I - a * X);
    GramInverse out;
    out.entries = X;
    out.condition_estimate =
        a.cwiseAbs().colwise().sum().maxCoeff() * X.cwiseAbs().colwise().sum().maxCoeff();
    if (!std::isfinite(out.condition_estimate) || out.condition_estimate > 1e12) {
        std::ostringstream os;
        os << "invert_gram: condition estimate " << out.condition_estimate
           << " exceeds 1e12; use a quadrature kernel route instead";
        throw conditioning_error(os.str());
    }
    const double resid = (a * X - I).cwiseAbs().maxCoeff();
    if (resid > 1e-8) {
        std::ostringstream os;
        os << "invert_gram: inverse residual " << resid << " exceeds 1e-8 (condition "
           << out.condition_estimate << ")";
        throw conditioning_error(os.str());
    }
    return out;
}

LogVal cauchy_det_generalized(const std::vector<double>& q, const std::vector<double>& s,
                              CauchyVariant variant, double alpha) {
    const int M = static_cast<int>(q.size());
    const int N = static_cast<int>(s.size());
    if (N > M) throw parameter_error("cauchy_det_generalized: need |q| >= |s|");
    require_distinct(q, "cauchy_det_generalized: q");
    require_distinct(s, "cauchy_det_generalized: s");
    const long nu = M - N;
    LogVal out;
    if (variant == CauchyVariant::plus_sigma) {
        // (-1)^{N nu} Delta_M(q) Delta_N(s) / prod (q_i + s_j)
        out = pow_int(LogVal::from_double(-1.0), static_cast<long>(N) * nu);
        out = out * log_vandermonde(q) * log_vandermonde(s);
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < N; ++j) {
                const double den = q[static_cast<size_t>(i)] + s[static_cast<size_t>(j)];
                if (den == 0.0) throw parameter_error("cauchy_det_generalized: q_i + s_j vanishes");
                out = out / LogVal::from_double(den);
            }
    } else {
        // (-alpha)^{MN - N(N+1)/2} Delta_M(q) Delta_N(s) / prod (alpha q_i - s_j)
        out = pow_int(LogVal::from_double(-alpha),
                      static_cast<long>(M) * N - static_cast<long>(N) * (N + 1) / 2);
        out = out * log_vandermonde(q) * log_vandermonde(s);
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < N; ++j) {
                const double den = alpha * q[static_cast<size_t>(i)] - s[static_cast<size_t>(j)];
                if (den == 0.0)
                    throw parameter_error("cauchy_det_generalized: alpha q_i - s_j vanishes");
                out = out / LogVal::from_double(den);
            }
    }
    return out;
}

LogVal log_normalization(const WishartParams& p) {
    require_valid(p);
    require_distinct(p.q, "log_normalization: q");
    require_distinct(p.sigma, "log_normalization: sigma");
    LogVal z = LogVal::from_log(specfun::log_factorial(p.N), 1);
    z = z * pow_int(LogVal::from_double(-1.0), static_cast<long>(p.N) * p.nu());
    z = z * log_vandermonde(p.q) * log_vandermonde(p.sigma);
    for (int i = 0; i < p.M; ++i)
        for (int j = 0; j < p.N; ++j)
            z = z / LogVal::from_double(p.q[static_cast<size_t>(i)] + p.sigma[static_cast<size_t>(j)]);
    return z;
}

LogVal log_normalization(const ProductParams& p) {
    require_valid(p);
    require_distinct(p.q, "log_normalization: q");
    const int N = p.N, kappa = p.kappa();
    LogVal z = LogVal::from_log(2.0 * specfun::log_factorial(N), 1);
    z = z * pow_int(LogVal::from_double(-p.alpha),
                    static_cast<long>(N) * p.nu() + static_cast<long>(N) * (N - 1) / 2);
    z = z * LogVal::from_log(
                -(static_cast<double>(N) * kappa + static_cast<double>(N) * p.M) * std::log(p.alpha),
                1);
    double lg = 0.0;
    for (int l = 1; l <= N; ++l) lg += specfun::log_gamma_int(kappa + l) + specfun::log_gamma_int(l);
    z = z * LogVal::from_log(lg, 1) * log_vandermonde(p.q);
    for (int k = 0; k < p.M; ++k)
        z = z * LogVal::from_log(-static_cast<double>(N) * std::log(p.q[static_cast<size_t>(k)]), 1);
    return z;
}

LogVal log_normalization(const CoupledParams& p) {
    require_valid(p);
    require_distinct(p.q, "log_normalization: q");
    require_distinct(p.delta, "log_normalization: delta");
    const int N = p.N, kappa = p.kappa();
    LogVal z = LogVal::from_log(2.0 * specfun::log_factorial(N), 1);
    z = z * pow_int(LogVal::from_double(-p.alpha),
                    static_cast<long>(N) * p.nu() + static_cast<long>(N) * (N - 1) / 2);
    z = z * LogVal::from_log(-static_cast<double>(N) * kappa * std::log(p.alpha), 1);
    z = z * log_vandermonde(p.q) * log_vandermonde(p.delta);
    for (int j = 0; j < N; ++j) {
        const double d = p.delta[static_cast<size_t>(j)];
        if (d == 0.0 && kappa > 0) return LogVal::zero(); // delta^{kappa/2} factor
        if (d > 0.0) z = z * LogVal::from_log(0.5 * kappa * std::log(d), 1);
    }
    for (int i = 0; i < p.M; ++i)
        for (int j = 0; j < N; ++j)
            z = z / LogVal::from_double(p.alpha * p.q[static_cast<size_t>(i)] -
                                        p.delta[static_cast<size_t>(j)]);
    return z;
}

LogVal logdet(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) throw parameter_error("logdet: square matrix required");
    const int n = static_cast<int>(A.rows());
    if (n == 0) return LogVal::one();
    Eigen::MatrixXd S = A;
    double shift = 0.0;
    for (int j = 0; j < n; ++j) {
        const double cmax = S.col(j).cwiseAbs().maxCoeff();
        if (cmax == 0.0) return LogVal::zero();
        S.col(j) /= cmax;
        shift += std::log(cmax);
    }
    const double d = Eigen::PartialPivLU<Eigen::MatrixXd>(S).determinant();
    if (d == 0.0 || !std::isfinite(d)) return LogVal::zero();
    return LogVal::from_log(std::log(std::fabs(d)) + shift, d > 0 ? 1 : -1);
}

} // namespace rmtkit
