#include "rmtkit/ensembles.hpp"
#include "rmtkit/errors.hpp"
#include "rmtkit/parallel.hpp"
#include "rmtkit/specfun.hpp"

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace rmtkit {

namespace {

void check_dims(int N, int M, int L, std::vector<Violation>& out) {
    if (N < 1) out.push_back({"positivity", -1, -1, double(N), "N must be >= 1"});
    if (M < N) out.push_back({"positivity", -1, -1, double(M), "M must be >= N (nu >= 0)"});
    if (L < N) out.push_back({"positivity", -1, -1, double(L), "L must be >= N (kappa >= 0)"});
}

void check_q(const std::vector<double>& q, int M, std::vector<Violation>& out) {
    if (static_cast<int>(q.size()) != M)
        out.push_back({"positivity", -1, -1, double(q.size()), "q must have M entries"});
    for (int i = 0; i < static_cast<int>(q.size()); ++i)
        if (!(q[i] > 0.0)) out.push_back({"positivity", i, -1, q[i], "q_i must be > 0"});
}

std::string render(const std::vector<Violation>& v) {
    std::ostringstream os;
    os << "invalid parameters:";
    for (const auto& x : v) {
        os << "\n  [" << x.name << "]";
        if (x.i >= 0) os << " i=" << x.i;
        if (x.j >= 0) os << " j=" << x.j;
        os << " value=" << x.value << " : " << x.detail;
    }
    return os.str();
}

} // namespace

std::vector<Violation> validate(const CoupledParams& p) {
    std::vector<Violation> out;
    check_dims(p.N, p.M, p.L, out);
    check_q(p.q, p.M, out);
    if (static_cast<int>(p.delta.size()) != p.N)
        out.push_back({"positivity", -1, -1, double(p.delta.size()), "delta must have N entries"});
    if (!(p.alpha > 0.0)) out.push_back({"positivity", -1, -1, p.alpha, "alpha must be > 0"});
    for (int j = 0; j < static_cast<int>(p.delta.size()); ++j)
        if (!(p.delta[j] >= 0.0))
            out.push_back({"positivity", -1, j, p.delta[j], "delta_j must be >= 0"});
    if (out.empty()) {
        for (int i = 0; i < p.M; ++i)
            for (int j = 0; j < p.N; ++j) {
                const double v = p.alpha * p.q[i] - p.delta[j];
                if (!(v > 0.0))
                    out.push_back({"aqd", i, j, v, "requires alpha*q_i - delta_j > 0"});
            }
    }
    return out;
}

std::vector<Violation> validate(const ProductParams& p) {
    std::vector<Violation> out;
    check_dims(p.N, p.M, p.L, out);
    check_q(p.q, p.M, out);
    if (!(p.alpha > 0.0)) out.push_back({"positivity", -1, -1, p.alpha, "alpha must be > 0"});
    return out;
}

std::vector<Violation> validate(const WishartParams& p) {
    std::vector<Violation> out;
    check_dims(p.N, p.M, p.M + (p.N - p.N), out); // L plays no role; reuse M
    check_q(p.q, p.M, out);
    if (static_cast<int>(p.sigma.size()) != p.N)
        out.push_back({"positivity", -1, -1, double(p.sigma.size()), "sigma must have N entries"});
    if (out.empty()) {
        for (int i = 0; i < p.M; ++i)
            for (int j = 0; j < p.N; ++j) {
                const double v = p.q[i] + p.sigma[j];
                if (!(v > 0.0))
                    out.push_back({"constraint3", i, j, v, "requires q_i + sigma_j > 0"});
            }
    }
    return out;
}

void require_valid(const CoupledParams& p) {
    const auto v = validate(p);
    if (!v.empty()) throw parameter_error(render(v));
}
void require_valid(const ProductParams& p) {
    const auto v = validate(p);
    if (!v.empty()) throw parameter_error(render(v));
}
void require_valid(const WishartParams& p) {
    const auto v = validate(p);
    if (!v.empty()) throw parameter_error(render(v));
}

// ---------------------------------------------------------------------------
// sampling
// ---------------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Independent engine per (seed, row): sampling is reproducible bit-for-bit
// for any worker count.
std::mt19937_64 row_engine(std::uint64_t seed, int row) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(0x517CC1B727220A95ull + row)));
}

using Mat = Eigen::MatrixXcd;

std::vector<double> ssv_ascending(const Mat& Y) {
    Eigen::JacobiSVD<Mat> svd(Y);
    const auto& s = svd.singularValues();
    std::vector<double> out(static_cast<size_t>(s.size()));
    for (int i = 0; i < s.size(); ++i) out[static_cast<size_t>(i)] = s[i] * s[i];
    std::sort(out.begin(), out.end());
    return out;
}

// X is M x N with independent CN(0, 1 / (q_m + sigma_n)) entries.
Mat draw_X(std::mt19937_64& eng, const std::vector<double>& q, const std::vector<double>& sigma) {
    const int M = static_cast<int>(q.size());
    const int N = static_cast<int>(sigma.size());
    std::normal_distribution<double> gauss(0.0, 1.0);
    Mat X(M, N);
    for (int m = 0; m < M; ++m)
        for (int n = 0; n < N; ++n) {
            const double sd = std::sqrt(0.5 / (q[m] + sigma[n]));
            X(m, n) = std::complex<double>(sd * gauss(eng), sd * gauss(eng));
        }
    return X;
}

} // namespace

std::vector<std::vector<double>> sample_coupled(const CoupledParams& p, std::uint64_t seed,
                                                int count, int threads) {
    require_valid(p);
    std::vector<double> sigma(p.delta.size());
    for (size_t j = 0; j < sigma.size(); ++j) sigma[j] = -p.delta[j] / p.alpha;
    std::vector<std::vector<double>> rows(static_cast<size_t>(count));
    parallel_for(count, threads, [&](int r) {
        auto eng = row_engine(seed, r);
        std::normal_distribution<double> gauss(0.0, 1.0);
        // X | marginal after integrating out G
        const Mat X = draw_X(eng, p.q, sigma);
        // G | X is Gaussian: mean (X Omega)^dagger / alpha, entry variance 1/alpha,
        // with Omega = [diag(sqrt delta), 0] of size N x L in the diagonal frame
        Mat XOmega = Mat::Zero(p.M, p.L);
        for (int n = 0; n < p.N; ++n)
            XOmega.col(n) = X.col(n) * std::sqrt(p.delta[static_cast<size_t>(n)]);
        Mat G(p.L, p.M);
        const double sd = std::sqrt(0.5 / p.alpha);
        for (int a = 0; a < p.L; ++a)
            for (int m = 0; m < p.M; ++m)
                G(a, m) = std::conj(XOmega(m, a)) / p.alpha +
                          std::complex<double>(sd * gauss(eng), sd * gauss(eng));
        rows[static_cast<size_t>(r)] = ssv_ascending(G * X);
    });
    return rows;
}

std::vector<std::vector<double>> sample_product(const ProductParams& p, std::uint64_t seed,
                                                int count, int threads) {
    require_valid(p);
    const std::vector<double> sigma(static_cast<size_t>(p.N), 0.0);
    std::vector<std::vector<double>> rows(static_cast<size_t>(count));
    parallel_for(count, threads, [&](int r) {
        auto eng = row_engine(seed, r);
        std::normal_distribution<double> gauss(0.0, 1.0);
        const Mat X = draw_X(eng, p.q, sigma);
        Mat G(p.L, p.M);
        const double sd = std::sqrt(0.5 / p.alpha);
        for (int a = 0; a < p.L; ++a)
            for (int m = 0; m < p.M; ++m)
                G(a, m) = std::complex<double>(sd * gauss(eng), sd * gauss(eng));
        rows[static_cast<size_t>(r)] = ssv_ascending(G * X);
    });
    return rows;
}

std::vector<std::vector<double>> sample_wishart(const WishartParams& p, std::uint64_t seed,
                                                int count, int threads) {
    require_valid(p);
    std::vector<std::vector<double>> rows(static_cast<size_t>(count));
    parallel_for(count, threads, [&](int r) {
        auto eng = row_engine(seed, r);
        rows[static_cast<size_t>(r)] = ssv_ascending(draw_X(eng, p.q, p.sigma));
    });
    return rows;
}

std::vector<double> squared_singular_values(const std::vector<double>& reim, int rows, int cols) {
    if (static_cast<int>(reim.size()) != 2 * rows * cols)
        throw parameter_error("squared_singular_values: buffer size mismatch");
    Mat A(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const size_t k = 2 * (static_cast<size_t>(r) * cols + c);
            A(r, c) = std::complex<double>(reim[k], reim[k + 1]);
        }
    return ssv_ascending(A);
}

// ---------------------------------------------------------------------------
// joint densities
// ---------------------------------------------------------------------------

namespace {

// det of a matrix given in signed log space, with per-column magnitude
// extraction so the LU runs on O(1) entries.
LogVal logdet_signed(const std::vector<std::vector<LogVal>>& A) {
    const int n = static_cast<int>(A.size());
    Eigen::MatrixXd S(n, n);
    double shift = 0.0;
    for (int j = 0; j < n; ++j) {
        double cmax = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) cmax = std::max(cmax, A[i][j].log_abs);
        if (!std::isfinite(cmax)) return LogVal::zero(); // all-zero column
        shift += cmax;
        for (int i = 0; i < n; ++i)
            S(i, j) = A[i][j].sign == 0 ? 0.0 : A[i][j].sign * std::exp(A[i][j].log_abs - cmax);
    }
    const double d = Eigen::PartialPivLU<Eigen::MatrixXd>(S).determinant();
    if (d == 0.0 || !std::isfinite(d)) return LogVal::zero();
    return LogVal::from_log(std::log(std::fabs(d)) + shift, d > 0 ? 1 : -1);
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
                os << "log_jpdf: " << what << " must be mutually distinct (index " << i << " == "
                   << j << ")";
                throw parameter_error(os.str());
            }
}

// log of psi~_i(y) = y^kappa * g_reg(kappa, delta_i y): entire in delta, safe at 0.
LogVal log_psi_reg(int kappa, double delta, double y) {
    const double z = delta * y;
    if (z <= 30.0) {
        const double g = specfun::g_reg(kappa, z).real();
        return LogVal::from_log(kappa * std::log(y) + std::log(g), 1);
    }
    // g_reg = z^{-kappa/2} I_kappa(2 sqrt z), I via its scaled form
    const double w = 2.0 * std::sqrt(z);
    const double logI = w + std::log(specfun::bessel_i_scaled(kappa, w).real());
    return LogVal::from_log(kappa * std::log(y) - 0.5 * kappa * std::log(z) + logI, 1);
}

// log of phi_i(y) = (q_i/(alpha y))^{kappa/2} K_kappa(2 sqrt(alpha q_i y)).
LogVal log_phi(int kappa, double alpha, double q, double y) {
    const double w = 2.0 * std::sqrt(alpha * q * y);
    const double logK = -w + std::log(specfun::bessel_k_scaled(kappa, w).real());
    return LogVal::from_log(0.5 * kappa * (std::log(q) - std::log(alpha) - std::log(y)) + logK, 1);
}

// M x M determinant with nu monomial columns then N function columns f(i, j).
template <class F>
LogVal logdet_mixed(int M, int nu, const std::vector<double>& q, F f) {
    std::vector<std::vector<LogVal>> A(static_cast<size_t>(M),
                                       std::vector<LogVal>(static_cast<size_t>(M)));
    for (int i = 0; i < M; ++i) {
        for (int j = 0; j < nu; ++j) A[i][j] = pow_int(LogVal::from_double(q[i]), j);
        for (int j = 0; j < M - nu; ++j) A[i][nu + j] = f(i, j);
    }
    return logdet_signed(A);
}

void require_positive_points(const std::vector<double>& v, int n, const char* what) {
    if (static_cast<int>(v.size()) != n) {
        std::ostringstream os;
        os << "log_jpdf: expected " << n << " " << what << " points, got " << v.size();
        throw parameter_error(os.str());
    }
    for (double t : v)
        if (!(t > 0.0)) throw parameter_error("log_jpdf: points must be > 0");
}

double finish(LogVal num, LogVal den, const char* what) {
    const LogVal r = num / den;
    if (r.sign <= 0) {
        std::ostringstream os;
        os << what << ": density evaluated non-positive (sign " << r.sign
           << "); parameters too degenerate for the closed form";
        throw convergence_error(os.str());
    }
    return r.log_abs;
}

// Closed-form normalisation of the coupled model with the delta^{kappa/2}
// factors cancelled against the regularised psi determinant:
//   Z~ = (N!)^2 (-alpha)^{N nu + N(N-1)/2} alpha^{-N kappa} Delta_M(q)
//        Delta_N(delta) / prod_{i,j} (alpha q_i - delta_j)
LogVal log_Z_reg_coupled(const CoupledParams& p) {
    const int N = p.N, M = p.M, kappa = p.kappa(), nu = p.nu();
    LogVal z = LogVal::from_log(2.0 * specfun::log_factorial(N), 1);
    z = z * pow_int(LogVal::from_double(-p.alpha), static_cast<long>(N) * nu + static_cast<long>(N) * (N - 1) / 2);
    z = z * LogVal::from_log(-static_cast<double>(N) * kappa * std::log(p.alpha), 1);
    z = z * log_vandermonde(p.q) * log_vandermonde(p.delta);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < N; ++j) z = z / LogVal::from_double(p.alpha * p.q[i] - p.delta[j]);
    return z;
}

} // namespace

double log_jpdf_coupled_y(const CoupledParams& p, const std::vector<double>& y) {
    require_valid(p);
    require_distinct(p.q, "q");
    require_distinct(p.delta, "delta");
    require_positive_points(y, p.N, "y");
    const int kappa = p.kappa();
    std::vector<std::vector<LogVal>> psi(static_cast<size_t>(p.N),
                                         std::vector<LogVal>(static_cast<size_t>(p.N)));
    for (int i = 0; i < p.N; ++i)
        for (int j = 0; j < p.N; ++j) psi[i][j] = log_psi_reg(kappa, p.delta[i], y[j]);
    const LogVal d1 = logdet_signed(psi);
    const LogVal d2 = logdet_mixed(p.M, p.nu(), p.q,
                                   [&](int i, int j) { return log_phi(kappa, p.alpha, p.q[i], y[j]); });
    LogVal num = LogVal::from_log(p.N * std::log(2.0) + specfun::log_factorial(p.N), 1) * d1 * d2;
    return finish(num, log_Z_reg_coupled(p), "log_jpdf_coupled_y");
}

double log_jpdf_coupled(const CoupledParams& p, const std::vector<double>& x,
                        const std::vector<double>& y) {
    require_valid(p);
    require_distinct(p.q, "q");
    require_distinct(p.delta, "delta");
    require_positive_points(x, p.N, "x");
    require_positive_points(y, p.N, "y");
    const int kappa = p.kappa();
    std::vector<std::vector<LogVal>> psi(static_cast<size_t>(p.N),
                                         std::vector<LogVal>(static_cast<size_t>(p.N)));
    std::vector<std::vector<LogVal>> mid(static_cast<size_t>(p.N),
                                         std::vector<LogVal>(static_cast<size_t>(p.N)));
    for (int i = 0; i < p.N; ++i)
        for (int j = 0; j < p.N; ++j) {
            psi[i][j] = log_psi_reg(kappa, p.delta[i], y[j]);
            // rows over x_j, columns over y_l
            mid[i][j] = LogVal::from_log(-(kappa + 1) * std::log(x[i]) - p.alpha * y[j] / x[i], 1);
        }
    const LogVal d1 = logdet_signed(psi);
    const LogVal d2 = logdet_signed(mid);
    const LogVal d3 = logdet_mixed(p.M, p.nu(), p.q, [&](int i, int j) {
        return LogVal::from_log(-p.q[i] * x[j], 1);
    });
    return finish(d1 * d2 * d3, log_Z_reg_coupled(p), "log_jpdf_coupled");
}

double log_jpdf_product(const ProductParams& p, const std::vector<double>& y) {
    require_valid(p);
    require_distinct(p.q, "q");
    require_positive_points(y, p.N, "y");
    const int kappa = p.kappa(), N = p.N;
    std::vector<std::vector<LogVal>> mono(static_cast<size_t>(N),
                                          std::vector<LogVal>(static_cast<size_t>(N)));
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            mono[i][j] = LogVal::from_log((kappa + i) * std::log(y[j]), 1);
    const LogVal d1 = logdet_signed(mono);
    const LogVal d2 = logdet_mixed(p.M, p.nu(), p.q,
                                   [&](int i, int j) { return log_phi(kappa, p.alpha, p.q[i], y[j]); });
    // Z2 = (N!)^2 (-alpha)^{N nu + N(N-1)/2} alpha^{-N kappa - N M}
    //      prod_l Gamma(kappa+l) Gamma(l) Delta_M(q) prod_k q_k^{-N}
    LogVal z = LogVal::from_log(2.0 * specfun::log_factorial(N), 1);
    z = z * pow_int(LogVal::from_double(-p.alpha),
                    static_cast<long>(N) * p.nu() + static_cast<long>(N) * (N - 1) / 2);
    z = z * LogVal::from_log(-(static_cast<double>(N) * kappa + static_cast<double>(N) * p.M) *
                                 std::log(p.alpha),
                             1);
    double lg = 0.0;
    for (int l = 1; l <= N; ++l) lg += specfun::log_gamma_int(kappa + l) + specfun::log_gamma_int(l);
    z = z * LogVal::from_log(lg, 1) * log_vandermonde(p.q);
    for (int k = 0; k < p.M; ++k) z = z * LogVal::from_log(-static_cast<double>(N) * std::log(p.q[k]), 1);
    const LogVal num = LogVal::from_log(N * std::log(2.0) + specfun::log_factorial(N), 1) * d1 * d2;
    return finish(num, z, "log_jpdf_product");
}

double log_jpdf_wishart(const WishartParams& p, const std::vector<double>& x) {
    require_valid(p);
    require_distinct(p.q, "q");
    require_distinct(p.sigma, "sigma");
    require_positive_points(x, p.N, "x");
    const int N = p.N;
    std::vector<std::vector<LogVal>> e(static_cast<size_t>(N),
                                       std::vector<LogVal>(static_cast<size_t>(N)));
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) e[i][j] = LogVal::from_log(-p.sigma[i] * x[j], 1);
    const LogVal d1 = logdet_signed(e);
    const LogVal d2 = logdet_mixed(p.M, p.nu(), p.q, [&](int i, int j) {
        return LogVal::from_log(-p.q[i] * x[j], 1);
    });
    // Z1 = N! (-1)^{N nu} Delta_M(q) Delta_N(sigma) / prod_{i,j}(q_i + sigma_j)
    LogVal z = LogVal::from_log(specfun::log_factorial(N), 1);
    z = z * pow_int(LogVal::from_double(-1.0), static_cast<long>(N) * p.nu());
    z = z * log_vandermonde(p.q) * log_vandermonde(p.sigma);
    for (int i = 0; i < p.M; ++i)
        for (int j = 0; j < N; ++j) z = z / LogVal::from_double(p.q[i] + p.sigma[j]);
    return finish(d1 * d2, z, "log_jpdf_wishart");
}

ChiSquare chi_square_binned(const std::vector<double>& values, const std::vector<double>& grid,
                            const std::vector<double>& cdf, int bins) {
    if (grid.size() != cdf.size() || grid.size() < 2)
        throw parameter_error("chi_square_binned: grid/cdf mismatch");
    if (bins < 2) throw parameter_error("chi_square_binned: need at least 2 bins");
    const double total_mass = cdf.back();
    ChiSquare out;
    out.dof = bins - 1;
    out.edges.resize(static_cast<size_t>(bins) + 1);
    out.edges.front() = 0.0;
    out.edges.back() = std::numeric_limits<double>::infinity();
    // equal-probability edges by inverting the tabulated CDF
    for (int b = 1; b < bins; ++b) {
        const double target = total_mass * b / bins;
        auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
        if (it == cdf.begin()) {
            out.edges[static_cast<size_t>(b)] = grid.front();
            continue;
        }
        if (it == cdf.end()) {
            out.edges[static_cast<size_t>(b)] = grid.back();
            continue;
        }
        const size_t k = static_cast<size_t>(it - cdf.begin());
        const double c0 = cdf[k - 1], c1 = cdf[k];
        const double w = (c1 > c0) ? (target - c0) / (c1 - c0) : 0.5;
        out.edges[static_cast<size_t>(b)] = grid[k - 1] + w * (grid[k] - grid[k - 1]);
    }
    out.observed.assign(static_cast<size_t>(bins), 0.0);
    for (double v : values) {
        int b = static_cast<int>(std::upper_bound(out.edges.begin() + 1, out.edges.end(), v) -
                                 (out.edges.begin() + 1));
        b = std::clamp(b, 0, bins - 1);
        out.observed[static_cast<size_t>(b)] += 1.0;
    }
    const double expected = static_cast<double>(values.size()) / bins;
    out.expected.assign(static_cast<size_t>(bins), expected);
    for (int b = 0; b < bins; ++b) {
        const double d = out.observed[static_cast<size_t>(b)] - expected;
        out.statistic += d * d / expected;
    }
    out.p_value = boost::math::gamma_q(0.5 * out.dof, 0.5 * out.statistic);
    return out;
}

} // namespace rmtkit
