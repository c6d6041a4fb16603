#include "rmtkit/kernels.hpp"
#include "rmtkit/errors.hpp"
#include "rmtkit/logspace.hpp"
#include "rmtkit/specfun.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <sstream>

namespace rmtkit {

namespace {

using cplx = std::complex<double>;
namespace sf = specfun;

void require_gaps(const std::vector<double>& v, const char* what) {
    double scale = 1.0;
    for (double t : v) scale = std::max(scale, std::fabs(t));
    for (size_t i = 0; i < v.size(); ++i)
        for (size_t j = i + 1; j < v.size(); ++j)
            if (std::fabs(v[i] - v[j]) < 1e-8 * scale) {
                std::ostringstream os;
                os << what << ": parameters " << i << " and " << j
                   << " are too close for the closed-form path; use contour-quadrature";
                throw parameter_error(os.str());
            }
}

std::vector<double> scaled_q(const std::vector<double>& q, double alpha) {
    std::vector<double> out(q.size());
    for (size_t i = 0; i < q.size(); ++i) out[i] = alpha * q[i];
    return out;
}

double gauge_pow(double x, double y, int kappa) { return std::pow(x / y, kappa); }

// ---------------------------------------------------------------------------
// gram-sum evaluators (delta^{kappa/2} and alpha^{-kappa} prefactors cancel
// against the pairing-integral column scalings, leaving regularised entries
// that stay finite when a delta vanishes)
// ---------------------------------------------------------------------------

Eigen::MatrixXd regularized_inverse_coupled(const CoupledParams& p) {
    GramMatrix A;
    A.nu = p.nu();
    A.kind = Kind::coupled;
    A.entries.resize(p.M, p.M);
    for (int i = 0; i < p.M; ++i) {
        double m = 1.0;
        for (int j = 0; j < A.nu; ++j) {
            A.entries(i, j) = m;
            m *= p.alpha * p.q[static_cast<size_t>(i)];
        }
        for (int l = 0; l < p.N; ++l)
            A.entries(i, A.nu + l) =
                1.0 / (p.alpha * p.q[static_cast<size_t>(i)] - p.delta[static_cast<size_t>(l)]);
    }
    return invert_gram(A).entries;
}

Eigen::MatrixXd regularized_inverse_product(const ProductParams& p) {
    GramMatrix A;
    A.nu = p.nu();
    A.kind = Kind::product;
    A.entries.resize(p.M, p.M);
    for (int i = 0; i < p.M; ++i) {
        double m = 1.0;
        for (int j = 0; j < A.nu; ++j) {
            A.entries(i, j) = m;
            m *= p.alpha * p.q[static_cast<size_t>(i)];
        }
        for (int l = 0; l < p.N; ++l)
            A.entries(i, A.nu + l) = std::pow(p.q[static_cast<size_t>(i)], -(l + 1));
    }
    return invert_gram(A).entries;
}

using Eval = std::function<KernelValue(double, double)>;

Eval make_gram_eval(const CoupledParams& p) {
    require_valid(p);
    require_gaps(p.delta, "kernel gram-sum: delta");
    require_gaps(p.q, "kernel gram-sum: q");
    auto C = std::make_shared<Eigen::MatrixXd>(regularized_inverse_coupled(p));
    const int kappa = p.kappa(), nu = p.nu();
    return [p, C, kappa, nu](double x, double y) {
        double sum = 0.0, abs_sum = 0.0;
        for (int l = 0; l < p.N; ++l) {
            const double g = sf::g_reg(kappa, p.delta[static_cast<size_t>(l)] * x).real();
            for (int j = 0; j < p.M; ++j) {
                const double h = sf::h_reg(kappa, p.alpha * p.q[static_cast<size_t>(j)] * y).real();
                const double t = g * (*C)(nu + l, j) * h;
                sum += t;
                abs_sum += std::fabs(t);
            }
        }
        const double v = 2.0 * gauge_pow(x, y, kappa) * sum;
        return KernelValue{v, 2.0 * gauge_pow(x, y, kappa) * abs_sum * 1e-14};
    };
}

Eval make_gram_eval(const ProductParams& p) {
    require_valid(p);
    require_gaps(p.q, "kernel gram-sum: q");
    auto C = std::make_shared<Eigen::MatrixXd>(regularized_inverse_product(p));
    const int kappa = p.kappa(), nu = p.nu();
    return [p, C, kappa, nu](double x, double y) {
        double sum = 0.0, abs_sum = 0.0;
        for (int l = 1; l <= p.N; ++l) {
            // x^{kappa+l-1} alpha^l / (Gamma(kappa+l) Gamma(l))
            const double w = std::exp((kappa + l - 1) * std::log(x) + l * std::log(p.alpha) -
                                      sf::log_gamma_int(kappa + l) - sf::log_gamma_int(l));
            for (int j = 0; j < p.M; ++j) {
                const double h = sf::h_reg(kappa, p.alpha * p.q[static_cast<size_t>(j)] * y).real();
                const double t = w * (*C)(nu + l - 1, j) * h;
                sum += t;
                abs_sum += std::fabs(t);
            }
        }
        const double pre = 2.0 * std::pow(y, -kappa);
        return KernelValue{pre * sum, pre * abs_sum * 1e-14};
    };
}

Eval make_gram_eval(const WishartParams& p) {
    require_valid(p);
    require_gaps(p.sigma, "kernel gram-sum: sigma");
    require_gaps(p.q, "kernel gram-sum: q");
    GramMatrix A = build_gram(p);
    auto C = std::make_shared<Eigen::MatrixXd>(invert_gram(A).entries);
    const int nu = p.nu();
    return [p, C, nu](double x, double y) {
        double sum = 0.0, abs_sum = 0.0;
        for (int l = 0; l < p.N; ++l) {
            const double psi = std::exp(-p.sigma[static_cast<size_t>(l)] * x);
            for (int j = 0; j < p.M; ++j) {
                const double t = psi * (*C)(nu + l, j) * std::exp(-p.q[static_cast<size_t>(j)] * y);
                sum += t;
                abs_sum += std::fabs(t);
            }
        }
        return KernelValue{sum, abs_sum * 1e-14};
    };
}

// ---------------------------------------------------------------------------
// contour-quadrature evaluators (nested mode: the zeta circle around the
// q-side poles sits inside a wide eta circle around every pole; the extra
// eta = zeta residue integrates to zero because g_reg h_reg is analytic
// inside the inner circle once the origin is excluded)
// ---------------------------------------------------------------------------

ContourPair make_nested(const std::vector<double>& outer_poles,
                        const std::vector<double>& inner_poles, bool exclude_origin,
                        const ContourOptions& opt) {
    MarginPolicy inner_policy;
    inner_policy.gap_fraction = opt.inner_margin_frac;
    std::vector<double> excl;
    if (exclude_origin) excl.push_back(0.0);
    Contour inner = make_enclosing_contour(inner_poles, excl, inner_policy);
    inner.nodes = opt.start_nodes;
    if (exclude_origin && inner.center - inner.radius <= 0.0)
        throw geometry_error("nested contours: inner circle would cross the origin");

    std::vector<double> all = outer_poles;
    all.push_back(inner.center - inner.radius);
    all.push_back(inner.center + inner.radius);
    double lo = all.front(), hi = all.front();
    for (double t : all) {
        lo = std::min(lo, t);
        hi = std::max(hi, t);
    }
    MarginPolicy outer_policy;
    outer_policy.base = std::max(0.4, opt.outer_inflate_frac * (hi - lo));
    Contour outer = make_enclosing_contour(all, {}, outer_policy);
    outer.nodes = opt.start_nodes;
    if (std::fabs(outer.center - inner.center) + inner.radius >= outer.radius)
        throw geometry_error("nested contours: inner circle not strictly inside outer");
    return ContourPair{inner, outer, PairKind::nested};
}

KernelValue finish_contour(const QuadratureResult& r) {
    return KernelValue{r.value.real(), std::max(r.est_error, std::fabs(r.value.imag()))};
}

} // namespace

KernelValue kernel_contour_S(const CoupledParams& p, double x, double y, double tol,
                             const ContourOptions& opt) {
    require_valid(p);
    if (!(x > 0.0) || !(y > 0.0)) throw parameter_error("kernel: x, y must be > 0");
    const auto aq = scaled_q(p.q, p.alpha);
    const ContourPair pair = make_nested(p.delta, aq, true, opt);
    const int kappa = p.kappa();
    auto f = [&](cplx zeta, cplx eta) {
        cplx ratio = 1.0;
        for (double d : p.delta) ratio *= (zeta - d) / (eta - d);
        for (double a : aq) ratio *= (eta - a) / (zeta - a);
        return sf::g_reg(kappa, eta * x) * sf::h_reg(kappa, zeta * y) / (eta - zeta) * ratio;
    };
    QuadratureResult r = integrate_double_contour(f, pair, tol, opt.max_nodes);
    r.value *= 2.0;
    r.est_error *= 2.0;
    return finish_contour(r);
}

KernelValue kernel_contour_S(const ProductParams& p, double x, double y, double tol,
                             const ContourOptions& opt) {
    require_valid(p);
    if (!(x > 0.0) || !(y > 0.0)) throw parameter_error("kernel: x, y must be > 0");
    const auto aq = scaled_q(p.q, p.alpha);
    const ContourPair pair = make_nested({0.0}, aq, true, opt);
    const int kappa = p.kappa();
    auto f = [&](cplx zeta, cplx eta) {
        cplx zn = 1.0, en = 1.0;
        for (int l = 0; l < p.N; ++l) {
            zn *= zeta;
            en *= eta;
        }
        cplx ratio = zn / en;
        for (double a : aq) ratio *= (eta - a) / (zeta - a);
        return sf::g_reg(kappa, eta * x) * sf::h_reg(kappa, zeta * y) / (eta - zeta) * ratio;
    };
    QuadratureResult r = integrate_double_contour(f, pair, tol, opt.max_nodes);
    r.value *= 2.0;
    r.est_error *= 2.0;
    return finish_contour(r);
}

KernelValue kernel_contour_wishart(const WishartParams& p, double x, double y, double tol,
                                   const ContourOptions& opt) {
    require_valid(p);
    if (!(x > 0.0) || !(y > 0.0)) throw parameter_error("kernel: x, y must be > 0");
    std::vector<double> msig(p.sigma.size());
    for (size_t i = 0; i < p.sigma.size(); ++i) msig[i] = -p.sigma[i];
    const ContourPair pair = make_nested(msig, p.q, false, opt);
    auto f = [&](cplx zeta, cplx eta) {
        cplx ratio = 1.0;
        for (double s : p.sigma) ratio *= (zeta + s) / (eta + s);
        for (double q : p.q) ratio *= (eta - q) / (zeta - q);
        return std::exp(x * eta - y * zeta) / (eta - zeta) * ratio;
    };
    return finish_contour(integrate_double_contour(f, pair, tol, opt.max_nodes));
}

namespace {

Eval make_contour_eval(const FiniteKernel& k) {
    const double tol = k.tol;
    if (const auto* c = std::get_if<CoupledParams>(&k.params)) {
        const CoupledParams p = *c;
        const int kappa = p.kappa();
        return [p, tol, kappa](double x, double y) {
            KernelValue v = kernel_contour_S(p, x, y, tol);
            const double g = gauge_pow(x, y, kappa);
            return KernelValue{g * v.value, g * v.est_error};
        };
    }
    if (const auto* c = std::get_if<ProductParams>(&k.params)) {
        const ProductParams p = *c;
        const int kappa = p.kappa();
        return [p, tol, kappa](double x, double y) {
            KernelValue v = kernel_contour_S(p, x, y, tol);
            const double g = gauge_pow(x, y, kappa);
            return KernelValue{g * v.value, g * v.est_error};
        };
    }
    const WishartParams p = std::get<WishartParams>(k.params);
    return [p, tol](double x, double y) { return kernel_contour_wishart(p, x, y, tol); };
}

// closed-form Cauchy-inverse residue sums, nu = 0 only, fully in log space
Eval make_residue_eval(const FiniteKernel& k) {
    if (const auto* w = std::get_if<WishartParams>(&k.params)) {
        const WishartParams p = *w;
        require_valid(p);
        if (p.nu() != 0)
            throw parameter_error("residue-sum requires nu = 0 for the wishart kind");
        require_gaps(p.sigma, "kernel residue-sum: sigma");
        require_gaps(p.q, "kernel residue-sum: q");
        return [p](double x, double y) {
            const int N = p.N;
            LogVal sum = LogVal::zero();
            for (int l = 0; l < N; ++l)
                for (int j = 0; j < N; ++j) {
                    LogVal t = LogVal::from_log(-p.sigma[static_cast<size_t>(l)] * x -
                                                    p.q[static_cast<size_t>(j)] * y,
                                                1);
                    t = t / LogVal::from_double(p.q[static_cast<size_t>(j)] +
                                                p.sigma[static_cast<size_t>(l)]);
                    for (int m = 0; m < N; ++m) {
                        t = t * LogVal::from_double(p.q[static_cast<size_t>(m)] +
                                                    p.sigma[static_cast<size_t>(l)]);
                        t = t * LogVal::from_double(p.q[static_cast<size_t>(j)] +
                                                    p.sigma[static_cast<size_t>(m)]);
                    }
                    for (int m = 0; m < N; ++m) {
                        if (m != l)
                            t = t / LogVal::from_double(p.sigma[static_cast<size_t>(l)] -
                                                        p.sigma[static_cast<size_t>(m)]);
                        if (m != j)
                            t = t / LogVal::from_double(p.q[static_cast<size_t>(j)] -
                                                        p.q[static_cast<size_t>(m)]);
                    }
                    sum = sum + t;
                }
            const double v = sum.to_double();
            return KernelValue{v, std::fabs(v) * 1e-12};
        };
    }
    const auto* c = std::get_if<CoupledParams>(&k.params);
    if (!c) throw parameter_error("residue-sum unavailable for the product kind");
    const CoupledParams p = *c;
    require_valid(p);
    if (p.nu() != 0) throw parameter_error("residue-sum requires nu = 0 for the coupled kind");
    require_gaps(p.delta, "kernel residue-sum: delta");
    require_gaps(p.q, "kernel residue-sum: q");
    return [p](double x, double y) {
        const int N = p.N, kappa = p.kappa();
        const auto aq = scaled_q(p.q, p.alpha);
        LogVal sum = LogVal::zero();
        for (int l = 0; l < N; ++l)
            for (int j = 0; j < N; ++j) {
                const double g = sf::g_reg(kappa, p.delta[static_cast<size_t>(l)] * x).real();
                const double h = sf::h_reg(kappa, aq[static_cast<size_t>(j)] * y).real();
                LogVal t = LogVal::from_double(g) * LogVal::from_double(h);
                t = t / LogVal::from_double(aq[static_cast<size_t>(j)] -
                                            p.delta[static_cast<size_t>(l)]);
                for (int m = 0; m < N; ++m) {
                    t = t * LogVal::from_double(aq[static_cast<size_t>(m)] -
                                                p.delta[static_cast<size_t>(l)]);
                    t = t * LogVal::from_double(aq[static_cast<size_t>(j)] -
                                                p.delta[static_cast<size_t>(m)]);
                }
                for (int m = 0; m < N; ++m) {
                    if (m != l)
                        t = t / LogVal::from_double(p.delta[static_cast<size_t>(m)] -
                                                    p.delta[static_cast<size_t>(l)]);
                    if (m != j)
                        t = t / LogVal::from_double(aq[static_cast<size_t>(j)] -
                                                    aq[static_cast<size_t>(m)]);
                }
                sum = sum + t;
            }
        const double v = 2.0 * gauge_pow(x, y, kappa) * sum.to_double();
        return KernelValue{v, std::fabs(v) * 1e-12};
    };
}

Eval make_evaluator(const FiniteKernel& k) {
    switch (k.method) {
    case KernelMethod::gram_sum:
        if (const auto* c = std::get_if<CoupledParams>(&k.params)) return make_gram_eval(*c);
        if (const auto* pr = std::get_if<ProductParams>(&k.params)) return make_gram_eval(*pr);
        return make_gram_eval(std::get<WishartParams>(k.params));
    case KernelMethod::contour_quadrature:
        return make_contour_eval(k);
    case KernelMethod::residue_sum:
        return make_residue_eval(k);
    }
    throw parameter_error("kernel_eval: unknown method");
}

} // namespace

KernelValue kernel_eval(const FiniteKernel& k, double x, double y) {
    if (!(x > 0.0) || !(y > 0.0)) throw parameter_error("kernel_eval: x, y must be > 0");
    return make_evaluator(k)(x, y);
}

double rho_k(const FiniteKernel& k, const std::vector<double>& points) {
    const int n = static_cast<int>(points.size());
    if (n < 1) throw parameter_error("rho_k: need at least one point");
    for (double t : points)
        if (!(t > 0.0)) throw parameter_error("rho_k: points must be > 0");
    Eval ev = make_evaluator(k);
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) K(i, j) = ev(points[static_cast<size_t>(i)],
                                                 points[static_cast<size_t>(j)]).value;
    return Eigen::PartialPivLU<Eigen::MatrixXd>(K).determinant();
}

// ---------------------------------------------------------------------------
// factorised form: K = -int_0^1 du/u F1 F2 with u = e^{-s}; the mid-gap shift
// a keeps both contour factors bounded as s grows
// ---------------------------------------------------------------------------

namespace {

struct SeparatedSetup {
    ContourPair pair;
    double shift = 0.0; // mid-gap abscissa
    double s_max = 0.0;
};

SeparatedSetup make_separated_setup(const std::vector<double>& left,
                                    const std::vector<double>& right, bool exclude_origin_right) {
    std::vector<double> excl;
    if (exclude_origin_right) excl.push_back(0.0);
    SeparatedSetup s;
    s.pair = make_separated_pair(left, right, excl);
    const double left_edge = s.pair.inner.center + s.pair.inner.radius;
    const double right_edge = s.pair.outer.center - s.pair.outer.radius;
    const double gap = right_edge - left_edge;
    if (!(gap > 0.0)) throw geometry_error("kernel_factorized: cluster gap closed");
    s.shift = 0.5 * (left_edge + right_edge);
    s.s_max = 40.0 / gap;
    return s;
}

KernelValue factorized_integral(const SeparatedSetup& s,
                                const std::function<cplx(cplx, double)>& f1_integrand,
                                const std::function<cplx(cplx, double)>& f2_integrand, double tol) {
    auto H = [&](double sv) {
        auto F1 = integrate_contour([&](cplx eta) { return f1_integrand(eta, sv); }, s.pair.inner,
                                    tol * 0.1);
        auto F2 = integrate_contour([&](cplx zeta) { return f2_integrand(zeta, sv); }, s.pair.outer,
                                    tol * 0.1);
        return (F1.value * F2.value).real();
    };
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        H, 0.0, s.s_max, 10, 1e-9, &err);
    return KernelValue{-v, err};
}

} // namespace

KernelValue kernel_factorized(const FiniteKernel& k, double x, double y) {
    if (!(x > 0.0) || !(y > 0.0)) throw parameter_error("kernel_factorized: x, y must be > 0");
    const double tol = k.tol;
    if (const auto* c = std::get_if<CoupledParams>(&k.params)) {
        const CoupledParams p = *c;
        require_valid(p);
        const auto aq = scaled_q(p.q, p.alpha);
        const int kappa = p.kappa();
        SeparatedSetup s = make_separated_setup(p.delta, aq, true);
        auto f1 = [&, s](cplx eta, double sv) {
            cplx r = std::exp(sv * (eta - s.shift)) * sf::g_reg(kappa, eta * x);
            for (double a : aq) r *= (eta - a);
            for (double d : p.delta) r /= (eta - d);
            return r;
        };
        auto f2 = [&, s](cplx zeta, double sv) {
            cplx r = 2.0 * std::exp(-sv * (zeta - s.shift)) * sf::h_reg(kappa, zeta * y);
            for (double d : p.delta) r *= (zeta - d);
            for (double a : aq) r /= (zeta - a);
            return r;
        };
        KernelValue v = factorized_integral(s, f1, f2, tol);
        const double g = gauge_pow(x, y, kappa);
        return KernelValue{g * v.value, g * v.est_error};
    }
    if (const auto* pr = std::get_if<ProductParams>(&k.params)) {
        const ProductParams p = *pr;
        require_valid(p);
        const auto aq = scaled_q(p.q, p.alpha);
        const int kappa = p.kappa();
        SeparatedSetup s = make_separated_setup({0.0}, aq, true);
        auto f1 = [&, s](cplx eta, double sv) {
            cplx r = std::exp(sv * (eta - s.shift)) * sf::g_reg(kappa, eta * x);
            for (double a : aq) r *= (eta - a);
            for (int l = 0; l < p.N; ++l) r /= eta;
            return r;
        };
        auto f2 = [&, s](cplx zeta, double sv) {
            cplx r = 2.0 * std::exp(-sv * (zeta - s.shift)) * sf::h_reg(kappa, zeta * y);
            for (int l = 0; l < p.N; ++l) r *= zeta;
            for (double a : aq) r /= (zeta - a);
            return r;
        };
        KernelValue v = factorized_integral(s, f1, f2, tol);
        const double g = gauge_pow(x, y, kappa);
        return KernelValue{g * v.value, g * v.est_error};
    }
    const WishartParams p = std::get<WishartParams>(k.params);
    require_valid(p);
    std::vector<double> msig(p.sigma.size());
    for (size_t i = 0; i < p.sigma.size(); ++i) msig[i] = -p.sigma[i];
    SeparatedSetup s = make_separated_setup(msig, p.q, false);
    auto f1 = [&, s](cplx eta, double sv) {
        cplx r = std::exp(sv * (eta - s.shift) + x * eta);
        for (double q : p.q) r *= (eta - q);
        for (double sg : p.sigma) r /= (eta + sg);
        return r;
    };
    auto f2 = [&, s](cplx zeta, double sv) {
        cplx r = std::exp(-sv * (zeta - s.shift) - y * zeta);
        for (double sg : p.sigma) r *= (zeta + sg);
        for (double q : p.q) r /= (zeta - q);
        return r;
    };
    return factorized_integral(s, f1, f2, tol);
}

std::pair<double, double> kernel_coupled_delta_zero_check(const ProductParams& p, double x,
                                                          double y) {
    CoupledParams c;
    c.N = p.N;
    c.M = p.M;
    c.L = p.L;
    c.alpha = p.alpha;
    c.q = p.q;
    c.delta.assign(static_cast<size_t>(p.N), 0.0);
    const double g = gauge_pow(x, y, p.kappa());
    return {g * kernel_contour_S(c, x, y).value, g * kernel_contour_S(p, x, y).value};
}

// ---------------------------------------------------------------------------
// biorthogonal families
// ---------------------------------------------------------------------------

double psi_function(const CoupledParams& p, int j, double y) {
    if (j < 0 || j >= p.N) throw parameter_error("psi_function: index out of range");
    const int kappa = p.kappa();
    const double d = p.delta[static_cast<size_t>(j)];
    // y^{kappa/2} I_kappa(2 sqrt(d y)) = y^kappa d^{kappa/2} g_reg(kappa, d y)
    return std::pow(y, kappa) * std::pow(d, 0.5 * kappa) * sf::g_reg(kappa, d * y).real();
}

double phi_function(const CoupledParams& p, int i, double y) {
    if (i < 0 || i >= p.M) throw parameter_error("phi_function: index out of range");
    const int kappa = p.kappa();
    return std::pow(p.alpha, -kappa) * std::pow(y, -kappa) *
           sf::h_reg(kappa, p.alpha * p.q[static_cast<size_t>(i)] * y).real();
}

double psi_function(const ProductParams& p, int j, double y) {
    if (j < 0 || j >= p.N) throw parameter_error("psi_function: index out of range");
    return std::pow(y, p.kappa() + j);
}

double phi_function(const ProductParams& p, int i, double y) {
    if (i < 0 || i >= p.M) throw parameter_error("phi_function: index out of range");
    const int kappa = p.kappa();
    return std::pow(p.alpha, -kappa) * std::pow(y, -kappa) *
           sf::h_reg(kappa, p.alpha * p.q[static_cast<size_t>(i)] * y).real();
}

double psi_function(const WishartParams& p, int j, double x) {
    if (j < 0 || j >= p.N) throw parameter_error("psi_function: index out of range");
    return std::exp(-p.sigma[static_cast<size_t>(j)] * x);
}

double phi_function(const WishartParams& p, int i, double x) {
    if (i < 0 || i >= p.M) throw parameter_error("phi_function: index out of range");
    return std::exp(-p.q[static_cast<size_t>(i)] * x);
}

} // namespace rmtkit
