#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <utility>
#include <vector>

#include "rmtkit/ensembles.hpp"
#include "rmtkit/errors.hpp"
#include "rmtkit/kernels.hpp"

using namespace rmtkit;

namespace {

double rel(double a, double b) {
    double scale = std::max(std::abs(a), std::abs(b));
    if (scale == 0.0) return 0.0;
    return std::abs(a - b) / scale;
}

// Half-line integral on log-graded panels; the integrands here decay at least
// like exp(-c sqrt t), so a generous fixed upper cutoff suffices.
template <int Order = 20, typename F>
double panel_edge(F f, double hi, double lo = 1e-12) {
    using boost::math::quadrature::gauss;
    const int panels = 30;
    double acc = 0.0;
    double a = lo;
    for (int k = 1; k <= panels; ++k) {
        double b = lo * std::pow(hi / lo, static_cast<double>(k) / panels);
        acc += gauss<double, Order>::integrate(f, a, b);
        a = b;
    }
    return acc;
}

FiniteKernel make(const CoupledParams& p, KernelMethod m) {
    FiniteKernel k;
    k.params = p;
    k.method = m;
    return k;
}
FiniteKernel make(const ProductParams& p, KernelMethod m) {
    FiniteKernel k;
    k.params = p;
    k.method = m;
    return k;
}
FiniteKernel make(const WishartParams& p, KernelMethod m) {
    FiniteKernel k;
    k.params = p;
    k.method = m;
    return k;
}

const double kProbe[3] = {0.3, 1.0, 2.5};

} // namespace

TEST_CASE("rank-one kernels match their closed forms") {
    CoupledParams c1;
    c1.N = c1.M = c1.L = 1;
    c1.alpha = 1.0;
    c1.delta = {1.0};
    c1.q = {2.0};
    FiniteKernel kg = make(c1, KernelMethod::gram_sum);
    for (double x : kProbe)
        for (double y : kProbe) {
            double closed = 2.0 * boost::math::cyl_bessel_i(0, 2.0 * std::sqrt(x)) *
                            boost::math::cyl_bessel_k(0, 2.0 * std::sqrt(2.0 * y));
            CHECK(rel(kernel_eval(kg, x, y).value, closed) < 1e-12);
        }

    WishartParams w1;
    w1.N = w1.M = 1;
    w1.q = {1.0};
    w1.sigma = {0.0};
    FiniteKernel wg = make(w1, KernelMethod::gram_sum);
    for (double y : kProbe) CHECK(rel(kernel_eval(wg, 0.7, y).value, std::exp(-y)) < 1e-12);
    double tr = panel_edge([&](double t) { return kernel_eval(wg, t, t).value; }, 60.0);
    CHECK(std::abs(tr - 1.0) < 1e-8);

    // factorized route on the same two instances
    FiniteKernel wf = make(w1, KernelMethod::gram_sum);
    for (double y : {0.4, 1.3}) {
        KernelValue v = kernel_factorized(wf, 0.9, y);
        CHECK(rel(v.value, std::exp(-y)) < 1e-8);
    }
    FiniteKernel cf = make(c1, KernelMethod::contour_quadrature);
    for (double y : {0.4, 1.3}) {
        double closed = 2.0 * boost::math::cyl_bessel_i(0, 2.0 * std::sqrt(0.9)) *
                        boost::math::cyl_bessel_k(0, 2.0 * std::sqrt(2.0 * y));
        CHECK(rel(kernel_factorized(cf, 0.9, y).value, closed) < 1e-6);
        CHECK(rel(kernel_eval(cf, 0.9, y).value, closed) < 1e-8);
    }
}

TEST_CASE("evaluation paths agree across ensembles and instances") {
    std::vector<WishartParams> ws(3);
    ws[0].N = 2;
    ws[0].M = 2;
    ws[0].q = {1.0, 2.0};
    ws[0].sigma = {0.0, 1.0};
    ws[1].N = 2;
    ws[1].M = 3;
    ws[1].q = {1.0, 1.6, 2.3};
    ws[1].sigma = {0.4, 1.0};
    ws[2].N = 3;
    ws[2].M = 3;
    ws[2].q = {0.7, 1.3, 2.4};
    ws[2].sigma = {-0.2, 0.4, 1.0};

    std::vector<CoupledParams> cs(3);
    cs[0].N = cs[0].M = cs[0].L = 1;
    cs[0].alpha = 1.0;
    cs[0].delta = {1.0};
    cs[0].q = {2.0};
    cs[1].N = cs[1].M = cs[1].L = 2;
    cs[1].alpha = 1.5;
    cs[1].delta = {0.3, 0.8};
    cs[1].q = {1.1, 1.9};
    cs[2].N = 2;
    cs[2].M = 3;
    cs[2].L = 4;
    cs[2].alpha = 1.8;
    cs[2].delta = {0.25, 0.85};
    cs[2].q = {1.0, 1.7, 2.6};

    std::vector<ProductParams> ps(3);
    ps[0].N = 1;
    ps[0].M = 2;
    ps[0].L = 1;
    ps[0].alpha = 1.0;
    ps[0].q = {1.2, 2.3};
    ps[1].N = 2;
    ps[1].M = 2;
    ps[1].L = 3;
    ps[1].alpha = 1.4;
    ps[1].q = {0.9, 1.8};
    ps[2].N = 2;
    ps[2].M = 3;
    ps[2].L = 2;
    ps[2].alpha = 1.0;
    ps[2].q = {0.8, 1.5, 2.7};

    auto sweep = [&](const FiniteKernel& a, const FiniteKernel& b, double tol) {
        double worst = 0.0;
        for (double x : kProbe)
            for (double y : kProbe)
                worst = std::max(worst, rel(kernel_eval(a, x, y).value, kernel_eval(b, x, y).value));
        CHECK(worst < tol);
    };

    for (const auto& w : ws)
        sweep(make(w, KernelMethod::gram_sum), make(w, KernelMethod::contour_quadrature), 1e-8);
    for (const auto& c : cs)
        sweep(make(c, KernelMethod::gram_sum), make(c, KernelMethod::contour_quadrature), 1e-8);
    for (const auto& p : ps)
        sweep(make(p, KernelMethod::gram_sum), make(p, KernelMethod::contour_quadrature), 1e-8);

    // residue sums exist for the square nu=0 cases
    sweep(make(ws[0], KernelMethod::gram_sum), make(ws[0], KernelMethod::residue_sum), 1e-8);
    sweep(make(cs[1], KernelMethod::gram_sum), make(cs[1], KernelMethod::residue_sum), 1e-8);

    // factorized route against gram wherever the two parameter clusters are
    // separated (all the instances above are)
    auto sweep_fact = [&](const FiniteKernel& k) {
        double worst = 0.0;
        for (double x : kProbe)
            for (double y : kProbe)
                worst = std::max(worst, rel(kernel_eval(k, x, y).value, kernel_factorized(k, x, y).value));
        CHECK(worst < 1e-6);
    };
    for (const auto& w : ws) sweep_fact(make(w, KernelMethod::gram_sum));
    for (const auto& c : cs) sweep_fact(make(c, KernelMethod::gram_sum));
    for (const auto& p : ps) sweep_fact(make(p, KernelMethod::gram_sum));
}

TEST_CASE("correlation functions are kernel determinants tied to the joint density") {
    WishartParams w;
    w.N = w.M = 2;
    w.q = {1.0, 2.0};
    w.sigma = {0.0, 1.0};
    FiniteKernel k = make(w, KernelMethod::gram_sum);

    CHECK(rho_k(k, {0.8}) == doctest::Approx(kernel_eval(k, 0.8, 0.8).value).epsilon(1e-12));
    CHECK(std::abs(rho_k(k, {0.9, 0.9})) < 1e-12);

    // with k = N the correlation function is N! times the joint density
    double r2 = rho_k(k, {0.5, 1.5});
    double jp = 2.0 * std::exp(log_jpdf_wishart(w, {0.5, 1.5}));
    CHECK(rel(r2, jp) < 1e-8);

    // one-level function equals the integrated-out two-level one
    double r1 = rho_k(k, {0.5});
    double marg = panel_edge([&](double t) { return rho_k(k, {0.5, t}); }, 80.0);
    CHECK(rel(r1, marg) < 1e-5);
}

TEST_CASE("kernels reproduce themselves under convolution and have trace N") {
    CoupledParams c;
    c.N = 2;
    c.M = 3;
    c.L = 4;
    c.alpha = 1.8;
    c.delta = {0.25, 0.85};
    c.q = {1.0, 1.7, 2.6};
    ProductParams p;
    p.N = 2;
    p.M = 2;
    p.L = 3;
    p.alpha = 1.4;
    p.q = {0.9, 1.8};
    WishartParams w;
    w.N = w.M = 2;
    w.q = {1.0, 2.0};
    w.sigma = {0.0, 1.0};

    auto reproduce = [&](const FiniteKernel& k, double hi) {
        for (auto [x, y] : {std::pair{0.7, 1.6}, std::pair{1.2, 0.5}}) {
            double conv = panel_edge(
                [&](double t) { return kernel_eval(k, x, t).value * kernel_eval(k, t, y).value; },
                hi);
            CHECK(rel(conv, kernel_eval(k, x, y).value) < 1e-5);
        }
        double tr = panel_edge([&](double t) { return kernel_eval(k, t, t).value; }, hi);
        CHECK(std::abs(tr - 2.0) < 2e-6);
    };
    reproduce(make(c, KernelMethod::gram_sum), 400.0);
    reproduce(make(p, KernelMethod::gram_sum), 400.0);
    reproduce(make(w, KernelMethod::gram_sum), 80.0);
}

TEST_CASE("kernel determinants are invariant under diagonal gauge factors") {
    CoupledParams c;
    c.N = 3;
    c.M = 4;
    c.L = 5; // kappa = 2
    c.alpha = 1.8;
    c.delta = {0.25, 0.85, 1.3};
    c.q = {1.0, 1.7, 2.6, 3.3};
    FiniteKernel k = make(c, KernelMethod::gram_sum);
    std::vector<double> pts = {0.4, 1.1, 2.2};
    double g = 0.5 * c.kappa();
    for (int n : {2, 3}) {
        // determinant with the x^{kappa/2} gauge stripped entry-wise
        auto det_gauged = [&]() {
            if (n == 2) {
                double a = kernel_eval(k, pts[0], pts[0]).value;
                double b = kernel_eval(k, pts[0], pts[1]).value * std::pow(pts[0] / pts[1], g);
                double cN = kernel_eval(k, pts[1], pts[0]).value * std::pow(pts[1] / pts[0], g);
                double d = kernel_eval(k, pts[1], pts[1]).value;
                return a * d - b * cN;
            }
            double m[3][3];
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    m[i][j] = kernel_eval(k, pts[i], pts[j]).value * std::pow(pts[i] / pts[j], g);
            return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                   m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                   m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        };
        std::vector<double> sub(pts.begin(), pts.begin() + n);
        double plain = rho_k(k, sub);
        CHECK(rel(det_gauged(), plain) < 1e-10);
    }
}

TEST_CASE("zero coupling collapses the coupled kernel onto the product kernel") {
    ProductParams p1;
    p1.N = p1.M = p1.L = 1;
    p1.alpha = 1.0;
    p1.q = {2.0};
    auto [a1, b1] = kernel_coupled_delta_zero_check(p1, 1.0, 1.0);
    CHECK(rel(a1, b1) < 1e-8);

    ProductParams p2;
    p2.N = 1;
    p2.M = 2;
    p2.L = 1;
    p2.alpha = 1.0;
    p2.q = {1.2, 2.3};
    for (auto [x, y] : {std::pair{0.5, 0.5}, std::pair{1.0, 2.0}, std::pair{2.2, 0.7}}) {
        auto [a, b] = kernel_coupled_delta_zero_check(p2, x, y);
        CHECK(rel(a, b) < 1e-8);
    }

    ProductParams p3;
    p3.N = 2;
    p3.M = 2;
    p3.L = 3;
    p3.alpha = 1.4;
    p3.q = {0.9, 1.8};
    auto [a3, b3] = kernel_coupled_delta_zero_check(p3, 0.6, 1.4);
    CHECK(rel(a3, b3) < 1e-8);
}

TEST_CASE("one-level density stays nonnegative on a wide grid") {
    CoupledParams c;
    c.N = 2;
    c.M = 3;
    c.L = 4;
    c.alpha = 1.8;
    c.delta = {0.25, 0.85};
    c.q = {1.0, 1.7, 2.6};
    FiniteKernel k = make(c, KernelMethod::gram_sum);
    for (int i = 0; i < 50; ++i) {
        double t = 1e-3 * std::pow(6e4, i / 49.0); // log grid up to 60
        CHECK(rho_k(k, {t}) >= -1e-10);
    }
}

TEST_CASE("coalescing parameters fall back to the quadrature path") {
    CoupledParams c;
    c.N = c.M = c.L = 2;
    c.alpha = 1.5;
    c.delta = {0.36, 0.36};
    c.q = {1.5, 1.5};
    CHECK_THROWS(kernel_eval(make(c, KernelMethod::gram_sum), 1.0, 1.2));
    KernelValue v = kernel_eval(make(c, KernelMethod::contour_quadrature), 1.0, 1.2);
    CHECK(std::isfinite(v.value));

    CoupledParams cnear = c;
    cnear.delta = {0.36, 0.36 + 1e-4};
    cnear.q = {1.5, 1.5 + 1e-4};
    double g = kernel_eval(make(cnear, KernelMethod::gram_sum), 1.0, 1.2).value;
    CHECK(rel(v.value, g) < 3e-3);
}

TEST_CASE("sampled spectra match the predicted one-level density") {
    CoupledParams c;
    c.N = c.M = c.L = 3;
    c.alpha = 1.0;
    c.delta = {0.0, 0.1, 0.2};
    c.q = {1.0, 1.2, 1.4};
    const int count = 20000;
    auto rows = sample_coupled(c, 4242, count, 4);
    std::vector<double> values;
    values.reserve(static_cast<size_t>(count) * 3);
    double vmax = 0.0;
    for (const auto& r : rows)
        for (double v : r) {
            values.push_back(v);
            vmax = std::max(vmax, v);
        }

    FiniteKernel k = make(c, KernelMethod::gram_sum);
    // the one-level density has a logarithmic spike at the origin: grade the
    // grid geometrically below 1 so the trapezoid CDF keeps the edge mass
    double hi = vmax * 1.05;
    std::vector<double> grid;
    for (int i = 0; i < 900; ++i) grid.push_back(1e-9 * std::pow(1e9, i / 899.0));
    for (int i = 1; i <= 2600; ++i) grid.push_back(1.0 + (hi - 1.0) * i / 2600.0);
    const size_t pts = grid.size();
    std::vector<double> cdf(pts, 0.0);
    double prev = rho_k(k, {grid[0]});
    for (size_t i = 1; i < pts; ++i) {
        double cur = rho_k(k, {grid[i]});
        cdf[i] = cdf[i - 1] + 0.5 * (prev + cur) * (grid[i] - grid[i - 1]);
        prev = cur;
    }
    CHECK(std::abs(cdf.back() - 3.0) < 2e-3); // trace sanity on the truncated grid

    ChiSquare cs = chi_square_binned(values, grid, cdf, 25);
    CHECK(cs.dof == 24);
    CHECK(cs.p_value > 0.01);
}
