#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rmtkit/ensembles.hpp"
#include "rmtkit/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <string>

using namespace rmtkit;
using boost::math::quadrature::gauss;

namespace {

CoupledParams small_coupled() {
    CoupledParams p;
    p.N = 2;
    p.M = 2;
    p.L = 3;
    p.alpha = 2.0;
    p.delta = {0.2, 0.9};
    p.q = {1.1, 1.7};
    return p;
}

// Fixed-panel quadrature over [0, hi]; every density here decays
// exponentially, so the truncation is far below the check tolerances.
template <typename F> double panel(F f, double hi) {
    return gauss<double, 128>::integrate(f, 0.0, hi);
}

// Log-graded panels toward 0 for the coupled/product laws, whose K-Bessel
// factors diverge like y^{-1/2} at the hard edge (integrable; the skipped
// mass below `lo` scales like sqrt(lo)).  These laws decay like exp(-c sqrt y),
// so `hi` must sit far out.
template <int Order = 20, typename F> double panel_edge(F f, double hi, double lo = 1e-20) {
    double total = 0.0;
    const int P = 24;
    double r = std::pow(hi / lo, 1.0 / P);
    for (int j = 0; j < P; ++j) {
        double a = lo * std::pow(r, j);
        total += gauss<double, Order>::integrate(f, a, a * r);
    }
    return total;
}

} // namespace

TEST_CASE("validation flags each inequality family with indices") {
    CoupledParams c = small_coupled();
    CHECK(validate(c).empty());
    c.alpha = 0.5; // alpha q - delta turns negative for the large delta
    auto v = validate(c);
    REQUIRE(v.size() == 2);
    CHECK(v[0].name == "aqd");
    CHECK(v[0].i == 0);
    CHECK(v[0].j == 1);
    CHECK(v[0].value == doctest::Approx(0.5 * 1.1 - 0.9));
    CHECK(v[1].i == 1);

    WishartParams w;
    w.N = 1;
    w.M = 2;
    w.sigma = {-1.5};
    w.q = {1.0, 2.0};
    auto vw = validate(w);
    REQUIRE(vw.size() == 1);
    CHECK(vw[0].name == "constraint3");
    CHECK(vw[0].i == 0);
    CHECK(vw[0].j == 0);

    ProductParams pr;
    pr.N = 2;
    pr.M = 1; // M < N
    pr.L = 2;
    pr.q = {1.0};
    auto vp = validate(pr);
    REQUIRE(!vp.empty());
    CHECK(vp[0].name == "positivity");
}

TEST_CASE("require_valid reports the violated family by name") {
    CoupledParams c = small_coupled();
    c.delta[1] = 5.0;
    try {
        require_valid(c);
        FAIL("expected parameter_error");
    } catch (const parameter_error& e) {
        CHECK(std::string(e.what()).find("aqd") != std::string::npos);
    }
}

TEST_CASE("samplers are deterministic and worker-count invariant") {
    CoupledParams c = small_coupled();
    auto a = sample_coupled(c, 99, 64, 1);
    auto b = sample_coupled(c, 99, 64, 4);
    REQUIRE(a.size() == 64);
    CHECK(a == b);
    auto d = sample_coupled(c, 100, 64, 2);
    CHECK(a != d);
    for (const auto& row : a) {
        REQUIRE(row.size() == 2);
        CHECK(row[0] >= 0.0);
        CHECK(row[0] <= row[1]);
    }

    WishartParams w;
    w.N = 2;
    w.M = 3;
    w.sigma = {0.1, -0.3};
    w.q = {0.8, 1.5, 2.5};
    CHECK(sample_wishart(w, 7, 32, 1) == sample_wishart(w, 7, 32, 3));

    ProductParams pr;
    pr.N = 2;
    pr.M = 2;
    pr.L = 4;
    pr.alpha = 1.3;
    pr.q = {1.0, 2.0};
    CHECK(sample_product(pr, 3, 32, 1) == sample_product(pr, 3, 32, 4));
}

TEST_CASE("squared singular values of explicit matrices") {
    // row vector (3, 4i): Y Y* = 25
    auto s1 = squared_singular_values({3.0, 0.0, 0.0, 4.0}, 1, 2);
    REQUIRE(s1.size() == 1);
    CHECK(s1[0] == doctest::Approx(25.0));
    // diag(1, 2) has squared singular values {1, 4}, ascending
    auto s2 = squared_singular_values({1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0}, 2, 2);
    REQUIRE(s2.size() == 2);
    CHECK(s2[0] == doctest::Approx(1.0));
    CHECK(s2[1] == doctest::Approx(4.0));
}

TEST_CASE("one-point joint densities are normalized") {
    CoupledParams c;
    c.N = 1;
    c.M = 1;
    c.L = 2;
    c.alpha = 1.5;
    c.delta = {0.4};
    c.q = {1.2};
    double rc = panel_edge([&](double y) { return std::exp(log_jpdf_coupled_y(c, {y})); }, 500.0);
    CHECK(std::abs(rc - 1.0) < 1e-8);

    ProductParams pr;
    pr.N = 1;
    pr.M = 2;
    pr.L = 1;
    pr.alpha = 0.9;
    pr.q = {1.0, 1.8};
    double rp = panel_edge([&](double y) { return std::exp(log_jpdf_product(pr, {y})); }, 400.0);
    CHECK(std::abs(rp - 1.0) < 1e-8);

    WishartParams w;
    w.N = 1;
    w.M = 2;
    w.sigma = {-0.2};
    w.q = {0.7, 1.9};
    double rw = panel([&](double x) { return std::exp(log_jpdf_wishart(w, {x})); }, 120.0);
    CHECK(std::abs(rw - 1.0) < 1e-8);
}

TEST_CASE("two-point joint densities are normalized") {
    CoupledParams c = small_coupled();
    double r2 = panel_edge<10>(
        [&](double y1) {
            return panel_edge<10>(
                [&](double y2) {
                    if (y1 == y2) return 0.0; // measure-zero confluent line
                    return std::exp(log_jpdf_coupled_y(c, {y1, y2}));
                },
                // below 1e-12 the closed form cancels catastrophically; the
                // skipped edge mass is ~1e-7 of the total
                200.0, 1e-12);
        },
        200.0, 1e-12);
    CHECK(std::abs(r2 - 1.0) < 3e-6);

    WishartParams w;
    w.N = 2;
    w.M = 2;
    w.sigma = {0.3, -0.1};
    w.q = {0.9, 1.6};
    double rw = panel(
        [&](double x1) {
            return panel(
                [&](double x2) {
                    if (x1 == x2) return 0.0;
                    return std::exp(log_jpdf_wishart(w, {x1, x2}));
                },
                70.0);
        },
        70.0);
    CHECK(std::abs(rw - 1.0) < 1e-6);
}

TEST_CASE("integrating out the product spectrum leaves the deformed Wishart law") {
    CoupledParams c;
    c.N = 1;
    c.M = 1;
    c.L = 1;
    c.alpha = 1.8;
    c.delta = {0.6};
    c.q = {1.3};
    WishartParams w;
    w.N = 1;
    w.M = 1;
    w.sigma = {-c.delta[0] / c.alpha};
    w.q = c.q;
    for (double x : {0.3, 1.0, 2.7}) {
        double marg =
            panel_edge([&](double y) { return std::exp(log_jpdf_coupled(c, {x}, {y})); }, 300.0);
        double want = std::exp(log_jpdf_wishart(w, {x}));
        CHECK(marg == doctest::Approx(want).epsilon(1e-7));
    }
}

TEST_CASE("chi-square binning accepts the true law and rejects a wrong one") {
    WishartParams w;
    w.N = 1;
    w.M = 1;
    w.sigma = {0.4};
    w.q = {1.1};
    const double rate = w.q[0] + w.sigma[0]; // 1x1 law is exponential
    auto rows = sample_wishart(w, 2024, 30000, 4);
    std::vector<double> values(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) values[i] = rows[i][0];

    std::vector<double> grid, cdf;
    for (int i = 0; i <= 2000; ++i) {
        double t = 20.0 * i / 2000.0;
        grid.push_back(t);
        cdf.push_back(1.0 - std::exp(-rate * t));
    }
    ChiSquare ok = chi_square_binned(values, grid, cdf, 16);
    CHECK(ok.dof == 15);
    double total = 0.0;
    for (double o : ok.observed) total += o;
    CHECK(total == doctest::Approx(30000.0));
    CHECK(ok.p_value > 1e-3);

    std::vector<double> wrong_cdf;
    for (double t : grid) wrong_cdf.push_back(1.0 - std::exp(-0.5 * rate * t));
    ChiSquare bad = chi_square_binned(values, grid, wrong_cdf, 16);
    CHECK(bad.p_value < 1e-8);
}
