#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rmtkit/errors.hpp"
#include "rmtkit/gram.hpp"
#include "rmtkit/kernels.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <algorithm>
#include <random>

using namespace rmtkit;
using boost::math::quadrature::gauss;

namespace {

// Log-graded panels toward 0 plus a far tail; handles the K-Bessel pairings
// (integrable y^{-1/2}-type edge, exp(-c sqrt y) tail).
template <typename F> double panel_edge(F f, double hi = 400.0) {
    double lo = 1e-18, total = 0.0;
    const int P = 36;
    double r = std::pow(hi / lo, 1.0 / P);
    for (int j = 0; j < P; ++j) {
        double a = lo * std::pow(r, j);
        total += gauss<double, 20>::integrate(f, a, a * r);
    }
    return total;
}

double rel_diff(LogVal a, LogVal b) {
    if (a.sign != b.sign) return 1.0;
    return std::abs(std::expm1(a.log_abs - b.log_abs));
}

// Evenly spread with jitter: keeps every pairwise gap above half the spacing,
// so Vandermonde factors stay far from zero and LU oracles stay accurate.
// Brute-force determinant in extended precision so the oracle error stays far
// below the comparison tolerance even for moderately conditioned matrices.
using MatLD = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

LogVal logdet_ld(const MatLD& B) {
    Eigen::PartialPivLU<MatLD> lu(B);
    long double lg = 0.0L;
    int sign = lu.permutationP().determinant() > 0 ? 1 : -1;
    for (int i = 0; i < B.rows(); ++i) {
        long double d = lu.matrixLU()(i, i);
        if (d == 0.0L) return LogVal{};
        if (d < 0.0L) sign = -sign;
        lg += std::log(std::abs(static_cast<double>(d)));
    }
    return LogVal::from_log(static_cast<double>(lg), sign);
}

std::vector<double> separated_draw(std::mt19937& rng, int n, double lo, double hi) {
    std::uniform_real_distribution<double> u(-0.25, 0.25);
    const double h = (hi - lo) / n;
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = lo + h * (i + 0.5 + u(rng));
    std::shuffle(v.begin(), v.end(), rng);
    return v;
}

} // namespace

TEST_CASE("pairing integrals match their defining quadratures") {
    WishartParams w;
    w.N = 1;
    w.M = 1;
    w.sigma = {1.0};
    w.q = {2.0};
    CHECK(pairing_integral(w, 0, 0) == doctest::Approx(1.0 / 3.0));

    ProductParams pr;
    pr.N = 1;
    pr.M = 1;
    pr.L = 1; // kappa = 0
    pr.alpha = 1.0;
    pr.q = {2.0};
    CHECK(pairing_integral(pr, 0, 0) == doctest::Approx(0.25));

    CoupledParams c;
    c.N = 1;
    c.M = 1;
    c.L = 1;
    c.alpha = 1.0;
    c.delta = {1.0};
    c.q = {2.0};
    CHECK(pairing_integral(c, 0, 0) == doctest::Approx(0.5));

    // nontrivial kappa, all kinds, against direct half-line quadrature
    CoupledParams c2;
    c2.N = 2;
    c2.M = 3;
    c2.L = 4;
    c2.alpha = 1.6;
    c2.delta = {0.3, 0.9};
    c2.q = {1.1, 1.8, 2.6};
    for (int i = 0; i < c2.M; ++i)
        for (int j = 0; j < c2.N; ++j) {
            double got = pairing_integral(c2, i, j);
            double ref = panel_edge(
                [&](double y) { return psi_function(c2, j, y) * phi_function(c2, i, y); },
                2000.0); // tail only decays like exp(-c sqrt y)
            CHECK(got == doctest::Approx(ref).epsilon(1e-8));
        }

    ProductParams p2;
    p2.N = 2;
    p2.M = 2;
    p2.L = 3;
    p2.alpha = 1.2;
    p2.q = {0.9, 1.7};
    for (int i = 0; i < p2.M; ++i)
        for (int j = 0; j < p2.N; ++j) {
            double got = pairing_integral(p2, i, j);
            double ref = panel_edge(
                [&](double y) { return psi_function(p2, j, y) * phi_function(p2, i, y); },
                2000.0);
            CHECK(got == doctest::Approx(ref).epsilon(1e-8));
        }

    WishartParams w2;
    w2.N = 2;
    w2.M = 3;
    w2.sigma = {0.4, -0.1};
    w2.q = {0.8, 1.5, 2.4};
    for (int i = 0; i < w2.M; ++i)
        for (int j = 0; j < w2.N; ++j) {
            double got = pairing_integral(w2, i, j);
            double ref = gauss<double, 128>::integrate(
                [&](double y) { return psi_function(w2, j, y) * phi_function(w2, i, y); }, 0.0,
                200.0);
            CHECK(got == doctest::Approx(ref).epsilon(1e-8));
        }

    CHECK_THROWS_AS(pairing_integral(w2, 3, 0), parameter_error);
}

TEST_CASE("gram matrix layout: monomial block then pairing block") {
    WishartParams w;
    w.N = 2;
    w.M = 2;
    w.sigma = {0.2, 0.7};
    w.q = {1.0, 1.9};
    GramMatrix A = build_gram(w);
    CHECK(A.nu == 0); // no monomial columns
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(A.entries(i, j) == doctest::Approx(1.0 / (w.q[i] + w.sigma[j])));

    CoupledParams c;
    c.N = 1;
    c.M = 2;
    c.L = 1;
    c.alpha = 2.0;
    c.delta = {0.5};
    c.q = {1.0, 1.6};
    GramMatrix Ac = build_gram(c);
    CHECK(Ac.nu == 1);
    CHECK(Ac.entries(0, 0) == 1.0);
    CHECK(Ac.entries(1, 0) == 1.0);
    CHECK(Ac.entries(0, 1) == doctest::Approx(pairing_integral(c, 0, 0)));
    CHECK(Ac.entries(1, 1) == doctest::Approx(pairing_integral(c, 1, 0)));

    // alpha-scaled monomials for the coupled kind
    CoupledParams c2 = c;
    c2.M = 3;
    c2.q = {1.0, 1.6, 2.1};
    GramMatrix Ac2 = build_gram(c2); // nu = 2
    CHECK(Ac2.nu == 2);
    for (int i = 0; i < 3; ++i) CHECK(Ac2.entries(i, 1) == doctest::Approx(c2.alpha * c2.q[i]));
}

TEST_CASE("closed-form Cauchy inverse") {
    GramInverse one = cauchy_inverse({2.0}, {1.0});
    CHECK(one.entries(0, 0) == doctest::Approx(3.0));

    std::vector<double> q{1.0, 2.0}, s{0.0, 1.0};
    GramInverse C = cauchy_inverse(q, s);
    Eigen::MatrixXd A(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) A(i, j) = 1.0 / (q[i] + s[j]);
    CHECK(((C.entries * A) - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

    std::mt19937 rng(11);
    for (int rep = 0; rep < 5; ++rep) {
        auto q3 = separated_draw(rng, 3, 0.5, 3.0);
        auto s3 = separated_draw(rng, 3, 0.1, 2.0);
        GramInverse C3 = cauchy_inverse(q3, s3);
        Eigen::MatrixXd A3(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) A3(i, j) = 1.0 / (q3[i] + s3[j]);
        Eigen::MatrixXd num = A3.inverse();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(C3.entries(i, j) == doctest::Approx(num(i, j)).epsilon(1e-8));
    }

    CHECK_THROWS(cauchy_inverse({1.0, 1.0}, {0.2, 0.4}));
}

TEST_CASE("numeric gram inversion agrees with the closed forms") {
    GramMatrix I;
    I.entries = Eigen::MatrixXd::Identity(3, 3);
    I.nu = 0;
    CHECK((invert_gram(I).entries - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <
          1e-12);

    WishartParams w;
    w.N = 3;
    w.M = 3;
    w.sigma = {0.2, 0.8, 1.5};
    w.q = {1.0, 1.8, 2.7};
    GramInverse numeric = invert_gram(build_gram(w));
    GramInverse closed = cauchy_inverse(w.q, w.sigma);
    CHECK((numeric.entries - closed.entries).cwiseAbs().maxCoeff() <
          1e-8 * closed.entries.cwiseAbs().maxCoeff());

    // coupled nu=0, kappa=0: pairing is (1/2) / (alpha q_i - delta_j), so the
    // inverse is twice the Cauchy inverse in (alpha q, -delta)
    CoupledParams c;
    c.N = 3;
    c.M = 3;
    c.L = 3;
    c.alpha = 1.9;
    c.delta = {0.2, 0.7, 1.4};
    c.q = {0.9, 1.5, 2.2};
    GramInverse gi = invert_gram(build_gram(c));
    std::vector<double> aq(3), nd(3);
    for (int i = 0; i < 3; ++i) aq[i] = c.alpha * c.q[i];
    for (int j = 0; j < 3; ++j) nd[j] = -c.delta[j];
    GramInverse ci = cauchy_inverse(aq, nd);
    CHECK((gi.entries - 2.0 * ci.entries).cwiseAbs().maxCoeff() <
          1e-7 * ci.entries.cwiseAbs().maxCoeff());

    // A C = Identity across kinds
    for (double alpha : {1.7, 2.4}) {
        CoupledParams cc = c;
        cc.alpha = alpha;
        cc.L = 5; // kappa = 2
        GramMatrix A = build_gram(cc);
        GramInverse Cc = invert_gram(A);
        CHECK((A.entries * Cc.entries - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <
              1e-8);
        CHECK(Cc.condition_estimate > 0.0);
    }
}

TEST_CASE("generalized Cauchy determinants equal brute-force LU values") {
    // pinned 1x1 and 2x1 cases
    LogVal v1 = cauchy_det_generalized({2.0}, {1.0}, CauchyVariant::alpha_minus_delta, 1.0);
    CHECK(v1.sign == 1);
    CHECK(v1.to_double() == doctest::Approx(1.0));

    LogVal v2 = cauchy_det_generalized({1.0, 2.0}, {0.0}, CauchyVariant::plus_sigma);
    CHECK(v2.to_double() == doctest::Approx(-0.5));
    Eigen::MatrixXd E(2, 2);
    E << 1.0, 1.0, 1.0, 0.5; // [1 | 1/(q_i + 0)]
    CHECK(logdet(E).to_double() == doctest::Approx(-0.5));

    std::mt19937 rng(2718);
    std::uniform_int_distribution<int> Mdist(1, 8);
    std::uniform_real_distribution<double> adist(0.7, 2.5);
    for (int rep = 0; rep < 50; ++rep) {
        int M = Mdist(rng);
        int N = std::uniform_int_distribution<int>(1, M)(rng);
        auto q = separated_draw(rng, M, 0.4, 4.0);
        bool plus = (rep % 2 == 0);
        double alpha = adist(rng);
        std::vector<double> s =
            plus ? separated_draw(rng, N, 0.1, 3.0) : separated_draw(rng, N, 0.05, 2.0);
        if (!plus) {
            // keep the Cauchy denominators away from zero so entry rounding
            // stays harmless
            for (double& sj : s) {
                bool close = true;
                while (close) {
                    close = false;
                    for (double qi : q)
                        if (std::abs(alpha * qi - sj) < 0.05) close = true;
                    if (close) sj = std::uniform_real_distribution<double>(0.05, 2.0)(rng);
                }
            }
        }
        MatLD A(M, M);
        for (int i = 0; i < M; ++i) {
            long double m = 1.0L;
            for (int j = 0; j < M - N; ++j) {
                A(i, j) = m;
                m *= q[i];
            }
            for (int j = 0; j < N; ++j)
                A(i, M - N + j) = plus
                                      ? 1.0L / (static_cast<long double>(q[i]) + s[j])
                                      : 1.0L / (static_cast<long double>(alpha) * q[i] - s[j]);
        }
        LogVal closed = cauchy_det_generalized(
            q, s, plus ? CauchyVariant::plus_sigma : CauchyVariant::alpha_minus_delta, alpha);
        CHECK(rel_diff(closed, logdet_ld(A)) < 1e-10);
    }
}

TEST_CASE("partition normalizations against the determinant route") {
    CoupledParams unit;
    unit.N = 1;
    unit.M = 1;
    unit.L = 1;
    unit.alpha = 1.0;
    unit.delta = {1.0};
    unit.q = {2.0};
    CHECK(log_normalization(unit).to_double() == doctest::Approx(1.0));

    // Z = (N!)^2 2^N det[A] for the two-matrix kinds, Z = N! det[A] for the
    // one-matrix kind
    auto factor = [](int N, bool two_matrix) {
        double nf = 1.0;
        for (int i = 2; i <= N; ++i) nf *= i;
        return two_matrix ? nf * nf * std::pow(2.0, N) : nf;
    };
    std::mt19937 rng(99);
    for (int rep = 0; rep < 6; ++rep) {
        int N = 1 + rep % 4;
        int M = N + rep % 3;
        if (M > 6) continue;
        CoupledParams c;
        c.N = N;
        c.M = M;
        c.L = N + (rep % 2);
        c.alpha = 1.4 + 0.3 * rep;
        c.delta = separated_draw(rng, N, 0.1, 1.1);
        c.q = separated_draw(rng, M, 1.0, 3.5);
        LogVal lhs = log_normalization(c);
        // the determinant route uses plain q-monomial columns; build_gram's
        // alpha-scaled monomial block differs by a constant absorbed in Z
        MatLD Ac(M, M);
        for (int i = 0; i < M; ++i) {
            long double m = 1.0L;
            for (int j = 0; j < M - N; ++j) {
                Ac(i, j) = m;
                m *= c.q[static_cast<size_t>(i)];
            }
            for (int j = 0; j < N; ++j) Ac(i, M - N + j) = pairing_integral(c, i, j);
        }
        LogVal rhs = LogVal::from_double(factor(N, true)) * logdet_ld(Ac);
        CHECK(rel_diff(lhs, rhs) < 1e-10);

        ProductParams pr;
        pr.N = N;
        pr.M = M;
        pr.L = N + 2;
        pr.alpha = 0.8 + 0.2 * rep;
        pr.q = c.q;
        CHECK(rel_diff(log_normalization(pr),
                       LogVal::from_double(factor(N, true)) * logdet(build_gram(pr).entries)) <
              1e-10);

        WishartParams w;
        w.N = N;
        w.M = M;
        w.sigma = separated_draw(rng, N, -0.2, 0.9);
        w.q = c.q;
        CHECK(rel_diff(log_normalization(w),
                       LogVal::from_double(factor(N, false)) * logdet(build_gram(w).entries)) <
              1e-10);
    }
}

TEST_CASE("multidimensional pairing identity at small size") {
    // integrating the paired determinants over N points reproduces
    // N! det[monomials | pairings]
    WishartParams w;
    w.N = 2;
    w.M = 2;
    w.sigma = {0.3, 0.9};
    w.q = {1.1, 2.0};
    GramMatrix A = build_gram(w);
    auto f2 = [&](double y1, double y2) {
        Eigen::Matrix2d P, F;
        P << psi_function(w, 0, y1), psi_function(w, 0, y2), psi_function(w, 1, y1),
            psi_function(w, 1, y2);
        F << phi_function(w, 0, y1), phi_function(w, 0, y2), phi_function(w, 1, y1),
            phi_function(w, 1, y2);
        return P.determinant() * F.determinant();
    };
    double lhs = gauss<double, 64>::integrate(
        [&](double y1) {
            return gauss<double, 64>::integrate([&](double y2) { return f2(y1, y2); }, 0.0, 60.0);
        },
        0.0, 60.0);
    CHECK(lhs == doctest::Approx(2.0 * logdet(A.entries).to_double()).epsilon(1e-5));

    // one monomial column (nu = 1)
    WishartParams w1;
    w1.N = 1;
    w1.M = 2;
    w1.sigma = {0.4};
    w1.q = {0.9, 1.7};
    GramMatrix A1 = build_gram(w1);
    double lhs1 = gauss<double, 64>::integrate(
        [&](double y) {
            Eigen::Matrix2d B;
            B << 1.0, phi_function(w1, 0, y), 1.0, phi_function(w1, 1, y);
            return psi_function(w1, 0, y) * B.determinant();
        },
        0.0, 80.0);
    CHECK(lhs1 == doctest::Approx(logdet(A1.entries).to_double()).epsilon(1e-5));

    // product kind with its Bessel-type phi
    ProductParams pr;
    pr.N = 1;
    pr.M = 2;
    pr.L = 1;
    pr.alpha = 1.1;
    pr.q = {1.0, 1.8};
    GramMatrix Ap = build_gram(pr);
    double lhsp = panel_edge([&](double y) {
        Eigen::Matrix2d B;
        B << 1.0, phi_function(pr, 0, y), 1.0, phi_function(pr, 1, y);
        return psi_function(pr, 0, y) * B.determinant();
    });
    CHECK(lhsp == doctest::Approx(logdet(Ap.entries).to_double()).epsilon(1e-5));
}

TEST_CASE("block determinant identity on random matrices") {
    std::mt19937 rng(31415);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        int n = 2 + rep % 7; // up to 8x8
        int k = 1 + rep % (n - 1);
        Eigen::MatrixXd D(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) D(i, j) = g(rng);
        D += 3.0 * Eigen::MatrixXd::Identity(n, n); // keep blocks well conditioned
        Eigen::MatrixXd a = D.topLeftCorner(k, k), b = D.topRightCorner(k, n - k);
        Eigen::MatrixXd c = D.bottomLeftCorner(n - k, k), d = D.bottomRightCorner(n - k, n - k);
        double lhs = D.determinant();
        double rhs = a.determinant() * (d - c * a.inverse() * b).determinant();
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("block reconstruction of the inverse for monomial-extended grams") {
    std::mt19937 rng(5);
    for (int nu : {1, 2}) {
        CoupledParams c;
        c.N = 3;
        c.M = 3 + nu;
        c.L = 4;
        c.alpha = 1.8;
        c.delta = separated_draw(rng, c.N, 0.1, 1.0);
        c.q = separated_draw(rng, c.M, 0.9, 3.0);
        GramMatrix A = build_gram(c);
        GramInverse C = invert_gram(A);

        int nuB = A.nu, N = c.M - nuB;
        Eigen::MatrixXd a = A.entries.topLeftCorner(nuB, nuB);
        Eigen::MatrixXd b = A.entries.topRightCorner(nuB, N);
        Eigen::MatrixXd cc = A.entries.bottomLeftCorner(N, nuB);
        Eigen::MatrixXd d = A.entries.bottomRightCorner(N, N);
        Eigen::MatrixXd ai = a.inverse();
        Eigen::MatrixXd S = (d - cc * ai * b).inverse(); // Schur block of the inverse
        Eigen::MatrixXd R(c.M, c.M);
        R.topLeftCorner(nuB, nuB) = ai + ai * b * S * cc * ai;
        R.topRightCorner(nuB, N) = -ai * b * S;
        R.bottomLeftCorner(N, nuB) = -S * cc * ai;
        R.bottomRightCorner(N, N) = S;
        CHECK((R - C.entries).cwiseAbs().maxCoeff() < 1e-7 * C.entries.cwiseAbs().maxCoeff());
    }
}
