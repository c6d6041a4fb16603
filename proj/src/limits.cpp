#include "rmtkit/limits.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "rmtkit/errors.hpp"
#include "rmtkit/parallel.hpp"
#include "rmtkit/quadrature.hpp"
#include "rmtkit/specfun.hpp"

// The limit kernels live on two nested circles around the spike positions.
// Their integrable structure reduces every spike term to three closed
// families evaluated from one J-Bessel array:
//   Phi_p(b) = oint u^p e^{b u - 1/u} du/(2 pi i) = (-1)^{p+1} b^{-(p+1)/2} J_{p+1}(2 sqrt b)
//   Psi_p(a) = oint v^p e^{-a v + 1/v} dv/(2 pi i)  (entire series)
//   W(b, t)  = oint_{0,t} e^{b u - 1/u}/(u - t) du/(2 pi i)
// Rational spike factors are expanded into powers plus simple poles, so each
// spike pair costs a handful of Phi/Psi/W evaluations.

namespace rmtkit {
namespace {

using specfun::g_reg;
using specfun::h_reg;

constexpr double kPi = 3.14159265358979323846;

cplx ipow(cplx z, int k) {
    if (k < 0) return 1.0 / ipow(z, -k);
    cplx r = 1.0;
    while (k-- > 0) r *= z;
    return r;
}

double ipow_real(double z, int k) {
    if (k < 0) return 1.0 / ipow_real(z, -k);
    double r = 1.0;
    while (k-- > 0) r *= z;
    return r;
}

double jn_boost(int n, double x) {
    double v = boost::math::cyl_bessel_j(static_cast<double>(std::abs(n)), x);
    return (n < 0 && (n & 1)) ? -v : v;
}

// J_0..J_jmax at fixed argument by backward recurrence, normalised with
// J_0 + 2 J_2 + 2 J_4 + ... = 1.  Stable for all orders, including past the
// turning point where upward recurrence explodes.
void bessel_j_array(double z, int jmax, std::vector<double>& J) {
    J.assign(jmax + 1, 0.0);
    if (z < 1e-10) {
        double t = 1.0;
        for (int j = 0; j <= jmax; ++j) {
            J[j] = t;
            t *= 0.5 * z / (j + 1);
            if (t == 0.0) break;
        }
        return;
    }
    int M = jmax + 64 + static_cast<int>(std::sqrt(40.0 * jmax) + 0.25 * z);
    double fp = 0.0, fc = 1e-280, sum = 0.0;
    for (int j = M; j >= 1; --j) {
        double fm = (2.0 * j / z) * fc - fp;
        fp = fc;
        fc = fm;
        int ord = j - 1;
        if (ord <= jmax) J[ord] = fc;
        if (ord >= 2 && ord % 2 == 0) sum += 2.0 * fc;
        if (std::abs(fc) > 1e260) {
            fc *= 1e-200;
            fp *= 1e-200;
            sum *= 1e-200;
            for (double& v : J) v *= 1e-200;
        }
    }
    sum += fc;
    double inv = 1.0 / sum;
    for (double& v : J) v *= inv;
}

void bessel_j_array_c(cplx z, int jmax, std::vector<cplx>& J) {
    J.assign(jmax + 1, 0.0);
    if (std::abs(z) < 1e-10) {
        cplx t = 1.0;
        for (int j = 0; j <= jmax; ++j) {
            J[j] = t;
            t *= 0.5 * z / double(j + 1);
            if (std::abs(t) == 0.0) break;
        }
        return;
    }
    int M = jmax + 64 + static_cast<int>(std::sqrt(40.0 * jmax) + 0.25 * std::abs(z));
    cplx fp = 0.0, fc = 1e-280, sum = 0.0;
    for (int j = M; j >= 1; --j) {
        cplx fm = (2.0 * j / z) * fc - fp;
        fp = fc;
        fc = fm;
        int ord = j - 1;
        if (ord <= jmax) J[ord] = fc;
        if (ord >= 2 && ord % 2 == 0) sum += 2.0 * fc;
        if (std::abs(fc) > 1e260) {
            fc *= 1e-200;
            fp *= 1e-200;
            sum *= 1e-200;
            for (cplx& v : J) v *= 1e-200;
        }
    }
    sum += fc;
    cplx inv = 1.0 / sum;
    for (cplx& v : J) v *= inv;
}

double jn_refl(const std::vector<double>& J, int ord) {
    if (ord >= 0) return J[ord];
    return ((-ord) & 1) ? -J[-ord] : J[-ord];
}

// ---- rational spike algebra -------------------------------------------------

// Monic polynomial with the given roots, coefficients in descending degree.
std::vector<double> poly_coeffs(const std::vector<double>& roots) {
    std::vector<double> c{1.0};
    for (double r : roots) {
        c.push_back(0.0);
        for (size_t k = c.size() - 1; k >= 1; --k) c[k] -= r * c[k - 1];
    }
    return c;
}

// u^p / prod_k (u - th_k) = sum Q_d u^d + sum B_j u^{-j} + sum A_k/(u - th_k).
// Roots at zero are absorbed into the power p.
struct PolyFrac {
    std::vector<std::pair<int, double>> Q; // (degree, coeff), degree >= 0
    std::vector<std::pair<int, double>> B; // (j, coeff) for u^{-j}, j >= 1
    std::vector<double> A;                 // residues, aligned with ths
    std::vector<double> ths;               // nonzero poles
};

PolyFrac polyfrac(int p, const std::vector<double>& ths_in) {
    PolyFrac r;
    for (double t : ths_in) {
        if (std::abs(t) < 1e-14) {
            --p;
        } else {
            r.ths.push_back(t);
        }
    }
    int i = static_cast<int>(r.ths.size());
    for (int a = 0; a < i; ++a)
        for (int b = a + 1; b < i; ++b)
            if (std::abs(r.ths[a] - r.ths[b]) < 1e-12)
                throw parameter_error("spike positions must be distinct for the decomposition");
    if (i == 0) {
        if (p >= 0)
            r.Q.push_back({p, 1.0});
        else
            r.B.push_back({-p, 1.0});
        return r;
    }
    for (int k = 0; k < i; ++k) {
        double den = 1.0;
        for (int j = 0; j < i; ++j)
            if (j != k) den *= (r.ths[k] - r.ths[j]);
        r.A.push_back(ipow_real(r.ths[k], p) / den);
    }
    std::vector<double> d = poly_coeffs(r.ths); // descending, monic
    if (p >= i) {
        std::vector<double> cur(p + 1, 0.0);
        cur[0] = 1.0;
        for (int j = 0; j + i <= p; ++j) {
            double qj = cur[j];
            if (qj != 0.0) r.Q.push_back({p - i - j, qj});
            for (int t = 1; t <= i; ++t) cur[j + t] -= qj * d[t];
        }
    }
    if (p < 0) {
        int n0 = -p;
        std::vector<double> asc(d.rbegin(), d.rend()); // ascending powers
        std::vector<double> c(n0, 0.0);
        c[0] = 1.0 / asc[0];
        for (int rr = 1; rr < n0; ++rr) {
            double acc = 0.0;
            for (int dd = 1; dd <= std::min<int>(rr, i); ++dd) acc += asc[dd] * c[rr - dd];
            c[rr] = -acc / asc[0];
        }
        for (int rr = 0; rr < n0; ++rr) r.B.push_back({n0 - rr, c[rr]});
    }
    return r;
}

// oint_{0, ths} e^{b u - 1/u} u^p / prod(u - th) du/(2 pi i), expanded once and
// then evaluated per b from a shared J array.
struct XiRatForm {
    std::vector<std::pair<int, double>> phi; // coefficient of Phi_d(b)
    std::vector<std::pair<double, double>> ws; // (th, residue) for W(b, th)
    int max_ord = 1;
};

XiRatForm xi_rat_form(int p, const std::vector<double>& ths) {
    PolyFrac pf = polyfrac(p, ths);
    XiRatForm f;
    for (auto [d, c] : pf.Q) f.phi.push_back({d, c});
    for (auto [j, c] : pf.B) f.phi.push_back({-j, c});
    for (size_t k = 0; k < pf.ths.size(); ++k) f.ws.push_back({pf.ths[k], pf.A[k]});
    for (auto [d, c] : f.phi) f.max_ord = std::max(f.max_ord, std::abs(d + 1));
    return f;
}

struct XiSum {
    std::vector<std::pair<double, XiRatForm>> parts;
    int max_ord = 1;
};

XiSum xi_sum_pow(int i, const std::vector<double>& ths, int nu, int n, int m) {
    XiSum s;
    std::vector<double> sub(ths.begin(), ths.begin() + i);
    s.parts.push_back({1.0, xi_rat_form(m - nu - n, sub)});
    s.max_ord = s.parts[0].second.max_ord;
    return s;
}

XiSum xi_sum_mixed(int j, const std::vector<double>& pis, const std::vector<double>& ths, int nu,
                   int n, int m) {
    XiSum s;
    std::vector<double> np(pis.begin(), pis.begin() + std::max(0, j - 1));
    std::vector<double> P = poly_coeffs(np);
    int deg = static_cast<int>(P.size()) - 1;
    for (int d = 0; d <= deg; ++d) {
        if (P[d] == 0.0) continue;
        s.parts.push_back({P[d], xi_rat_form(m - nu - n + deg - d, ths)});
        s.max_ord = std::max(s.max_ord, s.parts.back().second.max_ord);
    }
    return s;
}

double w_from_array(double b, double th, const std::vector<double>& J) {
    double sb = std::sqrt(b);
    double w = th * sb;
    int jmax = static_cast<int>(J.size()) - 1;
    if (std::abs(w) <= 1.0) {
        double s = 0.0, wp = 1.0, t = 0.0;
        for (int j = 0; j <= jmax; ++j) {
            t = wp * J[j];
            s += t;
            wp *= w;
            if (std::abs(t) < 1e-17 * (1.0 + std::abs(s)) && j > 8) return s;
        }
        if (std::abs(t) > 1e-12 * (1.0 + std::abs(s)))
            throw convergence_error("spike pole series did not converge");
        return s;
    }
    double arg = b * th - 1.0 / th;
    if (arg > 700.0) throw convergence_error("spike pole weight overflows");
    double s = std::exp(arg), winv = 1.0 / w, cur = 1.0, t = 0.0;
    for (int i = 1; i <= jmax; ++i) {
        cur *= winv;
        t = ((i & 1) ? -1.0 : 1.0) * cur * J[i];
        s -= t;
        if (std::abs(t) < 1e-17 * (1.0 + std::abs(s)) && i > 8) return s;
    }
    if (std::abs(t) > 1e-12 * (1.0 + std::abs(s)))
        throw convergence_error("spike pole series did not converge");
    return s;
}

double xi_eval_with(const XiSum& xs, double b, const std::vector<double>& J) {
    double out = 0.0;
    for (const auto& [coef, form] : xs.parts) {
        double part = 0.0;
        for (auto [d, c] : form.phi) {
            double Jv = jn_refl(J, d + 1);
            double sign = ((d + 1) & 1) ? -1.0 : 1.0;
            part += c * sign * std::pow(b, -0.5 * (d + 1)) * Jv;
        }
        for (auto [th, A] : form.ws) part += A * w_from_array(b, th, J);
        out += coef * part;
    }
    return out;
}

double xi_eval(const XiSum& xs, double b) {
    double z = 2.0 * std::sqrt(b);
    int jmax = static_cast<int>(z) + 90 + xs.max_ord;
    std::vector<double> J;
    bessel_j_array(z, jmax, J);
    return xi_eval_with(xs, b, J);
}

// Psi_p(a): coefficient extraction of e^{-a v + 1/v} against v^p.
cplx psi_p(int p, cplx a) { return g_reg(p + 1, -a); }

// oint_{0,th} e^{-a v + 1/v}/(v - th) dv/(2 pi i) for complex a equals the W
// series continued in a.
cplx w_cplx(cplx a, double th) {
    cplx sa = std::sqrt(a);
    cplx z = 2.0 * sa;
    cplx w = th * sa;
    int jmax = static_cast<int>(std::abs(z)) + 120;
    std::vector<cplx> J;
    bessel_j_array_c(z, jmax, J);
    if (std::abs(w) <= 1.0) {
        cplx s = 0.0, wp = 1.0, t = 0.0;
        for (int j = 0; j <= jmax; ++j) {
            t = wp * J[j];
            s += t;
            wp *= w;
            if (std::abs(t) < 1e-17 * (1.0 + std::abs(s)) && j > 8) return s;
        }
        if (std::abs(t) > 1e-12 * (1.0 + std::abs(s)))
            throw convergence_error("spike pole series did not converge");
        return s;
    }
    cplx s = std::exp(a * th - 1.0 / th);
    cplx winv = 1.0 / w, cur = 1.0, t = 0.0;
    for (int i = 1; i <= jmax; ++i) {
        cur *= winv;
        t = ((i & 1) ? -1.0 : 1.0) * cur * J[i];
        s -= t;
        if (std::abs(t) < 1e-17 * (1.0 + std::abs(s)) && i > 8) return s;
    }
    if (std::abs(t) > 1e-12 * (1.0 + std::abs(s)))
        throw convergence_error("spike pole series did not converge");
    return s;
}

// oint e^{-a v + 1/v} v^{p_base} prod(v - num_k) / prod(v - den_l) dv/(2 pi i).
cplx lam_general(int p_base, const std::vector<double>& num, const std::vector<double>& den,
                 cplx a) {
    std::vector<double> P = poly_coeffs(num);
    int deg = static_cast<int>(P.size()) - 1;
    cplx s = 0.0;
    for (int d = 0; d <= deg; ++d) {
        if (P[d] == 0.0) continue;
        PolyFrac pf = polyfrac(p_base + deg - d, den);
        cplx part = 0.0;
        for (auto [dd, c] : pf.Q) part += c * psi_p(dd, a);
        for (auto [jj, c] : pf.B) part += c * psi_p(-jj, a);
        for (size_t k = 0; k < pf.ths.size(); ++k) part += pf.A[k] * w_cplx(a, -pf.ths[k]);
        s += P[d] * part;
    }
    return s;
}

// ---- grids ------------------------------------------------------------------

struct CircleGrid {
    std::vector<cplx> z, dz;
};

CircleGrid make_circle(double c, double r, int n, double phase = 0.5) {
    CircleGrid g;
    g.z.resize(n);
    g.dz.resize(n);
    for (int k = 0; k < n; ++k) {
        double th = 2.0 * kPi * (k + phase) / n;
        cplx e(std::cos(th), std::sin(th));
        g.z[k] = c + r * e;
        g.dz[k] = cplx(0.0, 1.0) * r * e * (2.0 * kPi / n);
    }
    return g;
}

cplx simpson_uniform(const std::vector<cplx>& f, double h) {
    size_t n = f.size();
    cplx s = f[0] + f[n - 1];
    for (size_t k = 1; k + 1 < n; ++k) s += f[k] * ((k & 1) ? 4.0 : 2.0);
    return s * (h / 3.0);
}

std::vector<cplx> stride2(const std::vector<cplx>& f) {
    std::vector<cplx> g;
    g.reserve((f.size() + 1) / 2);
    for (size_t k = 0; k < f.size(); k += 2) g.push_back(f[k]);
    return g;
}

// Trapezoid on [q0, q0 + (n-1)h] truncated at full length and at the two
// marked indices, averaged 1/4, 1/2, 1/4.  The staggered truncations cancel
// the oscillatory tail left over at the window edge.
cplx euler_avg(const std::vector<cplx>& f, double h, int i1, int i2) {
    int n = static_cast<int>(f.size());
    i1 = std::clamp(i1, 1, n - 1);
    i2 = std::clamp(i2, 1, n - 1);
    cplx run = 0.5 * f[0];
    cplx p1 = 0.0, p2 = 0.0;
    for (int k = 1; k < n; ++k) {
        if (k == i1) p1 = (run + 0.5 * f[k]) * h;
        if (k == i2) p2 = (run + 0.5 * f[k]) * h;
        run += (k + 1 < n) ? f[k] : 0.5 * f[k];
    }
    cplx p0 = run * h;
    return 0.25 * p0 + 0.5 * p1 + 0.25 * p2;
}

// ---- composition machinery (two-sided Gamma-type weight over the b side) ----

struct SpikeForms {
    int ne = 0;
    std::vector<XiSum> theta_side; // i = 1..m
    std::vector<XiSum> pi_side;    // j = 1..n
};

SpikeForms spike_forms(const PerturbationSet& p, int nu) {
    SpikeForms sf;
    int n = p.n(), m = p.m();
    sf.ne = nu + n - m;
    for (int i = 1; i <= m; ++i) sf.theta_side.push_back(xi_sum_pow(i, p.theta_hat, nu, n, m));
    for (int j = 1; j <= n; ++j)
        sf.pi_side.push_back(xi_sum_mixed(j, p.pi_hat, p.theta_hat, nu, n, m));
    return sf;
}

struct BNode {
    double P1 = 0.0, P2 = 0.0;
    std::vector<double> xiT, xiN;
};

void fill_bnodes(const std::vector<double>& bs, const SpikeForms& sf, std::vector<BNode>& out) {
    int mo = 1 + std::abs(sf.ne) + 1;
    for (const auto& xs : sf.theta_side) mo = std::max(mo, xs.max_ord);
    for (const auto& xs : sf.pi_side) mo = std::max(mo, xs.max_ord);
    out.resize(bs.size());
    std::vector<double> J;
    for (size_t k = 0; k < bs.size(); ++k) {
        double b = bs[k];
        double z = 2.0 * std::sqrt(b);
        bessel_j_array(z, static_cast<int>(z) + 90 + mo, J);
        BNode& nd = out[k];
        nd.P1 = std::pow(b, 0.5 * sf.ne) * jn_refl(J, sf.ne);
        nd.P2 = std::pow(b, 0.5 * (sf.ne + 1)) * jn_refl(J, sf.ne + 1);
        nd.xiT.resize(sf.theta_side.size());
        for (size_t i = 0; i < sf.theta_side.size(); ++i)
            nd.xiT[i] = xi_eval_with(sf.theta_side[i], b, J);
        nd.xiN.resize(sf.pi_side.size());
        for (size_t j = 0; j < sf.pi_side.size(); ++j)
            nd.xiN[j] = xi_eval_with(sf.pi_side[j], b, J);
    }
}

// Spiked rank-(n,m) regime III kernel for complex first argument a and real b,
// assembled per node from the hoisted closed forms.
struct MixedEval {
    cplx ga0, ga1;
    std::vector<cplx> lamT, lamN;

    void set(const PerturbationSet& p, int nu, cplx a) {
        int n = p.n(), m = p.m();
        int ne = nu + n - m;
        ga0 = g_reg(ne, -a);
        ga1 = g_reg(ne + 1, -a);
        lamT.resize(m);
        for (int i = 1; i <= m; ++i) {
            std::vector<double> num(p.theta_hat.begin(), p.theta_hat.begin() + (i - 1));
            lamT[i - 1] = lam_general(ne, num, {}, a);
        }
        lamN.resize(n);
        for (int j = 1; j <= n; ++j) {
            std::vector<double> den(p.pi_hat.begin(), p.pi_hat.begin() + j);
            lamN[j - 1] = lam_general(ne, p.theta_hat, den, a);
        }
    }

    cplx at(cplx a, const BNode& nd, double b) const {
        cplx v = (a * ga1 * nd.P1 - nd.P2 * ga0) / (a - b);
        for (size_t i = 0; i < lamT.size(); ++i) v -= lamT[i] * nd.xiT[i];
        for (size_t j = 0; j < lamN.size(); ++j) v += lamN[j] * nd.xiN[j];
        return v;
    }
};

struct CompEst {
    cplx value{};
    double est = 0.0;
};

// oint ds/(2 pi i) int_0^inf dt s^{-kappa-1} t^{kappa-1} e^{s-t} wS(s) wT(t)
// K(a(s), b(t)) with the t integral split at t0: Simpson on [t0, tmax] and a
// q = sqrt(b) substitution below t0 where the integrand oscillates.
struct CompSpec {
    int kappa = 0;
    int ns = 48;
    int nt = 2801;
    double t0 = 1.0, tmax = 44.0;
    double Q = 140.0;
    int nq = 22000;
    std::function<cplx(cplx)> sfac;          // extra s-side factor (1 if none)
    std::function<double(double)> wt;        // tail weight at t (full weight)
    std::function<double(double)> wq;        // head weight at q (includes dt/dq)
    std::function<double(double)> b_of_t;    // tail map
    std::function<double(double)> b_of_q;    // head map
    std::function<cplx(cplx)> a_of_s;
};

CompEst compose(const CompSpec& cs, const PerturbationSet& p, int nu) {
    SpikeForms sf = spike_forms(p, nu);
    std::vector<double> ts(cs.nt), bt(cs.nt);
    double ht = (cs.tmax - cs.t0) / (cs.nt - 1);
    for (int k = 0; k < cs.nt; ++k) {
        ts[k] = cs.t0 + ht * k;
        bt[k] = cs.b_of_t(ts[k]);
    }
    double q0 = std::sqrt(cs.b_of_t(cs.t0));
    if (cs.Q <= q0 + 2.0 * kPi + 1.0) throw convergence_error("head window too small");
    std::vector<double> qs(cs.nq), bq(cs.nq);
    double hq = (cs.Q - q0) / (cs.nq - 1);
    for (int k = 0; k < cs.nq; ++k) {
        qs[k] = q0 + hq * k;
        bq[k] = cs.b_of_q(qs[k]);
    }
    int i1 = static_cast<int>(std::lower_bound(qs.begin(), qs.end(), cs.Q - kPi) - qs.begin());
    int i2 = static_cast<int>(std::lower_bound(qs.begin(), qs.end(), cs.Q - 2.0 * kPi) - qs.begin());

    std::vector<BNode> nt_nodes, nq_nodes;
    fill_bnodes(bt, sf, nt_nodes);
    fill_bnodes(bq, sf, nq_nodes);
    std::vector<double> wts(cs.nt), wqs(cs.nq);
    for (int k = 0; k < cs.nt; ++k) wts[k] = cs.wt(ts[k]);
    for (int k = 0; k < cs.nq; ++k) wqs[k] = cs.wq(qs[k]);

    CircleGrid sc = make_circle(0.0, 1.0, cs.ns);
    MixedEval me;
    std::vector<cplx> tv(cs.nt), qv(cs.nq);
    cplx full = 0.0, coarse = 0.0;
    for (int si = 0; si < cs.ns; ++si) {
        cplx s = sc.z[si];
        cplx a = cs.a_of_s(s);
        me.set(p, nu, a);
        for (int k = 0; k < cs.nt; ++k) tv[k] = wts[k] * me.at(a, nt_nodes[k], bt[k]);
        for (int k = 0; k < cs.nq; ++k) qv[k] = wqs[k] * me.at(a, nq_nodes[k], bq[k]);
        cplx tail = simpson_uniform(tv, ht);
        cplx head = euler_avg(qv, hq, i1, i2);
        cplx w = ipow(s, -cs.kappa - 1) * std::exp(s) * cs.sfac(s) * sc.dz[si];
        full += w * (tail + head);
        if (si % 2 == 0) {
            cplx tail_c = simpson_uniform(stride2(tv), 2.0 * ht);
            cplx head_c = euler_avg(stride2(qv), 2.0 * hq, (i1 + 1) / 2, (i2 + 1) / 2);
            coarse += 2.0 * w * (tail_c + head_c);
        }
    }
    cplx den(0.0, 2.0 * kPi);
    CompEst r;
    r.value = full / den;
    r.est = std::abs(full - coarse) / (2.0 * kPi);
    return r;
}

// Rank-zero wide-edge base through the composition, with shifted index ne.
CompEst compose_base(double x, double y, int kappa, int ne) {
    CompSpec cs;
    cs.kappa = kappa;
    cs.sfac = [](cplx) { return cplx(1.0); };
    cs.wt = [kappa](double t) { return std::pow(t, kappa - 1.0) * std::exp(-t); };
    cs.wq = [kappa, y](double q) {
        double t = y / (q * q);
        return std::pow(t, kappa - 1.0) * std::exp(-t) * 2.0 * y / (q * q * q);
    };
    cs.b_of_t = [y](double t) { return y / t; };
    cs.b_of_q = [](double q) { return q * q; };
    cs.a_of_s = [x](cplx s) { return x / s; };
    PerturbationSet none;
    return compose(cs, none, ne);
}

// int_0^inf t^{kappa-1} e^{-t} xi(y/t) dt with the same split grids.
CompEst xi_tint(const XiSum& xs, double y, int kappa) {
    int nt = 2801, nq = 22000;
    double t0 = 1.0, tmax = 44.0, Q = 140.0;
    double ht = (tmax - t0) / (nt - 1);
    std::vector<cplx> tv(nt);
    for (int k = 0; k < nt; ++k) {
        double t = t0 + ht * k;
        tv[k] = std::pow(t, kappa - 1.0) * std::exp(-t) * xi_eval(xs, y / t);
    }
    double q0 = std::sqrt(y / t0);
    double hq = (Q - q0) / (nq - 1);
    std::vector<double> qs(nq);
    std::vector<cplx> qv(nq);
    for (int k = 0; k < nq; ++k) {
        double q = q0 + hq * k;
        qs[k] = q;
        double t = y / (q * q);
        qv[k] = std::pow(t, kappa - 1.0) * std::exp(-t) * (2.0 * y / (q * q * q)) * xi_eval(xs, q * q);
    }
    int i1 = static_cast<int>(std::lower_bound(qs.begin(), qs.end(), Q - kPi) - qs.begin());
    int i2 = static_cast<int>(std::lower_bound(qs.begin(), qs.end(), Q - 2.0 * kPi) - qs.begin());
    cplx full = simpson_uniform(tv, ht) + euler_avg(qv, hq, i1, i2);
    cplx coarse = simpson_uniform(stride2(tv), 2.0 * ht) +
                  euler_avg(stride2(qv), 2.0 * hq, (i1 + 1) / 2, (i2 + 1) / 2);
    return {full, std::abs(full - coarse)};
}

// Theta-side pairing coefficient of the wide-edge decomposition: a plain
// circle around the origin (the integrand has no other singularity).
cplx lam_I(int i, double x, int kappa, int nu, const std::vector<double>& ths) {
    int m = static_cast<int>(ths.size());
    auto f = [&](cplx v) {
        cplx r = std::exp(1.0 / v) * ipow(v, nu - m) * g_reg(kappa, -v * x);
        for (int k = 0; k < i - 1; ++k) r *= (v - ths[k]);
        return r;
    };
    QuadratureResult qr = integrate_contour(f, Contour{0.0, 0.45, true, 64}, 1e-11, 1 << 12);
    return qr.value;
}

// ---- direct double contours -------------------------------------------------

void hulls(const PerturbationSet& p, double& lo_in, double& hi_in, double& lo_o, double& hi_o) {
    lo_in = 0.0;
    hi_in = 0.0;
    for (double t : p.theta_hat) {
        lo_in = std::min(lo_in, t);
        hi_in = std::max(hi_in, t);
    }
    lo_o = lo_in;
    hi_o = hi_in;
    for (double q : p.pi_hat) {
        lo_o = std::min(lo_o, q);
        hi_o = std::max(hi_o, q);
    }
}

void clamp_right(double& c, double& r, double limit, const char* what) {
    if (c + r > limit) {
        double left = c - r;
        c = 0.5 * (left + limit);
        r = 0.5 * (limit - left);
    }
    if (r <= 0.0) throw geometry_error(std::string("contour clearance failed for ") + what);
}

KernelValue kernel_III_direct(const PerturbationSet& p, int nu, double x, double y, double tol) {
    int n = p.n(), m = p.m();
    int ne = nu + n - m;
    double li, hi, lo, ho;
    hulls(p, li, hi, lo, ho);
    ContourPair pair;
    pair.kind = PairKind::nested;
    pair.inner = Contour{0.5 * (li + hi), 0.5 * (hi - li) + 0.4, true, 64};
    pair.outer = Contour{0.5 * (lo + ho), 0.5 * (ho - lo) + 0.8, true, 64};
    auto f = [&](cplx u, cplx v) {
        cplx r = std::exp(-x * v + y * u) * std::exp(-1.0 / u + 1.0 / v) / (u - v);
        r *= ipow(v / u, ne);
        for (int l = 0; l < n; ++l) r *= (u - p.pi_hat[l]) / (v - p.pi_hat[l]);
        for (int k = 0; k < m; ++k) r *= (v - p.theta_hat[k]) / (u - p.theta_hat[k]);
        return r;
    };
    QuadratureResult qr = integrate_double_contour(f, pair, tol, 1 << 12);
    return {qr.value.real(), qr.est_error + std::abs(qr.value.imag())};
}

KernelValue kernel_II_direct(const PerturbationSet& p, double tau, int kappa, int nu, double x,
                             double y, double tol) {
    int n = p.n(), m = p.m();
    int ne = nu + n - m;
    double li, hi, lo, ho;
    hulls(p, li, hi, lo, ho);
    double lim = 0.9 / tau;
    double ci = 0.5 * (li + hi), ri = 0.5 * (hi - li) + 0.4;
    double co = 0.5 * (li + ho), ro = 0.5 * (ho - li) + 0.8;
    clamp_right(ci, ri, 0.85 * lim, "the inner circle");
    clamp_right(co, ro, lim, "the outer circle");
    if (std::abs(co - ci) + ri >= ro) throw geometry_error("clock contours are not nested");
    ContourPair pair;
    pair.kind = PairKind::nested;
    pair.inner = Contour{ci, ri, true, 64};
    pair.outer = Contour{co, ro, true, 64};
    double t2 = tau * tau;
    auto f = [&](cplx u, cplx v) {
        cplx r = g_reg(kappa, x * (1.0 - tau * v) / t2) * h_reg(kappa, y * (1.0 - tau * u) / t2);
        r *= std::exp(-1.0 / u + 1.0 / v) / (u - v) * ipow(v / u, ne);
        for (int l = 0; l < n; ++l) r *= (u - p.pi_hat[l]) / (v - p.pi_hat[l]);
        for (int k = 0; k < m; ++k) r *= (v - p.theta_hat[k]) / (u - p.theta_hat[k]);
        return r;
    };
    QuadratureResult qr = integrate_double_contour(f, pair, tol, 1 << 13);
    double gauge = std::pow(x / y, 0.5 * kappa);
    double val = gauge * (2.0 / tau) * qr.value.real();
    double est = gauge * (2.0 / tau) * (qr.est_error + std::abs(qr.value.imag()));
    return {val, est};
}

KernelValue kernel_II_comp(const PerturbationSet& p, double tau, int kappa, int nu, double x,
                           double y) {
    if (tau <= 0.0) throw parameter_error("clock tau must be positive");
    double thmax = 0.0;
    for (double t : p.theta_hat) thmax = std::max(thmax, t);
    double guard = std::min(1.0, std::max(0.2, 1.0 - tau * thmax));
    if (tau * thmax >= 1.0)
        throw parameter_error("allbounds: tau * theta_hat must stay below 1");
    CompSpec cs;
    cs.kappa = kappa;
    cs.ns = 32;
    cs.nt = 2001;
    cs.Q = 1.25 * std::sqrt(46.0 * std::max(1.0, tau) / guard) + 4.0;
    cs.nq = static_cast<int>(170.0 * cs.Q);
    double t2 = tau * tau;
    cs.sfac = [x, t2](cplx s) { return std::exp(x / (s * t2)); };
    cs.wt = [kappa, y, t2](double t) {
        return std::pow(t, kappa - 1.0) * std::exp(-t) * std::exp(-y / (t * t2));
    };
    cs.wq = [kappa, y, tau, t2](double q) {
        double t = y / (tau * q * q);
        return std::pow(t, kappa - 1.0) * std::exp(-t) * std::exp(-y / (t * t2)) * 2.0 * y /
               (tau * q * q * q);
    };
    cs.b_of_t = [y, tau](double t) { return y / (tau * t); };
    cs.b_of_q = [](double q) { return q * q; };
    cs.a_of_s = [x, tau](cplx s) { return x / (s * tau); };
    CompEst ce = compose(cs, p, nu);
    double pre = std::pow(x / y, 0.5 * kappa) / tau;
    return {pre * ce.value.real(), pre * (ce.est + std::abs(ce.value.imag()))};
}

// ---- wide-edge kernel through the K-Bessel transform ------------------------

struct HankelParts {
    std::vector<cplx> gfT2048, gfT4096; // gfac * T * du at two inner resolutions
    std::vector<cplx> U2048, U4096;
    double R = 0.0, cin = 0.0, rin = 0.0;
};

cplx hankel_gfac(cplx u, int kappa, int nu, int m, const std::vector<double>& ths) {
    (void)kappa;
    cplx r = std::exp(-1.0 / u) * ipow(u, m - nu);
    for (double th : ths) r /= (u - th);
    return r;
}

KernelValue kernel_I_hankel(const PerturbationSet& p, int kappa, int nu, double x, double y,
                            double tol) {
    const std::vector<double>& ths = p.theta_hat;
    int m = p.m();
    double tmin = 0.0;
    for (double t : ths) tmin = std::min(tmin, t);
    double cin = 0.5 * tmin, rin = 0.5 * std::abs(tmin) + 0.4;
    double cout = cin, rout = rin + 0.8;
    double R = cin + rin;

    auto build = [&](int nU, std::vector<cplx>& Us, std::vector<cplx>& gfT) {
        CircleGrid g = make_circle(cin, rin, nU); // phase offset keeps nodes off the K cut
        Us = g.z;
        gfT.resize(nU);
        for (int k = 0; k < nU; ++k) {
            cplx T = 2.0 * h_reg(kappa, -g.z[k] * y);
            gfT[k] = hankel_gfac(g.z[k], kappa, nu, m, ths) * T * g.dz[k];
        }
    };
    HankelParts hp;
    hp.R = R;
    build(2048, hp.U2048, hp.gfT2048);
    build(4096, hp.U4096, hp.gfT4096);

    auto cut_integrand = [&](double r) -> double {
        if (r < 1e-10) return 0.0;
        double g = std::exp(-1.0 / r) * ipow_real(r, m - nu);
        for (double th : ths) g /= (r - th);
        return g * std::pow(r * y, 0.5 * kappa) * jn_boost(kappa, 2.0 * std::sqrt(r * y));
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    auto cut = [&](cplx v) -> cplx {
        double re = GK::integrate([&](double r) { return std::real(cut_integrand(r) / (r - v)); },
                                  0.0, R, 12, 1e-9);
        double im = GK::integrate([&](double r) { return std::imag(cut_integrand(r) / (r - v)); },
                                  0.0, R, 12, 1e-9);
        return cplx(re, im);
    };
    auto vfac = [&](cplx v) {
        cplx r = g_reg(kappa, -v * x) * std::exp(1.0 / v) * ipow(v, nu - m);
        for (double th : ths) r *= (v - th);
        return r;
    };
    cplx twoPiI(0.0, 2.0 * kPi);
    auto inner_sum = [&](const std::vector<cplx>& Us, const std::vector<cplx>& gfT, cplx v) {
        cplx s = 0.0;
        for (size_t k = 0; k < Us.size(); ++k) s += gfT[k] / (Us[k] - v);
        return s / twoPiI;
    };

    // outer circle: plain trapezoid with node reuse; the integrand is analytic
    // in an annulus, so doubling converges geometrically
    struct Pair2 {
        cplx fine, coarse;
    };
    auto eval_outer = [&](cplx v) -> Pair2 {
        cplx cr = cut(v);
        cplx vf = vfac(v);
        return {vf * (inner_sum(hp.U4096, hp.gfT4096, v) + cr),
                vf * (inner_sum(hp.U2048, hp.gfT2048, v) + cr)};
    };
    int nV = 64;
    std::vector<Pair2> vals(nV);
    for (int k = 0; k < nV; ++k) {
        double th = 2.0 * kPi * k / nV;
        vals[k] = eval_outer(cout + rout * cplx(std::cos(th), std::sin(th)));
    }
    auto total = [&](const std::vector<Pair2>& vs, bool fine) {
        int nn = static_cast<int>(vs.size());
        cplx s = 0.0;
        for (int k = 0; k < nn; ++k) {
            double th = 2.0 * kPi * k / nn;
            cplx e(std::cos(th), std::sin(th));
            s += (fine ? vs[k].fine : vs[k].coarse) * cplx(0.0, 1.0) * rout * e * (2.0 * kPi / nn);
        }
        return s / twoPiI;
    };
    cplx prev = total(vals, true);
    double quad_est = std::abs(prev);
    while (nV < 4096) {
        std::vector<Pair2> next(2 * nV);
        for (int k = 0; k < nV; ++k) next[2 * k] = vals[k];
        for (int k = 0; k < nV; ++k) {
            double th = 2.0 * kPi * (2 * k + 1) / (2 * nV);
            next[2 * k + 1] = eval_outer(cout + rout * cplx(std::cos(th), std::sin(th)));
        }
        vals.swap(next);
        nV *= 2;
        cplx curv = total(vals, true);
        quad_est = std::abs(curv - prev);
        prev = curv;
        if (quad_est <= tol * std::max(1.0, std::abs(curv)) && nV >= 256) break;
    }
    cplx fine = prev;
    cplx coarse = total(vals, false);
    double est = quad_est + std::abs(fine - coarse) + std::abs(fine.imag());
    return {fine.real(), est};
}

KernelValue kernel_I_comp(const PerturbationSet& p, int kappa, int nu, double x, double y) {
    int m = p.m();
    CompEst base = compose_base(x, y, kappa, nu - m);
    double val = base.value.real();
    double est = base.est + std::abs(base.value.imag());
    for (int i = 1; i <= m; ++i) {
        cplx lam = lam_I(i, x, kappa, nu, p.theta_hat);
        XiSum xs = xi_sum_pow(i, p.theta_hat, nu, 0, m);
        CompEst xi = xi_tint(xs, y, kappa);
        val -= lam.real() * xi.value.real();
        est += std::abs(lam) * xi.est + 1e-11 * std::abs(xi.value);
    }
    return {val, est};
}

// ---- regime II spike pairs (small contours) ---------------------------------

IntegrableDecomposition decompose_II(const PerturbationSet& p, double tau, int kappa, int nu,
                                     double x, double y) {
    int n = p.n(), m = p.m();
    int ne = nu + n - m;
    PerturbationSet none;
    KernelValue base = kernel_II_direct(none, tau, kappa, ne, x, y, 1e-11);
    double lim = 0.9 / tau;
    double lo_t = 0.0, hi_t = 0.0;
    for (double t : p.theta_hat) {
        lo_t = std::min(lo_t, t);
        hi_t = std::max(hi_t, t);
    }
    double ct = 0.5 * (lo_t + hi_t), rt = 0.5 * (hi_t - lo_t) + 0.4;
    clamp_right(ct, rt, lim, "the theta-side circle");
    double lo_p = 0.0, hi_p = 0.0;
    for (double q : p.pi_hat) {
        lo_p = std::min(lo_p, q);
        hi_p = std::max(hi_p, q);
    }
    double cp = 0.5 * (lo_p + hi_p), rp = 0.5 * (hi_p - lo_p) + 0.4;
    clamp_right(cp, rp, lim, "the pi-side circle");
    double t2 = tau * tau;
    auto gv = [&](cplx v) {
        return std::pow(x / t2, 0.5 * kappa) * g_reg(kappa, x * (1.0 - tau * v) / t2);
    };
    auto hu = [&](cplx u) {
        return std::pow(y / t2, -0.5 * kappa) * h_reg(kappa, y * (1.0 - tau * u) / t2);
    };
    IntegrableDecomposition d;
    d.base = base.value;
    double tot = base.value;
    for (int i = 1; i <= m; ++i) {
        auto fl = [&](cplx v) {
            cplx r = gv(v) * std::exp(1.0 / v) * ipow(v, ne);
            for (int k = 0; k < i - 1; ++k) r *= (v - p.theta_hat[k]);
            return r;
        };
        auto fx = [&](cplx u) {
            cplx r = hu(u) * std::exp(-1.0 / u) * ipow(u, -ne);
            for (int k = 0; k < i; ++k) r /= (u - p.theta_hat[k]);
            return r;
        };
        double lam = integrate_contour(fl, Contour{cp, rp, true, 64}, 1e-11).value.real();
        double xi =
            (2.0 / tau) * integrate_contour(fx, Contour{ct, rt, true, 64}, 1e-11).value.real();
        d.lambda_tilde.push_back(lam);
        d.xi_tilde.push_back(xi);
        tot -= lam * xi;
    }
    for (int j = 1; j <= n; ++j) {
        auto fl = [&](cplx v) {
            cplx r = gv(v) * std::exp(1.0 / v) * ipow(v, ne);
            for (int k = 0; k < m; ++k) r *= (v - p.theta_hat[k]);
            for (int l = 0; l < j; ++l) r /= (v - p.pi_hat[l]);
            return r;
        };
        auto fx = [&](cplx u) {
            cplx r = hu(u) * std::exp(-1.0 / u) * ipow(u, -ne);
            for (int l = 0; l < j - 1; ++l) r *= (u - p.pi_hat[l]);
            for (int k = 0; k < m; ++k) r /= (u - p.theta_hat[k]);
            return r;
        };
        double lam = integrate_contour(fl, Contour{cp, rp, true, 64}, 1e-11).value.real();
        double xi =
            (2.0 / tau) * integrate_contour(fx, Contour{ct, rt, true, 64}, 1e-11).value.real();
        d.lambda.push_back(lam);
        d.xi.push_back(xi);
        tot += lam * xi;
    }
    d.total = tot;
    return d;
}

IntegrableDecomposition decompose_III(const PerturbationSet& p, int nu, double x, double y) {
    int n = p.n(), m = p.m();
    int ne = nu + n - m;
    IntegrableDecomposition d;
    d.base = 4.0 * std::pow(y / x, 0.5 * ne) * bessel_kernel_closed(ne, 4.0 * x, 4.0 * y);
    double tot = d.base;
    for (int i = 1; i <= m; ++i) {
        std::vector<double> num(p.theta_hat.begin(), p.theta_hat.begin() + (i - 1));
        double lam = lam_general(ne, num, {}, cplx(x)).real();
        double xi = xi_eval(xi_sum_pow(i, p.theta_hat, nu, n, m), y);
        d.lambda_tilde.push_back(lam);
        d.xi_tilde.push_back(xi);
        tot -= lam * xi;
    }
    for (int j = 1; j <= n; ++j) {
        std::vector<double> den(p.pi_hat.begin(), p.pi_hat.begin() + j);
        double lam = lam_general(ne, p.theta_hat, den, cplx(x)).real();
        double xi = xi_eval(xi_sum_mixed(j, p.pi_hat, p.theta_hat, nu, n, m), y);
        d.lambda.push_back(lam);
        d.xi.push_back(xi);
        tot += lam * xi;
    }
    d.total = tot;
    return d;
}

IntegrableDecomposition decompose_I(const PerturbationSet& p, int kappa, int nu, double x,
                                    double y) {
    if (p.n() != 0)
        throw parameter_error("the wide-edge kernel admits theta-side spikes only");
    int m = p.m();
    IntegrableDecomposition d;
    CompEst base = compose_base(x, y, kappa, nu - m);
    d.base = base.value.real();
    double tot = d.base;
    for (int i = 1; i <= m; ++i) {
        double lam = lam_I(i, x, kappa, nu, p.theta_hat).real();
        CompEst xi = xi_tint(xi_sum_pow(i, p.theta_hat, nu, 0, m), y, kappa);
        d.lambda_tilde.push_back(lam);
        d.xi_tilde.push_back(xi.value.real());
        tot -= lam * xi.value.real();
    }
    d.total = tot;
    return d;
}

// ---- perturbation admissibility ---------------------------------------------

struct PertCheck {
    Violation v;
    std::string msg;
};

std::optional<PertCheck> check_perturbations(const ScalingRegime& r) {
    const PerturbationSet& p = r.perturbations;
    int n = p.n(), m = p.m();
    auto fail = [&](int i, int j, const std::string& msg) {
        return PertCheck{Violation{"allbounds", i, j}, "allbounds: " + msg};
    };
    for (int l = 0; l < n; ++l)
        if (!std::isfinite(p.pi_hat[l])) return fail(l, -1, "pi_hat must be finite");
    for (int k = 0; k < m; ++k)
        if (!std::isfinite(p.theta_hat[k])) return fail(k, -1, "theta_hat must be finite");
    if (r.regime == Regime::I && n > 0)
        return fail(0, -1, "pi_hat must be empty in the wide-edge regime");
    if (r.regime == Regime::II) {
        if (!(r.tau > 0.0)) return fail(-1, -1, "tau must be positive");
        for (int l = 0; l < n; ++l) {
            if (p.pi_hat[l] < 0.0)
                return fail(l, -1, "pi_hat[" + std::to_string(l) + "] must be >= 0");
            if (p.pi_hat[l] > 0.8 / r.tau)
                return fail(l, -1,
                            "pi_hat[" + std::to_string(l) + "] must stay below 0.8/tau");
        }
    }
    if (r.regime == Regime::III)
        for (int l = 0; l < n; ++l)
            if (p.pi_hat[l] < 0.0)
                return fail(l, -1, "pi_hat[" + std::to_string(l) + "] must be >= 0");
    double cap = 0.0; // theta_hat may not exceed the smallest pi_hat (0 when none)
    if (n > 0) cap = *std::min_element(p.pi_hat.begin(), p.pi_hat.end());
    if (r.regime == Regime::I) cap = 0.0;
    for (int k = 0; k < m; ++k)
        if (p.theta_hat[k] > cap)
            return fail(k, n > 0 ? 0 : -1,
                        "theta_hat[" + std::to_string(k) + "] must not exceed " +
                            (n > 0 && r.regime != Regime::I ? "min pi_hat" : "0"));
    return std::nullopt;
}

ScanCell make_cell(double scale, double xx, double yy) {
    ScanCell c;
    c.scale = scale;
    c.x = xx;
    c.y = yy;
    return c;
}

void finish_cell(ScanCell& c, double fin, double fin_est, double limv, double lim_est) {
    c.finite = fin;
    c.limit = limv;
    double denom = std::max(std::abs(limv), 1e-300);
    c.rel_error = std::abs(fin - limv) / denom;
    c.est_error = (fin_est + lim_est) / denom;
}

} // namespace

// ---- public surface ---------------------------------------------------------

double MuSchedule::mu(int N) const {
    if (N < 1) throw parameter_error("N must be >= 1");
    if (!(value > 0.0)) throw parameter_error("schedule constant must be positive");
    switch (kind) {
    case Kind::constant: return value;
    case Kind::critical: return value / (4.0 * N);
    case Kind::vanishing: return value / std::pow(static_cast<double>(N), 1.5);
    }
    return value;
}

MuSchedule MuSchedule::constant(double mu0) { return {Kind::constant, mu0}; }
MuSchedule MuSchedule::critical(double tau) { return {Kind::critical, tau}; }
MuSchedule MuSchedule::vanishing(double c) { return {Kind::vanishing, c}; }

std::optional<Violation> validate_perturbations(const ScalingRegime& r) {
    auto c = check_perturbations(r);
    if (c) return c->v;
    return std::nullopt;
}

void require_valid(const ScalingRegime& r) {
    auto c = check_perturbations(r);
    if (c) throw parameter_error(c->msg);
}

double bessel_kernel_closed(int nu, double x, double y) {
    if (x < 0.0 || y < 0.0) throw parameter_error("arguments must be nonnegative");
    double mx = std::max(x, y);
    if (std::abs(x - y) >= 1e-6 * std::max(mx, 1e-300)) {
        double sx = std::sqrt(x), sy = std::sqrt(y);
        return (sx * jn_boost(nu + 1, sx) * jn_boost(nu, sy) -
                sy * jn_boost(nu + 1, sy) * jn_boost(nu, sx)) /
               (2.0 * (x - y));
    }
    double u = std::sqrt(0.5 * (x + y));
    double j0 = jn_boost(nu, u), jp = jn_boost(nu + 1, u), jm = jn_boost(nu - 1, u);
    return 0.25 * (j0 * j0 - jp * jm);
}

KernelValue kernel_III(const PerturbationSet& p, int nu, double x, double y, double tol) {
    return kernel_III_direct(p, nu, x, y, tol);
}

KernelValue kernel_II(const PerturbationSet& p, double tau, int kappa, int nu, double x, double y,
                      RouteII route, double tol) {
    if (!(tau > 0.0)) throw parameter_error("clock tau must be positive");
    if (route == RouteII::automatic) route = (tau <= 1.5) ? RouteII::direct : RouteII::composition;
    if (route == RouteII::direct) return kernel_II_direct(p, tau, kappa, nu, x, y, tol);
    return kernel_II_comp(p, tau, kappa, nu, x, y);
}

KernelValue kernel_I(const PerturbationSet& p, int kappa, int nu, double x, double y, RouteI route,
                     double tol) {
    if (p.n() != 0)
        throw parameter_error("the wide-edge kernel admits theta-side spikes only");
    for (double t : p.theta_hat)
        if (t > 0.0) throw parameter_error("allbounds: theta_hat must be <= 0 at the wide edge");
    if (route == RouteI::hankel) return kernel_I_hankel(p, kappa, nu, x, y, tol);
    return kernel_I_comp(p, kappa, nu, x, y);
}

IntegrableDecomposition decompose_integrable(const ScalingRegime& r, double x, double y) {
    require_valid(r);
    switch (r.regime) {
    case Regime::I: return decompose_I(r.perturbations, r.kappa, r.nu, x, y);
    case Regime::II: return decompose_II(r.perturbations, r.tau, r.kappa, r.nu, x, y);
    case Regime::III: return decompose_III(r.perturbations, r.nu, x, y);
    }
    throw parameter_error("unknown regime");
}

CoupledParams build_perturbed_params(int N, double mu, const PerturbationSet& p, int kappa,
                                     int nu) {
    if (N < 1) throw parameter_error("N must be >= 1");
    if (!(mu > 0.0)) throw parameter_error("mu must be positive");
    if (kappa < 0 || nu < 0) throw parameter_error("kappa and nu must be >= 0");
    int n = p.n(), m = p.m();
    int M = N + nu;
    if (n > N) throw parameter_error("more pi_hat entries than delta slots");
    if (m > M) throw parameter_error("more theta_hat entries than q slots");
    double op = 1.0 + mu;
    double cap = op * op / (4.0 * mu); // largest pi keeping delta >= 0
    std::vector<double> piv(n), thv(m);
    for (int l = 0; l < n; ++l) {
        piv[l] = N * p.pi_hat[l];
        if (!(piv[l] > 0.0))
            throw parameter_error("allbounds: pi[" + std::to_string(l) +
                                  "] = N pi_hat must be positive");
        if (piv[l] > cap)
            throw parameter_error("allbounds: pi[" + std::to_string(l) +
                                  "] exceeds (1+mu)^2/(4 mu), delta would be negative");
    }
    for (int j = 0; j < m; ++j) {
        thv[j] = N * p.theta_hat[j];
        if (n < N && !(thv[j] < 1.0))
            throw parameter_error("allbounds: theta[" + std::to_string(j) +
                                  "] = N theta_hat must stay below 1");
        for (int l = 0; l < n; ++l)
            if (!(thv[j] < piv[l]))
                throw parameter_error("allbounds: theta[" + std::to_string(j) +
                                      "] must stay below pi[" + std::to_string(l) + "]");
    }
    CoupledParams cp;
    cp.N = N;
    cp.M = M;
    cp.L = N + kappa;
    cp.alpha = op / (2.0 * mu);
    cp.delta.resize(N);
    double ddeg = (1.0 - mu) * (1.0 - mu) / (4.0 * mu * mu);
    for (int l = 0; l < N; ++l)
        cp.delta[l] = (l < n) ? (op * op - 4.0 * mu * piv[l]) / (4.0 * mu * mu) : ddeg;
    cp.q.resize(M);
    double qdeg = op / (2.0 * mu);
    for (int j = 0; j < M; ++j)
        cp.q[j] = (j < m) ? qdeg * (1.0 - 4.0 * mu * thv[j] / (op * op)) : qdeg;
    rmtkit::require_valid(cp);
    return cp;
}

ScanTable hard_edge_scan(const ScalingRegime& r, const MuSchedule& schedule,
                         const std::vector<int>& N_list,
                         const std::vector<std::pair<double, double>>& probes,
                         const ContourOptions& opt, int nthreads) {
    require_valid(r);
    const PerturbationSet& p = r.perturbations;
    ScanTable t;
    t.scale_name = "N";

    // one limit evaluation per probe, shared by every N
    struct Lim {
        double v = 0.0, est = 0.0;
        std::string err;
    };
    std::vector<Lim> lims(probes.size());
    parallel_for(static_cast<int>(probes.size()), nthreads, [&](int i) {
        auto [xx, yy] = probes[i];
        try {
            KernelValue kv;
            switch (r.regime) {
            case Regime::I: kv = kernel_I(p, r.kappa, r.nu, xx, yy, RouteI::hankel); break;
            case Regime::II: kv = kernel_II(p, r.tau, r.kappa, r.nu, xx, yy); break;
            case Regime::III: {
                KernelValue k3 = kernel_III(p, r.nu, std::sqrt(xx), std::sqrt(yy));
                double pre = 0.5 * std::pow(xx * yy, -0.25);
                kv = {pre * k3.value, pre * k3.est_error};
                break;
            }
            }
            lims[i].v = kv.value;
            lims[i].est = kv.est_error;
        } catch (const std::exception& e) {
            lims[i].err = e.what();
        }
    });

    for (int N : N_list)
        for (auto [xx, yy] : probes) t.cells.push_back(make_cell(N, xx, yy));
    int np = static_cast<int>(probes.size());
    parallel_for(static_cast<int>(t.cells.size()), nthreads, [&](int ci) {
        ScanCell& cell = t.cells[ci];
        const Lim& lim = lims[ci % np];
        if (!lim.err.empty()) {
            cell.error = "limit: " + lim.err;
            return;
        }
        try {
            int N = static_cast<int>(cell.scale);
            double mu = schedule.mu(N);
            CoupledParams params = build_perturbed_params(N, mu, p, r.kappa, r.nu);
            double fin = 0.0, fin_est = 0.0;
            switch (r.regime) {
            case Regime::I: {
                // constant-mu cells keep mu*N large, which narrows the
                // analyticity strip of the contour integrand; allow more nodes
                // and accept a looser (still far-sub-signal) tolerance
                ContourOptions opt1 = opt;
                opt1.max_nodes = std::max(opt.max_nodes, 1 << 13);
                KernelValue s =
                    kernel_contour_S(params, mu * cell.x / N, mu * cell.y / N, 3e-6, opt1);
                fin = (mu / N) * s.value;
                fin_est = (mu / N) * s.est_error;
                break;
            }
            case Regime::II:
            case Regime::III: {
                double sc = 4.0 * static_cast<double>(N) * N;
                KernelValue s = kernel_contour_S(params, cell.x / sc, cell.y / sc, 1e-7, opt);
                double pre = std::pow(cell.x / cell.y, 0.5 * r.kappa) / sc;
                if (r.regime == Regime::III)
                    pre *= std::exp((std::sqrt(cell.y) - std::sqrt(cell.x)) / (2.0 * mu * N));
                fin = pre * s.value;
                fin_est = std::abs(pre) * s.est_error;
                break;
            }
            }
            finish_cell(cell, fin, fin_est, lim.v, lim.est);
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    });
    return t;
}

ScanTable interpolate_scan(const PerturbationSet& p, int kappa, int nu,
                           const std::vector<double>& tau_list, InterpDirection direction,
                           std::pair<double, double> probe) {
    auto [x, y] = probe;
    ScanTable t;
    t.scale_name = "tau";
    double limv = 0.0, lim_est = 0.0;
    if (direction == InterpDirection::to_I) {
        KernelValue kv = kernel_I(p, kappa, nu, x, y, RouteI::hankel);
        limv = kv.value;
        lim_est = kv.est_error;
    } else {
        KernelValue k3 = kernel_III(p, nu, std::sqrt(x), std::sqrt(y));
        double pre = 0.5 * std::pow(x * y, -0.25);
        limv = pre * k3.value;
        lim_est = pre * k3.est_error;
    }
    for (double tau : tau_list) {
        ScanCell cell = make_cell(tau, x, y);
        try {
            double fin = 0.0, fin_est = 0.0;
            if (direction == InterpDirection::to_I) {
                KernelValue kv = kernel_II(p, tau, kappa, nu, tau * x, tau * y);
                double pre = tau * std::pow(y / x, 0.5 * kappa);
                fin = pre * kv.value;
                fin_est = pre * kv.est_error;
            } else {
                KernelValue kv = kernel_II(p, tau, kappa, nu, x, y);
                double pre = std::exp(2.0 * (std::sqrt(y) - std::sqrt(x)) / tau);
                fin = pre * kv.value;
                fin_est = pre * kv.est_error;
            }
            finish_cell(cell, fin, fin_est, limv, lim_est);
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
        t.cells.push_back(cell);
    }
    return t;
}

TrendReport check_trend(const ScanTable& t, double final_rel_max) {
    TrendReport rep;
    rep.monotone = true;
    rep.final_below = true;
    std::vector<std::pair<double, double>> keys;
    std::vector<std::vector<const ScanCell*>> groups;
    for (const ScanCell& c : t.cells) {
        if (!c.error.empty()) {
            rep.monotone = rep.final_below = false;
            rep.detail = "cell at " + t.scale_name + "=" + std::to_string(c.scale) +
                         " failed: " + c.error;
            return rep;
        }
        std::pair<double, double> key{c.x, c.y};
        size_t g = 0;
        for (; g < keys.size(); ++g)
            if (keys[g] == key) break;
        if (g == keys.size()) {
            keys.push_back(key);
            groups.emplace_back();
        }
        groups[g].push_back(&c);
    }
    for (size_t g = 0; g < groups.size(); ++g) {
        const auto& seq = groups[g];
        for (size_t k = 1; k < seq.size(); ++k) {
            if (seq[k]->rel_error > seq[k - 1]->rel_error * (1.0 + 1e-9) + 1e-15) {
                rep.monotone = false;
                if (rep.detail.empty())
                    rep.detail = "rel_error rises at probe (" + std::to_string(keys[g].first) +
                                 ", " + std::to_string(keys[g].second) + "), " + t.scale_name +
                                 "=" + std::to_string(seq[k]->scale);
            }
        }
        double fin = seq.back()->rel_error;
        rep.worst_final_rel = std::max(rep.worst_final_rel, fin);
        if (fin > final_rel_max) {
            rep.final_below = false;
            if (rep.detail.empty())
                rep.detail = "final rel_error " + std::to_string(fin) + " exceeds bound at probe (" +
                             std::to_string(keys[g].first) + ", " + std::to_string(keys[g].second) +
                             ")";
        }
    }
    return rep;
}

} // namespace rmtkit
