#include "rmtkit/quadrature.hpp"
#include "rmtkit/errors.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rmtkit {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

int ceil_pow2(int n) {
    int p = 8;
    while (p < n) p *= 2;
    return p;
}

void hull(const std::vector<double>& pts, double& lo, double& hi) {
    lo = *std::min_element(pts.begin(), pts.end());
    hi = *std::max_element(pts.begin(), pts.end());
}

} // namespace

Contour make_enclosing_contour(const std::vector<double>& enclose,
                               const std::vector<double>& exclude,
                               const MarginPolicy& policy) {
    if (enclose.empty()) throw geometry_error("make_enclosing_contour: nothing to enclose");
    double lo, hi;
    hull(enclose, lo, hi);
    lo -= policy.inflate;
    hi += policy.inflate;
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double radius;
    if (exclude.empty()) {
        radius = half + policy.base;
    } else {
        double gap = std::numeric_limits<double>::infinity();
        for (double e : exclude) gap = std::min(gap, std::fabs(e - center) - half);
        if (gap <= 0.0) {
            std::ostringstream os;
            os << "make_enclosing_contour: excluded point inside the hull ["
               << lo << ", " << hi << "]";
            throw geometry_error(os.str());
        }
        radius = half + policy.gap_fraction * gap;
        // keep strict clearance on both sides of the circle
        for (double e : exclude)
            if (std::fabs(e - center) <= radius)
                throw geometry_error("make_enclosing_contour: margin reaches an excluded point");
    }
    if (!(radius > 0.0)) throw geometry_error("make_enclosing_contour: non-positive radius");
    return Contour{center, radius, true, 256};
}

ContourPair make_separated_pair(const std::vector<double>& left,
                                const std::vector<double>& right,
                                const std::vector<double>& exclude_from_right,
                                const MarginPolicy& policy) {
    if (left.empty() || right.empty())
        throw geometry_error("make_separated_pair: empty cluster");
    double llo, lhi, rlo, rhi;
    hull(left, llo, lhi);
    hull(right, rlo, rhi);
    llo -= policy.inflate;
    lhi += policy.inflate;
    const double gap = rlo - lhi;
    if (gap <= 0.0) {
        std::ostringstream os;
        os << "make_separated_pair: clusters overlap (left ends at " << lhi
           << ", right starts at " << rlo << ")";
        throw geometry_error(os.str());
    }
    // split the shared gap; gap_fraction is each circle's share of half the gap
    double lmargin = policy.gap_fraction * 0.5 * gap;
    double rmargin = policy.gap_fraction * 0.5 * gap;
    // the right circle may have additional points to stay away from (e.g. the origin)
    const double rcenter = 0.5 * (rlo + rhi);
    double rhalf = 0.5 * (rhi - rlo);
    for (double e : exclude_from_right) {
        const double d = std::fabs(e - rcenter) - rhalf;
        if (d <= 0.0) throw geometry_error("make_separated_pair: excluded point inside right hull");
        rmargin = std::min(rmargin, policy.gap_fraction * d);
    }
    Contour inner{0.5 * (llo + lhi), 0.5 * (lhi - llo) + lmargin, true, 256};
    Contour outer{rcenter, rhalf + rmargin, true, 256};
    if (inner.center + inner.radius >= outer.center - outer.radius)
        throw geometry_error("make_separated_pair: margins close the gap");
    return ContourPair{inner, outer, PairKind::separated};
}

QuadratureResult integrate_contour(const std::function<cplx(cplx)>& f, const Contour& c,
                                   double tol, int max_nodes) {
    int n = std::max(8, ceil_pow2(c.nodes));
    const double orient = c.ccw ? 1.0 : -1.0;
    auto level = [&](int nn) {
        // phase offset 1/2 keeps nodes off the real axis (where poles often sit)
        cplx sum = 0.0;
        for (int k = 0; k < nn; ++k) {
            const double t = 2.0 * kPi * (k + 0.5) / nn;
            const cplx e(std::cos(t), std::sin(t));
            sum += f(c.center + c.radius * e) * e;
        }
        return sum * (c.radius / static_cast<double>(nn)); // oint dz/(2 pi i)
    };
    long used = n;
    cplx prev = level(n);
    while (n < max_nodes) {
        n *= 2;
        used += n;
        const cplx cur = level(n);
        const double delta = std::abs(cur - prev);
        if (delta <= tol * std::max(1.0, std::abs(cur)))
            return {orient * cur, delta, used};
        prev = cur;
    }
    throw convergence_error("integrate_contour: node cap reached before tolerance");
}

QuadratureResult integrate_double_contour(const std::function<cplx(cplx, cplx)>& f,
                                          const ContourPair& pair, double tol, int max_nodes) {
    const Contour& ci = pair.inner;
    const Contour& co = pair.outer;
    const double orient = (ci.ccw ? 1.0 : -1.0) * (co.ccw ? 1.0 : -1.0);
    auto level = [&](int ni, int no) {
        std::vector<cplx> zi(ni), ei(ni), zo(no), eo(no);
        for (int k = 0; k < ni; ++k) {
            const double t = 2.0 * kPi * (k + 0.5) / ni;
            ei[k] = cplx(std::cos(t), std::sin(t));
            zi[k] = ci.center + ci.radius * ei[k];
        }
        for (int k = 0; k < no; ++k) {
            const double t = 2.0 * kPi * (k + 0.5) / no;
            eo[k] = cplx(std::cos(t), std::sin(t));
            zo[k] = co.center + co.radius * eo[k];
        }
        cplx sum = 0.0;
        for (int j = 0; j < no; ++j) {
            cplx row = 0.0;
            for (int k = 0; k < ni; ++k) row += f(zi[k], zo[j]) * ei[k];
            sum += row * eo[j];
        }
        return sum * (ci.radius * co.radius / (static_cast<double>(ni) * no));
    };
    int n = std::max({8, ceil_pow2(ci.nodes), ceil_pow2(co.nodes)});
    long used = static_cast<long>(n) * n;
    cplx prev = level(n, n);
    while (n < max_nodes) {
        n *= 2;
        used += static_cast<long>(n) * n;
        const cplx cur = level(n, n);
        const double delta = std::abs(cur - prev);
        if (delta <= tol * std::max(1.0, std::abs(cur)))
            return {orient * cur, delta, used};
        prev = cur;
    }
    throw convergence_error("integrate_double_contour: node cap reached before tolerance");
}

QuadratureResult integrate_halfline(const std::function<double(double)>& f, double tol) {
    boost::math::quadrature::exp_sinh<double> integrator;
    double err = 0.0, l1 = 0.0;
    long calls = 0;
    auto counted = [&](double t) {
        ++calls;
        const double v = f(t);
        // the integrands here decay exponentially; inf * 0 underflow artifacts
        // at extreme abscissas contribute nothing
        return std::isfinite(v) ? v : 0.0;
    };
    const double v = integrator.integrate(counted, tol, &err, &l1);
    return {cplx(v, 0.0), err * std::max(1.0, l1), calls};
}

} // namespace rmtkit
