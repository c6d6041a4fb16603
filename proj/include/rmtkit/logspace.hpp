#pragma once
#include <cmath>
#include <limits>

namespace rmtkit {

// Signed number stored as sign * exp(log_abs).  Used wherever products of many
// large/small factors (Vandermonde ratios, Gamma functions, Bessel tails) would
// overflow a plain double.
struct LogVal {
    double log_abs = -std::numeric_limits<double>::infinity();
    int sign = 0; // -1, 0, +1

    static LogVal zero() { return {}; }
    static LogVal one() { return {0.0, 1}; }

    static LogVal from_double(double v) {
        if (v == 0.0) return zero();
        return {std::log(std::fabs(v)), v > 0 ? 1 : -1};
    }
    static LogVal from_log(double log_abs, int sign) { return sign == 0 ? zero() : LogVal{log_abs, sign > 0 ? 1 : -1}; }

    double to_double() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }
    bool is_zero() const { return sign == 0; }

    LogVal operator-() const { return {log_abs, -sign}; }
};

inline LogVal operator*(LogVal a, LogVal b) {
    if (a.sign == 0 || b.sign == 0) return LogVal::zero();
    return {a.log_abs + b.log_abs, a.sign * b.sign};
}

inline LogVal operator/(LogVal a, LogVal b) {
    if (a.sign == 0) return LogVal::zero();
    return {a.log_abs - b.log_abs, a.sign * b.sign};
}

// Signed log-sum-exp.
inline LogVal operator+(LogVal a, LogVal b) {
    if (a.sign == 0) return b;
    if (b.sign == 0) return a;
    if (a.log_abs < b.log_abs) std::swap(a, b);
    const double r = std::exp(b.log_abs - a.log_abs); // <= 1
    const double combined = (a.sign == b.sign) ? 1.0 + r : 1.0 - r;
    if (combined == 0.0) return LogVal::zero();
    return {a.log_abs + std::log(std::fabs(combined)), combined > 0 ? a.sign : -a.sign};
}

inline LogVal operator-(LogVal a, LogVal b) { return a + (-b); }

// Integer power (sign handled exactly).
inline LogVal pow_int(LogVal a, long n) {
    if (n == 0) return LogVal::one();
    if (a.sign == 0) return LogVal::zero();
    int s = (a.sign < 0 && (n % 2 != 0)) ? -1 : 1;
    return {a.log_abs * static_cast<double>(n), s};
}

} // namespace rmtkit
