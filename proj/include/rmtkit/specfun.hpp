#pragma once
#include <complex>

// Integer-order Bessel family on complex arguments, plus the entire
// "squared-argument" regularisations the kernel formulas are written in.
// Everything here is branch-explicit: the only functions with a cut are
// h_reg / bessel_k / hankel2, and they use the principal branch.

namespace rmtkit::specfun {

using cplx = std::complex<double>;

// log((n-1)!) = lgamma(n) for integer n >= 1, cached.
double log_gamma_int(int n);
// log(n!) for n >= 0.
double log_factorial(int n);

// Modified Bessel function of the first kind, integer order n >= 0.
// Evaluated by the periodic trapezoid rule on I_n(w) = (1/pi) int_0^pi
// e^{w cos t} cos(n t) dt, which is spectrally accurate.  |Re w| <= 700.
cplx bessel_i(int n, cplx w);

// Modified Bessel function of the second kind, integer order, Re w > 0.
// Uses K_n(w) = int_0^inf e^{-w cosh t} cosh(n t) dt; for arguments near the
// imaginary axis the integration path is bent to 0 -> i b -> i b + inf
// (b = -sign(Im w) pi/4) to restore exponential decay.
cplx bessel_k(int n, cplx w);

// Ordinary Bessel J_n(w) = i^{-n} I_n(i w).
cplx bessel_j(int n, cplx w);

// Hankel function of the second kind H2_n = J_n - i Y_n, via the K route.
cplx hankel2(int n, cplx w);

// Scaled variants that stay representable for large |Re w|:
//   bessel_i_scaled(n, w) = e^{-Re w} I_n(w)   (Re w >= 0)
//   bessel_k_scaled(n, w) = e^{+w}    K_n(w)
cplx bessel_i_scaled(int n, cplx w);
cplx bessel_k_scaled(int n, cplx w);

// g_reg(n, z) = sum_{k>=0} z^k / (k! (k+n)!)  =  z^{-n/2} I_n(2 sqrt z).
// Entire in z; defined for any integer n via 1/Gamma at the poles, so
// g_reg(-n, z) = z^n g_reg(n, z).
cplx g_reg(int n, cplx z);

// h_reg(n, z) = z^{n/2} K_n(2 sqrt z), principal branch (cut on z < 0).
cplx h_reg(int n, cplx z);

} // namespace rmtkit::specfun
