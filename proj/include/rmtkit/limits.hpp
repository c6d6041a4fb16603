#pragma once
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rmtkit/ensembles.hpp"
#include "rmtkit/kernels.hpp"

// Hard-edge limit kernels with finite-rank spikes, the finite-size parameter
// families that converge to them, and scan drivers measuring that convergence.
//
// Scaling-variable conventions (all real):
//   pi_hat  >= 0   spike positions entering through the q side (size n)
//   theta_hat      spike positions entering through the delta side (size m)
// Admissibility per regime:
//   I   : no pi_hat, theta_hat <= 0
//   II  : pi_hat in [0, 0.8/tau], theta_hat <= min pi_hat (<= 0 when n = 0)
//   III : pi_hat >= 0,            theta_hat <= min pi_hat (<= 0 when n = 0)

namespace rmtkit {

struct PerturbationSet {
    std::vector<double> pi_hat;
    std::vector<double> theta_hat;
    int n() const { return static_cast<int>(pi_hat.size()); }
    int m() const { return static_cast<int>(theta_hat.size()); }
};

enum class Regime { I, II, III };

struct ScalingRegime {
    Regime regime = Regime::III;
    double tau = 1.0; // regime II clock; ignored for I and III
    PerturbationSet perturbations;
    int kappa = 0;
    int nu = 0;
};

// Size-dependent coupling mu(N) selecting which limit a finite family feels:
//   constant(mu0)  : mu = mu0            -> regime I
//   critical(tau)  : mu = tau / (4 N)    -> regime II at clock tau
//   vanishing(c)   : mu = c / N^{3/2}    -> regime III
struct MuSchedule {
    enum class Kind { constant, critical, vanishing };
    Kind kind = Kind::constant;
    double value = 1.0;
    double mu(int N) const;
    static MuSchedule constant(double mu0);
    static MuSchedule critical(double tau);
    static MuSchedule vanishing(double c);
};

// First violated admissibility inequality, or nullopt. `name` is "allbounds".
std::optional<Violation> validate_perturbations(const ScalingRegime& r);
void require_valid(const ScalingRegime& r);

// Rank-zero hard-edge kernel
//   [sqrt(x) J_{nu+1}(sqrt x) J_nu(sqrt y) - sqrt(y) J_{nu+1}(sqrt y) J_nu(sqrt x)]
//   / (2 (x - y)),
// with a confluent branch for |x-y| < 1e-6 max(x,y); value 1/4 at x = y = 0
// when nu = 0.  Valid for any integer nu via J_{-k} = (-1)^k J_k.
double bessel_kernel_closed(int nu, double x, double y);

// Spiked hard-edge kernel (double contour, inner circle around {0, theta_hat},
// outer around {pi_hat} and the inner circle).
KernelValue kernel_III(const PerturbationSet& p, int nu, double x, double y, double tol = 1e-10);

// Spiked critical kernel at clock tau.  `direct` evaluates the defining double
// contour (requires every circle to fit left of 0.9/tau and is used up to
// tau ~ 1.5); `composition` integrates the rank-spiked regime III kernel
// against the two-sided Gamma-type weight and extends to large tau.
enum class RouteII { automatic, direct, composition };
KernelValue kernel_II(const PerturbationSet& p, double tau, int kappa, int nu, double x, double y,
                      RouteII route = RouteII::automatic, double tol = 1e-9);

// Spiked kernel for the wide hard edge, theta_hat side only (pi_hat must be
// empty).  `hankel` is a double contour against the K-Bessel transform with an
// explicit correction along the branch cut; `bessel_composition` composes the
// closed Bessel base with the rank-one subtractions through Gamma-type
// integrals.  The two routes share no quadrature machinery.
enum class RouteI { hankel, bessel_composition };
KernelValue kernel_I(const PerturbationSet& p, int kappa, int nu, double x, double y,
                     RouteI route = RouteI::hankel, double tol = 1e-9);

// Rank-one structure of the spiked kernels: base kernel with shifted index,
// minus paired theta-side terms, plus paired pi-side terms,
//   total = base - sum_i lambda_tilde[i] xi_tilde[i] + sum_j lambda[j] xi[j].
struct IntegrableDecomposition {
    double base = 0.0;
    std::vector<double> lambda_tilde, xi_tilde; // m theta-side pairs
    std::vector<double> lambda, xi;             // n pi-side pairs
    double total = 0.0;
};
IntegrableDecomposition decompose_integrable(const ScalingRegime& r, double x, double y);

// Finite-size coupled-ensemble parameters whose squared-singular-value kernel
// converges under the given mu to the spiked limits above:
//   delta_l = ((1+mu)^2 - 4 mu N pi_hat_l) / (4 mu^2)   l <= n, rest (1-mu)^2/(4mu^2)
//   q_j     = (1+mu)/(2 mu) (1 - 4 mu N theta_hat_j/(1+mu)^2)  j <= m, rest (1+mu)/(2mu)
//   alpha   = (1+mu)/(2 mu),  L = N + kappa,  M = N + nu.
// Throws parameter_error naming the violated inequality ("allbounds: ...").
CoupledParams build_perturbed_params(int N, double mu, const PerturbationSet& p, int kappa = 0,
                                     int nu = 0);

struct ScanCell {
    double scale = 0.0; // N or tau
    double x = 0.0, y = 0.0;
    double finite = 0.0, limit = 0.0;
    double rel_error = 0.0, est_error = 0.0;
    std::string error; // non-empty when this cell failed; other cells still run
};

struct ScanTable {
    std::string scale_name; // "N" or "tau"
    std::vector<ScanCell> cells;
};

// Rescaled finite-N kernel against its limit at each probe (x, y):
//   I   : (mu/N) S_N(mu x/N, mu y/N)                          vs kernel_I
//   II  : (x/y)^{kappa/2} S_N(x/(4N^2), y/(4N^2)) / (4N^2)    vs kernel_II
//   III : same as II times exp((sqrt y - sqrt x)/(2 mu N))    vs (1/2)(xy)^{-1/4}
//                                                kernel_III(sqrt x, sqrt y)
// S_N is the gauge-free finite-N contour kernel of build_perturbed_params.
ScanTable hard_edge_scan(const ScalingRegime& r, const MuSchedule& schedule,
                         const std::vector<int>& N_list,
                         const std::vector<std::pair<double, double>>& probes,
                         const ContourOptions& opt = {}, int nthreads = 1);

// Motion of the critical kernel along its clock:
//   to_I   : tau K_II(tau x, tau y; tau) (y/x)^{kappa/2}  vs kernel_I   (tau up)
//   to_III : K_II(x, y; tau) e^{2(sqrt y - sqrt x)/tau}   vs (1/2)(xy)^{-1/4}
//                                         kernel_III(sqrt x, sqrt y)   (tau down)
enum class InterpDirection { to_I, to_III };
ScanTable interpolate_scan(const PerturbationSet& p, int kappa, int nu,
                           const std::vector<double>& tau_list, InterpDirection direction,
                           std::pair<double, double> probe);

// Per-probe monotone decrease of rel_error along the row order, and the final
// rel_error against `final_rel_max`.  Cells carrying errors fail the check.
struct TrendReport {
    bool monotone = false;
    bool final_below = false;
    double worst_final_rel = 0.0;
    std::string detail;
};
TrendReport check_trend(const ScanTable& t, double final_rel_max);

} // namespace rmtkit
