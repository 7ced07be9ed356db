#pragma once

#include <Eigen/Dense>
#include <vector>

#include "biphos/params.hpp"

namespace biphos {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec7 = Eigen::Matrix<double, 7, 1>;

/// Full-state component order (used by Vec7, CSV columns and the CLI).
enum FullIdx : int { C_NO = 0, C_NOP, C_NI, C_CY, PHI, V_N, V_CYTO };

/// Piecewise-linear threshold-scaling function
///   K_c * max{1/8, 5/4 - 4 c_nop / K_c},
/// continuous, non-increasing, kinked at c_nop = 9 K_c / 32, range
/// [K_c/8, 5K_c/4]. Negative c_nop (possible on stochastic paths) is clamped
/// to 0 so the documented range holds for any input.
double f_sca_piecewise(double c_nop, double K_c);

/// Smooth (Hill-type) threshold-scaling function
///   K_c * [5/4 - (9/8) y^ms / (y^ms + (9/64)^ms)],  y = c_nop / K_c,
/// strictly decreasing from 5K_c/4 at 0 to the infimum K_c/8. Negative c_nop
/// is clamped to 0 (non-integer powers of negative y are undefined).
double f_sca_smooth(double c_nop, double K_c, double m_sca);

/// Variant selected by p.use_piecewise_fsca.
double f_sca(double c_nop, const Params& p);

/// d f_sca / d c_nop of the selected variant. The piecewise form uses the
/// active linear branch; exactly at the kink the right branch (slope 0) is
/// the deterministic tie-break. `near_kink`, when given, is set if c_nop is
/// within 10 machine epsilons of the kink (the derivative is only one-sided
/// there).
double f_sca_deriv(double c_nop, const Params& p, bool* near_kink = nullptr);

/// Phosphorylation propensity (1/tau) T^{m+1} / (T^m + f_sca^m) with
/// T = max(c_no + c_nop, 0); the clamp keeps powers real on stochastic
/// excursions, and f_p(0,0) = 0 by continuity.
double f_p(double c_no, double c_nop, const Params& p);

/// Dephosphorylation propensity c_nop / tau.
double f_dp(double c_nop, const Params& p);

/// Right-hand side of the self-contained (c_no, c_nop) subsystem.
Vec2 rhs_reduced(const Vec2& x, const Params& p);

/// Analytic Jacobian of rhs_reduced. Matches central finite differences to
/// ~1e-9 relative with the smooth f_sca; with the piecewise variant the
/// derivative jumps at the kink and `near_kink` (if given) flags evaluations
/// within 10 machine epsilons of it.
Mat2 jacobian_reduced(const Vec2& x, const Params& p, bool* near_kink = nullptr);

/// Right-hand side of the seven-component growth system
/// (c_no, c_nop, c_ni, c_cy, Phi, V_n, V_cyto). Throws std::domain_error if
/// Phi <= 0 (it divides the c_ni equation).
Vec7 rhs_full(const Vec7& x, const Params& p);

/// Assemble a full state on the physical manifold: c_cy is set to
/// 1/A_cyto - c_no - c_nop (conserved total) and V_n to Phi * V_cyto.
/// Throws std::invalid_argument if that c_cy would be negative.
Vec7 make_consistent_full_state(double c_no, double c_nop, const Params& p,
                                double c_ni = 0.0, double Phi = 1.0,
                                double V_cyto = 1.0);

/// All roots frac in [0,1] of
///   frac = T^m / (T^m + f_sca(frac*T)^m)
/// at fixed total T — the relation the fast phosphorylation dynamics
/// equilibrates to. Found by sign-change bracketing on a 2048-point grid and
/// bisected to |g| <= 1e-10; the S-shaped regime yields 3 roots on an
/// intermediate band of totals, otherwise 1 (2 exactly at a fold tangency).
std::vector<double> quasi_steady_fractions(double total, const Params& p);

}  // namespace biphos
