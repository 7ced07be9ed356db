#include "biphos/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace biphos {

namespace {
constexpr double kKinkFrac = 9.0 / 32.0;  // kink of the piecewise form at c_nop = 9K_c/32
constexpr double kHalfSat = 9.0 / 64.0;   // half-saturation of the smooth form, y = 9/64
}  // namespace

double f_sca_piecewise(double c_nop, double K_c) {
    if (!(K_c > 0)) throw std::domain_error("f_sca_piecewise: K_c must be > 0");
    const double c = std::max(c_nop, 0.0);
    return K_c * std::max(1.0 / 8.0, 5.0 / 4.0 - 4.0 * c / K_c);
}

double f_sca_smooth(double c_nop, double K_c, double m_sca) {
    if (!(K_c > 0)) throw std::domain_error("f_sca_smooth: K_c must be > 0");
    const double y = std::max(c_nop, 0.0) / K_c;
    const double yp = std::pow(y, m_sca);
    const double ap = std::pow(kHalfSat, m_sca);
    return K_c * (5.0 / 4.0 - (9.0 / 8.0) * yp / (yp + ap));
}

double f_sca(double c_nop, const Params& p) {
    return p.use_piecewise_fsca ? f_sca_piecewise(c_nop, p.K_c)
                                : f_sca_smooth(c_nop, p.K_c, p.m_sca);
}

double f_sca_deriv(double c_nop, const Params& p, bool* near_kink) {
    if (near_kink) *near_kink = false;
    if (c_nop < 0.0) return 0.0;  // clamped region is constant
    if (p.use_piecewise_fsca) {
        const double kink = kKinkFrac * p.K_c;
        if (near_kink &&
            std::abs(c_nop - kink) <=
                10.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, kink)) {
            *near_kink = true;
        }
        return c_nop < kink ? -4.0 : 0.0;  // at the kink: right branch
    }
    const double y = c_nop / p.K_c;
    if (y == 0.0) return 0.0;  // y^(ms-1) below would blow up for ms < 1... ms >= 1 keeps it 0
    const double yp = std::pow(y, p.m_sca);
    const double ap = std::pow(kHalfSat, p.m_sca);
    const double denom = (yp + ap) * (yp + ap);
    // d/dc_nop [K_c * (5/4 - (9/8) y^ms/(y^ms+a^ms))], dy/dc_nop = 1/K_c
    return -(9.0 / 8.0) * p.m_sca * std::pow(y, p.m_sca - 1.0) * ap / denom;
}

double f_p(double c_no, double c_nop, const Params& p) {
    const double T = std::max(c_no + c_nop, 0.0);
    if (T == 0.0) return 0.0;  // limit of T^{m+1}/(T^m + S^m) as T -> 0, m >= 1
    const double S = f_sca(c_nop, p);
    const double Tm = std::pow(T, p.m);
    const double Sm = std::pow(S, p.m);
    return Tm * T / ((Tm + Sm) * p.tau);
}

double f_dp(double c_nop, const Params& p) { return c_nop / p.tau; }

Vec2 rhs_reduced(const Vec2& x, const Params& p) {
    const double c_no = x[0], c_nop = x[1];
    const double fp = f_p(c_no, c_nop, p);
    const double fdp = f_dp(c_nop, p);
    const double gamma = p.k_vn + p.k_vcy - p.k_nt * c_nop;  // net cytoplasmic growth rate
    Vec2 dx;
    dx[0] = p.k_vn - fp + fdp - c_no * p.A_cyto * gamma;
    dx[1] = fp - fdp - p.k_nt * c_nop - c_nop * p.A_cyto * gamma;
    return dx;
}

Mat2 jacobian_reduced(const Vec2& x, const Params& p, bool* near_kink) {
    const double c_no = x[0], c_nop = x[1];
    const double T = std::max(c_no + c_nop, 0.0);
    const double S = f_sca(c_nop, p);
    const double Sd = f_sca_deriv(c_nop, p, near_kink);

    // partials of f_p(T, S) = (1/tau) T^{m+1}/(T^m + S^m)
    double fp_T = 0.0, fp_S = 0.0;
    if (T > 0.0) {
        const double Tm = std::pow(T, p.m);
        const double Sm = std::pow(S, p.m);
        const double den = (Tm + Sm) * (Tm + Sm);
        fp_T = Tm * (Tm + (p.m + 1.0) * Sm) / (den * p.tau);
        fp_S = -p.m * Tm * T * std::pow(S, p.m - 1.0) / (den * p.tau);
    }
    const double gamma = p.k_vn + p.k_vcy - p.k_nt * c_nop;
    const double Ag = p.A_cyto * gamma;
    const double fp_cnop = fp_T + fp_S * Sd;  // chain rule: c_nop moves both T and S

    Mat2 J;
    J(0, 0) = -fp_T - Ag;
    J(0, 1) = -fp_cnop + 1.0 / p.tau + c_no * p.A_cyto * p.k_nt;
    J(1, 0) = fp_T;
    J(1, 1) = fp_cnop - 1.0 / p.tau - p.k_nt - Ag + c_nop * p.A_cyto * p.k_nt;
    return J;
}

Vec7 rhs_full(const Vec7& x, const Params& p) {
    if (!(x[PHI] > 0.0)) throw std::domain_error("rhs_full: Phi must be > 0");
    const double c_no = x[C_NO], c_nop = x[C_NOP];
    const double fp = f_p(c_no, c_nop, p);
    const double fdp = f_dp(c_nop, p);
    const double gamma = p.k_vn + p.k_vcy - p.k_nt * c_nop;
    Vec7 dx;
    dx[C_NO] = p.k_vn - fp + fdp - c_no * p.A_cyto * gamma;
    dx[C_NOP] = fp - fdp - p.k_nt * c_nop - c_nop * p.A_cyto * gamma;
    dx[C_NI] = p.k_nt * c_nop * (1.0 - p.A_n * x[C_NI]) / x[PHI];
    dx[C_CY] = p.k_vcy - x[C_CY] * p.A_cyto * gamma;
    dx[PHI] = p.A_n * p.k_nt * c_nop - p.A_cyto * gamma * x[PHI];
    dx[V_N] = p.A_n * p.k_nt * c_nop * x[V_CYTO];
    dx[V_CYTO] = p.A_cyto * gamma * x[V_CYTO];
    return dx;
}

Vec7 make_consistent_full_state(double c_no, double c_nop, const Params& p,
                                double c_ni, double Phi, double V_cyto) {
    const double c_cy = 1.0 / p.A_cyto - c_no - c_nop;
    if (c_cy < 0.0)
        throw std::invalid_argument(
            "make_consistent_full_state: c_no + c_nop exceeds the conserved total 1/A_cyto");
    Vec7 x;
    x << c_no, c_nop, c_ni, c_cy, Phi, Phi * V_cyto, V_cyto;
    return x;
}

std::vector<double> quasi_steady_fractions(double total, const Params& p) {
    if (!(total > 0)) throw std::domain_error("quasi_steady_fractions: total must be > 0");
    const double Tm = std::pow(total, p.m);
    auto g = [&](double frac) {
        const double S = f_sca(frac * total, p);
        return frac - Tm / (Tm + std::pow(S, p.m));
    };
    // g(0) < 0 and g(1) > 0, so the dense grid always brackets >= 1 root.
    constexpr int kGrid = 2048;
    std::vector<double> roots;
    double prev_f = 0.0, prev_g = g(0.0);
    for (int i = 1; i <= kGrid; ++i) {
        const double f = static_cast<double>(i) / kGrid;
        const double gf = g(f);
        if (prev_g == 0.0) {
            roots.push_back(prev_f);
        } else if (prev_g * gf < 0.0) {
            double a = prev_f, b = f, ga = prev_g;
            while (b - a > 1e-16) {
                const double mid = 0.5 * (a + b);
                const double gm = g(mid);
                if (std::abs(gm) <= 1e-10 || b - a < 4e-16) { a = b = mid; break; }
                if (ga * gm < 0.0) b = mid;
                else { a = mid; ga = gm; }
            }
            roots.push_back(0.5 * (a + b));
        }
        prev_f = f;
        prev_g = gf;
    }
    return roots;
}

}  // namespace biphos
