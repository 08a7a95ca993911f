#pragma once

#include <Eigen/Dense>

#include "gridfreq/netmodel.hpp"
#include "gridfreq/polynomial.hpp"

namespace gridfreq {

// SISO rational transfer function, coefficient lists in descending degree.
struct RationalTransferFunction {
    Poly num{0.0};
    Poly den{1.0};

    Complex eval(Complex s) const { return poly_eval(num, s) / poly_eval(den, s); }
    int rel_degree() const {
        return poly_degree(poly_trim(den)) - poly_degree(poly_trim(num));
    }
};

struct StateSpace {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd C;
    Eigen::MatrixXd D;

    Complex eval(Complex s) const;
};

// The pair distributed by the global coordinator: shared reference plant
// plus the model-matching index bounding the multiplicative error.
struct NominalModelSet {
    RationalTransferFunction h_n;
    double xi = 0.5;
};

// Per-area closed-loop plant H_i(s), order 6, assembled from the closed-form
// coefficient expressions:
//   H_i = (1/s)(1 + C F_g F_t) F / (1 + (B C + 1/R) F_g F_t F)
// with F = 1/(M s + D), F_g = 1/(tau_g s + 1), F_t = 1/(tau_t s + 1) and the
// filtered PID C(s) = kp + ki/s + kd s/(tau_d s + 1). The constant
// denominator term vanishes identically (a0 = 0) and b4 = 1/M.
RationalTransferFunction local_agent_tf(const AreaParams& area, const PidGains& pid);

// Sensitivity block G_i = 1/(1 + C F_g F_t).
RationalTransferFunction local_sensitivity_tf(const AreaParams& area, const PidGains& pid);

// Multiplicative error Delta_i = (H_i - H_n)/H_n with the shared origin pole
// cancelled analytically (one factor of s removed from each denominator
// before forming the quotient). Throws InvariantError when either input
// lacks the origin-pole structure, std::domain_error ("unstable error
// system") when h_n's numerator has a closed right-half-plane root.
RationalTransferFunction multiplicative_error(const RationalTransferFunction& h_i,
                                              const RationalTransferFunction& h_n);

// Controllable canonical realization. Throws std::invalid_argument on an
// improper input.
StateSpace realize_state_space(const RationalTransferFunction& g);

struct HinfResult {
    double value = 0;
    bool certified = true;  // false when bisection stagnated and the grid
                            // estimate was returned instead
    double tol = 1e-6;
};

// H-infinity norm of a stable rational function: bisection on imaginary-axis
// eigenvalues of the Hamiltonian matrix of the realization, started from a
// 2048-point log-spaced frequency-grid lower bound. Throws std::domain_error
// on unstable input.
HinfResult hinf_norm_detail(const RationalTransferFunction& g);
double hinf_norm(const RationalTransferFunction& g);

} // namespace gridfreq
