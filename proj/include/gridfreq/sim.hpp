#pragma once

#include <vector>

#include "gridfreq/netmodel.hpp"
#include "gridfreq/polynomial.hpp"

namespace gridfreq {

// Time-indexed signals of one simulation run. Per-area series are stored
// as series[step][area]; all series share the time grid. Deviations start
// from the zero equilibrium.
struct SimulationTrace {
    int n = 0;
    std::vector<double> t;
    std::vector<std::vector<double>> omega; // p.u. frequency deviation
    std::vector<std::vector<double>> delta; // rad phase deviation
    std::vector<std::vector<double>> p_m;   // net mechanical power input
    std::vector<std::vector<double>> p_tl;  // tie-line power (T delta)_i
    std::vector<std::vector<double>> ace;   // P_tl + B omega

    // hierarchical wave variables (empty unless scattering was enabled)
    bool has_waves = false;
    std::vector<std::vector<double>> u_l, v_l, u_r, v_r, u_g, v_g;
    std::vector<std::vector<double>> p_mg;

    // audit series
    std::vector<double> storage;        // S = 0.5 w'Mw + 0.5 d'Td
    std::vector<double> supply;         // w'P with P = M dw + Dw + Td
    std::vector<double> dissipation;    // w'Dw
    std::vector<double> scatter_supply; // cumulative Eq.-style channel supply

    bool blew_up = false;
    double blow_time = 0;
};

struct ScatteringConfig {
    double alpha = 0.6;
    std::vector<double> delays_up;
    std::vector<double> delays_down;
    bool enabled = true;
};

struct EnergyAudit {
    double max_balance_residual = 0;  // storage balance, relative
    bool balance_ok = false;
    double rho = 0;                   // min_i D_i
    double max_rho_violation = 0;     // dS/dt - (w'P - rho w'w), positive part
    bool rho_ok = false;
    double min_scatter_supply = 0;    // only meaningful when waves present
    bool scatter_ok = true;
};

struct OracleResult {
    std::vector<Complex> eigenvalues;
    double abscissa = 0;       // max real part excluding structural zeros
    int excluded_count = 0;
};

// Swing network under decentralized PI on -omega. Uses each area's kp/ki
// (derivative gain ignored: the decentralized law is a PI class).
SimulationTrace simulate_swing(const NetworkSpec& network, const LoadScenario& loads,
                               double step, double horizon);

// Hierarchical control: local proportional feedback plus a global integral
// controller over delayed channels, optionally passivated by the scattering
// transformation. Delay lines are ring buffers with linear interpolation.
SimulationTrace simulate_hierarchical(const NetworkSpec& network, const LoadScenario& loads,
                                      const ScatteringConfig& scattering, double step,
                                      double horizon);

// ACE-based LFC: per-area governor/turbine/filtered-PID loop coupled through
// the tie-line powers.
SimulationTrace simulate_lfc(const NetworkSpec& network, const LoadScenario& loads,
                             double step, double horizon);

// Storage-function balance, dissipation bound and scattering-supply checks.
// Throws std::invalid_argument when the grid is too coarse (step > 1e-2).
EnergyAudit energy_audit(const SimulationTrace& trace, const NetworkSpec& network);

// Full zero-delay closed-loop spectrum for the scenario's control mode.
// Structural zero modes (|eigenvalue| < 1e-8, kernel of T acting on delta)
// are excluded from the abscissa.
OracleResult closed_loop_eigen_oracle(const NetworkSpec& network);

} // namespace gridfreq
