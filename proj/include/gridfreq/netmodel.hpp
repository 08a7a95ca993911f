#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridfreq {

// One controlled region of the network, aggregated to inertia/damping plus
// the primary-control constants entering the LFC loop.
struct AreaParams {
    double M = 0;     // inertia (p.u. * s)
    double D = 0;     // damping (p.u.)
    double R = 0;     // droop
    double B = 0;     // frequency bias
    double tau_g = 0; // governor time constant (s)
    double tau_t = 0; // turbine time constant (s)
};

struct PidGains {
    double kp = 0;
    double ki = 0;
    double kd = 0;
    double tau_d = 0.01; // derivative filter time constant (s)

    // positive gain sets are the passivity-friendly class
    bool positive() const { return kp > 0 && ki > 0 && kd >= 0; }
};

// Synchronizing torque coefficient matrix: symmetric, Laplacian-structured
// (nonpositive off-diagonals, zero row sums), positive semidefinite.
struct TorqueMatrix {
    int n = 0;
    Eigen::MatrixXd entries;
};

struct TorqueValidation {
    bool symmetric = true;
    bool offdiag_sign = true;
    bool row_sums = true;
    bool psd = true;
    bool kernel_ones = true;
    double lambda_min = 0;
    std::vector<std::string> messages;

    bool pass() const { return symmetric && offdiag_sign && row_sums && psd && kernel_ones; }
};

enum class ControlMode { SwingPi, Hierarchical, AceLfc };

struct LoadStep {
    double t = 0;    // s
    int area = 1;    // 1-based
    double dp = 0;   // p.u.
};

struct LoadScenario {
    std::vector<LoadStep> steps;
    double horizon = 100.0;
};

struct NetworkSpec {
    std::vector<AreaParams> areas;
    TorqueMatrix torque;
    ControlMode mode = ControlMode::AceLfc;

    // swing-PI / ACE-LFC
    std::vector<PidGains> local_pids;
    // hierarchical
    std::vector<double> local_kp;
    double global_ki = 0;
    std::vector<double> delays_up;
    std::vector<double> delays_down;
    std::optional<double> scattering_alpha;

    std::vector<LoadStep> loads;

    // non-fatal findings collected at parse time (e.g. tau_g >= tau_t)
    std::vector<std::string> warnings;

    int n() const { return torque.n; }
};

// Errors carry a category so the CLI can map them to its exit codes.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parse a scenario document (JSON text, see data/*.json for the shape) and
// validate every structural invariant. Throws SchemaError on malformed or
// missing fields, InvariantError on torque-matrix or arity violations.
NetworkSpec parse_network_config(const std::string& text);

TorqueValidation validate_torque_matrix(const TorqueMatrix& T);

// Eigenvalues of Q = -T, ascending. The largest is the structural zero.
std::vector<double> interaction_spectrum(const TorqueMatrix& T);

} // namespace gridfreq
