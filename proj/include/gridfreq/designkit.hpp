#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridfreq/gfv.hpp"
#include "gridfreq/netmodel.hpp"
#include "gridfreq/transfer_function.hpp"

namespace gridfreq {

struct RobustRow {
    double lambda = 0;
    double norm = 0;  // ||lambda H_n / (1 - lambda H_n)||_inf
    double kappa = 0; // norm - 1/xi
    bool pass = false;
};

struct MatchingRow {
    int area = 0; // 1-based
    double norm = 0;
    bool pass = false;
    std::string diagnostic; // non-empty when the error system was unstable
};

// Result of the triad: nominal placement, robust stability, model matching,
// plus the optional eigenvalue-oracle cross-check. A failed test means
// "inconclusive", never "unstable": the triad is a sufficiency test.
struct StabilityReport {
    NominalTestResult nominal;
    std::vector<RobustRow> robust;
    std::vector<MatchingRow> matching;
    std::optional<double> oracle_abscissa;
    bool robust_pass = false;
    bool matching_pass = false;
    bool overall = false;

    // widest xi interval over which the triad would pass with these gains:
    // [max_i ||Delta_i||, 1 / max_i norm_i]; empty when lower > upper
    double xi_lower = 0;
    double xi_upper = 0;
};

// Robust-stability test over the strictly negative eigenvalues of Q.
// Requires a passed nominal test (the loop transfer must be stable for the
// norm to exist); throws InvariantError otherwise.
std::vector<RobustRow> robust_stability_test(const NominalModelSet& model_set,
                                             const std::vector<double>& spectrum);

std::vector<MatchingRow> model_matching_test(const std::vector<AreaParams>& areas,
                                             const std::vector<PidGains>& pids,
                                             const NominalModelSet& model_set);

// Executes the full procedure: nominal test, robust test, matching test, all
// three always reported. The network must be in ACE-LFC mode.
StabilityReport run_design_procedure(const NetworkSpec& network,
                                     const NominalModelSet& model_set);

struct SynthesisResult {
    PidGains gains;
    double achieved_norm = 0;
    bool success = false; // achieved_norm <= xi
    int evaluations = 0;
};

// Derivative-free matching-norm minimization over (kp, ki, kd) with the
// derivative filter constant held at the init value. Nelder-Mead with an
// evaluation budget of 2000; unstable iterates score +inf.
SynthesisResult synthesize_local_pid(const AreaParams& area,
                                     const NominalModelSet& model_set,
                                     const PidGains& init);

std::string report_to_json(const StabilityReport& report);
std::string report_to_text(const StabilityReport& report);

} // namespace gridfreq
