#pragma once

#include <complex>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridfreq/netmodel.hpp"

#ifndef GRIDFREQ_DATA_DIR
#define GRIDFREQ_DATA_DIR "data"
#endif

namespace testutil {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string data_file(const std::string& name) {
    return std::string(GRIDFREQ_DATA_DIR) + "/" + name;
}

inline gridfreq::NetworkSpec load_scenario(const std::string& name) {
    return gridfreq::parse_network_config(read_file(data_file(name)));
}

// Direct block-diagram evaluation of the per-area loop at one complex
// frequency, independent of the closed-form coefficient route.
inline std::complex<double> direct_agent_eval(const gridfreq::AreaParams& a,
                                              const gridfreq::PidGains& g,
                                              std::complex<double> s) {
    using C = std::complex<double>;
    const C F = 1.0 / (a.M * s + a.D);
    const C Fg = 1.0 / (a.tau_g * s + 1.0);
    const C Ft = 1.0 / (a.tau_t * s + 1.0);
    const C ctrl = g.kp + g.ki / s + g.kd * s / (g.tau_d * s + 1.0);
    return (1.0 / s) * (1.0 + ctrl * Fg * Ft) * F /
           (1.0 + (a.B * ctrl + 1.0 / a.R) * Fg * Ft * F);
}

inline std::complex<double> direct_sensitivity_eval(const gridfreq::AreaParams& a,
                                                    const gridfreq::PidGains& g,
                                                    std::complex<double> s) {
    using C = std::complex<double>;
    const C Fg = 1.0 / (a.tau_g * s + 1.0);
    const C Ft = 1.0 / (a.tau_t * s + 1.0);
    const C ctrl = g.kp + g.ki / s + g.kd * s / (g.tau_d * s + 1.0);
    return 1.0 / (1.0 + ctrl * Fg * Ft);
}

// Nominal parameter set reconciled with the published model coefficients
inline gridfreq::AreaParams nominal_area() {
    return {3.43, 5.06, 2.50, 0.417, 0.065, 0.23};
}
inline gridfreq::PidGains nominal_gains() { return {2.2820, 0.8244, 0.3418, 0.01}; }

} // namespace testutil
