#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gridfreq/gfv.hpp"
#include "gridfreq/sim.hpp"

namespace gridfreq {

// 6 significant figures, the fixed CSV number format
std::string fmt_sig6(double v);

std::string trace_to_csv(const SimulationTrace& trace);

// columns: x,y,inside,binding_k
std::string domain_to_csv(const DomainGrid& grid);

// Minimal standalone SVG: polylines over a time axis, one per labeled series.
std::string svg_line_plot(const std::string& title,
                          const std::vector<double>& time,
                          const std::vector<std::vector<double>>& series_by_step,
                          const std::string& series_prefix);

// Shaded stable-domain region with optional eigenvalue markers.
std::string svg_domain(const DomainGrid& grid,
                       const std::vector<std::pair<double, double>>& markers);

// FNV-1a 64-bit content hash, lowercase hex
std::string content_hash(const std::string& data);

struct RunManifest {
    std::string command;
    std::string scenario_path;
    std::vector<std::pair<std::string, std::string>> parameters;
    std::string out_dir;
    std::vector<std::pair<std::string, std::string>> files; // name -> hash

    std::string to_json() const;
};

} // namespace gridfreq
