#include "gridfreq/emit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <json.hpp>
#include <limits>
#include <sstream>

namespace gridfreq {

std::string fmt_sig6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v == 0.0 ? 0.0 : v); // normalize -0
    return buf;
}

std::string trace_to_csv(const SimulationTrace& trace) {
    std::ostringstream out;
    const int n = trace.n;
    out << "t";
    auto head = [&](const char* name) {
        for (int i = 1; i <= n; ++i) out << "," << name << "_" << i;
    };
    head("omega");
    head("delta");
    head("ace");
    head("ptl");
    out << ",S,supply,dissipation";
    if (trace.has_waves) {
        head("u_l");
        head("v_l");
        head("u_r");
        head("v_r");
        head("u_g");
        head("v_g");
        out << ",scatter_supply";
    }
    out << "\n";

    for (std::size_t k = 0; k < trace.t.size(); ++k) {
        out << fmt_sig6(trace.t[k]);
        auto row = [&](const std::vector<std::vector<double>>& series) {
            for (int i = 0; i < n; ++i)
                out << "," << fmt_sig6(series[k][static_cast<std::size_t>(i)]);
        };
        row(trace.omega);
        row(trace.delta);
        row(trace.ace);
        row(trace.p_tl);
        out << "," << fmt_sig6(trace.storage[k]) << "," << fmt_sig6(trace.supply[k]) << ","
            << fmt_sig6(trace.dissipation[k]);
        if (trace.has_waves) {
            row(trace.u_l);
            row(trace.v_l);
            row(trace.u_r);
            row(trace.v_r);
            row(trace.u_g);
            row(trace.v_g);
            out << "," << fmt_sig6(trace.scatter_supply[k]);
        }
        out << "\n";
    }
    return out.str();
}

std::string domain_to_csv(const DomainGrid& grid) {
    std::ostringstream out;
    out << "x,y,inside,binding_k\n";
    for (std::size_t xi = 0; xi < grid.xs.size(); ++xi) {
        for (std::size_t yi = 0; yi < grid.ys.size(); ++yi) {
            const std::size_t idx = xi * grid.ys.size() + yi;
            out << fmt_sig6(grid.xs[xi]) << "," << fmt_sig6(grid.ys[yi]) << ","
                << static_cast<int>(grid.inside[idx]) << "," << grid.binding_k[idx] << "\n";
        }
    }
    return out.str();
}

namespace {

constexpr int kWidth = 900;
constexpr int kHeight = 520;
constexpr int kMargin = 60;

double map_range(double v, double lo, double hi, double out_lo, double out_hi) {
    if (hi <= lo) return 0.5 * (out_lo + out_hi);
    return out_lo + (v - lo) / (hi - lo) * (out_hi - out_lo);
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"};

} // namespace

std::string svg_line_plot(const std::string& title, const std::vector<double>& time,
                          const std::vector<std::vector<double>>& series_by_step,
                          const std::string& series_prefix) {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\">" << title
        << "</text>\n";

    if (!time.empty() && !series_by_step.empty()) {
        const std::size_t n = series_by_step.front().size();
        double lo = 0, hi = 0;
        for (const auto& row : series_by_step)
            for (double v : row) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        if (hi - lo < 1e-12) {
            hi += 1e-12;
            lo -= 1e-12;
        }
        // axes
        out << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\""
            << kWidth - kMargin << "\" y2=\"" << kHeight - kMargin
            << "\" stroke=\"black\"/>\n";
        out << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin
            << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << kWidth - kMargin << "\" y=\"" << kHeight - kMargin + 30
            << "\" text-anchor=\"end\">t = " << fmt_sig6(time.back()) << " s</text>\n";
        out << "<text x=\"" << kMargin - 10 << "\" y=\"" << kMargin
            << "\" text-anchor=\"end\">" << fmt_sig6(hi) << "</text>\n";
        out << "<text x=\"" << kMargin - 10 << "\" y=\"" << kHeight - kMargin
            << "\" text-anchor=\"end\">" << fmt_sig6(lo) << "</text>\n";

        // thin the polylines to at most ~2000 points per series
        const std::size_t stride = std::max<std::size_t>(1, time.size() / 2000);
        for (std::size_t i = 0; i < n; ++i) {
            out << "<polyline fill=\"none\" stroke=\"" << kPalette[i % 10]
                << "\" stroke-width=\"1\" points=\"";
            for (std::size_t k = 0; k < time.size(); k += stride) {
                const double x = map_range(time[k], time.front(), time.back(), kMargin,
                                           kWidth - kMargin);
                const double y =
                    map_range(series_by_step[k][i], lo, hi, kHeight - kMargin, kMargin);
                out << fmt_sig6(x) << "," << fmt_sig6(y) << " ";
            }
            out << "\"/>\n";
            out << "<text x=\"" << kWidth - kMargin + 6 << "\" y=\""
                << kMargin + 16 * static_cast<int>(i) << "\" fill=\"" << kPalette[i % 10]
                << "\">" << series_prefix << "_" << i + 1 << "</text>\n";
        }
    }
    out << "</svg>\n";
    return out.str();
}

std::string svg_domain(const DomainGrid& grid,
                       const std::vector<std::pair<double, double>>& markers) {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    const double x_lo = grid.xs.front(), x_hi = grid.xs.back();
    const double y_lo = grid.ys.front(), y_hi = grid.ys.back();
    const double cw = static_cast<double>(kWidth - 2 * kMargin) /
                      static_cast<double>(grid.xs.size());
    const double ch = static_cast<double>(kHeight - 2 * kMargin) /
                      static_cast<double>(grid.ys.size());
    for (std::size_t xi = 0; xi < grid.xs.size(); ++xi) {
        for (std::size_t yi = 0; yi < grid.ys.size(); ++yi) {
            if (!grid.inside[xi * grid.ys.size() + yi]) continue;
            const double px = map_range(grid.xs[xi], x_lo, x_hi, kMargin, kWidth - kMargin);
            const double py = map_range(grid.ys[yi], y_lo, y_hi, kHeight - kMargin, kMargin);
            out << "<rect x=\"" << fmt_sig6(px - cw / 2) << "\" y=\"" << fmt_sig6(py - ch / 2)
                << "\" width=\"" << fmt_sig6(cw + 0.5) << "\" height=\"" << fmt_sig6(ch + 0.5)
                << "\" fill=\"#9ecae1\"/>\n";
        }
    }
    // axes through the origin when visible
    if (x_lo < 0 && x_hi > 0) {
        const double px = map_range(0, x_lo, x_hi, kMargin, kWidth - kMargin);
        out << "<line x1=\"" << fmt_sig6(px) << "\" y1=\"" << kMargin << "\" x2=\""
            << fmt_sig6(px) << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"black\"/>\n";
    }
    if (y_lo < 0 && y_hi > 0) {
        const double py = map_range(0, y_lo, y_hi, kHeight - kMargin, kMargin);
        out << "<line x1=\"" << kMargin << "\" y1=\"" << fmt_sig6(py) << "\" x2=\""
            << kWidth - kMargin << "\" y2=\"" << fmt_sig6(py) << "\" stroke=\"black\"/>\n";
    }
    for (const auto& [mx, my] : markers) {
        const double px = map_range(mx, x_lo, x_hi, kMargin, kWidth - kMargin);
        const double py = map_range(my, y_lo, y_hi, kHeight - kMargin, kMargin);
        out << "<circle cx=\"" << fmt_sig6(px) << "\" cy=\"" << fmt_sig6(py)
            << "\" r=\"4\" fill=\"#d62728\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string content_hash(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["scenario"] = scenario_path;
    j["parameters"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : parameters) j["parameters"][k] = v;
    j["out_dir"] = out_dir;
    j["files"] = nlohmann::ordered_json::array();
    for (const auto& [name, hash] : files)
        j["files"].push_back({{"name", name}, {"hash", hash}});
    return j.dump(2) + "\n";
}

} // namespace gridfreq
