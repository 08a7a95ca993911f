// gridfreq: scenario validation, stability analysis, simulation and
// table-reproduction front end.
//
// Exit codes: 0 pass, 1 inconclusive / tolerance breach, 2 schema error,
// 3 invariant violation, 4 nominal test failed, 5 simulation blow-up.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "gridfreq/designkit.hpp"
#include "gridfreq/emit.hpp"
#include "gridfreq/gfv.hpp"
#include "gridfreq/netmodel.hpp"
#include "gridfreq/sim.hpp"
#include "gridfreq/transfer_function.hpp"

namespace fs = std::filesystem;
using namespace gridfreq;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitInconclusive = 1;
constexpr int kExitSchema = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitNominalFailed = 4;
constexpr int kExitBlowUp = 5;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fmt4(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

// Collects emitted files and writes the manifest last, so that a directory
// containing manifest.json always holds a complete run.
struct Emitter {
    RunManifest manifest;

    explicit Emitter(std::string command, std::string scenario, std::string out_dir) {
        manifest.command = std::move(command);
        manifest.scenario_path = std::move(scenario);
        manifest.out_dir = std::move(out_dir);
        fs::create_directories(manifest.out_dir);
    }

    void param(const std::string& key, const std::string& value) {
        manifest.parameters.emplace_back(key, value);
    }

    void write(const std::string& name, const std::string& content) {
        std::ofstream out(fs::path(manifest.out_dir) / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + name);
        out << content;
        manifest.files.emplace_back(name, content_hash(content));
    }

    void finish() { write_raw("manifest.json", manifest.to_json()); }

private:
    void write_raw(const std::string& name, const std::string& content) {
        std::ofstream out(fs::path(manifest.out_dir) / name, std::ios::binary);
        out << content;
    }
};

// A nominal model file carries either raw coefficients {num, den} or the
// physical parameter + gain form; "from-params" reads the scenario's own
// "nominal" object.
RationalTransferFunction load_nominal(const std::string& spec_arg,
                                      const std::string& scenario_path) {
    json doc;
    if (spec_arg == "from-params") {
        const json scenario = json::parse(read_file(scenario_path));
        if (!scenario.contains("nominal"))
            throw SchemaError("scenario has no \"nominal\" object");
        doc = scenario["nominal"];
    } else {
        try {
            doc = json::parse(read_file(spec_arg));
        } catch (const json::parse_error& e) {
            throw SchemaError(std::string("nominal model file: ") + e.what());
        }
    }
    if (doc.contains("num") && doc.contains("den"))
        return {doc["num"].get<Poly>(), doc["den"].get<Poly>()};
    if (doc.contains("M")) {
        const AreaParams area{doc.at("M").get<double>(),     doc.at("D").get<double>(),
                              doc.at("R").get<double>(),     doc.at("B").get<double>(),
                              doc.at("tau_g").get<double>(), doc.at("tau_t").get<double>()};
        const PidGains pid{doc.at("kp").get<double>(), doc.at("ki").get<double>(),
                           doc.at("kd").get<double>(), doc.value("tau_d", 0.01)};
        return local_agent_tf(area, pid);
    }
    throw SchemaError("nominal model needs either num/den or physical parameters");
}

NetworkSpec load_scenario(const std::string& path) {
    return parse_network_config(read_file(path));
}

// ---- validate -------------------------------------------------------------

int cmd_validate(const std::string& scenario, const std::string& out_dir) {
    const NetworkSpec net = load_scenario(scenario);
    const TorqueValidation rep = validate_torque_matrix(net.torque);
    const auto spectrum = interaction_spectrum(net.torque);

    Emitter em("validate", scenario, out_dir);
    ordered_json j;
    j["areas"] = net.n();
    j["mode"] = net.mode == ControlMode::SwingPi       ? "swing_pi"
                : net.mode == ControlMode::Hierarchical ? "hierarchical"
                                                        : "ace_lfc";
    j["torque"] = {{"symmetric", rep.symmetric},
                   {"offdiag_sign", rep.offdiag_sign},
                   {"row_sums", rep.row_sums},
                   {"psd", rep.psd},
                   {"kernel_ones", rep.kernel_ones},
                   {"lambda_min", rep.lambda_min}};
    j["spectrum"] = spectrum;
    j["warnings"] = net.warnings;
    j["valid"] = rep.pass();
    em.write("validation.json", j.dump(2) + "\n");
    em.finish();

    std::cout << "scenario: " << scenario << "\n"
              << "areas: " << net.n() << ", mode: " << j["mode"].get<std::string>() << "\n"
              << "interaction spectrum:";
    for (double lam : spectrum) std::cout << " " << fmt4(lam);
    std::cout << "\n";
    for (const auto& w : net.warnings) std::cout << "warning: " << w << "\n";
    std::cout << "valid\n";
    return kExitPass;
}

// ---- analyze --------------------------------------------------------------

int cmd_analyze(const std::string& scenario, double xi, const std::string& nominal,
                bool oracle, const std::string& out_dir) {
    const NetworkSpec net = load_scenario(scenario);
    const NominalModelSet set{load_nominal(nominal, scenario), xi};

    StabilityReport report = run_design_procedure(net, set);
    if (oracle) report.oracle_abscissa = closed_loop_eigen_oracle(net).abscissa;

    Emitter em("analyze", scenario, out_dir);
    em.param("xi", fmt_sig6(xi));
    em.param("nominal", nominal);
    em.param("oracle", oracle ? "true" : "false");
    em.write("report.json", report_to_json(report));
    em.write("report.txt", report_to_text(report));
    em.finish();

    std::cout << report_to_text(report);
    if (!report.nominal.pass) return kExitNominalFailed;
    return report.overall ? kExitPass : kExitInconclusive;
}

// ---- simulate -------------------------------------------------------------

int cmd_simulate(const std::string& scenario, std::string mode, double step,
                 double horizon, bool audit, bool no_scattering, double alpha,
                 double load_scale, bool svg, const std::string& out_dir) {
    const NetworkSpec net = load_scenario(scenario);
    if (mode.empty())
        mode = net.mode == ControlMode::SwingPi       ? "swing"
               : net.mode == ControlMode::Hierarchical ? "hierarchical"
                                                       : "lfc";

    LoadScenario loads{net.loads, horizon};
    for (auto& stepv : loads.steps) stepv.dp *= load_scale;

    SimulationTrace trace;
    if (mode == "swing") {
        trace = simulate_swing(net, loads, step, horizon);
    } else if (mode == "hierarchical") {
        ScatteringConfig sc;
        sc.enabled = !no_scattering;
        if (alpha > 0) sc.alpha = alpha;
        trace = simulate_hierarchical(net, loads, sc, step, horizon);
    } else if (mode == "lfc") {
        trace = simulate_lfc(net, loads, step, horizon);
    } else {
        throw CLI::ValidationError("--mode", "unknown mode " + mode);
    }

    Emitter em("simulate", scenario, out_dir);
    em.param("mode", mode);
    em.param("step", fmt_sig6(step));
    em.param("horizon", fmt_sig6(horizon));
    em.param("load_scale", fmt_sig6(load_scale));
    if (mode == "hierarchical") {
        em.param("scattering", no_scattering ? "off" : "on");
        if (alpha > 0) em.param("alpha", fmt_sig6(alpha));
    }
    em.write("trace.csv", trace_to_csv(trace));

    if (audit && !trace.blew_up) {
        const EnergyAudit a = energy_audit(trace, net);
        ordered_json j{{"max_balance_residual", a.max_balance_residual},
                       {"balance_ok", a.balance_ok},
                       {"rho", a.rho},
                       {"max_rho_violation", a.max_rho_violation},
                       {"rho_ok", a.rho_ok}};
        if (trace.has_waves) {
            j["min_scatter_supply"] = a.min_scatter_supply;
            j["scatter_ok"] = a.scatter_ok;
        }
        em.write("audit.json", j.dump(2) + "\n");
        std::cout << "audit: balance " << (a.balance_ok ? "ok" : "VIOLATED")
                  << " (max residual " << fmt_sig6(a.max_balance_residual) << "), rho bound "
                  << (a.rho_ok ? "ok" : "VIOLATED");
        if (trace.has_waves)
            std::cout << ", channel supply " << (a.scatter_ok ? "ok" : "VIOLATED");
        std::cout << "\n";
    }
    if (svg) {
        em.write("omega.svg", svg_line_plot("frequency deviation", trace.t, trace.omega,
                                            "omega"));
        em.write("ace.svg", svg_line_plot("area control error", trace.t, trace.ace, "ace"));
    }
    em.finish();

    // tail statistics over the last fifth of the horizon
    double tail_max = 0.0, tail_acc = 0.0;
    std::size_t tail_count = 0;
    for (std::size_t k = 0; k < trace.t.size(); ++k) {
        if (trace.t[k] < 0.8 * horizon) continue;
        for (double w : trace.omega[k]) {
            tail_max = std::max(tail_max, std::abs(w));
            tail_acc += w * w;
            ++tail_count;
        }
    }
    if (trace.blew_up) {
        std::cout << "diverged at t = " << fmt_sig6(trace.blow_time)
                  << " s (partial trace retained)\n";
        return kExitBlowUp;
    }
    std::cout << "completed " << fmt_sig6(horizon) << " s; tail max |omega| = "
              << fmt_sig6(tail_max) << ", tail RMS = "
              << fmt_sig6(tail_count ? std::sqrt(tail_acc / static_cast<double>(tail_count))
                                     : 0.0)
              << "\n";
    return kExitPass;
}

// ---- domain ---------------------------------------------------------------

int cmd_domain(const std::string& nominal, std::vector<double> window, int resolution,
               const std::string& spectrum_from, const std::string& out_dir) {
    const RationalTransferFunction h_n = load_nominal(nominal, "");
    const DomainGrid grid = sample_stable_domain(h_n, window[0], window[1], window[2],
                                                 window[3], resolution, resolution);

    std::vector<std::pair<double, double>> markers;
    bool all_inside = true;
    if (!spectrum_from.empty()) {
        const NetworkSpec net = load_scenario(spectrum_from);
        for (double lam : interaction_spectrum(net.torque)) {
            if (std::abs(lam) < 1e-9) continue; // structural zero excluded
            markers.emplace_back(lam, 0.0);
            all_inside = all_inside && in_stable_domain(h_n, {lam, 0.0});
        }
    }

    Emitter em("domain", spectrum_from.empty() ? nominal : spectrum_from, out_dir);
    em.param("nominal", nominal);
    em.param("window", fmt_sig6(window[0]) + ":" + fmt_sig6(window[1]) + ":" +
                           fmt_sig6(window[2]) + ":" + fmt_sig6(window[3]));
    em.param("resolution", std::to_string(resolution));
    em.write("domain.csv", domain_to_csv(grid));
    em.write("domain.svg", svg_domain(grid, markers));
    em.finish();

    if (!markers.empty())
        std::cout << markers.size() << " nonzero eigenvalues, "
                  << (all_inside ? "all inside the stable domain"
                                 : "membership test inconclusive")
                  << "\n";
    return all_inside ? kExitPass : kExitInconclusive;
}

// ---- reproduce ------------------------------------------------------------

struct RefRow {
    std::string label;
    double reference = 0;
    double computed = 0;
    bool sign_only = false; // known misprint: verify sign, not magnitude
};

int emit_reproduction(const std::string& id, const std::string& quantity,
                      const std::vector<RefRow>& rows, double tol,
                      const std::string& out_dir) {
    std::ostringstream table;
    table << "table " << id << " (" << quantity << ")\n";
    table << "row            reference   computed    |dev|\n";
    double worst = 0.0;
    std::string worst_label;
    bool ok = true;
    for (const auto& r : rows) {
        const double dev = std::abs(r.computed - r.reference);
        table << "  " << r.label << std::string(r.label.size() < 13 ? 13 - r.label.size() : 1, ' ')
              << fmt4(r.reference) << "     " << fmt4(r.computed) << "     " << fmt4(dev);
        if (r.sign_only) {
            table << "  (sign check only)";
            ok = ok && (r.computed <= 0.0) == (r.reference <= 0.0);
        } else {
            if (dev > worst) {
                worst = dev;
                worst_label = r.label;
            }
            ok = ok && dev <= tol;
        }
        table << "\n";
    }
    table << "max deviation: " << fmt4(worst) << " (tolerance " << fmt4(tol) << ")\n";
    table << (ok ? "within tolerance\n" : "TOLERANCE BREACH at row " + worst_label + "\n");

    Emitter em("reproduce", id, out_dir);
    em.param("table", id);
    em.write("reproduce_" + id + ".txt", table.str());
    em.finish();
    std::cout << table.str();
    return ok ? kExitPass : kExitInconclusive;
}

int cmd_reproduce(const std::string& id, const std::string& data_dir,
                  const std::string& out_dir) {
    const auto scenario = [&](const char* name) {
        return load_scenario((fs::path(data_dir) / name).string());
    };
    const RationalTransferFunction h_n =
        load_nominal((fs::path(data_dir) / "eq22.json").string(), "");

    const std::vector<double> ref_q6 = {-1.766, -1.432, -1.288, -1.059, -0.926,
                                        -0.826, -0.680, -0.600, -0.364, 0.0};
    const std::vector<double> ref_q7 = {-4.480, -3.391, -3.070, -2.593, -1.960,
                                        -1.703, -1.336, -1.212, -0.809, 0.0};

    if (id == "sigmaQ6" || id == "sigmaQ7") {
        const NetworkSpec net = scenario(id == "sigmaQ6" ? "appendix2.json" : "appendix3.json");
        const auto& ref = id == "sigmaQ6" ? ref_q6 : ref_q7;
        const auto spec = interaction_spectrum(net.torque);
        std::vector<RefRow> rows;
        for (std::size_t i = 0; i < ref.size(); ++i)
            rows.push_back({"lambda_" + std::to_string(i + 1), ref[i], spec[i]});
        return emit_reproduction(id, "eigenvalues of Q", rows, 1e-3, out_dir);
    }
    if (id == "D1") {
        const double d1 = stability_determinants(h_n, -1.0, 0.0).d[0];
        return emit_reproduction(id, "leading determinant", {{"D_1", 121.3, d1}},
                                 0.01 * 121.3, out_dir);
    }
    if (id == "III" || id == "VIII") {
        const double ref3[9] = {-0.7145, -0.7243, -0.7136, -0.7029, -0.6915,
                                -0.6810, -0.6620, -0.6494, -0.6034};
        const double ref8[9] = {-0.2051, -0.4647, -0.5381, -0.6154, -0.7107,
                                -0.7156, -0.7163, -0.7229, -0.6791};
        const auto& ref = id == "III" ? ref3 : ref8;
        const auto& sigma = id == "III" ? ref_q6 : ref_q7;
        const auto rr = robust_stability_test({h_n, 0.5}, sigma);
        std::vector<RefRow> rows;
        for (std::size_t i = 0; i < 9; ++i)
            rows.push_back({"lambda " + fmt4(rr[i].lambda), ref[i], rr[i].kappa,
                            id == "III" && i == 4});
        return emit_reproduction(id, "robust stability margins kappa", rows, 5e-3, out_dir);
    }
    if (id == "IV" || id == "IX") {
        const double ref[10] = {0.3979, 0.1286, 0.1561, 0.1549, 0.1201,
                                0.2411, 0.2086, 0.1709, 0.2252, 0.0939};
        const NetworkSpec net = scenario(id == "IV" ? "appendix2.json" : "appendix3.json");
        const auto rows_m = model_matching_test(net.areas, net.local_pids, {h_n, 0.5});
        std::vector<RefRow> rows;
        for (std::size_t i = 0; i < 10; ++i)
            rows.push_back({"area " + std::to_string(i + 1), ref[i], rows_m[i].norm});
        return emit_reproduction(id, "model matching norms", rows, 5e-3, out_dir);
    }
    throw CLI::ValidationError("table", "unknown table id " + id);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stability analysis and simulation toolkit for decentralized "
                 "frequency control of multi-area power networks"};
    app.require_subcommand(1);

    std::string scenario, nominal = "from-params", out_dir = ".", mode, spectrum_from;
    std::string table_id, data_dir = "data";
    double xi = 0.5, step = 1e-3, horizon = 100.0, alpha = 0.0, load_scale = 1.0;
    bool oracle = false, audit = false, no_scattering = false, svg = false;
    std::vector<double> window = {-30.0, 5.0, -30.0, 30.0};
    int resolution = 121;

    auto* validate = app.add_subcommand("validate", "check a scenario file");
    validate->add_option("scenario", scenario)->required();
    validate->add_option("--out", out_dir);

    auto* analyze = app.add_subcommand("analyze", "run the three-part stability test");
    analyze->add_option("scenario", scenario)->required();
    analyze->add_option("--xi", xi);
    analyze->add_option("--nominal", nominal,
                        "nominal model file, or \"from-params\" to read the scenario");
    analyze->add_flag("--oracle", oracle, "append the closed-loop spectral abscissa");
    analyze->add_option("--out", out_dir);

    auto* simulate = app.add_subcommand("simulate", "integrate a scenario");
    simulate->add_option("scenario", scenario)->required();
    simulate->add_option("--mode", mode, "swing | hierarchical | lfc");
    simulate->add_option("--step", step);
    simulate->add_option("--horizon", horizon);
    simulate->add_flag("--audit", audit);
    simulate->add_flag("--no-scattering", no_scattering);
    simulate->add_option("--alpha", alpha);
    simulate->add_option("--load-scale", load_scale);
    simulate->add_flag("--svg", svg);
    simulate->add_option("--out", out_dir);

    auto* domain = app.add_subcommand("domain", "sample the stable domain");
    domain->add_option("nominal", nominal)->required();
    domain->add_option("--window", window, "x_min x_max y_min y_max")->expected(4);
    domain->add_option("--resolution", resolution);
    domain->add_option("--spectrum-from", spectrum_from, "scenario providing eigenvalue markers");
    domain->add_option("--out", out_dir);

    auto* reproduce = app.add_subcommand("reproduce", "recompute a published table");
    reproduce->add_option("table", table_id, "III | IV | VIII | IX | sigmaQ6 | sigmaQ7 | D1")
        ->required();
    reproduce->add_option("--data", data_dir, "bundled data directory");
    reproduce->add_option("--out", out_dir);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) return cmd_validate(scenario, out_dir);
        if (*analyze) return cmd_analyze(scenario, xi, nominal, oracle, out_dir);
        if (*simulate)
            return cmd_simulate(scenario, mode, step, horizon, audit, no_scattering, alpha,
                                load_scale, svg, out_dir);
        if (*domain) return cmd_domain(nominal, window, resolution, spectrum_from, out_dir);
        if (*reproduce) return cmd_reproduce(table_id, data_dir, out_dir);
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kExitSchema;
    } catch (const InvariantError& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return kExitSchema;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvariant;
    }
    return kExitPass;
}
