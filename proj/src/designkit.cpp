#include "gridfreq/designkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <limits>
#include <random>
#include <sstream>

#include "gridfreq/parallel.hpp"

namespace gridfreq {

namespace {

constexpr double kZeroEig = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

} // namespace

std::vector<RobustRow> robust_stability_test(const NominalModelSet& model_set,
                                             const std::vector<double>& spectrum) {
    const NominalTestResult nominal = nominal_stability_test(model_set.h_n, spectrum);
    if (!nominal.pass)
        throw InvariantError(
            "nominal stability test failed: robust test refuses to run on an unstable loop");

    std::vector<double> lambdas;
    for (double lam : spectrum)
        if (lam < -kZeroEig) lambdas.push_back(lam);

    std::vector<RobustRow> rows(lambdas.size());
    const Poly num = poly_trim(model_set.h_n.num);
    const Poly den = poly_trim(model_set.h_n.den);
    parallel_for(lambdas.size(), [&](std::size_t i) {
        const double lam = lambdas[i];
        // lambda H_n / (1 - lambda H_n) = lambda num / (den - lambda num)
        const RationalTransferFunction loop{poly_scale(num, lam),
                                            poly_sub(den, poly_scale(num, lam))};
        RobustRow row;
        row.lambda = lam;
        row.norm = hinf_norm(loop);
        row.kappa = row.norm - 1.0 / model_set.xi;
        row.pass = row.kappa <= 0.0;
        rows[i] = row;
    });
    return rows;
}

std::vector<MatchingRow> model_matching_test(const std::vector<AreaParams>& areas,
                                             const std::vector<PidGains>& pids,
                                             const NominalModelSet& model_set) {
    if (areas.size() != pids.size())
        throw InvariantError("model matching needs one controller per area");
    std::vector<MatchingRow> rows(areas.size());
    parallel_for(areas.size(), [&](std::size_t i) {
        MatchingRow row;
        row.area = static_cast<int>(i) + 1;
        try {
            const RationalTransferFunction h_i = local_agent_tf(areas[i], pids[i]);
            const RationalTransferFunction delta = multiplicative_error(h_i, model_set.h_n);
            row.norm = hinf_norm(delta);
            row.pass = row.norm <= model_set.xi;
        } catch (const std::domain_error& e) {
            row.norm = kInf;
            row.pass = false;
            row.diagnostic = e.what();
        }
        rows[i] = row;
    });
    return rows;
}

StabilityReport run_design_procedure(const NetworkSpec& network,
                                     const NominalModelSet& model_set) {
    if (network.mode != ControlMode::AceLfc)
        throw InvariantError("design procedure requires an ACE-LFC scenario");
    if (network.local_pids.size() != network.areas.size())
        throw InvariantError("Step 2 inputs absent: per-area PID gains missing");

    StabilityReport report;
    const std::vector<double> spectrum = interaction_spectrum(network.torque);
    report.nominal = nominal_stability_test(model_set.h_n, spectrum);

    if (report.nominal.pass) {
        report.robust = robust_stability_test(model_set, spectrum);
        report.robust_pass = std::all_of(report.robust.begin(), report.robust.end(),
                                         [](const RobustRow& r) { return r.pass; });
    } else {
        report.robust_pass = false;
    }

    report.matching = model_matching_test(network.areas, network.local_pids, model_set);
    report.matching_pass = std::all_of(report.matching.begin(), report.matching.end(),
                                       [](const MatchingRow& r) { return r.pass; });

    report.overall = report.nominal.pass && report.robust_pass && report.matching_pass;

    double worst_delta = 0.0;
    for (const auto& r : report.matching) worst_delta = std::max(worst_delta, r.norm);
    double worst_loop = 0.0;
    for (const auto& r : report.robust) worst_loop = std::max(worst_loop, r.norm);
    report.xi_lower = worst_delta;
    report.xi_upper = worst_loop > 0.0 ? 1.0 / worst_loop : 1.0;
    return report;
}

SynthesisResult synthesize_local_pid(const AreaParams& area,
                                     const NominalModelSet& model_set,
                                     const PidGains& init) {
    constexpr int kBudget = 2000;
    int evals = 0;
    auto objective = [&](const std::array<double, 3>& x) -> double {
        ++evals;
        PidGains g{x[0], x[1], x[2], init.tau_d};
        try {
            const RationalTransferFunction h_i = local_agent_tf(area, g);
            const RationalTransferFunction delta = multiplicative_error(h_i, model_set.h_n);
            return hinf_norm(delta);
        } catch (const std::exception&) {
            return kInf;
        }
    };

    std::array<double, 3> start{init.kp, init.ki, init.kd};
    double f_start = objective(start);
    if (!std::isfinite(f_start)) {
        std::mt19937 rng(12345);
        std::uniform_real_distribution<double> jitter(-0.5, 0.5);
        for (int attempt = 0; attempt < 100 && !std::isfinite(f_start); ++attempt) {
            std::array<double, 3> cand;
            for (int j = 0; j < 3; ++j) {
                const double base = start[static_cast<std::size_t>(j)];
                cand[static_cast<std::size_t>(j)] =
                    base + (std::abs(base) > 1e-9 ? std::abs(base) : 1.0) * jitter(rng);
            }
            const double fc = objective(cand);
            if (std::isfinite(fc)) {
                start = cand;
                f_start = fc;
            }
        }
    }

    SynthesisResult result;
    result.gains = init;
    if (!std::isfinite(f_start)) {
        result.achieved_norm = kInf;
        result.evaluations = evals;
        return result;
    }

    // Nelder-Mead with standard coefficients
    constexpr double kAlpha = 1.0, kGamma = 2.0, kRho = 0.5, kSigma = 0.5;
    std::vector<std::array<double, 3>> simplex{start};
    std::vector<double> fv{f_start};
    for (int j = 0; j < 3; ++j) {
        std::array<double, 3> v = start;
        const double step = std::abs(v[static_cast<std::size_t>(j)]) > 1e-9
                                ? 0.25 * std::abs(v[static_cast<std::size_t>(j)])
                                : 0.25;
        v[static_cast<std::size_t>(j)] += step;
        simplex.push_back(v);
        fv.push_back(objective(v));
    }

    auto order = [&] {
        std::vector<std::size_t> idx{0, 1, 2, 3};
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        std::vector<std::array<double, 3>> s2;
        std::vector<double> f2;
        for (std::size_t k : idx) {
            s2.push_back(simplex[k]);
            f2.push_back(fv[k]);
        }
        simplex.swap(s2);
        fv.swap(f2);
    };

    while (evals < kBudget) {
        order();
        if (std::isfinite(fv[3]) && fv[3] - fv[0] < 1e-10) break;
        std::array<double, 3> centroid{};
        for (int k = 0; k < 3; ++k)
            for (int j = 0; j < 3; ++j)
                centroid[static_cast<std::size_t>(j)] +=
                    simplex[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] / 3.0;
        auto blend = [&](const std::array<double, 3>& from, double coef) {
            std::array<double, 3> out;
            for (int j = 0; j < 3; ++j)
                out[static_cast<std::size_t>(j)] =
                    centroid[static_cast<std::size_t>(j)] +
                    coef * (from[static_cast<std::size_t>(j)] - centroid[static_cast<std::size_t>(j)]);
            return out;
        };
        const auto xr = blend(simplex[3], -kAlpha);
        const double fr = objective(xr);
        if (fr < fv[0]) {
            const auto xe = blend(simplex[3], -kAlpha * kGamma);
            const double fe = objective(xe);
            if (fe < fr) {
                simplex[3] = xe;
                fv[3] = fe;
            } else {
                simplex[3] = xr;
                fv[3] = fr;
            }
        } else if (fr < fv[2]) {
            simplex[3] = xr;
            fv[3] = fr;
        } else {
            const bool outside = fr < fv[3];
            const auto xc = outside ? blend(simplex[3], -kAlpha * kRho) : blend(simplex[3], kRho);
            const double fc = objective(xc);
            if (fc < (outside ? fr : fv[3])) {
                simplex[3] = xc;
                fv[3] = fc;
            } else {
                for (int k = 1; k < 4; ++k) {
                    for (int j = 0; j < 3; ++j)
                        simplex[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] =
                            simplex[0][static_cast<std::size_t>(j)] +
                            kSigma * (simplex[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] -
                                      simplex[0][static_cast<std::size_t>(j)]);
                    fv[static_cast<std::size_t>(k)] = objective(simplex[static_cast<std::size_t>(k)]);
                }
            }
        }
    }
    order();

    result.gains = PidGains{simplex[0][0], simplex[0][1], simplex[0][2], init.tau_d};
    result.achieved_norm = fv[0];
    result.success = fv[0] <= model_set.xi;
    result.evaluations = evals;
    return result;
}

std::string report_to_json(const StabilityReport& report) {
    nlohmann::ordered_json j;
    j["nominal"] = nlohmann::ordered_json::array();
    for (const auto& v : report.nominal.verdicts) {
        j["nominal"].push_back({{"lambda", v.lambda},
                                {"excluded", v.excluded},
                                {"inside", v.inside}});
    }
    j["nominal_pass"] = report.nominal.pass;
    j["robust"] = nlohmann::ordered_json::array();
    for (const auto& r : report.robust) {
        j["robust"].push_back(
            {{"lambda", r.lambda}, {"norm", r.norm}, {"kappa", r.kappa}, {"pass", r.pass}});
    }
    j["robust_pass"] = report.robust_pass;
    j["matching"] = nlohmann::ordered_json::array();
    for (const auto& m : report.matching) {
        nlohmann::ordered_json row{{"area", m.area}, {"norm", m.norm}, {"pass", m.pass}};
        if (!m.diagnostic.empty()) row["diagnostic"] = m.diagnostic;
        j["matching"].push_back(row);
    }
    j["matching_pass"] = report.matching_pass;
    if (report.oracle_abscissa) j["oracle_abscissa"] = *report.oracle_abscissa;
    j["xi_interval"] = {report.xi_lower, report.xi_upper};
    j["overall"] = report.overall ? "pass" : "inconclusive";
    return j.dump(2) + "\n";
}

std::string report_to_text(const StabilityReport& report) {
    std::ostringstream out;
    out << "Nominal stability test: " << (report.nominal.pass ? "pass" : "inconclusive")
        << "\n";
    for (const auto& v : report.nominal.verdicts) {
        out << "  lambda " << fmt4(v.lambda) << "  "
            << (v.excluded ? "excluded (zero eigenvalue)" : (v.inside ? "inside" : "outside"))
            << "\n";
    }
    out << "\nRobust stability test (kappa = norm - 1/xi):\n";
    out << "  lambda      norm      kappa     verdict\n";
    for (const auto& r : report.robust) {
        out << "  " << fmt4(r.lambda) << "   " << fmt4(r.norm) << "   " << fmt4(r.kappa)
            << "   " << (r.pass ? "pass" : "inconclusive") << "\n";
    }
    out << "\nModel matching test (pass iff norm <= xi):\n";
    out << "  area   norm      verdict\n";
    for (const auto& m : report.matching) {
        out << "  " << m.area << "      " << fmt4(m.norm) << "   "
            << (m.pass ? "pass" : "inconclusive");
        if (!m.diagnostic.empty()) out << "  (" << m.diagnostic << ")";
        out << "\n";
    }
    out << "\nWorkable xi interval: [" << fmt4(report.xi_lower) << ", "
        << fmt4(report.xi_upper) << "]"
        << (report.xi_lower > report.xi_upper ? " (empty)" : "") << "\n";
    if (report.oracle_abscissa)
        out << "Closed-loop spectral abscissa (oracle): " << fmt4(*report.oracle_abscissa)
            << "\n";
    out << "Overall: " << (report.overall ? "pass" : "inconclusive") << "\n";
    return out.str();
}

} // namespace gridfreq
