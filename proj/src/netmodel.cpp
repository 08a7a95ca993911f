#include "gridfreq/netmodel.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <sstream>

namespace gridfreq {

using nlohmann::json;

namespace {

constexpr double kZeroTol = 1e-9;

double require_number(const json& obj, const char* key, const char* where) {
    if (!obj.contains(key) || !obj[key].is_number()) {
        std::ostringstream msg;
        msg << "missing or non-numeric field '" << key << "' in " << where;
        throw SchemaError(msg.str());
    }
    return obj[key].get<double>();
}

AreaParams parse_area(const json& a, int index) {
    std::ostringstream where;
    where << "areas[" << index << "]";
    const std::string w = where.str();
    AreaParams p;
    p.M = require_number(a, "M", w.c_str());
    p.D = require_number(a, "D", w.c_str());
    p.R = require_number(a, "R", w.c_str());
    p.B = require_number(a, "B", w.c_str());
    p.tau_g = require_number(a, "tau_g", w.c_str());
    p.tau_t = require_number(a, "tau_t", w.c_str());
    for (double v : {p.M, p.D, p.R, p.B, p.tau_g, p.tau_t})
        if (!(v > 0)) throw InvariantError(w + ": all area parameters must be strictly positive");
    return p;
}

PidGains parse_pid(const json& g, int index) {
    std::ostringstream where;
    where << "pids[" << index << "]";
    const std::string w = where.str();
    PidGains p;
    p.kp = require_number(g, "kp", w.c_str());
    p.ki = require_number(g, "ki", w.c_str());
    p.kd = require_number(g, "kd", w.c_str());
    p.tau_d = g.contains("tau_d") ? require_number(g, "tau_d", w.c_str()) : 0.01;
    if (!(p.tau_d > 0)) throw InvariantError(w + ": tau_d must be strictly positive");
    return p;
}

std::vector<double> parse_real_list(const json& arr, std::size_t expect, const char* what) {
    if (!arr.is_array() || arr.size() != expect) {
        std::ostringstream msg;
        msg << what << " must be an array of length " << expect;
        throw SchemaError(msg.str());
    }
    std::vector<double> out;
    for (const auto& v : arr) {
        if (!v.is_number()) throw SchemaError(std::string(what) + " entries must be numeric");
        out.push_back(v.get<double>());
    }
    return out;
}

} // namespace

TorqueValidation validate_torque_matrix(const TorqueMatrix& T) {
    TorqueValidation rep;
    const int n = T.n;
    const auto& E = T.entries;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (E(i, j) != E(j, i)) {
                rep.symmetric = false;
                std::ostringstream msg;
                msg << "symmetry violated at (" << i + 1 << "," << j + 1 << ")/(" << j + 1 << ","
                    << i + 1 << ")";
                rep.messages.push_back(msg.str());
            }
            if (E(i, j) > 0) {
                rep.offdiag_sign = false;
                std::ostringstream msg;
                msg << "off-diagonal sign violated at (" << i + 1 << "," << j + 1 << ")";
                rep.messages.push_back(msg.str());
            }
        }
        double offsum = 0;
        for (int j = 0; j < n; ++j)
            if (j != i) offsum += E(i, j);
        if (std::abs(E(i, i) + offsum) > kZeroTol) {
            rep.row_sums = false;
            std::ostringstream msg;
            msg << "diagonal (" << i + 1 << "," << i + 1 << ") differs from negated row sum by "
                << std::abs(E(i, i) + offsum);
            rep.messages.push_back(msg.str());
        }
    }
    if (rep.symmetric) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(E);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("symmetric eigensolver failed to converge");
        rep.lambda_min = es.eigenvalues()(0);
        if (rep.lambda_min < -kZeroTol) {
            rep.psd = false;
            rep.messages.push_back("matrix is not positive semidefinite");
        }
        if (std::abs(rep.lambda_min) > kZeroTol) {
            // PSD but no zero eigenvalue also fails the Laplacian structure
            rep.psd = rep.psd && false;
            rep.messages.push_back("no zero eigenvalue (|lambda_min| > 1e-9)");
        }
    } else {
        rep.psd = false;
    }
    const double kernel_residual =
        (E * Eigen::VectorXd::Ones(n)).lpNorm<Eigen::Infinity>();
    if (kernel_residual > kZeroTol) {
        rep.kernel_ones = false;
        rep.messages.push_back("ones vector is not in the kernel");
    }
    return rep;
}

std::vector<double> interaction_spectrum(const TorqueMatrix& T) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-T.entries);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("symmetric eigensolver failed to converge");
    std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + T.n);
    std::sort(out.begin(), out.end());
    return out;
}

NetworkSpec parse_network_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("top level must be an object");
    if (!doc.contains("areas") || !doc["areas"].is_array() || doc["areas"].empty())
        throw SchemaError("'areas' must be a non-empty array");
    if (!doc.contains("torque") || !doc["torque"].is_array())
        throw SchemaError("'torque' must be an array of arrays");
    if (!doc.contains("control") || !doc["control"].is_object())
        throw SchemaError("'control' must be an object");

    NetworkSpec spec;
    int idx = 0;
    for (const auto& a : doc["areas"]) spec.areas.push_back(parse_area(a, idx++));
    const int n = static_cast<int>(spec.areas.size());
    for (int i = 0; i < n; ++i) {
        if (spec.areas[static_cast<std::size_t>(i)].tau_g >=
            spec.areas[static_cast<std::size_t>(i)].tau_t) {
            std::ostringstream msg;
            msg << "areas[" << i << "]: tau_g >= tau_t is unusual for governor/turbine stages";
            spec.warnings.push_back(msg.str());
        }
    }

    spec.torque.n = n;
    spec.torque.entries = Eigen::MatrixXd::Zero(n, n);
    if (static_cast<int>(doc["torque"].size()) != n)
        throw SchemaError("'torque' row count must match area count");
    for (int i = 0; i < n; ++i) {
        const auto& row = doc["torque"][static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<int>(row.size()) != n)
            throw SchemaError("'torque' must be square with arity matching 'areas'");
        for (int j = 0; j < n; ++j) {
            if (!row[static_cast<std::size_t>(j)].is_number())
                throw SchemaError("'torque' entries must be numeric");
            spec.torque.entries(i, j) = row[static_cast<std::size_t>(j)].get<double>();
        }
    }
    const TorqueValidation tv = validate_torque_matrix(spec.torque);
    if (!tv.pass()) {
        std::string msg = "torque matrix invariant failure:";
        for (const auto& m : tv.messages) msg += " " + m + ";";
        throw InvariantError(msg);
    }

    const auto& ctl = doc["control"];
    const int modes = static_cast<int>(ctl.contains("swing_pi")) +
                      static_cast<int>(ctl.contains("hierarchical")) +
                      static_cast<int>(ctl.contains("ace_lfc"));
    if (modes != 1)
        throw SchemaError("'control' must contain exactly one of swing_pi, hierarchical, ace_lfc");

    if (ctl.contains("swing_pi") || ctl.contains("ace_lfc")) {
        const bool swing = ctl.contains("swing_pi");
        spec.mode = swing ? ControlMode::SwingPi : ControlMode::AceLfc;
        const auto& block = swing ? ctl["swing_pi"] : ctl["ace_lfc"];
        if (!block.contains("pids") || !block["pids"].is_array() ||
            static_cast<int>(block["pids"].size()) != n)
            throw SchemaError("'pids' must be an array with one entry per area");
        idx = 0;
        for (const auto& g : block["pids"]) spec.local_pids.push_back(parse_pid(g, idx++));
    } else {
        spec.mode = ControlMode::Hierarchical;
        const auto& block = ctl["hierarchical"];
        spec.local_kp = parse_real_list(block.contains("local_kp") ? block["local_kp"] : json(),
                                        static_cast<std::size_t>(n), "'local_kp'");
        spec.global_ki = require_number(block, "global_ki", "'hierarchical'");
        spec.delays_up = parse_real_list(
            block.contains("delays_up") ? block["delays_up"] : json(),
            static_cast<std::size_t>(n), "'delays_up'");
        spec.delays_down = parse_real_list(
            block.contains("delays_down") ? block["delays_down"] : json(),
            static_cast<std::size_t>(n), "'delays_down'");
        for (double d : spec.delays_up)
            if (d < 0) throw InvariantError("delays must be nonnegative");
        for (double d : spec.delays_down)
            if (d < 0) throw InvariantError("delays must be nonnegative");
        if (block.contains("alpha")) {
            const double a = require_number(block, "alpha", "'hierarchical'");
            if (!(a > 0)) throw InvariantError("scattering alpha must be strictly positive");
            spec.scattering_alpha = a;
        }
    }

    if (doc.contains("loads")) {
        if (!doc["loads"].is_array()) throw SchemaError("'loads' must be an array");
        for (const auto& l : doc["loads"]) {
            LoadStep step;
            step.t = require_number(l, "t", "loads entry");
            step.area = static_cast<int>(require_number(l, "area", "loads entry"));
            step.dp = require_number(l, "dp", "loads entry");
            if (step.area < 1 || step.area > n)
                throw InvariantError("load step area index out of range");
            if (step.t < 0) throw InvariantError("load step time must be nonnegative");
            spec.loads.push_back(step);
        }
    }
    return spec;
}

} // namespace gridfreq
