#include "gridfreq/sim.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gridfreq {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kBlowUp = 10.0;
constexpr double kStructuralZero = 1e-8;

VectorXd load_vector(const std::vector<LoadStep>& steps, int n, double tq) {
    VectorXd pl = VectorXd::Zero(n);
    for (const auto& s : steps)
        if (tq >= s.t) pl(s.area - 1) += s.dp;
    return pl;
}

// Ring-buffer history of one per-area signal with linear interpolation.
// Reads beyond the most recent write clamp to it (zero-order hold at the
// frontier); reads before t = 0 return the zero initial history.
class DelayLine {
public:
    DelayLine(int areas, double step, double max_delay)
        : h_(step),
          size_(static_cast<std::size_t>(std::ceil(std::max(max_delay, 0.0) / step)) + 4),
          buf_(size_ * static_cast<std::size_t>(areas), 0.0),
          areas_(areas) {}

    void write(long k, const VectorXd& v) {
        last_ = k;
        double* row = &buf_[static_cast<std::size_t>(k % static_cast<long>(size_)) *
                            static_cast<std::size_t>(areas_)];
        for (int i = 0; i < areas_; ++i) row[i] = v(i);
    }

    double read(double tq, int area) const {
        const double kk = tq / h_;
        long k0 = static_cast<long>(std::floor(kk));
        if (k0 < 0) return 0.0;
        if (k0 >= last_) return at(last_, area);
        const double fr = kk - static_cast<double>(k0);
        return at(k0, area) * (1.0 - fr) + at(k0 + 1, area) * fr;
    }

private:
    double at(long k, int area) const {
        return buf_[static_cast<std::size_t>(k % static_cast<long>(size_)) *
                        static_cast<std::size_t>(areas_) +
                    static_cast<std::size_t>(area)];
    }

    double h_;
    std::size_t size_;
    std::vector<double> buf_;
    int areas_;
    long last_ = -1;
};

struct TraceBuilder {
    SimulationTrace trace;
    const MatrixXd* T = nullptr;
    VectorXd M, B_bias, D;

    void init(const NetworkSpec& net, bool waves) {
        trace.n = net.n();
        trace.has_waves = waves;
        M.resize(net.n());
        D.resize(net.n());
        B_bias.resize(net.n());
        for (int i = 0; i < net.n(); ++i) {
            M(i) = net.areas[static_cast<std::size_t>(i)].M;
            D(i) = net.areas[static_cast<std::size_t>(i)].D;
            B_bias(i) = net.areas[static_cast<std::size_t>(i)].B;
        }
        T = &net.torque.entries;
    }

    static std::vector<double> to_std(const VectorXd& v) {
        return std::vector<double>(v.data(), v.data() + v.size());
    }

    void record_common(double t, const VectorXd& delta, const VectorXd& omega,
                       const VectorXd& pm) {
        const VectorXd ptl = (*T) * delta;
        trace.t.push_back(t);
        trace.omega.push_back(to_std(omega));
        trace.delta.push_back(to_std(delta));
        trace.p_m.push_back(to_std(pm));
        trace.p_tl.push_back(to_std(ptl));
        trace.ace.push_back(to_std(ptl + B_bias.cwiseProduct(omega)));
        const double storage =
            0.5 * omega.dot(M.cwiseProduct(omega)) + 0.5 * delta.dot(ptl);
        trace.storage.push_back(storage);
        // P = M dw + Dw + Td = pm - P_load by construction of each model
        trace.dissipation.push_back(omega.dot(D.cwiseProduct(omega)));
    }
};

} // namespace

SimulationTrace simulate_swing(const NetworkSpec& network, const LoadScenario& loads,
                               double step, double horizon) {
    if (network.mode != ControlMode::SwingPi)
        throw InvariantError("simulate_swing requires a swing-PI scenario");
    if (!(step > 0) || step > 1e-2)
        throw std::invalid_argument("step must be positive and at most 1e-2 s");
    const int n = network.n();
    const MatrixXd& T = network.torque.entries;
    VectorXd M(n), D(n), kp(n), ki(n);
    for (int i = 0; i < n; ++i) {
        M(i) = network.areas[static_cast<std::size_t>(i)].M;
        D(i) = network.areas[static_cast<std::size_t>(i)].D;
        kp(i) = network.local_pids[static_cast<std::size_t>(i)].kp;
        ki(i) = network.local_pids[static_cast<std::size_t>(i)].ki;
    }

    TraceBuilder tb;
    tb.init(network, false);

    // state: [delta(n), omega(n), z(n)], z' = -omega, P_m = -kp w + ki z
    VectorXd y = VectorXd::Zero(3 * n);
    auto deriv = [&](double tq, const VectorXd& s) {
        const auto delta = s.segment(0, n);
        const auto omega = s.segment(n, n);
        const auto z = s.segment(2 * n, n);
        const VectorXd pm = -kp.cwiseProduct(omega) + ki.cwiseProduct(z);
        const VectorXd pl = load_vector(loads.steps, n, tq);
        VectorXd ds(3 * n);
        ds.segment(0, n) = omega;
        ds.segment(n, n) =
            (-D.cwiseProduct(omega) - T * delta + pm - pl).cwiseQuotient(M);
        ds.segment(2 * n, n) = -omega;
        return ds;
    };

    const long steps = static_cast<long>(std::llround(horizon / step));
    for (long k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * step;
        const VectorXd delta = y.segment(0, n);
        const VectorXd omega = y.segment(n, n);
        const VectorXd pm =
            -kp.cwiseProduct(omega) + ki.cwiseProduct(y.segment(2 * n, n));
        tb.record_common(t, delta, omega, pm);
        tb.trace.supply.push_back(omega.dot(pm - load_vector(loads.steps, n, t)));
        if (omega.lpNorm<Eigen::Infinity>() > kBlowUp) {
            tb.trace.blew_up = true;
            tb.trace.blow_time = t;
            break;
        }
        if (k == steps) break;
        const VectorXd k1 = deriv(t, y);
        const VectorXd k2 = deriv(t + step / 2, y + (step / 2) * k1);
        const VectorXd k3 = deriv(t + step / 2, y + (step / 2) * k2);
        const VectorXd k4 = deriv(t + step, y + step * k3);
        y += (step / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return tb.trace;
}

SimulationTrace simulate_hierarchical(const NetworkSpec& network, const LoadScenario& loads,
                                      const ScatteringConfig& scattering, double step,
                                      double horizon) {
    if (network.mode != ControlMode::Hierarchical)
        throw InvariantError("simulate_hierarchical requires a hierarchical scenario");
    if (!(step > 0) || step > 1e-2)
        throw std::invalid_argument("step must be positive and at most 1e-2 s");
    const int n = network.n();
    const MatrixXd& T = network.torque.entries;
    VectorXd M(n), D(n), kp(n);
    for (int i = 0; i < n; ++i) {
        M(i) = network.areas[static_cast<std::size_t>(i)].M;
        D(i) = network.areas[static_cast<std::size_t>(i)].D;
        kp(i) = network.local_kp[static_cast<std::size_t>(i)];
    }
    const double KI = network.global_ki;
    const std::vector<double>& Tup =
        scattering.delays_up.empty() ? network.delays_up : scattering.delays_up;
    const std::vector<double>& Tdn =
        scattering.delays_down.empty() ? network.delays_down : scattering.delays_down;
    const double alpha = scattering.alpha;
    const double s2a = std::sqrt(2.0 * alpha);
    const double s2ia = std::sqrt(2.0 / alpha);

    double max_delay = 0;
    for (int i = 0; i < n; ++i)
        max_delay = std::max({max_delay, Tup[static_cast<std::size_t>(i)],
                              Tdn[static_cast<std::size_t>(i)]});
    std::vector<bool> direct(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        direct[static_cast<std::size_t>(i)] = Tup[static_cast<std::size_t>(i)] <= 0.0 &&
                                              Tdn[static_cast<std::size_t>(i)] <= 0.0;

    // outbound wave histories (scattering) or raw signal histories
    DelayLine line_a(n, step, max_delay); // v_L waves, or omega samples
    DelayLine line_b(n, step, max_delay); // u_R waves, or global command samples

    TraceBuilder tb;
    tb.init(network, scattering.enabled);

    // state: [delta(n), omega(n), x_g]; global integrator sums the received
    // per-area signals (sum aggregation reproduces the delayed-loop
    // fluctuation that the scattering architecture is meant to remove)
    VectorXd y = VectorXd::Zero(2 * n + 1);

    auto channel = [&](double tq, const VectorXd& omega, double uG, VectorXd& pmg,
                       VectorXd& vG, VectorXd* uL_out = nullptr,
                       VectorXd* vR_out = nullptr) {
        pmg.resize(n);
        vG.resize(n);
        if (uL_out) uL_out->resize(n);
        if (vR_out) vR_out->resize(n);
        for (int i = 0; i < n; ++i) {
            const std::size_t ii = static_cast<std::size_t>(i);
            if (scattering.enabled) {
                double uL, vR;
                if (direct[ii]) {
                    // zero-delay channel: solve the wave loop algebraically;
                    // the transformation pair reduces to the identity map
                    uL = 0.5 * (s2ia * uG - s2a * omega(i));
                    vR = uL + s2a * omega(i);
                } else {
                    vR = line_a.read(tq - Tup[ii], i);
                    uL = line_b.read(tq - Tdn[ii], i);
                }
                pmg(i) = s2a * uL + alpha * omega(i);
                vG(i) = (s2a * vR - uG) / alpha;
                if (uL_out) (*uL_out)(i) = uL;
                if (vR_out) (*vR_out)(i) = vR;
            } else {
                pmg(i) = direct[ii] ? uG : line_b.read(tq - Tdn[ii], i);
                vG(i) = direct[ii] ? omega(i) : line_a.read(tq - Tup[ii], i);
            }
        }
    };

    auto deriv = [&](double tq, const VectorXd& s) {
        const auto delta = s.segment(0, n);
        const VectorXd omega = s.segment(n, n);
        const double uG = KI * s(2 * n);
        VectorXd pmg, vG;
        channel(tq, omega, uG, pmg, vG);
        const VectorXd pl = load_vector(loads.steps, n, tq);
        VectorXd ds(2 * n + 1);
        ds.segment(0, n) = omega;
        ds.segment(n, n) =
            (-D.cwiseProduct(omega) - T * delta - kp.cwiseProduct(omega) - pmg - pl)
                .cwiseQuotient(M);
        ds(2 * n) = vG.sum();
        return ds;
    };

    const long steps = static_cast<long>(std::llround(horizon / step));
    double cum_supply = 0.0;
    double prev_integrand = 0.0;
    for (long k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * step;
        const VectorXd delta = y.segment(0, n);
        const VectorXd omega = y.segment(n, n);
        const double uG = KI * y(2 * n);

        VectorXd pmg, vG, uL, vR;
        channel(t, omega, uG, pmg, vG, &uL, &vR);

        // append this step's outbound values to the delay lines before the
        // integrator reads strictly older samples
        if (scattering.enabled) {
            line_a.write(k, uL + s2a * omega);       // v_L
            line_b.write(k, VectorXd::Constant(n, s2ia * uG) - vR); // u_R
        } else {
            line_a.write(k, omega);
            line_b.write(k, VectorXd::Constant(n, uG));
        }

        const VectorXd pm = -kp.cwiseProduct(omega) - pmg;
        tb.record_common(t, delta, omega, pm);
        tb.trace.supply.push_back(omega.dot(pm - load_vector(loads.steps, n, t)));
        if (scattering.enabled) {
            tb.trace.p_mg.push_back(TraceBuilder::to_std(pmg));
            tb.trace.u_l.push_back(TraceBuilder::to_std(uL));
            tb.trace.v_l.push_back(TraceBuilder::to_std(uL + s2a * omega));
            tb.trace.u_r.push_back(
                TraceBuilder::to_std(VectorXd::Constant(n, s2ia * uG) - vR));
            tb.trace.v_r.push_back(TraceBuilder::to_std(vR));
            tb.trace.u_g.push_back(std::vector<double>(static_cast<std::size_t>(n), uG));
            tb.trace.v_g.push_back(TraceBuilder::to_std(vG));
            const double integrand = pmg.dot(omega) - uG * vG.sum();
            if (k > 0) cum_supply += 0.5 * step * (prev_integrand + integrand);
            prev_integrand = integrand;
            tb.trace.scatter_supply.push_back(cum_supply);
        }
        if (omega.lpNorm<Eigen::Infinity>() > kBlowUp) {
            tb.trace.blew_up = true;
            tb.trace.blow_time = t;
            break;
        }
        if (k == steps) break;
        const VectorXd k1 = deriv(t, y);
        const VectorXd k2 = deriv(t + step / 2, y + (step / 2) * k1);
        const VectorXd k3 = deriv(t + step / 2, y + (step / 2) * k2);
        const VectorXd k4 = deriv(t + step, y + step * k3);
        y += (step / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return tb.trace;
}

SimulationTrace simulate_lfc(const NetworkSpec& network, const LoadScenario& loads,
                             double step, double horizon) {
    if (network.mode != ControlMode::AceLfc)
        throw InvariantError("simulate_lfc requires an ACE-LFC scenario");
    if (!(step > 0) || step > 1e-2)
        throw std::invalid_argument("step must be positive and at most 1e-2 s");
    const int n = network.n();
    const MatrixXd& T = network.torque.entries;

    TraceBuilder tb;
    tb.init(network, false);

    // per-area state: [delta, omega, x_gov, x_tur, x_int, x_der]
    constexpr int kNs = 6;
    VectorXd y = VectorXd::Zero(kNs * n);
    auto deriv = [&](double tq, const VectorXd& s) {
        VectorXd delta(n), omega(n);
        for (int i = 0; i < n; ++i) {
            delta(i) = s(kNs * i + 0);
            omega(i) = s(kNs * i + 1);
        }
        const VectorXd ptl = T * delta;
        const VectorXd pl = load_vector(loads.steps, n, tq);
        VectorXd ds(kNs * n);
        for (int i = 0; i < n; ++i) {
            const auto& a = network.areas[static_cast<std::size_t>(i)];
            const auto& g = network.local_pids[static_cast<std::size_t>(i)];
            const double xgov = s(kNs * i + 2);
            const double xtur = s(kNs * i + 3);
            const double xint = s(kNs * i + 4);
            const double xder = s(kNs * i + 5);
            const double ace = ptl(i) + a.B * omega(i);
            const double u =
                -(g.kp * ace + g.ki * xint + (g.kd / g.tau_d) * (ace - xder));
            ds(kNs * i + 0) = omega(i);
            ds(kNs * i + 1) = (-a.D * omega(i) + xtur - ptl(i) - pl(i)) / a.M;
            ds(kNs * i + 2) = (u - omega(i) / a.R - xgov) / a.tau_g;
            ds(kNs * i + 3) = (xgov - xtur) / a.tau_t;
            ds(kNs * i + 4) = ace;
            ds(kNs * i + 5) = (ace - xder) / g.tau_d;
        }
        return ds;
    };

    const long steps = static_cast<long>(std::llround(horizon / step));
    for (long k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * step;
        VectorXd delta(n), omega(n), pm(n);
        for (int i = 0; i < n; ++i) {
            delta(i) = y(kNs * i + 0);
            omega(i) = y(kNs * i + 1);
            pm(i) = y(kNs * i + 3); // turbine output
        }
        tb.record_common(t, delta, omega, pm);
        tb.trace.supply.push_back(omega.dot(pm - load_vector(loads.steps, n, t)));
        if (omega.lpNorm<Eigen::Infinity>() > kBlowUp) {
            tb.trace.blew_up = true;
            tb.trace.blow_time = t;
            break;
        }
        if (k == steps) break;
        const VectorXd k1 = deriv(t, y);
        const VectorXd k2 = deriv(t + step / 2, y + (step / 2) * k1);
        const VectorXd k3 = deriv(t + step / 2, y + (step / 2) * k2);
        const VectorXd k4 = deriv(t + step, y + step * k3);
        y += (step / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return tb.trace;
}

EnergyAudit energy_audit(const SimulationTrace& trace, const NetworkSpec& network) {
    if (trace.t.size() < 3) throw std::invalid_argument("trace too short for an audit");
    const double h = trace.t[1] - trace.t[0];
    if (h > 1e-2 + 1e-12)
        throw std::invalid_argument("insufficient resolution: audit needs step <= 1e-2 s");

    EnergyAudit audit;
    audit.rho = network.areas[0].D;
    for (const auto& a : network.areas) audit.rho = std::min(audit.rho, a.D);

    const int n = trace.n;
    for (std::size_t k = 1; k + 1 < trace.t.size(); ++k) {
        const double ds = (trace.storage[k + 1] - trace.storage[k - 1]) / (2.0 * h);
        const double residual =
            std::abs(trace.supply[k] - ds - trace.dissipation[k]) /
            std::max(1.0, std::abs(trace.supply[k]));
        audit.max_balance_residual = std::max(audit.max_balance_residual, residual);

        double w2 = 0;
        for (int i = 0; i < n; ++i)
            w2 += trace.omega[k][static_cast<std::size_t>(i)] *
                  trace.omega[k][static_cast<std::size_t>(i)];
        const double slack = ds - (trace.supply[k] - audit.rho * w2);
        audit.max_rho_violation = std::max(audit.max_rho_violation, slack);
    }
    audit.balance_ok = audit.max_balance_residual <= 1e-6;
    audit.rho_ok = audit.max_rho_violation <= 1e-6;

    if (trace.has_waves && !trace.scatter_supply.empty()) {
        audit.min_scatter_supply = *std::min_element(trace.scatter_supply.begin(),
                                                     trace.scatter_supply.end());
        audit.scatter_ok = audit.min_scatter_supply >= -1e-9;
    }
    return audit;
}

OracleResult closed_loop_eigen_oracle(const NetworkSpec& network) {
    const int n = network.n();
    const MatrixXd& T = network.torque.entries;
    MatrixXd A;

    switch (network.mode) {
        case ControlMode::SwingPi: {
            const int ns = 3;
            A = MatrixXd::Zero(ns * n, ns * n);
            for (int i = 0; i < n; ++i) {
                const auto& a = network.areas[static_cast<std::size_t>(i)];
                const auto& g = network.local_pids[static_cast<std::size_t>(i)];
                A(ns * i + 0, ns * i + 1) = 1.0;
                for (int j = 0; j < n; ++j) A(ns * i + 1, ns * j + 0) = -T(i, j) / a.M;
                A(ns * i + 1, ns * i + 1) += -(a.D + g.kp) / a.M;
                A(ns * i + 1, ns * i + 2) = g.ki / a.M;
                A(ns * i + 2, ns * i + 1) = -1.0;
            }
            break;
        }
        case ControlMode::Hierarchical: {
            // zero-delay loop: P_MG = u_G = KI x_g, global integrator sums omega
            const int dim = 2 * n + 1;
            A = MatrixXd::Zero(dim, dim);
            for (int i = 0; i < n; ++i) {
                const auto& a = network.areas[static_cast<std::size_t>(i)];
                const double kp = network.local_kp[static_cast<std::size_t>(i)];
                A(i, n + i) = 1.0; // delta' = omega
                for (int j = 0; j < n; ++j) A(n + i, j) = -T(i, j) / a.M;
                A(n + i, n + i) += -(a.D + kp) / a.M;
                A(n + i, 2 * n) = -network.global_ki / a.M;
                A(2 * n, n + i) = 1.0;
            }
            break;
        }
        case ControlMode::AceLfc: {
            const int ns = 6;
            A = MatrixXd::Zero(ns * n, ns * n);
            for (int i = 0; i < n; ++i) {
                const auto& a = network.areas[static_cast<std::size_t>(i)];
                const auto& g = network.local_pids[static_cast<std::size_t>(i)];
                // ace as a row functional over the full state
                Eigen::RowVectorXd ace = Eigen::RowVectorXd::Zero(ns * n);
                for (int j = 0; j < n; ++j) ace(ns * j + 0) = T(i, j);
                ace(ns * i + 1) += a.B;
                Eigen::RowVectorXd xder = Eigen::RowVectorXd::Zero(ns * n);
                xder(ns * i + 5) = 1.0;
                Eigen::RowVectorXd xint = Eigen::RowVectorXd::Zero(ns * n);
                xint(ns * i + 4) = 1.0;
                const Eigen::RowVectorXd u =
                    -(g.kp * ace + g.ki * xint + (g.kd / g.tau_d) * (ace - xder));

                A(ns * i + 0, ns * i + 1) = 1.0;
                Eigen::RowVectorXd om_row = Eigen::RowVectorXd::Zero(ns * n);
                om_row(ns * i + 1) = -a.D;
                om_row(ns * i + 3) = 1.0;
                for (int j = 0; j < n; ++j) om_row(ns * j + 0) -= T(i, j);
                A.row(ns * i + 1) = om_row / a.M;
                Eigen::RowVectorXd gov = u;
                gov(ns * i + 1) += -1.0 / a.R;
                gov(ns * i + 2) += -1.0;
                A.row(ns * i + 2) = gov / a.tau_g;
                A(ns * i + 3, ns * i + 2) = 1.0 / a.tau_t;
                A(ns * i + 3, ns * i + 3) = -1.0 / a.tau_t;
                A.row(ns * i + 4) = ace;
                A.row(ns * i + 5) = (ace - xder) / g.tau_d;
            }
            break;
        }
    }

    Eigen::EigenSolver<MatrixXd> es(A, false);
    OracleResult out;
    out.abscissa = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < A.rows(); ++i) {
        const Complex lam = es.eigenvalues()(i);
        out.eigenvalues.push_back(lam);
        if (std::abs(lam) < kStructuralZero) {
            ++out.excluded_count;
            continue;
        }
        out.abscissa = std::max(out.abscissa, lam.real());
    }
    return out;
}

} // namespace gridfreq
