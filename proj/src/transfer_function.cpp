#include "gridfreq/transfer_function.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gridfreq {

Complex StateSpace::eval(Complex s) const {
    const auto n = A.rows();
    if (n == 0) return D(0, 0);
    Eigen::MatrixXcd M = s * Eigen::MatrixXcd::Identity(n, n) - A.cast<Complex>();
    Eigen::VectorXcd x = M.partialPivLu().solve(B.col(0).cast<Complex>());
    Complex y = (C.row(0).cast<Complex>() * x)(0);
    return y + D(0, 0);
}

RationalTransferFunction local_agent_tf(const AreaParams& a, const PidGains& g) {
    const double M = a.M, D = a.D, R = a.R, B = a.B;
    const double tg = a.tau_g, tt = a.tau_t, td = g.tau_d;
    const double kp = g.kp, ki = g.ki, kd = g.kd;
    const double d0 = td * tg * tt * M;

    const double a5 = (td * tg * tt * D + td * tg * M + td * tt * M + tg * tt * M) / d0;
    const double a4 =
        (td * tg * D + td * tt * D + td * M + tg * tt * D + tg * M + tt * M) / d0;
    const double a3 = ((td + tg + tt) * D + M + B * (kd + td * kp) + td / R) / d0;
    const double a2 = (D + B * (kp + td * ki) + 1.0 / R) / d0;
    const double a1 = B * ki / d0;

    const double b4 = 1.0 / M;
    const double b3 = (td * (tg + tt) + tg * tt) / d0;
    const double b2 = (td + tg + tt + kd + td * kp) / d0;
    const double b1 = (kp + td * ki + 1.0) / d0;
    const double b0 = ki / d0;

    return {{b4, b3, b2, b1, b0}, {1.0, a5, a4, a3, a2, a1, 0.0}};
}

RationalTransferFunction local_sensitivity_tf(const AreaParams& a, const PidGains& g) {
    // C(s) = (kp td + kd) s^2 + (kp + ki td) s + ki over s (td s + 1)
    const Poly num_c = {g.kp * g.tau_d + g.kd, g.kp + g.ki * g.tau_d, g.ki};
    const Poly den_c = {g.tau_d, 1.0, 0.0};
    const Poly gov_tur = poly_mul({a.tau_g, 1.0}, {a.tau_t, 1.0});
    const Poly den_open = poly_mul(den_c, gov_tur);
    return {den_open, poly_trim(poly_add(den_open, num_c))};
}

RationalTransferFunction multiplicative_error(const RationalTransferFunction& h_i,
                                              const RationalTransferFunction& h_n) {
    const Poly ni = poly_trim(h_i.num), di = poly_trim(h_i.den);
    const Poly nn = poly_trim(h_n.num), dn = poly_trim(h_n.den);
    if (di.back() != 0.0 || dn.back() != 0.0)
        throw InvariantError("multiplicative error requires the single-origin-pole structure");
    for (Complex r : poly_roots(nn))
        if (r.real() >= -1e-12) throw std::domain_error("unstable error system");

    Poly di_red = di, dn_red = dn; // cancel the shared origin pole
    di_red.pop_back();
    dn_red.pop_back();
    Poly num = poly_trim(poly_sub(poly_mul(ni, dn_red), poly_mul(nn, di_red)));
    Poly den = poly_mul(nn, di_red);
    if (num.size() == 1 && num[0] == 0.0) return {{0.0}, {1.0}};
    return {num, den};
}

StateSpace realize_state_space(const RationalTransferFunction& g) {
    const Poly num = poly_trim(g.num);
    const Poly den = poly_trim(g.den);
    if (den.size() == 1 && den[0] == 0.0) throw std::invalid_argument("zero denominator");
    if (poly_degree(num) > poly_degree(den))
        throw std::invalid_argument("improper transfer function has no state-space realization");

    auto [q, r] = poly_divmod(num, den);
    const double d_term = q.back(); // proper input makes the quotient a constant
    const int n = poly_degree(den);

    StateSpace ss;
    ss.D = Eigen::MatrixXd::Constant(1, 1, d_term);
    ss.A = Eigen::MatrixXd::Zero(n, n);
    ss.B = Eigen::MatrixXd::Zero(n, 1);
    ss.C = Eigen::MatrixXd::Zero(1, n);
    if (n == 0) return ss;

    // controllable canonical form on the monic denominator
    const double lead = den[0];
    for (int i = 0; i < n - 1; ++i) ss.A(i, i + 1) = 1.0;
    for (int i = 0; i < n; ++i)
        ss.A(n - 1, i) = -den[static_cast<std::size_t>(n - i)] / lead; // -a_i ascending
    ss.B(n - 1, 0) = 1.0;
    const Poly rr = poly_trim(r);
    for (int i = 0; i <= poly_degree(rr); ++i)
        ss.C(0, i) = rr[static_cast<std::size_t>(poly_degree(rr) - i)] / lead;
    return ss;
}

namespace {

bool hamiltonian_has_imaginary_eig(const StateSpace& ss, double gamma) {
    const double d = ss.D(0, 0);
    if (gamma <= std::abs(d)) return true; // the norm is at least |D|
    const auto n = ss.A.rows();
    const double R = gamma * gamma - d * d;
    Eigen::MatrixXd Acl = ss.A + ss.B * (d / R) * ss.C;
    Eigen::MatrixXd H(2 * n, 2 * n);
    H.topLeftCorner(n, n) = Acl;
    H.topRightCorner(n, n) = ss.B * ss.B.transpose() / R;
    H.bottomLeftCorner(n, n) = -ss.C.transpose() * ss.C * (gamma * gamma / R);
    H.bottomRightCorner(n, n) = -Acl.transpose();
    Eigen::EigenSolver<Eigen::MatrixXd> es(H, false);
    for (int i = 0; i < 2 * n; ++i) {
        const Complex lam = es.eigenvalues()(i);
        if (std::abs(lam.real()) <= 1e-8 * std::max(1.0, std::abs(lam))) return true;
    }
    return false;
}

} // namespace

HinfResult hinf_norm_detail(const RationalTransferFunction& g) {
    const Poly num = poly_trim(g.num);
    const Poly den = poly_trim(g.den);
    if (den.size() == 1 && den[0] == 0.0) throw std::invalid_argument("zero denominator");
    if (poly_degree(num) > poly_degree(den))
        throw std::invalid_argument("improper transfer function");
    if (num.size() == 1 && num[0] == 0.0) return {0.0, true, 1e-6};

    if (poly_degree(den) == 0) return {std::abs(num[0] / den[0]), true, 1e-6};

    const std::vector<Complex> poles = poly_roots(den);
    for (Complex p : poles)
        if (p.real() >= -1e-12) throw std::domain_error("norm undefined for unstable system");

    // frequency window from pole/zero magnitudes
    double mag_min = std::numeric_limits<double>::infinity();
    double mag_max = 0.0;
    auto absorb = [&](const std::vector<Complex>& roots) {
        for (Complex r : roots) {
            const double m = std::abs(r);
            if (m > 1e-12) {
                mag_min = std::min(mag_min, m);
                mag_max = std::max(mag_max, m);
            }
        }
    };
    absorb(poles);
    if (poly_degree(num) >= 1) absorb(poly_roots(num));
    if (!(mag_max > 0)) {
        mag_min = 1.0;
        mag_max = 1.0;
    }
    const double w_lo = std::max(1e-8, 1e-4 * mag_min);
    const double w_hi = 1e4 * mag_max;

    const RationalTransferFunction gt{num, den};
    double grid_max = std::abs(gt.eval(Complex(0.0, 0.0)));
    constexpr int kGridPoints = 2048;
    const double lr = std::log(w_hi / w_lo) / (kGridPoints - 1);
    for (int i = 0; i < kGridPoints; ++i) {
        const double w = w_lo * std::exp(lr * i);
        grid_max = std::max(grid_max, std::abs(gt.eval(Complex(0.0, w))));
    }

    // The norm is invariant under the frequency scaling s -> sigma s; picking
    // sigma at the geometric mean of the pole magnitudes keeps the companion
    // form (and hence the Hamiltonian eigenproblem) well conditioned even
    // when the raw coefficients span many orders of magnitude.
    double log_acc = 0.0;
    int log_cnt = 0;
    for (Complex p : poles) {
        if (std::abs(p) > 1e-12) {
            log_acc += std::log(std::abs(p));
            ++log_cnt;
        }
    }
    const double sigma = log_cnt ? std::exp(log_acc / log_cnt) : 1.0;
    Poly num_s = num, den_s = den;
    for (std::size_t i = 0; i < num_s.size(); ++i)
        num_s[i] *= std::pow(sigma, static_cast<double>(num_s.size() - 1 - i));
    for (std::size_t i = 0; i < den_s.size(); ++i)
        den_s[i] *= std::pow(sigma, static_cast<double>(den_s.size() - 1 - i));
    const double lead_s = den_s[0];
    for (auto& v : num_s) v /= lead_s;
    for (auto& v : den_s) v /= lead_s;

    const StateSpace ss = realize_state_space({num_s, den_s});
    const double d_abs = std::abs(ss.D(0, 0));
    double lo = std::max(grid_max, d_abs);
    double hi = lo * 2.0 + 1e-3;
    int expansions = 0;
    while (hamiltonian_has_imaginary_eig(ss, hi)) {
        lo = hi;
        hi *= 2.0;
        if (++expansions > 60) return {grid_max, false, 1e-3}; // stagnation fallback
    }
    int iters = 0;
    while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        if (hamiltonian_has_imaginary_eig(ss, mid))
            lo = mid;
        else
            hi = mid;
        if (++iters > 200) return {grid_max, false, 1e-3};
    }
    return {0.5 * (lo + hi), true, 1e-6};
}

double hinf_norm(const RationalTransferFunction& g) { return hinf_norm_detail(g).value; }

} // namespace gridfreq
