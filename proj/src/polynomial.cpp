#include "gridfreq/polynomial.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gridfreq {

Poly poly_trim(const Poly& p) {
    std::size_t i = 0;
    while (i + 1 < p.size() && p[i] == 0.0) ++i;
    return Poly(p.begin() + static_cast<long>(i), p.end());
}

Poly poly_add(const Poly& a, const Poly& b) {
    const std::size_t n = std::max(a.size(), b.size());
    Poly out(n, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) out[n - a.size() + i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[n - b.size() + i] += b[i];
    return out;
}

Poly poly_sub(const Poly& a, const Poly& b) { return poly_add(a, poly_scale(b, -1.0)); }

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

Poly poly_scale(const Poly& a, double k) {
    Poly out = a;
    for (double& c : out) c *= k;
    return out;
}

std::pair<Poly, Poly> poly_divmod(const Poly& a, const Poly& b) {
    Poly bt = poly_trim(b);
    if (bt.size() == 1 && bt[0] == 0.0) throw std::invalid_argument("polynomial division by zero");
    Poly r = poly_trim(a);
    if (r.size() < bt.size()) return {Poly{0.0}, r};
    Poly q(r.size() - bt.size() + 1, 0.0);
    for (std::size_t i = 0; i + bt.size() <= r.size(); ++i) {
        const double f = r[i] / bt[0];
        q[i] = f;
        for (std::size_t j = 0; j < bt.size(); ++j) r[i + j] -= f * bt[j];
        r[i] = 0.0; // cancel exactly
    }
    return {q, poly_trim(r)};
}

Complex poly_eval(const Poly& p, Complex s) {
    Complex acc = 0.0;
    for (double c : p) acc = acc * s + c;
    return acc;
}

Complex cpoly_eval(const CPoly& p, Complex s) {
    Complex acc = 0.0;
    for (Complex c : p) acc = acc * s + c;
    return acc;
}

std::vector<Complex> poly_roots(const Poly& p) {
    Poly c = poly_trim(p);
    if (c.size() == 1 && c[0] == 0.0) throw std::invalid_argument("roots of zero polynomial");
    // strip exact trailing zeros as origin roots
    std::vector<Complex> out;
    while (c.size() > 1 && c.back() == 0.0) {
        out.emplace_back(0.0, 0.0);
        c.pop_back();
    }
    const int n = poly_degree(c);
    if (n < 1) return out;
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) comp(0, i) = -c[static_cast<std::size_t>(i) + 1] / c[0];
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    for (int i = 0; i < n; ++i) out.push_back(es.eigenvalues()(i));
    return out;
}

std::vector<Complex> cpoly_roots(const CPoly& p) {
    CPoly c = p;
    while (c.size() > 1 && std::abs(c[0]) == 0.0) c.erase(c.begin());
    const int n = static_cast<int>(c.size()) - 1;
    if (n < 1) return {};
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) comp(0, i) = -c[static_cast<std::size_t>(i) + 1] / c[0];
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
    std::vector<Complex> out;
    for (int i = 0; i < n; ++i) out.push_back(es.eigenvalues()(i));
    return out;
}

bool routh_test(const Poly& poly) {
    Poly p = poly_trim(poly);
    if (p.size() == 1 && p[0] == 0.0) throw std::invalid_argument("degenerate polynomial");
    if (p[0] < 0.0) p = poly_scale(p, -1.0);
    const int n = poly_degree(p);
    if (n == 0) return true;
    // a nonzero constant term is necessary: a root at the origin otherwise
    if (p.back() == 0.0) return false;

    constexpr double kEps = 1e-12;
    const std::size_t cols = (static_cast<std::size_t>(n) + 2) / 2;
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(n) + 1,
                                          std::vector<double>(cols, 0.0));
    for (int i = 0; i <= n; ++i) {
        const std::size_t r = static_cast<std::size_t>(i) % 2;
        const std::size_t c = static_cast<std::size_t>(i) / 2;
        rows[r][c] = p[static_cast<std::size_t>(i)];
    }

    bool had_zero_row = false;
    for (std::size_t r = 2; r <= static_cast<std::size_t>(n); ++r) {
        // zero-row handling: replace with derivative of the auxiliary polynomial
        bool all_zero = true;
        for (double v : rows[r - 1])
            if (v != 0.0) { all_zero = false; break; }
        if (all_zero) {
            had_zero_row = true;
            const int deg = n - static_cast<int>(r) + 2; // degree of the auxiliary polynomial row r-2
            std::vector<double> aux = rows[r - 2];
            for (std::size_t c = 0; c < cols; ++c) {
                const int d = deg - 2 * static_cast<int>(c);
                rows[r - 1][c] = (d > 0) ? aux[c] * d : 0.0;
            }
        }
        double pivot = rows[r - 1][0];
        if (pivot == 0.0) pivot = kEps;
        for (std::size_t c = 0; c + 1 < cols; ++c)
            rows[r][c] = (pivot * rows[r - 2][c + 1] - rows[r - 2][0] * rows[r - 1][c + 1]) / pivot;
    }

    // an exact zero row marks a polynomial with symmetric (at best
    // imaginary-axis) roots, which is never strictly Hurwitz
    if (had_zero_row) return false;
    for (std::size_t r = 0; r <= static_cast<std::size_t>(n); ++r) {
        bool all_zero = true;
        for (double v : rows[r])
            if (v != 0.0) { all_zero = false; break; }
        if (all_zero) return false;
        if (rows[r][0] <= 0.0) return false;
    }
    return true;
}

bool is_hurwitz(const Poly& poly) {
    Poly p = poly_trim(poly);
    if (p.size() == 1 && p[0] == 0.0) throw std::invalid_argument("degenerate polynomial");
    if (p.size() == 1) return true;
    const bool routh = routh_test(p);
    double max_re = -std::numeric_limits<double>::infinity();
    for (Complex r : poly_roots(p)) max_re = std::max(max_re, r.real());
    const bool eig = max_re < 0.0;
    // the eigenvalue oracle decides disagreements (epsilon substitution in
    // the Routh table can mislabel marginal cases)
    return routh == eig ? routh : eig;
}

} // namespace gridfreq
