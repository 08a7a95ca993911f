#pragma once

#include <complex>
#include <vector>

namespace gridfreq {

// Real polynomial as coefficient list in descending degree order:
// {a_n, a_{n-1}, ..., a_0} represents a_n s^n + ... + a_0.
using Poly = std::vector<double>;
using CPoly = std::vector<std::complex<double>>;
using Complex = std::complex<double>;

// Drop leading (highest-degree) zero coefficients. An all-zero input
// collapses to {0}.
Poly poly_trim(const Poly& p);

Poly poly_add(const Poly& a, const Poly& b);
Poly poly_sub(const Poly& a, const Poly& b);
Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_scale(const Poly& a, double k);

// Euclidean division a = q*b + r; returns {q, r}.
std::pair<Poly, Poly> poly_divmod(const Poly& a, const Poly& b);

Complex poly_eval(const Poly& p, Complex s);
Complex cpoly_eval(const CPoly& p, Complex s);

inline int poly_degree(const Poly& p) { return static_cast<int>(p.size()) - 1; }

// Roots via the companion matrix (Eigen eigensolver). Degree-0 input
// yields an empty list.
std::vector<Complex> poly_roots(const Poly& p);
std::vector<Complex> cpoly_roots(const CPoly& p);

// Routh table test: true iff the table completes with a positive first
// column (all roots strictly in the open left half-plane). Zero pivots
// are perturbed by epsilon; a vanishing row is replaced by the derivative
// of its auxiliary polynomial, which makes imaginary-axis roots fail.
bool routh_test(const Poly& p);

// Strict Hurwitz test: Routh table cross-checked against companion-matrix
// eigenvalues; the eigenvalue verdict wins if they disagree.
// Throws std::invalid_argument on an all-zero polynomial.
bool is_hurwitz(const Poly& p);

} // namespace gridfreq
