#pragma once

#include <array>
#include <vector>

#include "gridfreq/transfer_function.hpp"

namespace gridfreq {

// Complex-coefficient test polynomial
//   pI(s) = den(H_n) - (x + jy) * num(H_n),
// monic of degree 6; p_i + j q_i is the coefficient of s^(6-i).
struct GfvTestPolynomial {
    double x = 0, y = 0;
    std::array<double, 6> p{}; // p_1 .. p_6
    std::array<double, 6> q{}; // q_1 .. q_6

    CPoly coefficients() const; // {1, p_1 + j q_1, ..., p_6 + j q_6}
};

// Determinant sequence deciding left-half-plane root placement of pI.
// Values are reconstructed from LU sign + log-magnitude; only the sign
// enters the stable-domain verdict.
struct GfvDeterminants {
    std::array<double, 6> d{};        // D_1 .. D_6
    std::array<int, 6> sign{};        // -1, 0, +1
    std::array<double, 6> log_abs{};  // natural log of |D_k| (|D_k| = 0 -> -inf)

    bool all_positive(double boundary_tol = 1e-9) const;
    // first k (1-based) whose D_k fails positivity; 0 when all pass
    int binding_k(double boundary_tol = 1e-9) const;
};

// Builds the test polynomial at (x, y). The nominal model must be monic of
// degree 6 with a degree-4 numerator; anything else is rejected.
GfvTestPolynomial gfv_polynomial(const RationalTransferFunction& h_n, double x, double y);

GfvDeterminants stability_determinants(const RationalTransferFunction& h_n, double x,
                                       double y);

// True iff lambda lies in the stable domain (all D_k > 0). Boundary values
// (|D_k| below tolerance) classify as outside: a sufficiency test fails safe.
// lambda = 0 is rejected; zero eigenvalues are excluded upstream.
bool in_stable_domain(const RationalTransferFunction& h_n, Complex lambda);

struct EigenvalueVerdict {
    double lambda = 0;
    bool excluded = false; // structural zero eigenvalue
    bool inside = false;
};

struct NominalTestResult {
    std::vector<EigenvalueVerdict> verdicts;
    bool pass = false;
};

// Stable-domain membership for every strictly negative eigenvalue of Q.
// A positive eigenvalue means an invalid torque matrix upstream and throws.
NominalTestResult nominal_stability_test(const RationalTransferFunction& h_n,
                                         const std::vector<double>& spectrum);

struct DomainGrid {
    std::vector<double> xs;
    std::vector<double> ys;
    // row-major over (xi, yi): index xi * ys.size() + yi
    std::vector<unsigned char> inside;
    std::vector<int> binding_k;
};

DomainGrid sample_stable_domain(const RationalTransferFunction& h_n, double x_min,
                                double x_max, double y_min, double y_max, int resolution_x,
                                int resolution_y);

} // namespace gridfreq
