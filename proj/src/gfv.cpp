#include "gridfreq/gfv.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gridfreq/parallel.hpp"

namespace gridfreq {

namespace {

constexpr double kBoundaryTol = 1e-9;
constexpr double kZeroEig = 1e-9;

// F(v) for the padded coefficient vector v = (x_1, ..., x_{2k}):
// F_{r,c} = x_{2c - r + 1}, zero outside the index range (1-based).
Eigen::MatrixXd stencil(const std::vector<double>& v, int k) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(k, k);
    const int limit = 2 * k;
    for (int r = 1; r <= k; ++r)
        for (int c = 1; c <= k; ++c) {
            const int i = 2 * c - r + 1;
            if (i >= 1 && i <= limit) M(r - 1, c - 1) = v[static_cast<std::size_t>(i - 1)];
        }
    return M;
}

struct SignedLogDet {
    int sign = 0;
    double log_abs = -std::numeric_limits<double>::infinity();
};

SignedLogDet signed_log_det(const Eigen::MatrixXd& M) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    SignedLogDet out;
    out.sign = lu.permutationP().determinant() > 0 ? 1 : -1;
    out.log_abs = 0.0;
    for (int i = 0; i < M.rows(); ++i) {
        const double u = lu.matrixLU()(i, i);
        if (u == 0.0) return {0, -std::numeric_limits<double>::infinity()};
        if (u < 0.0) out.sign = -out.sign;
        out.log_abs += std::log(std::abs(u));
    }
    return out;
}

} // namespace

CPoly GfvTestPolynomial::coefficients() const {
    CPoly c(7);
    c[0] = 1.0;
    for (int i = 0; i < 6; ++i)
        c[static_cast<std::size_t>(i) + 1] = Complex(p[static_cast<std::size_t>(i)],
                                                     q[static_cast<std::size_t>(i)]);
    return c;
}

bool GfvDeterminants::all_positive(double boundary_tol) const {
    for (int k = 0; k < 6; ++k)
        if (!(sign[static_cast<std::size_t>(k)] > 0 &&
              std::abs(d[static_cast<std::size_t>(k)]) > boundary_tol))
            return false;
    return true;
}

int GfvDeterminants::binding_k(double boundary_tol) const {
    for (int k = 0; k < 6; ++k)
        if (!(sign[static_cast<std::size_t>(k)] > 0 &&
              std::abs(d[static_cast<std::size_t>(k)]) > boundary_tol))
            return k + 1;
    return 0;
}

GfvTestPolynomial gfv_polynomial(const RationalTransferFunction& h_n, double x, double y) {
    const Poly num = poly_trim(h_n.num);
    const Poly den = poly_trim(h_n.den);
    if (poly_degree(den) != 6 || den[0] != 1.0)
        throw std::invalid_argument("nominal model denominator must be monic of degree 6");
    if (poly_degree(num) != 4)
        throw std::invalid_argument("nominal model numerator must have degree 4");

    GfvTestPolynomial out;
    out.x = x;
    out.y = y;
    for (int i = 1; i <= 6; ++i) {
        double pr = den[static_cast<std::size_t>(i)];
        double qi = 0.0;
        if (i >= 2) { // numerator enters at degrees 4..0
            const double b = num[static_cast<std::size_t>(i - 2)];
            pr -= x * b;
            qi = -y * b;
        }
        out.p[static_cast<std::size_t>(i - 1)] = pr;
        out.q[static_cast<std::size_t>(i - 1)] = qi;
    }
    return out;
}

GfvDeterminants stability_determinants(const RationalTransferFunction& h_n, double x,
                                       double y) {
    const GfvTestPolynomial tp = gfv_polynomial(h_n, x, y);
    auto pfull = [&](int i) -> double {
        if (i == 0) return 1.0;
        return (i >= 1 && i <= 6) ? tp.p[static_cast<std::size_t>(i - 1)] : 0.0;
    };
    auto qfull = [&](int i) -> double {
        return (i >= 1 && i <= 6) ? tp.q[static_cast<std::size_t>(i - 1)] : 0.0;
    };

    GfvDeterminants out;
    out.d[0] = tp.p[0]; // D_1 = p_1
    out.sign[0] = tp.p[0] > 0 ? 1 : (tp.p[0] < 0 ? -1 : 0);
    out.log_abs[0] = tp.p[0] == 0.0 ? -std::numeric_limits<double>::infinity()
                                    : std::log(std::abs(tp.p[0]));

    for (int k = 2; k <= 6; ++k) {
        std::vector<double> pk, pk1, qk;
        for (int i = 0; i < 2 * k; ++i) pk.push_back(pfull(i));            // (1, p_1, ..., p_{2k-1})
        for (int i = 0; i < 2 * (k - 1); ++i) pk1.push_back(pfull(i));     // (1, p_1, ..., p_{2k-3})
        qk.push_back(0.0);
        qk.push_back(0.0);
        for (int i = 1; i <= 2 * k - 2; ++i) qk.push_back(qfull(i));       // (0, 0, q_1, ..., q_{2k-2})

        const Eigen::MatrixXd Fp = stencil(pk, k);
        const Eigen::MatrixXd Fq = stencil(qk, k);
        const Eigen::MatrixXd Fp1 = stencil(pk1, k - 1);

        Eigen::MatrixXd R = Eigen::MatrixXd::Zero(k, k - 1);
        R.bottomRows(k - 1) = Eigen::MatrixXd::Identity(k - 1, k - 1);
        Eigen::MatrixXd U = Eigen::MatrixXd::Zero(k - 1, k);
        U.leftCols(k - 1) = Eigen::MatrixXd::Identity(k - 1, k - 1);

        Eigen::MatrixXd M(2 * k - 1, 2 * k - 1);
        M.topLeftCorner(k, k) = Fp;
        M.topRightCorner(k, k - 1) = -Fq * R;
        M.bottomLeftCorner(k - 1, k) = U * Fq;
        M.bottomRightCorner(k - 1, k - 1) = Fp1;

        const SignedLogDet det = signed_log_det(M);
        out.sign[static_cast<std::size_t>(k - 1)] = det.sign;
        out.log_abs[static_cast<std::size_t>(k - 1)] = det.log_abs;
        out.d[static_cast<std::size_t>(k - 1)] =
            det.sign == 0 ? 0.0 : det.sign * std::exp(det.log_abs);
    }
    return out;
}

bool in_stable_domain(const RationalTransferFunction& h_n, Complex lambda) {
    if (std::abs(lambda) == 0.0)
        throw std::invalid_argument(
            "zero eigenvalue handled by spectrum exclusion, not domain membership");
    return stability_determinants(h_n, lambda.real(), lambda.imag())
        .all_positive(kBoundaryTol);
}

NominalTestResult nominal_stability_test(const RationalTransferFunction& h_n,
                                         const std::vector<double>& spectrum) {
    NominalTestResult out;
    out.pass = true;
    for (double lam : spectrum) {
        if (lam > kZeroEig)
            throw InvariantError("positive eigenvalue in spectrum: invalid torque matrix");
        EigenvalueVerdict v;
        v.lambda = lam;
        if (std::abs(lam) <= kZeroEig) {
            v.excluded = true;
        } else {
            v.inside = in_stable_domain(h_n, Complex(lam, 0.0));
            out.pass = out.pass && v.inside;
        }
        out.verdicts.push_back(v);
    }
    return out;
}

DomainGrid sample_stable_domain(const RationalTransferFunction& h_n, double x_min,
                                double x_max, double y_min, double y_max, int resolution_x,
                                int resolution_y) {
    if (resolution_x < 2 || resolution_y < 2)
        throw std::invalid_argument("resolution must be at least 2 per axis");
    if (!(x_min < x_max) || !(y_min < y_max))
        throw std::invalid_argument("empty sampling window");

    DomainGrid grid;
    for (int i = 0; i < resolution_x; ++i)
        grid.xs.push_back(x_min + (x_max - x_min) * i / (resolution_x - 1));
    for (int j = 0; j < resolution_y; ++j)
        grid.ys.push_back(y_min + (y_max - y_min) * j / (resolution_y - 1));
    const std::size_t total = grid.xs.size() * grid.ys.size();
    grid.inside.assign(total, 0);
    grid.binding_k.assign(total, 0);

    parallel_for(total, [&](std::size_t idx) {
        const double x = grid.xs[idx / grid.ys.size()];
        const double y = grid.ys[idx % grid.ys.size()];
        const GfvDeterminants d = stability_determinants(h_n, x, y);
        grid.inside[idx] = d.all_positive(kBoundaryTol) ? 1 : 0;
        grid.binding_k[idx] = d.binding_k(kBoundaryTol);
    });
    return grid;
}

} // namespace gridfreq
