#include "svstab/spectrum.hpp"

#include <Eigen/Dense>

namespace svstab {

void boundary_closure(const LinearizedSystem& sys, const std::vector<double>& h_int,
                      const std::vector<double>& v_int, double& h0, double& v0, double& hL,
                      double& vL) {
    const std::size_t m = h_int.size();
    if (m < 4 || v_int.size() != m)
        throw std::invalid_argument("boundary_closure: need at least 4 interior points");
    const BoundaryCoeffs& bc = sys.bc;
    const double theta = sys.params.mu * bc.c1 / (2.0 * sys.grid().dx);

    if (bc.b0 != 0.0) {
        v0 = (4.0 * v_int[0] - v_int[1]) / 3.0;
        h0 = -v0 / bc.b0;
    } else {
        v0 = 0.0;
        h0 = 3.0 * h_int[0] - 3.0 * h_int[1] + h_int[2];
    }
    hL = 3.0 * h_int[m - 1] - 3.0 * h_int[m - 2] + h_int[m - 3];
    const double den = 1.0 - 3.0 * theta;
    if (std::abs(den) < 1e-12)
        throw std::runtime_error("boundary_closure: Robin row is singular");
    vL = (bc.b1 * hL - 4.0 * theta * v_int[m - 1] + theta * v_int[m - 2]) / den;
}

DiscreteOperator assemble_discrete_operator(const LinearizedSystem& sys) {
    const Grid& g = sys.grid();
    if (g.n > 1000)
        throw std::invalid_argument("assemble_discrete_operator: n exceeds the dense budget (1000)");
    if (g.n < 6) throw std::invalid_argument("assemble_discrete_operator: grid too small");

    const std::size_t m = g.n - 2;
    DiscreteOperator op;
    op.n_interior = m;
    op.dim = 2 * m;
    op.a.assign(op.dim * op.dim, 0.0);

    std::vector<double> h_int(m, 0.0), v_int(m, 0.0);
    StateVector y = StateVector::zero(g.n);
    for (std::size_t col = 0; col < op.dim; ++col) {
        if (col < m) h_int[col] = 1.0;
        else v_int[col - m] = 1.0;

        double h0, v0, hL, vL;
        boundary_closure(sys, h_int, v_int, h0, v0, hL, vL);
        y.h[0] = h0;
        y.v[0] = v0;
        y.h[g.n - 1] = hL;
        y.v[g.n - 1] = vL;
        for (std::size_t i = 0; i < m; ++i) {
            y.h[i + 1] = h_int[i];
            y.v[i + 1] = v_int[i];
        }

        const StateVector yt = apply_operator(sys, y);
        for (std::size_t i = 0; i < m; ++i) {
            op.at(i, col) = yt.h[i + 1];
            op.at(m + i, col) = yt.v[i + 1];
        }

        if (col < m) h_int[col] = 0.0;
        else v_int[col - m] = 0.0;
    }
    return op;
}

SpectrumReport spectrum(const LinearizedSystem& sys) {
    const DiscreteOperator op = assemble_discrete_operator(sys);
    const auto dim = static_cast<Eigen::Index>(op.dim);
    Eigen::MatrixXd mat(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r)
        for (Eigen::Index c = 0; c < dim; ++c)
            mat(r, c) = op.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));

    Eigen::EigenSolver<Eigen::MatrixXd> solver(mat, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("spectrum: dense eigensolver failed to converge");

    SpectrumReport rep;
    rep.n_used = sys.grid().n;
    rep.eigenvalues.reserve(op.dim);
    rep.max_real = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < dim; ++k) {
        const std::complex<double> ev = solver.eigenvalues()(k);
        rep.eigenvalues.push_back(ev);
        rep.max_real = std::max(rep.max_real, ev.real());
    }
    return rep;
}

}  // namespace svstab
