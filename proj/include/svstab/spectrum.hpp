#pragma once

#include <complex>

#include "svstab/linearize.hpp"

namespace svstab {

/// Dense matrix of the semidiscrete operator y -> -(A y_xx + B y_x + C y)
/// acting on the interior unknowns (h[1..n-2], v[1..n-2]); the four boundary
/// values are eliminated through the discrete boundary relations:
///   v(0):   one-sided v_x(0) = 0
///   h(0):   v(0) = -b0 h(0) inverted (extrapolation when b0 = 0)
///   h(L):   quadratic extrapolation along the outgoing characteristic
///   v(L):   Robin row with one-sided v_x
struct DiscreteOperator {
    std::size_t n_interior = 0;          // interior points per field
    std::size_t dim = 0;                 // matrix dimension, 2 * n_interior
    std::vector<double> a;               // row-major dim x dim

    double& at(std::size_t r, std::size_t c) { return a[r * dim + c]; }
    double at(std::size_t r, std::size_t c) const { return a[r * dim + c]; }
};

/// Builds the dense operator; throws std::invalid_argument when the grid
/// exceeds the dense eigensolve budget (n > 1000).
DiscreteOperator assemble_discrete_operator(const LinearizedSystem& sys);

/// Boundary values (h0, v0, hL, vL) induced by interior unknowns through the
/// discrete boundary relations; used by the assembler and by tests.
void boundary_closure(const LinearizedSystem& sys, const std::vector<double>& h_int,
                      const std::vector<double>& v_int, double& h0, double& v0, double& hL,
                      double& vL);

struct SpectrumReport {
    std::vector<std::complex<double>> eigenvalues;
    double max_real = 0.0;
    std::size_t n_used = 0;
};

/// Full spectrum of the discrete operator via a dense nonsymmetric
/// eigensolver (real Schur reduction).
SpectrumReport spectrum(const LinearizedSystem& sys);

}  // namespace svstab
