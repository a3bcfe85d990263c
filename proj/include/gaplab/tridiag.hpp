#pragma once

#include <cstddef>
#include <vector>

namespace gaplab {

// Symmetric tridiagonal pencil A v = lambda W v with diagonal weight W > 0.
// diag has size N, offdiag size N-1, weight size N.
struct TridiagonalSystem {
    std::vector<double> diag;
    std::vector<double> offdiag;
    std::vector<double> weight;

    std::size_t size() const { return diag.size(); }
    void validate() const;  // throws NumericsError("invalid system", ...)
};

struct TridiagEigenPair {
    double value;
    std::vector<double> vector;  // W-normalized, largest component positive
};

// Smallest `count` eigenpairs of the pencil, ascending. Eigenvalues by Sturm
// bisection on the symmetrized standard form, eigenvectors by inverse
// iteration. Postcondition: |A v - lambda W v|_inf <= 1e-10 * |A|_inf, else
// NumericsError("eigensolver failure").
std::vector<TridiagEigenPair> eig_sym_tridiag(const TridiagonalSystem& sys, std::size_t count);

// Solves T x = b for tridiagonal T (LU with partial pivoting).
std::vector<double> solve_tridiag(std::vector<double> lower, std::vector<double> diag,
                                  std::vector<double> upper, std::vector<double> rhs);

}  // namespace gaplab
