#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "sphqmc/rng.hpp"

namespace sphqmc {

using Complex = std::complex<double>;

// Dense square complex matrix, row-major.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  explicit ComplexMatrix(std::size_t n) : n_(n), a_(n * n) {
    if (n == 0) throw std::invalid_argument("ComplexMatrix: dimension 0");
  }

  static ComplexMatrix identity(std::size_t n);

  std::size_t n() const { return n_; }
  Complex& at(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  const Complex& at(std::size_t i, std::size_t j) const {
    return a_[i * n_ + j];
  }
  Complex* row(std::size_t i) { return a_.data() + i * n_; }
  const Complex* row(std::size_t i) const { return a_.data() + i * n_; }
  std::vector<Complex>& data() { return a_; }
  const std::vector<Complex>& data() const { return a_; }

  Complex trace() const;
  double max_abs() const;

 private:
  std::size_t n_ = 0;
  std::vector<Complex> a_;
};

// B found singular to working tolerance; callers redraw B.
class singular_matrix_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// QR iteration exceeded its sweep cap (not expected on random input).
class eigen_convergence_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// n x n matrix with i.i.d. complex Gaussian entries; real and imaginary
// parts are independent with standard deviation part_stddev each.
ComplexMatrix gaussian_matrix(std::size_t n, RngStream& rng,
                              double part_stddev = 0.70710678118654752440);

// Solves b * m = a by LU with partial pivoting (both operands square, same
// dimension).  Throws singular_matrix_error when a pivot falls below
// n * eps * max|b|.
ComplexMatrix solve(const ComplexMatrix& b, const ComplexMatrix& a);

// det(m) from the LU factorization.
Complex lu_determinant(const ComplexMatrix& m);

// All n eigenvalues (with multiplicity, unordered) via balancing, Householder
// reduction to Hessenberg form and implicitly shifted QR with deflation.
// Eigenvectors are not computed.
std::vector<Complex> eigenvalues(const ComplexMatrix& m);

}  // namespace sphqmc
