#pragma once

#include <Eigen/Dense>

#include "shearlab/common.hpp"

// Dense reference solvers used as independent oracles. They share no code
// with the banded/Woodbury paths they check.
namespace testsup {

using shearlab::cdouble;
using shearlab::cvector;

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline CVec to_eigen(const cvector& v) {
  CVec out(static_cast<Eigen::Index>(v.size()));
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = v[i];
  return out;
}

inline cvector from_eigen(const CVec& v) {
  cvector out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

inline CMat dense_tridiag(const cvector& lo, const cvector& di, const cvector& up) {
  const Eigen::Index n = static_cast<Eigen::Index>(di.size());
  CMat A = CMat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, i) = di[i];
    if (i > 0) A(i, i - 1) = lo[i];
    if (i + 1 < n) A(i, i + 1) = up[i];
  }
  return A;
}

inline cvector dense_solve(const CMat& A, const cvector& rhs) {
  return from_eigen(A.partialPivLu().solve(to_eigen(rhs)));
}

}  // namespace testsup
