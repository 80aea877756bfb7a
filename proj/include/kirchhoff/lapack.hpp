#pragma once

// Thin wrappers around the LAPACKE routines used by the spectral module:
// dense/banded symmetric eigensolves, LDL^T inertia, generalized problems,
// and banded linear solves for the radial Newton iterations.

#include <lapacke.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace kirchhoff {

struct LapackError : std::runtime_error {
  explicit LapackError(const std::string& what) : std::runtime_error(what) {}
};

inline void lapack_check(lapack_int info, const char* routine) {
  if (info != 0)
    throw LapackError(std::string(routine) + " failed, info = " + std::to_string(info));
}

// Dense symmetric storage is column-major n x n.
struct EigPairs {
  std::vector<double> values;   // ascending
  std::vector<double> vectors;  // column j is the eigenvector of values[j]
};

// Lowest k eigenpairs of a dense symmetric matrix (contents of a are destroyed).
inline EigPairs sym_eig_lowest(std::vector<double>& a, int n, int k) {
  if (k < 1 || k > n) throw LapackError("sym_eig_lowest: bad k");
  EigPairs out;
  out.values.assign(static_cast<size_t>(n), 0.0);
  out.vectors.assign(static_cast<size_t>(n) * k, 0.0);
  std::vector<lapack_int> isuppz(2 * static_cast<size_t>(k));
  lapack_int m = 0;
  lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, a.data(), n,
                                   0.0, 0.0, 1, k, 0.0, &m, out.values.data(),
                                   out.vectors.data(), n, isuppz.data());
  lapack_check(info, "dsyevr");
  out.values.resize(static_cast<size_t>(m));
  return out;
}

// Lowest k eigenpairs of a symmetric band matrix, kd superdiagonals,
// LAPACK upper band storage ab[(kd+1) x n] column-major: ab[kd+i-j + j*(kd+1)] = A(i,j).
inline EigPairs band_eig_lowest(std::vector<double>& ab, int n, int kd, int k) {
  EigPairs out;
  out.values.assign(static_cast<size_t>(n), 0.0);
  out.vectors.assign(static_cast<size_t>(n) * k, 0.0);
  std::vector<double> q(static_cast<size_t>(n) * n);
  std::vector<lapack_int> ifail(static_cast<size_t>(n));
  lapack_int m = 0;
  lapack_int info = LAPACKE_dsbevx(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, kd, ab.data(),
                                   kd + 1, q.data(), n, 0.0, 0.0, 1, k, 2.0 * LAPACKE_dlamch('S'),
                                   &m, out.values.data(), out.vectors.data(), n, ifail.data());
  lapack_check(info, "dsbevx");
  out.values.resize(static_cast<size_t>(m));
  return out;
}

// Number of negative eigenvalues via the inertia of an LDL^T factorization.
inline int sym_negative_count(std::vector<double> a, int n) {
  std::vector<lapack_int> ipiv(static_cast<size_t>(n));
  lapack_int info = LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'U', n, a.data(), n, ipiv.data());
  lapack_check(info, "dsytrf");
  int neg = 0;
  int i = 0;
  while (i < n) {
    if (ipiv[i] > 0) {
      if (a[static_cast<size_t>(i) * n + i] < 0.0) ++neg;
      ++i;
    } else {
      // 2x2 block: eigenvalues from trace/determinant
      double a11 = a[static_cast<size_t>(i) * n + i];
      double a22 = a[static_cast<size_t>(i + 1) * n + i + 1];
      double a12 = a[static_cast<size_t>(i + 1) * n + i];
      double tr = a11 + a22;
      double det = a11 * a22 - a12 * a12;
      if (det < 0.0)
        ++neg;  // one of each sign
      else if (tr < 0.0)
        neg += 2;
      i += 2;
    }
  }
  return neg;
}

// Smallest eigenvalue of the generalized symmetric problem A x = lambda B x,
// B positive definite. Both matrices are destroyed.
inline double sym_gen_min_eig(std::vector<double>& a, std::vector<double>& b, int n) {
  std::vector<double> w(static_cast<size_t>(n));
  std::vector<double> z(static_cast<size_t>(n));
  std::vector<lapack_int> ifail(static_cast<size_t>(n));
  lapack_int m = 0;
  lapack_int info = LAPACKE_dsygvx(LAPACK_COL_MAJOR, 1, 'N', 'I', 'U', n, a.data(), n,
                                   b.data(), n, 0.0, 0.0, 1, 1, 2.0 * LAPACKE_dlamch('S'),
                                   &m, w.data(), z.data(), n, ifail.data());
  lapack_check(info, "dsygvx");
  return w[0];
}

inline double sym_min_eig(std::vector<double>& a, int n) {
  auto e = sym_eig_lowest(a, n, 1);
  return e.values.at(0);
}

// Congruence onto the orthogonal complement of span(C): returns the trailing
// (n-k) x (n-k) block of Q^T A Q where C = QR.  A is column-major symmetric.
inline std::vector<double> complement_reduce(const std::vector<double>& a, int n,
                                             std::vector<double> c, int k) {
  std::vector<double> tau(static_cast<size_t>(k));
  lapack_int info = LAPACKE_dgeqrf(LAPACK_COL_MAJOR, n, k, c.data(), n, tau.data());
  lapack_check(info, "dgeqrf");
  std::vector<double> work = a;
  info = LAPACKE_dormqr(LAPACK_COL_MAJOR, 'L', 'T', n, n, k, c.data(), n, tau.data(),
                        work.data(), n);
  lapack_check(info, "dormqr L");
  info = LAPACKE_dormqr(LAPACK_COL_MAJOR, 'R', 'N', n, n, k, c.data(), n, tau.data(),
                        work.data(), n);
  lapack_check(info, "dormqr R");
  int m = n - k;
  std::vector<double> out(static_cast<size_t>(m) * m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i)
      out[static_cast<size_t>(j) * m + i] = work[static_cast<size_t>(j + k) * n + (i + k)];
  // symmetrize away the round-off skew from the two-sided application
  for (int j = 0; j < m; ++j)
    for (int i = j + 1; i < m; ++i) {
      double s = 0.5 * (out[static_cast<size_t>(j) * m + i] + out[static_cast<size_t>(i) * m + j]);
      out[static_cast<size_t>(j) * m + i] = s;
      out[static_cast<size_t>(i) * m + j] = s;
    }
  return out;
}

// General band solve A x = rhs with kl sub- and ku superdiagonals.
// Band storage for dgbsv: ldab = 2*kl+ku+1, entry A(i,j) at ab[kl+ku+i-j + j*ldab].
class BandSolver {
 public:
  BandSolver(int n, int kl, int ku) : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1) {
    ab_.assign(static_cast<size_t>(ldab_) * n_, 0.0);
    ipiv_.assign(static_cast<size_t>(n_), 0);
  }

  void zero() { std::fill(ab_.begin(), ab_.end(), 0.0); }

  double& at(int i, int j) {  // valid for |i-j| <= band
    return ab_[static_cast<size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
  }

  // Factor and solve in place; call once per filled matrix.
  void solve(std::vector<double>& rhs) {
    lapack_int info = LAPACKE_dgbsv(LAPACK_COL_MAJOR, n_, kl_, ku_, 1, ab_.data(), ldab_,
                                    ipiv_.data(), rhs.data(), n_);
    lapack_check(info, "dgbsv");
  }

  // Factor once, then solve repeatedly.
  void factor() {
    lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n_, n_, kl_, ku_, ab_.data(), ldab_,
                                     ipiv_.data());
    lapack_check(info, "dgbtrf");
    factored_ = true;
  }
  std::vector<double> solve_factored(const std::vector<double>& rhs) const {
    if (!factored_) throw LapackError("BandSolver: factor() not called");
    std::vector<double> x = rhs;
    lapack_int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n_, kl_, ku_, 1, ab_.data(),
                                     ldab_, ipiv_.data(), x.data(), n_);
    lapack_check(info, "dgbtrs");
    return x;
  }

 private:
  int n_, kl_, ku_, ldab_;
  bool factored_ = false;
  std::vector<double> ab_;
  std::vector<lapack_int> ipiv_;
};

}  // namespace kirchhoff
