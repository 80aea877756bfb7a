#pragma once

// Discretization of the linearized operators about the ground state,
//   L+ phi = -1/2 (1+g) Lap phi - (int grad r . grad phi) Lap r + phi - (2p+1) r^{2p} phi
//   L- eta = -1/2 (1+g) Lap eta + eta - r^{2p} eta,
// restricted to spherical-harmonic sector l.  In y = rho*f coordinates the
// sector operator is
//   A y = -1/2 (1+g) (y'' - l(l+1) y / rho^2) + [1 - c_p r^{2p}] y,
// symmetric in the uniform weight 4 pi h; the nonlocal term survives only in
// the l = 0 plus sector, as the rank-one update (4 pi h) q q^T with
// q = -(D2 y_r), i.e. the y-representation of -Lap r.

#include <vector>

#include "kirchhoff/ground_state.hpp"
#include "kirchhoff/lapack.hpp"
#include "kirchhoff/radial.hpp"

namespace kirchhoff {

enum class OpKind { plus, minus };

struct SectorOperator {
  int ell = 0;
  OpKind kind = OpKind::plus;
  RadialGrid grid;
  double g = 0.0;           // ||grad r||_2^2
  int ysign = -1;           // parity of y about rho = 0
  std::vector<double> pot;  // diagonal potential incl. the centrifugal term
  std::vector<double> rank_q;  // present only for kind = plus, ell = 0
  double rank_w = 0.0;         // 4 pi h

  bool has_rank_one() const { return !rank_q.empty(); }

  void apply(std::span<const double> y, std::vector<double>& out) const {
    const int n = grid.n;
    out.resize(static_cast<size_t>(n));
    static thread_local std::vector<double> d2;
    d2.resize(static_cast<size_t>(n));
    apply_d2_y(y, grid.h(), ysign, d2);
    for (int i = 0; i < n; ++i) out[i] = -0.5 * (1.0 + g) * d2[i] + pot[i] * y[i];
    if (has_rank_one()) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += rank_q[i] * y[i];
      s *= rank_w;
      for (int i = 0; i < n; ++i) out[i] += s * rank_q[i];
    }
  }

  // quadratic form <A u, u> in physical units
  double form(std::span<const double> y) const {
    static thread_local std::vector<double> ay;
    apply(y, ay);
    double s = 0.0;
    for (int i = 0; i < grid.n; ++i) s += ay[i] * y[i];
    return four_pi * grid.h() * s;
  }

  // dense column-major matrix (Euclidean y coordinates)
  std::vector<double> dense() const {
    const int n = grid.n;
    const double ih2 = 1.0 / (grid.h() * grid.h());
    const double cg = -0.5 * (1.0 + g);
    std::vector<double> a(static_cast<size_t>(n) * n, 0.0);
    auto at = [&](int i, int j) -> double& { return a[static_cast<size_t>(j) * n + i]; };
    for (int i = 0; i < n; ++i) {
      at(i, i) = cg * stencil::d2c0 * ih2 + pot[i];
      int k = i + 1;
      for (int o = 1; o <= 3; ++o) {
        double c = cg * stencil::d2c[o - 1] * ih2;
        if (i + o < n) at(i, i + o) += c;
        if (i - o >= 0) at(i, i - o) += c;
        int km = k - o;
        if (km < 0) {
          int im = -km - 1;
          at(i, im) += ysign * c;
        }
      }
    }
    if (has_rank_one())
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) at(i, j) += rank_w * rank_q[i] * rank_q[j];
    return a;
  }

  // LAPACK upper band storage, only valid without the rank-one term
  std::vector<double> band_upper(int kd = 3) const {
    if (has_rank_one()) throw Error("band storage: operator has a nonlocal term");
    const int n = grid.n;
    const double ih2 = 1.0 / (grid.h() * grid.h());
    const double cg = -0.5 * (1.0 + g);
    std::vector<double> ab(static_cast<size_t>(kd + 1) * n, 0.0);
    auto at = [&](int i, int j) -> double& {  // i <= j
      return ab[static_cast<size_t>(j) * (kd + 1) + (kd + i - j)];
    };
    for (int j = 0; j < n; ++j) {
      at(j, j) = cg * stencil::d2c0 * ih2 + pot[j];
      for (int o = 1; o <= 3; ++o)
        if (j - o >= 0) at(j - o, j) += cg * stencil::d2c[o - 1] * ih2;
    }
    // parity folds near the axis; store each symmetric pair once (upper part)
    for (int i = 0; i < 3; ++i) {
      int k = i + 1;
      for (int o = 1; o <= 3; ++o) {
        int km = k - o;
        if (km < 0) {
          int im = -km - 1;
          if (im >= i) at(i, im) += cg * stencil::d2c[o - 1] * ih2 * ysign;
        }
      }
    }
    return ab;
  }
};

inline SectorOperator assemble_sector(const GroundState& gs, int ell, OpKind kind) {
  if (ell < 0 || ell > 2) throw Error("assemble_sector: sector index must be 0, 1 or 2");
  if (gs.residual > 1e-6) throw Error("assemble_sector: ground state not converged");
  SectorOperator op;
  op.ell = ell;
  op.kind = kind;
  op.grid = gs.r.grid;
  op.g = gs.gnorm2;
  op.ysign = (ell % 2 == 0) ? -1 : +1;
  const int n = op.grid.n;
  const double cp = (kind == OpKind::plus) ? 2.0 * gs.p + 1.0 : 1.0;
  op.pot.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double rho = op.grid.rho(i);
    op.pot[i] = 1.0 - cp * std::pow(std::abs(gs.r.v[i]), 2.0 * gs.p) +
                0.5 * (1.0 + op.g) * ell * (ell + 1) / (rho * rho);
  }
  if (kind == OpKind::plus && ell == 0) {
    auto y = to_y(gs.r);
    op.rank_q.resize(static_cast<size_t>(n));
    std::vector<double> d2(static_cast<size_t>(n));
    apply_d2_y(y, op.grid.h(), -1, d2);
    for (int i = 0; i < n; ++i) op.rank_q[i] = -d2[i];
    op.rank_w = four_pi * op.grid.h();
  }
  return op;
}

// Paper-norm Gram matrix in sector l: N = I + 1/2 (-D2 + l(l+1)/rho^2), dense.
inline std::vector<double> paper_gram_dense(const RadialGrid& grid, int ell) {
  const int n = grid.n;
  const double ih2 = 1.0 / (grid.h() * grid.h());
  int ysign = (ell % 2 == 0) ? -1 : +1;
  std::vector<double> a(static_cast<size_t>(n) * n, 0.0);
  auto at = [&](int i, int j) -> double& { return a[static_cast<size_t>(j) * n + i]; };
  for (int i = 0; i < n; ++i) {
    double rho = grid.rho(i);
    at(i, i) = 1.0 - 0.5 * stencil::d2c0 * ih2 + 0.5 * ell * (ell + 1) / (rho * rho);
    int k = i + 1;
    for (int o = 1; o <= 3; ++o) {
      double c = -0.5 * stencil::d2c[o - 1] * ih2;
      if (i + o < n) at(i, i + o) += c;
      if (i - o >= 0) at(i, i - o) += c;
      int km = k - o;
      if (km < 0) at(i, -km - 1) += ysign * c;
    }
  }
  return a;
}

// H^1 pairing vector: y-representation of the functional u -> (u, c)_{H^1},
// i.e. N_ell y_c in Euclidean coordinates.
inline std::vector<double> h1_pairing_vector(const RadialGrid& grid, int ell,
                                             std::span<const double> y_c) {
  const int n = grid.n;
  int ysign = (ell % 2 == 0) ? -1 : +1;
  std::vector<double> d2(static_cast<size_t>(n)), out(static_cast<size_t>(n));
  apply_d2_y(y_c, grid.h(), ysign, d2);
  for (int i = 0; i < n; ++i) {
    double rho = grid.rho(i);
    out[i] = y_c[i] - 0.5 * d2[i] + 0.5 * ell * (ell + 1) * y_c[i] / (rho * rho);
  }
  return out;
}

// <L_kind u, u> for a sector-l radial profile, evaluated matrix-free with the
// same stencil the assembled operator uses.
inline double quad_form(const GroundState& gs, OpKind kind, const RadialProfile& u, int ell) {
  auto op = assemble_sector(gs, ell, kind);
  auto y = to_y(u);
  return op.form(y);
}

}  // namespace kirchhoff
