#pragma once

// Sector spectra, constrained infima and the operator identities used by the
// coercivity argument.

#include <optional>
#include <string>
#include <vector>

#include "kirchhoff/sectors.hpp"

namespace kirchhoff {

struct EigMode {
  double value = 0.0;
  RadialProfile fn;  // weight-normalized eigenfunction, physical f = y/rho
};

// Lowest k eigenpairs of a sector operator; banded direct solve where the
// operator is purely local, dense otherwise (the l = 0 plus sector).
inline std::vector<EigMode> eig_sector(const SectorOperator& op, int k) {
  if (k < 1 || k > 12) throw Error("eig_sector: k must lie in 1..12");
  const int n = op.grid.n;
  EigPairs pairs;
  if (op.has_rank_one()) {
    auto a = op.dense();
    pairs = sym_eig_lowest(a, n, k);
  } else {
    auto ab = op.band_upper();
    pairs = band_eig_lowest(ab, n, 3, k);
  }
  double wscale = 1.0 / std::sqrt(four_pi * op.grid.h());
  std::vector<EigMode> out;
  for (size_t j = 0; j < pairs.values.size(); ++j) {
    EigMode m;
    m.value = pairs.values[j];
    std::vector<double> y(pairs.vectors.begin() + static_cast<long>(j) * n,
                          pairs.vectors.begin() + static_cast<long>(j + 1) * n);
    for (auto& v : y) v *= wscale;
    m.fn = from_y(op.grid, y);
    out.push_back(std::move(m));
  }
  return out;
}

inline int negative_count(const SectorOperator& op) {
  auto a = op.dense();
  return sym_negative_count(std::move(a), op.grid.n);
}

// ---------------------------------------------------------------------------
// Constrained infima (projected Rayleigh quotients).

enum class Pairing { L2, H1 };
enum class NormKind { L2, paper };

struct Constraint {
  RadialProfile c;
  int ell = 0;
  Pairing pairing = Pairing::L2;
};

struct ConstrainedInf {
  double value = 0.0;
  std::vector<std::pair<int, double>> per_sector;
};

// min over the listed sectors of <L u, u> / ||u||^2 subject to u orthogonal to
// the constraints (each constraint lives in one sector).  The form and the
// constraints are projected onto the orthogonal complement with a thin QR,
// then the reduced problem is solved densely.
inline ConstrainedInf constrained_inf(const GroundState& gs, OpKind kind,
                                      const std::vector<Constraint>& constraints,
                                      NormKind norm,
                                      const std::vector<int>& sectors = {0, 1, 2}) {
  ConstrainedInf out;
  out.value = std::numeric_limits<double>::max();
  const int n = gs.r.grid.n;
  for (int ell : sectors) {
    auto op = assemble_sector(gs, ell, kind);
    auto a = op.dense();

    // gather constraint vectors for this sector
    std::vector<double> cmat;
    int k = 0;
    for (const auto& con : constraints) {
      if (con.ell != ell) continue;
      if (!(con.c.grid == gs.r.grid)) throw Error("constrained_inf: constraint grid mismatch");
      auto y = to_y(con.c);
      std::vector<double> vec;
      if (con.pairing == Pairing::L2)
        vec = y;
      else
        vec = h1_pairing_vector(gs.r.grid, ell, y);
      // reject near-dependent constraints
      double nv = 0.0;
      for (double v : vec) nv += v * v;
      if (!(nv > 0.0)) throw Error("constrained_inf: rank-deficient constraint set");
      cmat.insert(cmat.end(), vec.begin(), vec.end());
      ++k;
    }

    double val;
    if (norm == NormKind::L2) {
      if (k == 0) {
        val = sym_min_eig(a, n);
      } else {
        auto ared = complement_reduce(a, n, cmat, k);
        val = sym_min_eig(ared, n - k);
      }
    } else {
      auto b = paper_gram_dense(gs.r.grid, ell);
      if (k == 0) {
        val = sym_gen_min_eig(a, b, n);
      } else {
        auto ared = complement_reduce(a, n, cmat, k);
        auto bred = complement_reduce(b, n, cmat, k);
        val = sym_gen_min_eig(ared, bred, n - k);
      }
    }
    out.per_sector.emplace_back(ell, val);
    out.value = std::min(out.value, val);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Operator and scalar identities at the ground state.

struct IdentityReport {
  double zuhe1_max = 0.0;     // L+ (x . grad r) = -(1 + g/2) Lap r
  double zuhe2_max = 0.0;     // L+ r = [p + (p-1) g] Lap r - 2 p r
  double combined_max = 0.0;  // L+ (r/2p + c_p (x . grad r)) = -r
  double grad_pair_rel = 0.0; // int grad r . grad(x . grad r) = -g/2
  double mass_pair_rel = 0.0; // int (x . grad r) r = -(3/2) ||r||_2^2
  double bracket = 0.0;       // (2-3p) + (4-3p) g
  bool bracket_positive = false;
};

inline IdentityReport identity_checks(const GroundState& gs) {
  IdentityReport rep;
  const auto& grid = gs.r.grid;
  const int n = grid.n;
  const double p = gs.p, g = gs.gnorm2;

  auto op = assemble_sector(gs, 0, OpKind::plus);
  auto y_r = to_y(gs.r);
  std::vector<double> lap_y(static_cast<size_t>(n));
  apply_d2_y(y_r, grid.h(), -1, lap_y);  // y-representation of Lap r

  auto dr = profile_derivative(gs.r, 0);
  RadialProfile xdr(grid);  // x . grad r as a radial function rho r'(rho)
  for (int i = 0; i < n; ++i) xdr.v[i] = grid.rho(i) * dr.v[i];
  auto y_s = to_y(xdr);

  std::vector<double> lhs, rhs(static_cast<size_t>(n));
  auto maxdiff_f = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (int i = 0; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]) / grid.rho(i));
    return m;
  };

  // (zuhe1)
  op.apply(y_s, lhs);
  for (int i = 0; i < n; ++i) rhs[i] = -(1.0 + 0.5 * g) * lap_y[i];
  rep.zuhe1_max = maxdiff_f(lhs, rhs);

  // (zuhe2)
  op.apply(y_r, lhs);
  for (int i = 0; i < n; ++i) rhs[i] = (p + (p - 1.0) * g) * lap_y[i] - 2.0 * p * y_r[i];
  rep.zuhe2_max = maxdiff_f(lhs, rhs);

  // combined: L+ (r/2p + c (x . grad r)) = -r
  double c = (p + (p - 1.0) * g) / (p * (2.0 + g));
  std::vector<double> y_mix(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) y_mix[i] = y_r[i] / (2.0 * p) + c * y_s[i];
  op.apply(y_mix, lhs);
  for (int i = 0; i < n; ++i) rhs[i] = -y_r[i];
  rep.combined_max = maxdiff_f(lhs, rhs);

  // scalar identities
  auto ds = profile_derivative(xdr, 0);
  RadialProfile prod(grid);
  for (int i = 0; i < n; ++i) prod.v[i] = dr.v[i] * ds.v[i];
  double grad_pair = quad_radial(prod);
  rep.grad_pair_rel = std::abs(grad_pair + 0.5 * g) / (0.5 * g);

  double mass_pair = inner_L2(xdr, gs.r);
  rep.mass_pair_rel = std::abs(mass_pair + 1.5 * gs.mass2) / (1.5 * gs.mass2);

  rep.bracket = (2.0 - 3.0 * p) + (4.0 - 3.0 * p) * g;
  rep.bracket_positive = rep.bracket > 0.0;
  return rep;
}

}  // namespace kirchhoff
