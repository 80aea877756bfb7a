#pragma once

// Radial grids, quadrature and differentiation.
//
// Radial functions live on the uniform grid rho_i = (i+1)h, h = R/n,
// i = 0..n-1, truncated with a homogeneous Dirichlet condition beyond R.
// All derivative work happens on the half-line substitution y = rho*f:
// the 3D radial Laplacian in spherical-harmonic sector l becomes
//   (Delta_l f)(rho) = (y'' - l(l+1) y / rho^2) / rho,
// and y has a definite reflection parity about rho = 0,
//   y(-rho) = (-1)^{l+1} y(rho),  y(0) = 0,
// so a centered stencil closes with ghost nodes and stays symmetric.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kirchhoff {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double four_pi = 4.0 * std::numbers::pi;

struct RadialGrid {
  double R = 30.0;
  int n = 4096;

  RadialGrid() = default;
  RadialGrid(double R_, int n_) : R(R_), n(n_) {
    if (!(R > 0.0)) throw Error("RadialGrid: R must be positive");
    if (n < 16) throw Error("RadialGrid: need at least 16 nodes");
  }

  double h() const { return R / n; }
  double rho(int i) const { return (i + 1) * h(); }

  bool operator==(const RadialGrid& o) const { return R == o.R && n == o.n; }
};

struct RadialProfile {
  RadialGrid grid;
  std::vector<double> v;

  RadialProfile() = default;
  explicit RadialProfile(const RadialGrid& g) : grid(g), v(static_cast<size_t>(g.n), 0.0) {}
  RadialProfile(const RadialGrid& g, std::vector<double> vals) : grid(g), v(std::move(vals)) {
    if (static_cast<int>(v.size()) != g.n) throw Error("RadialProfile: size mismatch");
  }

  template <class F>
  static RadialProfile sample(const RadialGrid& g, F&& f) {
    RadialProfile p(g);
    for (int i = 0; i < g.n; ++i) p.v[i] = f(g.rho(i));
    return p;
  }
};

inline void require_same_grid(const RadialProfile& a, const RadialProfile& b) {
  if (!(a.grid == b.grid)) throw Error("radial grid mismatch");
}

// ---------------------------------------------------------------------------
// Centered sixth-order stencils on y-space vectors.
// ysign is the parity of y about rho = 0; values beyond R are zero.

namespace stencil {
inline constexpr double d1c[3] = {3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
inline constexpr double d2c0 = -49.0 / 18.0;
inline constexpr double d2c[3] = {3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0};
}  // namespace stencil

// Value of y at signed node index k (node i <-> k = i+1, rho = k h).
inline double y_at(std::span<const double> y, int k, int ysign) {
  int n = static_cast<int>(y.size());
  if (k > n) return 0.0;
  if (k == 0) return 0.0;
  if (k > 0) return y[k - 1];
  return ysign * y[-k - 1];
}

inline void apply_d2_y(std::span<const double> y, double h, int ysign,
                       std::span<double> out) {
  using namespace stencil;
  int n = static_cast<int>(y.size());
  double ih2 = 1.0 / (h * h);
  for (int i = 0; i < 3; ++i) {
    int k = i + 1;
    double s = d2c0 * y[i];
    for (int o = 1; o <= 3; ++o)
      s += d2c[o - 1] * (y_at(y, k + o, ysign) + y_at(y, k - o, ysign));
    out[i] = s * ih2;
  }
  for (int i = 3; i < n - 3; ++i) {
    double s = d2c0 * y[i];
    for (int o = 1; o <= 3; ++o) s += d2c[o - 1] * (y[i + o] + y[i - o]);
    out[i] = s * ih2;
  }
  for (int i = std::max(3, n - 3); i < n; ++i) {
    int k = i + 1;
    double s = d2c0 * y[i];
    for (int o = 1; o <= 3; ++o)
      s += d2c[o - 1] * (y_at(y, k + o, ysign) + y_at(y, k - o, ysign));
    out[i] = s * ih2;
  }
}

inline void apply_d1_y(std::span<const double> y, double h, int ysign,
                       std::span<double> out) {
  using namespace stencil;
  int n = static_cast<int>(y.size());
  double ih = 1.0 / h;
  for (int i = 0; i < n; ++i) {
    int k = i + 1;
    double s = 0.0;
    if (i >= 3 && i < n - 3) {
      for (int o = 1; o <= 3; ++o) s += d1c[o - 1] * (y[i + o] - y[i - o]);
    } else {
      for (int o = 1; o <= 3; ++o)
        s += d1c[o - 1] * (y_at(y, k + o, ysign) - y_at(y, k - o, ysign));
    }
    out[i] = s * ih;
  }
}

inline std::vector<double> to_y(const RadialProfile& f) {
  std::vector<double> y(f.v.size());
  for (int i = 0; i < f.grid.n; ++i) y[i] = f.grid.rho(i) * f.v[i];
  return y;
}

inline RadialProfile from_y(const RadialGrid& g, std::span<const double> y) {
  RadialProfile f(g);
  for (int i = 0; i < g.n; ++i) f.v[i] = y[i] / g.rho(i);
  return f;
}

// d/drho of a sector-l radial function, computed through y = rho*f.
inline RadialProfile profile_derivative(const RadialProfile& f, int ell = 0) {
  int ysign = (ell % 2 == 0) ? -1 : +1;
  auto y = to_y(f);
  std::vector<double> dy(y.size());
  apply_d1_y(y, f.grid.h(), ysign, dy);
  RadialProfile out(f.grid);
  for (int i = 0; i < f.grid.n; ++i) {
    double rho = f.grid.rho(i);
    out.v[i] = (dy[i] - f.v[i]) / rho;
  }
  return out;
}

// Radial part of the 3D Laplacian in sector l.
inline RadialProfile profile_laplacian(const RadialProfile& f, int ell = 0) {
  int ysign = (ell % 2 == 0) ? -1 : +1;
  auto y = to_y(f);
  std::vector<double> d2(y.size());
  apply_d2_y(y, f.grid.h(), ysign, d2);
  RadialProfile out(f.grid);
  for (int i = 0; i < f.grid.n; ++i) {
    double rho = f.grid.rho(i);
    out.v[i] = (d2[i] - ell * (ell + 1) * y[i] / (rho * rho)) / rho;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quadrature: trapezoid for 4*pi int_0^R f rho^(2+power) drho. The rho = 0
// endpoint carries zero integrand, the last node gets the half weight.

inline double quad_radial(const RadialProfile& f, int power = 0) {
  const int n = f.grid.n;
  const double h = f.grid.h();
  double s = 0.0;
  for (int i = 0; i < n - 1; ++i) s += f.v[i] * std::pow(f.grid.rho(i), 2 + power);
  s += 0.5 * f.v[n - 1] * std::pow(f.grid.rho(n - 1), 2 + power);
  return four_pi * h * s;
}

inline double quad_radial_values(const RadialGrid& g, std::span<const double> vals,
                                 int power = 0) {
  double s = 0.0;
  for (int i = 0; i < g.n - 1; ++i) s += vals[i] * std::pow(g.rho(i), 2 + power);
  s += 0.5 * vals[g.n - 1] * std::pow(g.rho(g.n - 1), 2 + power);
  return four_pi * g.h() * s;
}

// int |f|^2 over R^3
inline double mass2(const RadialProfile& f) {
  RadialProfile sq(f.grid);
  for (int i = 0; i < f.grid.n; ++i) sq.v[i] = f.v[i] * f.v[i];
  return quad_radial(sq);
}

// int |f|^{2p+2}
inline double lp_norm_2p2(const RadialProfile& f, double p) {
  RadialProfile g(f.grid);
  for (int i = 0; i < f.grid.n; ++i) g.v[i] = std::pow(std::abs(f.v[i]), 2.0 * p + 2.0);
  return quad_radial(g);
}

// int |grad f|^2 by quadrature of f'^2 (sector l = 0).
inline double grad_sq(const RadialProfile& f) {
  auto df = profile_derivative(f, 0);
  RadialProfile sq(f.grid);
  for (int i = 0; i < f.grid.n; ++i) sq.v[i] = df.v[i] * df.v[i];
  return quad_radial(sq);
}

// int |grad f|^2 as the Dirichlet form <-y'', y> of the same stencil the
// solvers and operator assembly use; agrees with grad_sq to round-off on
// resolved profiles and is the value cached alongside solved ground states.
inline double dirichlet_grad_sq(const RadialProfile& f, int ell = 0) {
  int ysign = (ell % 2 == 0) ? -1 : +1;
  auto y = to_y(f);
  std::vector<double> d2(y.size());
  apply_d2_y(y, f.grid.h(), ysign, d2);
  double s = 0.0;
  for (size_t i = 0; i < y.size(); ++i) s -= d2[i] * y[i];
  if (ell > 0) {
    for (int i = 0; i < f.grid.n; ++i) {
      double rho = f.grid.rho(i);
      s += ell * (ell + 1) * y[i] * y[i] / (rho * rho);
    }
  }
  return four_pi * f.grid.h() * s;
}

inline double inner_L2(const RadialProfile& a, const RadialProfile& b) {
  require_same_grid(a, b);
  RadialProfile prod(a.grid);
  for (int i = 0; i < a.grid.n; ++i) prod.v[i] = a.v[i] * b.v[i];
  return quad_radial(prod);
}

// (a,b)_{H^1} = (a,b) + 1/2 (a',b')
inline double inner_H1(const RadialProfile& a, const RadialProfile& b, int ell = 0) {
  require_same_grid(a, b);
  auto da = profile_derivative(a, ell);
  auto db = profile_derivative(b, ell);
  double cross = 0.0;
  if (ell > 0) {
    RadialProfile ang(a.grid);
    for (int i = 0; i < a.grid.n; ++i) {
      double rho = a.grid.rho(i);
      ang.v[i] = ell * (ell + 1) * a.v[i] * b.v[i] / (rho * rho);
    }
    cross = quad_radial(ang);
  }
  return inner_L2(a, b) + 0.5 * (inner_L2(da, db) + cross);
}

// Paper norm ||u|| = (1/2 ||grad u||_2^2 + ||u||_2^2)^(1/2)
inline double norm_paper(const RadialProfile& f) {
  return std::sqrt(0.5 * grad_sq(f) + mass2(f));
}

// ---------------------------------------------------------------------------
// Serialization: two-column CSV with a one-line header.

inline void write_csv(const RadialProfile& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path);
  out << "rho,value\n";
  char buf[64];
  for (int i = 0; i < f.grid.n; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", f.grid.rho(i), f.v[i]);
    out << buf;
  }
}

inline RadialProfile read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error("empty profile file " + path);
  std::vector<double> rho, val;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double a, b;
    if (std::sscanf(line.c_str(), "%lg,%lg", &a, &b) != 2)
      throw Error("bad CSV row in " + path);
    rho.push_back(a);
    val.push_back(b);
  }
  if (rho.size() < 16) throw Error("profile too short in " + path);
  int n = static_cast<int>(rho.size());
  double h = rho[0];
  RadialGrid g(rho.back(), n);
  if (std::abs(g.h() - h) > 1e-12 * h) throw Error("non-uniform grid in " + path);
  return RadialProfile(g, std::move(val));
}

// Lagrange interpolation (6-point) of a sector-0 profile at arbitrary radius,
// using even reflection below the first node and zero beyond R.
inline double interp_radial(const RadialProfile& f, double rho) {
  const double h = f.grid.h();
  const int n = f.grid.n;
  rho = std::abs(rho);
  if (rho >= f.grid.R + 2.5 * h) return 0.0;
  double x[6], y[6];
  if (rho < 3.5 * h) {
    // near the axis use the even-reflected node set; rho = 0 is not a node
    static constexpr int pos[6] = {-3, -2, -1, 1, 2, 3};
    for (int a = 0; a < 6; ++a) {
      x[a] = pos[a] * h;
      y[a] = f.v[std::abs(pos[a]) - 1];
    }
  } else {
    int k0 = static_cast<int>(std::floor(rho / h - 1.0)) - 2;  // leftmost of 6
    if (k0 > n - 6) k0 = n - 6;
    for (int a = 0; a < 6; ++a) {
      int k = k0 + a;
      x[a] = (k + 1) * h;
      y[a] = (k < n) ? f.v[k] : 0.0;
    }
  }
  double result = 0.0;
  for (int a = 0; a < 6; ++a) {
    double lk = 1.0;
    for (int b = 0; b < 6; ++b)
      if (b != a) lk *= (rho - x[b]) / (x[a] - x[b]);
    result += y[a] * lk;
  }
  return result;
}

}  // namespace kirchhoff
