#pragma once

// Complex fields on a periodic cube [-L, L)^3 with spectral differentiation.
// FFTW plans are created with FFTW_ESTIMATE so results are reproducible
// run-to-run; the planner is serialized behind a mutex, execution is
// per-thread through a thread_local plan cache.

#include <fftw3.h>

#include <array>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "kirchhoff/radial.hpp"

namespace kirchhoff {

using cplx = std::complex<double>;

inline bool fft_friendly(int m) {
  if (m < 16 || m % 2 != 0) return false;
  int r = m;
  for (int f : {2, 3, 5})
    while (r % f == 0) r /= f;
  return r == 1;
}

struct CartGrid3 {
  double L = 12.0;
  int m = 64;

  CartGrid3() = default;
  CartGrid3(double L_, int m_) : L(L_), m(m_) {
    if (!(L > 0.0)) throw Error("CartGrid3: L must be positive");
    if (!fft_friendly(m)) throw Error("CartGrid3: m must be an even 2^a 3^b 5^c >= 16");
  }

  double dx() const { return 2.0 * L / m; }
  double coord(int i) const { return -L + i * dx(); }
  // signed wavenumber, k_j = (pi/L) * j with j in [-m/2, m/2)
  double k(int i) const {
    int j = (2 * i < m) ? i : i - m;
    return std::numbers::pi / L * j;
  }
  size_t size() const { return static_cast<size_t>(m) * m * m; }
  double cell() const { return dx() * dx() * dx(); }

  bool operator==(const CartGrid3& o) const { return L == o.L && m == o.m; }
};

struct Field3 {
  CartGrid3 grid;
  std::vector<cplx> v;

  Field3() = default;
  explicit Field3(const CartGrid3& g) : grid(g), v(g.size(), cplx(0.0, 0.0)) {}

  size_t idx(int ix, int iy, int iz) const {
    return (static_cast<size_t>(ix) * grid.m + iy) * grid.m + iz;
  }
};

inline void require_same_grid(const Field3& a, const Field3& b) {
  if (!(a.grid == b.grid)) throw Error("cartesian grid mismatch");
}

// ---------------------------------------------------------------------------
// FFT machinery

class Fft3 {
 public:
  explicit Fft3(int m) : m_(m), n_(static_cast<size_t>(m) * m * m) {
    buf_ = fftw_alloc_complex(n_);
    std::lock_guard lock(planner_mutex());
    fwd_ = fftw_plan_dft_3d(m, m, m, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_3d(m, m, m, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Fft3() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }
  Fft3(const Fft3&) = delete;
  Fft3& operator=(const Fft3&) = delete;

  cplx* buffer() { return reinterpret_cast<cplx*>(buf_); }
  size_t size() const { return n_; }

  void forward_inplace() { fftw_execute(fwd_); }
  void backward_inplace() { fftw_execute(bwd_); }  // unnormalized

  void forward(std::vector<cplx>& io) {
    std::memcpy(buf_, io.data(), n_ * sizeof(cplx));
    fftw_execute(fwd_);
    std::memcpy(io.data(), buf_, n_ * sizeof(cplx));
  }
  void backward(std::vector<cplx>& io, bool normalize = true) {
    std::memcpy(buf_, io.data(), n_ * sizeof(cplx));
    fftw_execute(bwd_);
    std::memcpy(io.data(), buf_, n_ * sizeof(cplx));
    if (normalize) {
      double s = 1.0 / static_cast<double>(n_);
      for (auto& z : io) z *= s;
    }
  }

  static std::mutex& planner_mutex() {
    static std::mutex mu;
    return mu;
  }

 private:
  int m_;
  size_t n_;
  fftw_complex* buf_;
  fftw_plan fwd_, bwd_;
};

inline Fft3& fft_for(int m) {
  thread_local std::map<int, std::unique_ptr<Fft3>> cache;
  auto& slot = cache[m];
  if (!slot) slot = std::make_unique<Fft3>(m);
  return *slot;
}

inline std::vector<cplx> fft_of(const Field3& f) {
  std::vector<cplx> hat = f.v;
  fft_for(f.grid.m).forward(hat);
  return hat;
}

// ---------------------------------------------------------------------------
// Integrals and norms

inline double mass2(const Field3& f) {
  double s = 0.0;
  for (const auto& z : f.v) s += std::norm(z);
  return s * f.grid.cell();
}

inline double inner_L2(const Field3& a, const Field3& b) {
  require_same_grid(a, b);
  double s = 0.0;
  for (size_t i = 0; i < a.v.size(); ++i)
    s += a.v[i].real() * b.v[i].real() + a.v[i].imag() * b.v[i].imag();
  return s * a.grid.cell();
}

inline double grad_sq(const Field3& f) {
  auto hat = fft_of(f);
  const auto& g = f.grid;
  double s = 0.0;
  size_t i = 0;
  for (int ix = 0; ix < g.m; ++ix) {
    double kx2 = g.k(ix) * g.k(ix);
    for (int iy = 0; iy < g.m; ++iy) {
      double ky2 = g.k(iy) * g.k(iy);
      for (int iz = 0; iz < g.m; ++iz, ++i)
        s += (kx2 + ky2 + g.k(iz) * g.k(iz)) * std::norm(hat[i]);
    }
  }
  return s * g.cell() / static_cast<double>(g.size());
}

// (a,b)_{H^1} = Re (a,b) + 1/2 Re (grad a, grad b), via one k-space pass
inline double inner_H1(const Field3& a, const Field3& b) {
  require_same_grid(a, b);
  auto ah = fft_of(a);
  auto bh = fft_of(b);
  const auto& g = a.grid;
  double s = 0.0;
  size_t i = 0;
  for (int ix = 0; ix < g.m; ++ix) {
    double kx2 = g.k(ix) * g.k(ix);
    for (int iy = 0; iy < g.m; ++iy) {
      double ky2 = g.k(iy) * g.k(iy);
      for (int iz = 0; iz < g.m; ++iz, ++i) {
        double w = 1.0 + 0.5 * (kx2 + ky2 + g.k(iz) * g.k(iz));
        s += w * (ah[i].real() * bh[i].real() + ah[i].imag() * bh[i].imag());
      }
    }
  }
  return s * g.cell() / static_cast<double>(g.size());
}

inline double norm_paper(const Field3& f) { return std::sqrt(0.5 * grad_sq(f) + mass2(f)); }

inline double lp_norm_2p2(const Field3& f, double p) {
  double s = 0.0;
  for (const auto& z : f.v) s += std::pow(std::norm(z), p + 1.0);
  return s * f.grid.cell();
}

// Spectral partial derivative along axis (0,1,2).
inline Field3 partial(const Field3& f, int axis) {
  auto hat = fft_of(f);
  const auto& g = f.grid;
  size_t i = 0;
  for (int ix = 0; ix < g.m; ++ix)
    for (int iy = 0; iy < g.m; ++iy)
      for (int iz = 0; iz < g.m; ++iz, ++i) {
        int ia = (axis == 0) ? ix : (axis == 1) ? iy : iz;
        // drop the Nyquist mode so d/dx of a real field stays real
        double ka = (2 * ia == g.m) ? 0.0 : g.k(ia);
        hat[i] *= cplx(0.0, ka);
      }
  Field3 out(g);
  out.v = std::move(hat);
  fft_for(g.m).backward(out.v);
  return out;
}

// e^{i theta} f(. - x), spectral shift composed with a global phase
inline Field3 translate_phase(const Field3& f, const std::array<double, 3>& x, double theta) {
  auto hat = fft_of(f);
  const auto& g = f.grid;
  std::vector<cplx> ex(g.m), ey(g.m), ez(g.m);
  for (int i = 0; i < g.m; ++i) {
    ex[i] = std::polar(1.0, -g.k(i) * x[0]);
    ey[i] = std::polar(1.0, -g.k(i) * x[1]);
    ez[i] = std::polar(1.0, -g.k(i) * x[2]);
  }
  cplx ph = std::polar(1.0, theta);
  size_t i = 0;
  for (int ix = 0; ix < g.m; ++ix)
    for (int iy = 0; iy < g.m; ++iy) {
      cplx pxy = ph * ex[ix] * ey[iy];
      for (int iz = 0; iz < g.m; ++iz, ++i) hat[i] *= pxy * ez[iz];
    }
  Field3 out(g);
  out.v = std::move(hat);
  fft_for(g.m).backward(out.v);
  return out;
}

inline std::array<double, 3> centroid(const Field3& f) {
  const auto& g = f.grid;
  double w = 0.0;
  std::array<double, 3> c{0.0, 0.0, 0.0};
  size_t i = 0;
  for (int ix = 0; ix < g.m; ++ix)
    for (int iy = 0; iy < g.m; ++iy)
      for (int iz = 0; iz < g.m; ++iz, ++i) {
        double d = std::norm(f.v[i]);
        w += d;
        c[0] += d * g.coord(ix);
        c[1] += d * g.coord(iy);
        c[2] += d * g.coord(iz);
      }
  if (w > 0.0)
    for (auto& x : c) x /= w;
  return c;
}

// ---------------------------------------------------------------------------
// Binary serialization: 16-byte header (uint64 m, double L), then
// little-endian interleaved (re, im) doubles in row-major (x, y, z) order.

inline void write_field(const Field3& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path);
  std::uint64_t m = static_cast<std::uint64_t>(f.grid.m);
  double L = f.grid.L;
  out.write(reinterpret_cast<const char*>(&m), 8);
  out.write(reinterpret_cast<const char*>(&L), 8);
  out.write(reinterpret_cast<const char*>(f.v.data()),
            static_cast<std::streamsize>(f.v.size() * sizeof(cplx)));
  if (!out) throw Error("short write to " + path);
}

inline Field3 read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::uint64_t m = 0;
  double L = 0.0;
  in.read(reinterpret_cast<char*>(&m), 8);
  in.read(reinterpret_cast<char*>(&L), 8);
  if (!in) throw Error("short header in " + path);
  Field3 f(CartGrid3(L, static_cast<int>(m)));
  in.read(reinterpret_cast<char*>(f.v.data()),
          static_cast<std::streamsize>(f.v.size() * sizeof(cplx)));
  if (!in) throw Error("short field data in " + path);
  return f;
}

// energy functional E(u) = 1/2 G + 1/4 G^2 - 1/(p+1) int |u|^{2p+2}, G = int |grad u|^2
inline double energy(const Field3& u, double p) {
  double G = grad_sq(u);
  return 0.5 * G + 0.25 * G * G - lp_norm_2p2(u, p) / (p + 1.0);
}

inline double energy(const RadialProfile& u, double p) {
  double G = grad_sq(u);
  return 0.5 * G + 0.25 * G * G - lp_norm_2p2(u, p) / (p + 1.0);
}

}  // namespace kirchhoff
