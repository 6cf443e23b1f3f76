#include "activeflow/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>

#include "activeflow/error.hpp"

namespace activeflow {
namespace {

// The FFTW planner is not thread-safe; executing an existing plan on new
// arrays is. All planning goes through this registry.
class PlanRegistry {
 public:
  struct Plans {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
  };

  static PlanRegistry& instance() {
    static PlanRegistry registry;
    return registry;
  }

  // rank is 2 or 3; dims are the real-space extents.
  Plans get(int rank, int n0, int n1, int n2) {
    std::lock_guard lock(mutex_);
    init_threads_locked();
    auto key = std::make_tuple(rank, n0, n1, n2, threads_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    int dims[3] = {n0, n1, n2};
    std::size_t real_size = static_cast<std::size_t>(n0) * n1 * (rank == 3 ? n2 : 1);
    std::size_t half = static_cast<std::size_t>(dims[rank - 1] / 2 + 1);
    std::size_t complex_size = real_size / dims[rank - 1] * half;
    double* real = fftw_alloc_real(real_size);
    fftw_complex* cplx = fftw_alloc_complex(complex_size);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan_with_nthreads(threads_);
    Plans p;
    p.r2c = fftw_plan_dft_r2c(rank, dims, real, cplx, flags);
    p.c2r = fftw_plan_dft_c2r(rank, dims, cplx, real, flags);
    fftw_free(real);
    fftw_free(cplx);
    if (p.r2c == nullptr || p.c2r == nullptr) {
      throw Error(ErrorKind::InvalidArgument, "FFTW failed to create a plan");
    }
    plans_.emplace(key, p);
    return p;
  }

  void set_threads(int n) {
    std::lock_guard lock(mutex_);
    init_threads_locked();
    threads_ = std::max(1, n);
  }

 private:
  PlanRegistry() = default;
  ~PlanRegistry() {
    for (auto& [key, p] : plans_) {
      fftw_destroy_plan(p.r2c);
      fftw_destroy_plan(p.c2r);
    }
  }

  void init_threads_locked() {
    if (threads_initialised_) return;
    threads_initialised_ = true;
    fftw_init_threads();
    if (const char* env = std::getenv("ACTIVEFLOW_THREADS")) {
      int n = std::atoi(env);
      if (n > 0) threads_ = n;
    }
  }

  std::mutex mutex_;
  bool threads_initialised_ = false;
  int threads_ = 1;
  std::map<std::tuple<int, int, int, int, int>, Plans> plans_;
};

PlanRegistry::Plans plans3(const GridSpec& g) {
  return PlanRegistry::instance().get(3, g.n_x(), g.n_x(), g.n_theta());
}

PlanRegistry::Plans plans2(const GridSpec& g) {
  return PlanRegistry::instance().get(2, g.n_x(), g.n_x(), 0);
}

// Wavenumber used by odd-order derivatives: the Nyquist mode has no
// well-defined real derivative and is dropped.
constexpr double deriv_wavenumber(int i, int n) noexcept {
  return i == n / 2 ? 0.0 : static_cast<double>(wavenumber(i, n));
}

// Weight of a half-spectrum entry in a full-spectrum sum.
constexpr double half_weight(int j, int n) noexcept {
  return (j == 0 || j == n / 2) ? 1.0 : 2.0;
}

template <typename Symbol>
Field3 apply_symbol(const Field3& f, Symbol&& symbol) {
  Spectrum s = forward(f);
  const GridSpec& g = f.grid();
  const int n = g.n_x(), nt = g.n_theta();
  for (int i1 = 0; i1 < n; ++i1)
    for (int i2 = 0; i2 < n; ++i2)
      for (int j = 0; j < s.n_half(); ++j) s[s.index(i1, i2, j)] *= symbol(i1, i2, j, n, nt);
  return inverse(s);
}

template <typename Symbol>
Field2 apply_symbol(const Field2& f, Symbol&& symbol) {
  Spectrum2 s = forward(f);
  const int n = f.grid().n_x();
  for (int i1 = 0; i1 < n; ++i1)
    for (int j = 0; j < s.n_half(); ++j) s[s.index(i1, j)] *= symbol(i1, j, n);
  return inverse(s);
}

}  // namespace

void set_fft_threads(int n) { PlanRegistry::instance().set_threads(n); }

Spectrum::Spectrum(const GridSpec& grid)
    : grid_(grid), coeffs_(grid.plane_size() * (grid.n_theta() / 2 + 1)) {}

Spectrum::Spectrum(const GridSpec& grid, std::vector<Complex> coeffs)
    : grid_(grid), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != grid.plane_size() * (grid.n_theta() / 2 + 1)) {
    throw Error(ErrorKind::InvalidArgument, "spectrum size does not match grid");
  }
}

Complex Spectrum::mode(int k1, int k2, int kt) const noexcept {
  const int n = grid_.n_x(), nt = grid_.n_theta();
  if (std::abs(k1) > n / 2 || std::abs(k2) > n / 2 || std::abs(kt) > nt / 2) return {};
  const bool conj = kt < 0;
  if (conj) {
    k1 = -k1;
    k2 = -k2;
    kt = -kt;
  }
  int i1 = (k1 % n + n) % n;
  int i2 = (k2 % n + n) % n;
  Complex c = coeffs_[index(i1, i2, kt)];
  return conj ? std::conj(c) : c;
}

double Spectrum::energy() const noexcept {
  const int n = grid_.n_x(), nt = grid_.n_theta();
  double e = 0.0;
  for (int i1 = 0; i1 < n; ++i1)
    for (int i2 = 0; i2 < n; ++i2)
      for (int j = 0; j < n_half(); ++j) e += half_weight(j, nt) * std::norm(coeffs_[index(i1, i2, j)]);
  return e;
}

Spectrum2::Spectrum2(const GridSpec& grid)
    : grid_(grid), coeffs_(static_cast<std::size_t>(grid.n_x()) * (grid.n_x() / 2 + 1)) {}

Spectrum forward(const GridSpec& grid, std::span<const double> values) {
  if (values.size() != grid.size()) {
    throw Error(ErrorKind::InvalidArgument, "value count does not match grid");
  }
  Spectrum s(grid);
  std::vector<double> in(values.begin(), values.end());
  fftw_execute_dft_r2c(plans3(grid).r2c, in.data(),
                       reinterpret_cast<fftw_complex*>(s.coeffs().data()));
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (auto& c : s.coeffs()) c *= scale;
  return s;
}

Spectrum forward(const Field3& f) { return forward(f.grid(), f.values()); }

std::vector<double> inverse_values(const Spectrum& s) {
  // c2r overwrites its input.
  std::vector<Complex> work(s.coeffs().begin(), s.coeffs().end());
  std::vector<double> out(s.grid().size());
  fftw_execute_dft_c2r(plans3(s.grid()).c2r, reinterpret_cast<fftw_complex*>(work.data()),
                       out.data());
  return out;
}

Field3 inverse(const Spectrum& s) { return Field3(s.grid(), inverse_values(s)); }

Spectrum2 forward(const Field2& f) {
  const GridSpec& g = f.grid();
  Spectrum2 s(g);
  std::vector<double> in(f.values().begin(), f.values().end());
  fftw_execute_dft_r2c(plans2(g).r2c, in.data(),
                       reinterpret_cast<fftw_complex*>(s.coeffs().data()));
  const double scale = 1.0 / static_cast<double>(g.plane_size());
  for (auto& c : s.coeffs()) c *= scale;
  return s;
}

Field2 inverse(const Spectrum2& s) {
  std::vector<Complex> work(s.coeffs().begin(), s.coeffs().end());
  std::vector<double> out(s.grid().plane_size());
  fftw_execute_dft_c2r(plans2(s.grid()).c2r, reinterpret_cast<fftw_complex*>(work.data()),
                       out.data());
  return Field2(s.grid(), std::move(out));
}

Field3 deriv(const Field3& f, Axis axis) {
  return apply_symbol(f, [axis](int i1, int i2, int j, int n, int nt) {
    double k = 0.0;
    switch (axis) {
      case Axis::X1: k = deriv_wavenumber(i1, n); break;
      case Axis::X2: k = deriv_wavenumber(i2, n); break;
      case Axis::Theta: k = deriv_wavenumber(j, nt); break;
    }
    return Complex(0.0, k);
  });
}

Field3 laplacian_xi(const Field3& f, double de) {
  return apply_symbol(f, [de](int i1, int i2, int j, int n, int) {
    const double k1 = wavenumber(i1, n), k2 = wavenumber(i2, n), kt = j;
    return Complex(-(de * (k1 * k1 + k2 * k2) + kt * kt), 0.0);
  });
}

Field2 deriv(const Field2& f, Axis axis) {
  if (axis == Axis::Theta) {
    throw Error(ErrorKind::InvalidArgument, "planar fields have no angle axis");
  }
  return apply_symbol(f, [axis](int i1, int j, int n) {
    return Complex(0.0, axis == Axis::X1 ? deriv_wavenumber(i1, n) : deriv_wavenumber(j, n));
  });
}

Field2 laplacian(const Field2& f) {
  return apply_symbol(f, [](int i1, int j, int n) {
    const double k1 = wavenumber(i1, n), k2 = j;
    return Complex(-(k1 * k1 + k2 * k2), 0.0);
  });
}

void dealias_in_place(Spectrum& s) noexcept {
  const GridSpec& g = s.grid();
  const int n = g.n_x(), nt = g.n_theta();
  const int keep_x = n / 3, keep_t = nt / 3;
  for (int i1 = 0; i1 < n; ++i1) {
    const bool drop1 = std::abs(wavenumber(i1, n)) > keep_x;
    for (int i2 = 0; i2 < n; ++i2) {
      const bool drop2 = drop1 || std::abs(wavenumber(i2, n)) > keep_x;
      for (int j = 0; j < s.n_half(); ++j) {
        if (drop2 || j > keep_t) s[s.index(i1, i2, j)] = 0.0;
      }
    }
  }
}

Spectrum dealias(const Spectrum& s) {
  Spectrum out = s;
  dealias_in_place(out);
  return out;
}

Field2 compute_rho(const Field3& f) {
  const GridSpec& g = f.grid();
  const int nt = g.n_theta();
  std::vector<double> rho(g.plane_size());
  auto v = f.values();
  for (std::size_t p = 0; p < rho.size(); ++p) {
    double sum = 0.0;
    for (int it = 0; it < nt; ++it) sum += v[p * nt + it];
    rho[p] = sum * g.dtheta();
  }
  return Field2(g, std::move(rho));
}

std::pair<Field2, Field2> compute_p(const Field3& f) {
  const GridSpec& g = f.grid();
  const int nt = g.n_theta();
  std::vector<double> cs(nt), sn(nt);
  for (int it = 0; it < nt; ++it) {
    auto [c, s] = e_vec(g.theta(it));
    cs[it] = c;
    sn[it] = s;
  }
  std::vector<double> p1(g.plane_size()), p2(g.plane_size());
  auto v = f.values();
  for (std::size_t p = 0; p < p1.size(); ++p) {
    double a = 0.0, b = 0.0;
    for (int it = 0; it < nt; ++it) {
      a += v[p * nt + it] * cs[it];
      b += v[p * nt + it] * sn[it];
    }
    p1[p] = a * g.dtheta();
    p2[p] = b * g.dtheta();
  }
  return {Field2(g, std::move(p1)), Field2(g, std::move(p2))};
}

double poincare_constant(const GridSpec& grid) {
  // Smallest nonzero |k|² over the resolved modes; every grid with at least
  // one mode per axis resolves |k| = 1.
  const int n = grid.n_x(), nt = grid.n_theta();
  double lambda1 = 0.0;
  for (int i1 = 0; i1 < n; ++i1)
    for (int i2 = 0; i2 < n; ++i2)
      for (int j = 0; j <= nt / 2; ++j) {
        const double k1 = wavenumber(i1, n), k2 = wavenumber(i2, n);
        const double k2sum = k1 * k1 + k2 * k2 + static_cast<double>(j) * j;
        if (k2sum > 0.0 && (lambda1 == 0.0 || k2sum < lambda1)) lambda1 = k2sum;
      }
  return 1.0 / std::sqrt(lambda1);
}

double l2_norm_sq(const Spectrum& s) noexcept { return kBoxVolume * s.energy(); }

double grad_norm_sq(const Spectrum& s) noexcept {
  const GridSpec& g = s.grid();
  const int n = g.n_x(), nt = g.n_theta();
  double e = 0.0;
  for (int i1 = 0; i1 < n; ++i1) {
    const double k1 = deriv_wavenumber(i1, n);
    for (int i2 = 0; i2 < n; ++i2) {
      const double k2 = deriv_wavenumber(i2, n);
      for (int j = 0; j < s.n_half(); ++j) {
        const double kt = deriv_wavenumber(j, nt);
        e += half_weight(j, nt) * (k1 * k1 + k2 * k2 + kt * kt) * std::norm(s[s.index(i1, i2, j)]);
      }
    }
  }
  return kBoxVolume * e;
}

}  // namespace activeflow
