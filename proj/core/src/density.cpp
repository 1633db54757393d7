#include "adp/density.hpp"

#include "adp/error.hpp"

#include <fftw3.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <string>

namespace adp {

namespace {

// FFTW planning is not thread-safe; execution with new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

template <class T>
std::unique_ptr<T[], FftwDeleter> fftw_array(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (!p) throw std::bad_alloc();
  return std::unique_ptr<T[], FftwDeleter>(p);
}

double signed_frequency(int q, int size) { return q <= size / 2 ? q : q - size; }

double band_weight(double f, double cutoff_freq, BandFilter filter) {
  if (filter == BandFilter::sharp) return f <= cutoff_freq ? 1.0 : 0.0;
  constexpr double kWidth = 0.1;
  const double lo = (1.0 - kWidth) * cutoff_freq;
  const double hi = (1.0 + kWidth) * cutoff_freq;
  if (f <= lo) return 1.0;
  if (f >= hi) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * (f - lo) / (hi - lo)));
}

}  // namespace

DensityMap DensityMap::zeros(int size, double voxel_size, const Eigen::Vector3d& origin) {
  DensityMap m;
  m.size = size;
  m.voxel_size = voxel_size;
  m.origin = origin;
  m.values.assign(m.voxel_count(), 0.0);
  m.validate();
  return m;
}

void DensityMap::validate() const {
  if (size < 2) throw ShapeError("density grid must be at least 2 voxels wide");
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size))
    throw ShapeError("voxel size must be positive");
  if (!origin.allFinite()) throw ShapeError("density origin must be finite");
  if (values.size() != voxel_count())
    throw ShapeError("density grid holds " + std::to_string(values.size()) + " values, expected " +
                     std::to_string(voxel_count()));
  for (double v : values)
    if (!std::isfinite(v)) throw ShapeError("density values must be finite");
}

bool DensityMap::same_grid(const DensityMap& other, double tol) const {
  return size == other.size && std::abs(voxel_size - other.voxel_size) <= tol &&
         (origin - other.origin).cwiseAbs().maxCoeff() <= tol;
}

AtomSpec AtomSpec::backbone(const std::vector<std::uint8_t>& present, double resolution, double blur) {
  AtomSpec spec;
  spec.resolution = resolution;
  spec.blur = blur;
  spec.amplitudes.resize(present.size());
  for (std::size_t r = 0; r < present.size(); ++r)
    spec.amplitudes[r] = present[r] ? kBackboneAtomicNumbers[r % kAtomsPerResidue] : 0.0;
  return spec;
}

double AtomSpec::width() const { return resolution / (std::numbers::sqrt2 * std::numbers::pi); }

double AtomSpec::effective_width() const {
  const double s = width();
  return std::sqrt(s * s + blur * blur);
}

void AtomSpec::validate(int rows) const {
  if (!(resolution > 0.0)) throw ShapeError("map resolution must be positive");
  if (!(blur >= 0.0)) throw ShapeError("blur must be nonnegative");
  if (static_cast<int>(amplitudes.size()) != rows)
    throw ShapeError("atom spec has " + std::to_string(amplitudes.size()) + " amplitudes for " +
                     std::to_string(rows) + " atoms");
}

namespace {

// Calls fn(index, offset = v - X, weight = Z exp(-|v - X|^2 / 2 s_eff^2)) for every voxel within
// the cutoff of atom position X.
template <class Fn>
void for_each_kernel_voxel(const DensityMap& grid, const Eigen::Vector3d& pos, double amplitude,
                           double s_eff, Fn&& fn) {
  const double cutoff = 4.0 * s_eff;
  const double cutoff2 = cutoff * cutoff;
  const double inv_two_var = 1.0 / (2.0 * s_eff * s_eff);
  int lo[3];
  int hi[3];
  for (int a = 0; a < 3; ++a) {
    const double c = (pos(a) - grid.origin(a)) / grid.voxel_size;
    const double r = cutoff / grid.voxel_size;
    lo[a] = std::max(0, static_cast<int>(std::ceil(c - r)));
    hi[a] = std::min(grid.size - 1, static_cast<int>(std::floor(c + r)));
  }
  for (int k = lo[2]; k <= hi[2]; ++k)
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int i = lo[0]; i <= hi[0]; ++i) {
        const Eigen::Vector3d off = grid.voxel_center(i, j, k) - pos;
        const double d2 = off.squaredNorm();
        if (d2 > cutoff2) continue;
        fn(grid.index(i, j, k), off, amplitude * std::exp(-d2 * inv_two_var));
      }
}

}  // namespace

int fft_friendly_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int f : {2, 3, 5})
      while (r % f == 0) r /= f;
    if (r == 1) return m;
  }
}

DensityMap render_density(const Coords& x, const AtomSpec& spec, const DensityMap& grid_template,
                          bool warn_outside) {
  if (!(grid_template.voxel_size > 0.0)) throw ShapeError("voxel size must be positive");
  spec.validate(static_cast<int>(x.rows()));
  if (!x.allFinite()) throw ShapeError("render_density: non-finite coordinates");
  DensityMap out = grid_template;
  out.values.assign(out.voxel_count(), 0.0);
  out.resolution = spec.resolution;
  const double s_eff = spec.effective_width();
  const double margin = 4.0 * spec.width();
  const double extent = (grid_template.size - 1) * grid_template.voxel_size;
  int outside = 0;
  for (int a = 0; a < x.rows(); ++a) {
    const double z = spec.amplitudes[static_cast<std::size_t>(a)];
    if (z == 0.0) continue;
    const Eigen::Vector3d pos = x.row(a).transpose();
    const Eigen::Vector3d rel = pos - grid_template.origin;
    if ((rel.array() < -margin).any() || (rel.array() > extent + margin).any()) ++outside;
    for_each_kernel_voxel(out, pos, z, s_eff,
                          [&](std::size_t idx, const Eigen::Vector3d&, double w) { out.values[idx] += w; });
  }
  if (outside > 0 && warn_outside)
    spdlog::warn("render_density: {} atom(s) lie more than 4s outside the grid", outside);
  return out;
}

FourierBand::FourierBand(int size) : size_(size) {
  if (size < 2) throw ShapeError("FFT grid must be at least 2 voxels wide");
  const std::size_t n = static_cast<std::size_t>(size) * size * size;
  const std::size_t nc = static_cast<std::size_t>(size) * size * (size / 2 + 1);
  auto real = fftw_array<double>(n);
  auto spec = fftw_array<fftw_complex>(nc);
  std::lock_guard lock(planner_mutex());
  forward_ = fftw_plan_dft_r2c_3d(size, size, size, real.get(), spec.get(), FFTW_ESTIMATE);
  backward_ = fftw_plan_dft_c2r_3d(size, size, size, spec.get(), real.get(), FFTW_ESTIMATE);
  if (!forward_ || !backward_) throw Error("FFTW planning failed");
}

FourierBand::~FourierBand() {
  std::lock_guard lock(planner_mutex());
  if (forward_) fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  if (backward_) fftw_destroy_plan(static_cast<fftw_plan>(backward_));
}

double FourierBand::effective_cutoff(double voxel_size, double r_t) const {
  const double nyquist = 2.0 * voxel_size;
  if (r_t < nyquist) {
    if (!warned_.exchange(true))
      spdlog::warn("resolution cutoff {:.3f} A is below Nyquist; clamped to {:.3f} A", r_t, nyquist);
    return nyquist;
  }
  return r_t;
}

double FourierBand::energy(const std::vector<double>& r, double voxel_size, double r_t,
                           BandFilter filter, std::vector<double>* filtered) const {
  const int d = size_;
  const std::size_t n = static_cast<std::size_t>(d) * d * d;
  if (r.size() != n) throw ShapeError("band energy input has the wrong voxel count");
  const int half = d / 2 + 1;
  const std::size_t nc = static_cast<std::size_t>(d) * d * half;

  auto real = fftw_array<double>(n);
  auto spec = fftw_array<fftw_complex>(nc);
  std::copy(r.begin(), r.end(), real.get());
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_), real.get(), spec.get());

  const bool all_pass = std::isinf(r_t) && r_t > 0.0;
  const double cutoff_freq = all_pass ? 0.0 : 1.0 / effective_cutoff(voxel_size, r_t);
  const double inv_len = 1.0 / (d * voxel_size);
  double total = 0.0;
  for (int k = 0; k < d; ++k) {
    const double fz = signed_frequency(k, d) * inv_len;
    for (int j = 0; j < d; ++j) {
      const double fy = signed_frequency(j, d) * inv_len;
      for (int i = 0; i < half; ++i) {
        const std::size_t idx = (static_cast<std::size_t>(k) * d + j) * half + i;
        double m = 1.0;
        if (!all_pass) {
          const double fx = i * inv_len;
          m = band_weight(std::sqrt(fx * fx + fy * fy + fz * fz), cutoff_freq, filter);
        }
        // Columns i = 0 and (even D) i = D/2 are their own mirror; the rest stand for two.
        const double mult = (i == 0 || (d % 2 == 0 && i == d / 2)) ? 1.0 : 2.0;
        const double power = spec[idx][0] * spec[idx][0] + spec[idx][1] * spec[idx][1];
        total += mult * m * m * power;
        if (filtered) {
          spec[idx][0] *= m * m;
          spec[idx][1] *= m * m;
        }
      }
    }
  }
  total /= static_cast<double>(n);

  if (filtered) {
    fftw_execute_dft_c2r(static_cast<fftw_plan>(backward_), spec.get(), real.get());
    filtered->resize(n);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t v = 0; v < n; ++v) (*filtered)[v] = real[v] * scale;
  }
  return total;
}

double fourier_squared_distance(const DensityMap& a, const DensityMap& b, double r_t, BandFilter filter) {
  if (!a.same_grid(b)) throw ShapeError("maps are not on the same grid");
  std::vector<double> diff(a.values.size());
  for (std::size_t v = 0; v < diff.size(); ++v) diff[v] = a.values[v] - b.values[v];
  const FourierBand band(a.size);
  return band.energy(diff, a.voxel_size, r_t, filter);
}

double real_space_squared_distance(const DensityMap& a, const DensityMap& b) {
  if (!a.same_grid(b)) throw ShapeError("maps are not on the same grid");
  double total = 0.0;
  for (std::size_t v = 0; v < a.values.size(); ++v) {
    const double d = a.values[v] - b.values[v];
    total += d * d;
  }
  return total;
}

Evaluation density_loglik_grad_x(const DensityMap& observed, const Coords& x, const AtomSpec& spec,
                                 double r_t, const FourierBand& band, BandFilter filter) {
  if (band.size() != observed.size) throw ShapeError("FFT workspace does not match the map size");
  const DensityMap model = render_density(x, spec, observed, false);
  std::vector<double> residual(observed.values.size());
  for (std::size_t v = 0; v < residual.size(); ++v) residual[v] = observed.values[v] - model.values[v];

  std::vector<double> filtered;
  Evaluation ev;
  ev.loglik = -band.energy(residual, observed.voxel_size, r_t, filter, &filtered);

  // d loglik / d Gamma(v) = 2 (P^T P r)(v); d Gamma(v) / dX = w (v - X) / s_eff^2.
  const double s_eff = spec.effective_width();
  const double inv_var = 1.0 / (s_eff * s_eff);
  ev.grad = Coords::Zero(x.rows(), 3);
  for (int a = 0; a < x.rows(); ++a) {
    const double z = spec.amplitudes[static_cast<std::size_t>(a)];
    if (z == 0.0) continue;
    Eigen::Vector3d g = Eigen::Vector3d::Zero();
    for_each_kernel_voxel(observed, x.row(a).transpose(), z, s_eff,
                          [&](std::size_t idx, const Eigen::Vector3d& off, double w) {
                            g += (2.0 * filtered[idx] * w * inv_var) * off;
                          });
    ev.grad.row(a) = g.transpose();
  }
  return ev;
}

Evaluation density_loglik_grad(const DensityMap& observed, const CorrelatedPrior& prior,
                               const Coords& z, const AtomSpec& spec, double r_t,
                               const FourierBand& band, BandFilter filter) {
  Evaluation ev = density_loglik_grad_x(observed, prior.apply(z), spec, r_t, band, filter);
  ev.grad = prior.apply_transpose(ev.grad);
  return ev;
}

DensityLikelihood::DensityLikelihood(CorrelatedPrior prior, DensityMap observed, AtomSpec spec,
                                     BandFilter filter)
    : prior_(std::move(prior)),
      observed_(std::move(observed)),
      spec_(std::move(spec)),
      filter_(filter),
      band_(std::make_shared<FourierBand>(observed_.size)) {
  observed_.validate();
  spec_.validate(prior_.dim());
}

Evaluation DensityLikelihood::evaluate(const Coords& z, const EvalContext& ctx) const {
  return density_loglik_grad(observed_, prior_, z, spec_, ctx.resolution, *band_, filter_);
}

}  // namespace adp
