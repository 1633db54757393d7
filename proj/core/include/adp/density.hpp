#pragma once

#include "adp/chain.hpp"
#include "adp/likelihood.hpp"
#include "adp/prior.hpp"

#include <Eigen/Core>

#include <atomic>
#include <cstddef>
#include <limits>
#include <memory>
#include <vector>

namespace adp {

// Cubic grid of D^3 values. Voxel (i, j, k) is centred at origin + voxel_size * (i, j, k) and
// stored at index (k D + j) D + i, so x varies fastest.
struct DensityMap {
  int size = 0;
  double voxel_size = 1.0;
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  double resolution = 0.0;  // declared resolution in Angstrom, 0 when unknown
  std::vector<double> values;

  static DensityMap zeros(int size, double voxel_size, const Eigen::Vector3d& origin);

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * static_cast<std::size_t>(size) + static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(size) + static_cast<std::size_t>(i);
  }
  Eigen::Vector3d voxel_center(int i, int j, int k) const {
    return origin + voxel_size * Eigen::Vector3d(i, j, k);
  }
  std::size_t voxel_count() const {
    return static_cast<std::size_t>(size) * static_cast<std::size_t>(size) * static_cast<std::size_t>(size);
  }

  // Throws ShapeError unless D >= 2, voxel_size > 0 and values are D^3 finite numbers.
  void validate() const;
  // Same size, voxel size and origin (to `tol` Angstrom).
  bool same_grid(const DensityMap& other, double tol = 1e-6) const;
};

// Forward model: one isotropic Gaussian of amplitude Z per atom, width s = resolution/(sqrt(2) pi),
// widened by a uniform blur: s_eff^2 = s^2 + blur^2.
struct AtomSpec {
  std::vector<double> amplitudes;  // one per atom row; 0 excludes the atom
  double resolution = 2.0;
  double blur = 0.0;

  // Backbone atomic numbers (7, 6, 6, 8); rows with present == 0 are excluded.
  static AtomSpec backbone(const std::vector<std::uint8_t>& present, double resolution,
                           double blur = 0.0);

  double width() const;
  double effective_width() const;
  // Kernel evaluation radius, 4 s_eff.
  double cutoff() const { return 4.0 * effective_width(); }
  void validate(int rows) const;
};

// Gamma(x) sampled at voxel centres of `grid_template`, kernel truncated at 4 s_eff.
// Smallest m >= n whose only prime factors are 2, 3 and 5.
int fft_friendly_size(int n);

DensityMap render_density(const Coords& x, const AtomSpec& spec, const DensityMap& grid_template,
                          bool warn_outside = true);

enum class BandFilter {
  sharp,   // 1 for |f| <= 1/r_t, else 0
  smooth,  // raised cosine over |f| in [(1 - w)/r_t, (1 + w)/r_t], w = 0.1
};

// Low-pass band energy through 3D real FFTs. Plans are created once per instance; evaluation
// allocates its own buffers and may run concurrently.
class FourierBand {
 public:
  explicit FourierBand(int size);
  ~FourierBand();
  FourierBand(const FourierBand&) = delete;
  FourierBand& operator=(const FourierBand&) = delete;

  int size() const { return size_; }

  // ||P r||^2 for the low-pass filter P at cutoff r_t on a grid with spacing `voxel_size`.
  // When `filtered` is non-null it receives P^T P r in real space. r_t below 2 voxels is
  // clamped to 2 voxels with a warning.
  double energy(const std::vector<double>& r, double voxel_size, double r_t, BandFilter filter,
                std::vector<double>* filtered = nullptr) const;

  // The cutoff actually used for a requested r_t.
  double effective_cutoff(double voxel_size, double r_t) const;

 private:
  int size_;
  void* forward_;   // fftw_plan
  void* backward_;  // fftw_plan
  mutable std::atomic<bool> warned_{false};
};

// ||lowpass(a) - lowpass(b)||^2 via the Fourier band energy of a - b.
double fourier_squared_distance(const DensityMap& a, const DensityMap& b,
                                double r_t = std::numeric_limits<double>::infinity(),
                                BandFilter filter = BandFilter::sharp);
double real_space_squared_distance(const DensityMap& a, const DensityMap& b);

// loglik = -||lowpass(y) - lowpass(Gamma(x))||^2 with its gradient with respect to x.
Evaluation density_loglik_grad_x(const DensityMap& observed, const Coords& x, const AtomSpec& spec,
                                 double r_t, const FourierBand& band,
                                 BandFilter filter = BandFilter::sharp);

// Same loss, gradient in z with x = R z.
Evaluation density_loglik_grad(const DensityMap& observed, const CorrelatedPrior& prior,
                               const Coords& z, const AtomSpec& spec, double r_t,
                               const FourierBand& band, BandFilter filter = BandFilter::sharp);

// Density fit with the cutoff taken from EvalContext::resolution.
class DensityLikelihood final : public Likelihood {
 public:
  DensityLikelihood(CorrelatedPrior prior, DensityMap observed, AtomSpec spec,
                    BandFilter filter = BandFilter::sharp);

  Evaluation evaluate(const Coords& z, const EvalContext& ctx = {}) const override;
  int dim() const override { return prior_.dim(); }
  std::string kind() const override { return "density"; }

  const DensityMap& observed() const { return observed_; }
  const AtomSpec& spec() const { return spec_; }

 private:
  CorrelatedPrior prior_;
  DensityMap observed_;
  AtomSpec spec_;
  BandFilter filter_;
  std::shared_ptr<const FourierBand> band_;
};

}  // namespace adp
