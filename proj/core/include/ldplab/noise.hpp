#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "ldplab/grid.hpp"
#include "ldplab/kernels.hpp"

namespace ldplab {

struct StreamKey {
  std::uint64_t seed = 0;
  std::uint32_t path = 0;
  std::uint32_t step = 0;
};

/// Forcings xi_j on the interior nodes for one time step.
struct NoiseSlice {
  std::vector<double> values;
  std::size_t step_index = 0;
  std::uint64_t grid_id = 0;
};

/// Independent N(0, dt/dx) entries, one per interior node.
NoiseSlice sample_white_slice(const GridConfig& grid, const StreamKey& key);
void fill_white(const GridConfig& grid, const StreamKey& key, std::span<double> out);

/// Stationary Gaussian sampler by circulant embedding of the covariance row
/// dt * Gamma(m dx) on a periodic grid of at least twice the interior size.
/// One complex FFT yields two independent slices; steps 2m and 2m+1 share
/// the transform keyed by m (real and imaginary parts).
class ColoredSampler {
 public:
  /// Scratch buffers for one thread. Also caches the most recent pair so
  /// that consecutive steps cost one transform per two slices.
  class Workspace {
   public:
    Workspace(Workspace&&) noexcept;
    Workspace& operator=(Workspace&&) noexcept;
    ~Workspace();

   private:
    friend class ColoredSampler;
    Workspace(std::size_t embedding, std::size_t n);
    struct Buffers;
    std::unique_ptr<Buffers> buf_;
  };

  /// `embedding` = 0 picks 2 * interior size rounded up to a 2^a 3^b 5^c length.
  static ColoredSampler build(const CovarianceKernel& gamma, const GridConfig& grid,
                              std::size_t embedding = 0);

  std::size_t size() const noexcept { return n_; }
  std::size_t embedding_size() const noexcept { return spectrum_.size(); }
  const std::vector<double>& spectrum() const noexcept { return spectrum_; }
  /// Clipped negative eigenvalue mass over total absolute mass.
  double clip_fraction() const noexcept { return clip_fraction_; }
  std::uint64_t grid_id() const noexcept { return grid_id_; }

  Workspace make_workspace() const;

  NoiseSlice sample(const StreamKey& key) const;
  void fill(const StreamKey& key, std::span<double> out, Workspace& ws) const;

 private:
  struct Plan;
  void transform_pair(const StreamKey& key, Workspace& ws) const;

  std::size_t n_ = 0;
  std::uint64_t grid_id_ = 0;
  std::vector<double> sqrt_scaled_;  // sqrt(lambda_k / M)
  std::vector<double> spectrum_;
  double clip_fraction_ = 0.0;
  std::shared_ptr<Plan> plan_;
};

/// White or colored noise behind one interface, as consumed by the solver.
class NoiseSource {
 public:
  class Workspace {
   public:
    Workspace() = default;

   private:
    friend class NoiseSource;
    std::unique_ptr<ColoredSampler::Workspace> colored_;
  };

  NoiseSource(const CovarianceKernel& gamma, const GridConfig& grid);

  bool is_white() const noexcept { return !colored_; }
  const ColoredSampler* colored() const noexcept { return colored_.get(); }
  const CovarianceKernel& kernel() const noexcept { return gamma_; }

  Workspace make_workspace() const;
  void fill(const StreamKey& key, std::span<double> out, Workspace& ws) const;
  NoiseSlice sample(const StreamKey& key) const;

 private:
  GridConfig grid_;
  CovarianceKernel gamma_;
  std::shared_ptr<const ColoredSampler> colored_;
};

struct CovarianceCheck {
  std::vector<std::size_t> lags;
  std::vector<double> empirical;
  std::vector<double> target;
  std::vector<double> z;
  double max_abs_deviation = 0.0;
  double max_abs_z = 0.0;
  std::size_t slices = 0;
  bool pass = false;
};

/// Spatially averaged lag covariances of the slices against dt Gamma(m dx)
/// (dt/dx at lag 0 and 0 elsewhere for white). Standard errors come from the
/// spread across slices; pass iff every |z| < 5. Default lags: 0..4 for white,
/// 0..ceil(3 l / dx) for colored. Throws StatisticsError below 10^4 slices.
CovarianceCheck empirical_covariance_check(std::span<const NoiseSlice> slices,
                                           const CovarianceKernel& gamma, const GridConfig& grid,
                                           std::span<const std::size_t> lags = {});

}  // namespace ldplab
