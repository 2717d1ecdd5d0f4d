#include "ldplab/noise.hpp"

#include <fftw3.h>

#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "fftw_planner.hpp"
#include "ldplab/errors.hpp"
#include "ldplab/philox.hpp"

namespace ldplab {

namespace {

constexpr std::uint32_t kWhiteTag = 1;
constexpr std::uint32_t kColoredTag = 2;

bool smooth_length(std::size_t m) {
  for (std::size_t p : {2, 3, 5}) {
    while (m % p == 0) m /= p;
  }
  return m == 1;
}

std::size_t next_smooth(std::size_t m) {
  while (!smooth_length(m)) ++m;
  return m;
}

}  // namespace

void fill_white(const GridConfig& grid, const StreamKey& key, std::span<double> out) {
  if (out.size() != grid.interior_count()) {
    throw ConfigError("white slice size does not match the grid interior");
  }
  PhiloxStream rng(key.seed, key.path, key.step, kWhiteTag);
  boost::random::normal_distribution<double> normal(0.0, std::sqrt(grid.dt / grid.dx));
  for (double& v : out) v = normal(rng);
}

NoiseSlice sample_white_slice(const GridConfig& grid, const StreamKey& key) {
  grid.validate();
  NoiseSlice s{std::vector<double>(grid.interior_count()), key.step, grid.id()};
  fill_white(grid, key, s.values);
  return s;
}

struct ColoredSampler::Plan {
  fftw_plan plan = nullptr;
  ~Plan() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    if (plan) fftw_destroy_plan(plan);
  }
};

struct ColoredSampler::Workspace::Buffers {
  fftw_complex* in = nullptr;
  fftw_complex* out = nullptr;
  bool cached = false;
  std::uint64_t seed = 0;
  std::uint32_t path = 0;
  std::uint32_t pair = 0;

  Buffers(std::size_t m) : in(fftw_alloc_complex(m)), out(fftw_alloc_complex(m)) {
    if (!in || !out) throw std::bad_alloc();
  }
  ~Buffers() {
    fftw_free(in);
    fftw_free(out);
  }
  Buffers(const Buffers&) = delete;
  Buffers& operator=(const Buffers&) = delete;
};

ColoredSampler::Workspace::Workspace(std::size_t embedding, std::size_t)
    : buf_(std::make_unique<Buffers>(embedding)) {}
ColoredSampler::Workspace::Workspace(Workspace&&) noexcept = default;
ColoredSampler::Workspace& ColoredSampler::Workspace::operator=(Workspace&&) noexcept = default;
ColoredSampler::Workspace::~Workspace() = default;

ColoredSampler ColoredSampler::build(const CovarianceKernel& gamma, const GridConfig& grid,
                                     std::size_t embedding) {
  if (gamma.is_white()) {
    throw ConfigError("colored sampler needs a density kernel; white noise uses sample_white_slice");
  }
  grid.validate();
  const double extent = grid.x_hi() - grid.x_lo();
  if (extent < 8.0 * gamma.correlation_length()) {
    throw ConfigError("grid extent " + std::to_string(extent) +
                      " is below 8 correlation lengths of kernel '" + gamma.name() + "'");
  }
  ColoredSampler s;
  s.n_ = grid.interior_count();
  s.grid_id_ = grid.id();
  const std::size_t m = embedding == 0 ? next_smooth(2 * s.n_) : embedding;
  if (m < 2 * (s.n_ - 1)) throw ConfigError("embedding must be at least 2 (n - 1)");

  s.spectrum_ = sampled_circulant_spectrum(gamma, grid.dx, m, grid.dt);
  double negative = 0.0, total = 0.0;
  for (double& l : s.spectrum_) {
    total += std::abs(l);
    if (l < 0.0) {
      negative -= l;
      l = 0.0;
    }
  }
  s.clip_fraction_ = total > 0.0 ? negative / total : 0.0;
  if (s.clip_fraction_ > 1e-6) {
    throw EmbeddingError("circulant embedding clipped " + std::to_string(s.clip_fraction_) +
                         " of the spectral mass (limit 1e-6); enlarge the embedding");
  }
  s.sqrt_scaled_.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    s.sqrt_scaled_[k] = std::sqrt(s.spectrum_[k] / static_cast<double>(m));
  }

  s.plan_ = std::make_shared<Plan>();
  fftw_complex* in = fftw_alloc_complex(m);
  fftw_complex* out = fftw_alloc_complex(m);
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    s.plan_->plan = fftw_plan_dft_1d(static_cast<int>(m), in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_free(in);
  fftw_free(out);
  if (!s.plan_->plan) throw EmbeddingError("FFTW could not plan the embedding transform");
  return s;
}

ColoredSampler::Workspace ColoredSampler::make_workspace() const {
  return Workspace(embedding_size(), n_);
}

void ColoredSampler::transform_pair(const StreamKey& key, Workspace& ws) const {
  auto& b = *ws.buf_;
  const std::uint32_t pair = key.step / 2;
  if (b.cached && b.seed == key.seed && b.path == key.path && b.pair == pair) return;
  PhiloxStream rng(key.seed, key.path, pair, kColoredTag);
  boost::random::normal_distribution<double> normal;
  const std::size_t m = embedding_size();
  for (std::size_t k = 0; k < m; ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    b.in[k][0] = sqrt_scaled_[k] * re;
    b.in[k][1] = sqrt_scaled_[k] * im;
  }
  fftw_execute_dft(plan_->plan, b.in, b.out);
  b.cached = true;
  b.seed = key.seed;
  b.path = key.path;
  b.pair = pair;
}

void ColoredSampler::fill(const StreamKey& key, std::span<double> out, Workspace& ws) const {
  if (out.size() != n_) throw ConfigError("colored slice size does not match the sampler");
  transform_pair(key, ws);
  const int part = key.step % 2;
  const auto* y = ws.buf_->out;
  for (std::size_t j = 0; j < n_; ++j) out[j] = y[j][part];
}

NoiseSlice ColoredSampler::sample(const StreamKey& key) const {
  auto ws = make_workspace();
  NoiseSlice s{std::vector<double>(n_), key.step, grid_id_};
  fill(key, s.values, ws);
  return s;
}

NoiseSource::NoiseSource(const CovarianceKernel& gamma, const GridConfig& grid)
    : grid_(grid), gamma_(gamma) {
  grid_.validate();
  if (!gamma.is_white()) {
    colored_ = std::make_shared<const ColoredSampler>(ColoredSampler::build(gamma, grid));
  }
}

NoiseSource::Workspace NoiseSource::make_workspace() const {
  Workspace ws;
  if (colored_) ws.colored_ = std::make_unique<ColoredSampler::Workspace>(colored_->make_workspace());
  return ws;
}

void NoiseSource::fill(const StreamKey& key, std::span<double> out, Workspace& ws) const {
  if (!colored_) {
    fill_white(grid_, key, out);
    return;
  }
  if (!ws.colored_) ws = make_workspace();
  colored_->fill(key, out, *ws.colored_);
}

NoiseSlice NoiseSource::sample(const StreamKey& key) const {
  if (!colored_) return sample_white_slice(grid_, key);
  return colored_->sample(key);
}

CovarianceCheck empirical_covariance_check(std::span<const NoiseSlice> slices,
                                           const CovarianceKernel& gamma, const GridConfig& grid,
                                           std::span<const std::size_t> lags) {
  if (slices.size() < 10000) {
    throw StatisticsError("empirical_covariance_check needs at least 10^4 slices, got " +
                          std::to_string(slices.size()));
  }
  const std::size_t n = slices.front().values.size();
  for (const auto& s : slices) {
    if (s.values.size() != n) throw StatisticsError("slices have different lengths");
  }
  CovarianceCheck rep;
  if (lags.empty()) {
    const std::size_t last =
        gamma.is_white() ? 4 : static_cast<std::size_t>(std::ceil(3.0 * gamma.correlation_length() / grid.dx));
    for (std::size_t m = 0; m <= std::min(last, n - 1); ++m) rep.lags.push_back(m);
  } else {
    rep.lags.assign(lags.begin(), lags.end());
  }
  rep.slices = slices.size();
  const double count = static_cast<double>(slices.size());
  for (std::size_t m : rep.lags) {
    if (m >= n) throw ConfigError("lag exceeds slice length");
    // Per-slice spatial average of xi_j xi_{j+m}; slices are independent.
    double mean = 0.0, m2 = 0.0;
    std::size_t seen = 0;
    for (const auto& s : slices) {
      double acc = 0.0;
      for (std::size_t j = 0; j + m < n; ++j) acc += s.values[j] * s.values[j + m];
      const double v = acc / static_cast<double>(n - m);
      ++seen;
      const double d = v - mean;
      mean += d / static_cast<double>(seen);
      m2 += d * (v - mean);
    }
    const double se = std::sqrt(m2 / (count - 1.0) / count);
    const double target = gamma.is_white() ? (m == 0 ? grid.dt / grid.dx : 0.0)
                                           : grid.dt * gamma(static_cast<double>(m) * grid.dx);
    const double z = se > 0.0 ? (mean - target) / se : (mean == target ? 0.0 : INFINITY);
    rep.empirical.push_back(mean);
    rep.target.push_back(target);
    rep.z.push_back(z);
    rep.max_abs_deviation = std::max(rep.max_abs_deviation, std::abs(mean - target));
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(z));
  }
  rep.pass = rep.max_abs_z < 5.0;
  return rep;
}

}  // namespace ldplab
