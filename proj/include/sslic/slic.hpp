// The SSLIC clustering engine: localized k-means in the joint
// intensity-geometry space with a restricted search window per cluster.
//
// Stages: regular grid initialization, gradient-descent perturbation of the
// centers, then a fixed number of rounds of (parallel label/distance update
// over disjoint slabs | barrier | parallel per-slab accumulation | ordered
// single-threaded reduce). Labels and distances carry over between rounds,
// so the per-pixel best distance is non-increasing.
//
// Determinism contract: for fixed input and parameters the outputs are
// bitwise identical for every worker count. Clusters are always visited in
// ascending id order, updates use strict less-than (ties keep the
// incumbent), and partial accumulators are merged in slab order.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sslic/color.hpp"
#include "sslic/image.hpp"
#include "sslic/parallel.hpp"

namespace sslic {

/// Change of the cluster table between consecutive iterations: L2 norm of
/// the concatenated center displacement vectors in joint space.
using Residual = double;

struct SlicParams {
  /// Expected superpixel extent per axis, in pixels. Anisotropic grids are
  /// the norm for anisotropic data.
  GridSize grid;
  /// Balance between spatial regularity and intensity affinity.
  double weight_m = 10.0;
  /// 0 selects the rank-dependent default: 10 for rank <= 2, 5 for rank >= 3.
  int max_iterations = 0;
  bool enforce_connectivity = true;
  /// Optional early stop on the center residual; disabled by default, the
  /// iteration count is the termination criterion.
  std::optional<double> residual_threshold{};

  int iterations_for(int rank) const {
    if (max_iterations > 0) return max_iterations;
    return rank <= 2 ? 10 : 5;
  }

  void validate(const Shape& dims) const {
    if (grid.size() != dims.size())
      throw std::invalid_argument("SlicParams: grid rank does not match image rank");
    for (int i = 0; i < dims.size(); ++i) {
      if (grid[i] < 1) throw std::invalid_argument("SlicParams: grid sizes must be >= 1");
      if (grid[i] > dims[i])
        throw std::invalid_argument("SlicParams: grid size exceeds image extent on axis " +
                                    std::to_string(i));
    }
    if (!(weight_m > 0.0)) throw std::invalid_argument("SlicParams: weight_m must be positive");
    if (max_iterations < 0)
      throw std::invalid_argument("SlicParams: max_iterations must be positive (or 0 for default)");
  }
};

/// Flat array of k cluster centers. Each center is a (c + n)-vector laid
/// out as [c intensity components | n index-space coordinates].
class ClusterTable {
 public:
  ClusterTable(int channels, int rank, std::int64_t count)
      : channels_(channels),
        rank_(rank),
        centers_(static_cast<std::size_t>(count) * (channels + rank), 0.0) {}

  int channels() const { return channels_; }
  int rank() const { return rank_; }
  int stride() const { return channels_ + rank_; }
  std::int64_t count() const { return static_cast<std::int64_t>(centers_.size()) / stride(); }

  std::span<double> center(std::int64_t k) {
    return {centers_.data() + k * stride(), static_cast<std::size_t>(stride())};
  }
  std::span<const double> center(std::int64_t k) const {
    return {centers_.data() + k * stride(), static_cast<std::size_t>(stride())};
  }

  /// Index-space coordinate of center k along an axis (a real number once
  /// mean updates have run).
  double coordinate(std::int64_t k, int axis) const { return center(k)[channels_ + axis]; }

  const std::vector<double>& data() const { return centers_; }
  std::vector<double>& data() { return centers_; }

  friend bool operator==(const ClusterTable& a, const ClusterTable& b) {
    return a.channels_ == b.channels_ && a.rank_ == b.rank_ && a.centers_ == b.centers_;
  }

 private:
  int channels_;
  int rank_;
  std::vector<double> centers_;
};

/// Label-indexed running sums of the joint [intensity | coordinate]
/// vectors plus pixel counts. Grows on demand; a zero count implies
/// all-zero sums.
class ClusterAccumulatorMap {
 public:
  explicit ClusterAccumulatorMap(int stride) : stride_(stride) {}

  int stride() const { return stride_; }
  std::int64_t label_count() const { return static_cast<std::int64_t>(counts_.size()); }

  std::int64_t count(std::int64_t label) const {
    return label < label_count() ? counts_[label] : 0;
  }
  std::span<const double> sums(std::int64_t label) const {
    return {sums_.data() + label * stride_, static_cast<std::size_t>(stride_)};
  }

  double* grow_to(std::int64_t label) {
    if (label >= label_count()) {
      counts_.resize(label + 1, 0);
      sums_.resize((label + 1) * stride_, 0.0);
    }
    return sums_.data() + label * stride_;
  }

  void add_count(std::int64_t label) { ++counts_[label]; }

  /// Elementwise merge in ascending label order.
  void merge(const ClusterAccumulatorMap& other) {
    if (other.stride_ != stride_)
      throw std::invalid_argument("ClusterAccumulatorMap: stride mismatch");
    grow_to(other.label_count() - 1);
    for (std::int64_t l = 0; l < other.label_count(); ++l) {
      counts_[l] += other.counts_[l];
      const double* src = other.sums_.data() + l * stride_;
      double* dst = sums_.data() + l * stride_;
      for (int i = 0; i < stride_; ++i) dst[i] += src[i];
    }
  }

 private:
  int stride_;
  std::vector<double> sums_;
  std::vector<std::int64_t> counts_;
};

namespace detail {

// D = d_c^2 + m^2 * sum_i (d_i / S_i)^2, no square roots anywhere.
// Single definition shared by the public entry point and the hot loop so
// the arithmetic sequence is identical everywhere.
inline double squared_distance_raw(const double* center, const double* pixel_value,
                                   const std::int64_t* pixel_coord, int channels, int rank,
                                   const std::int64_t* grid, double m_sq) {
  double color = 0.0;
  for (int c = 0; c < channels; ++c) {
    const double d = center[c] - pixel_value[c];
    color += d * d;
  }
  double spatial = 0.0;
  for (int a = 0; a < rank; ++a) {
    const double d =
        (center[channels + a] - static_cast<double>(pixel_coord[a])) / static_cast<double>(grid[a]);
    spatial += d * d;
  }
  return color + m_sq * spatial;
}

// The [2S_0 x ... x 2S_{n-1}] search window: anchored at the
// nearest-integer center coordinate, extending S_i to both sides.
inline ImageRegion search_window(std::span<const double> center, int channels,
                                 const GridSize& grid, const Shape& dims) {
  ImageRegion w;
  for (int a = 0; a < grid.size(); ++a) {
    const std::int64_t anchor = std::llround(center[channels + a]);
    w.index.push_back(anchor - grid[a]);
    w.size.push_back(2 * grid[a] + 1);
  }
  return clamp_region(w, dims);
}

}  // namespace detail

/// Squared distance between a joint cluster center and a pixel.
inline double squared_distance(std::span<const double> center, std::span<const double> pixel_value,
                               const Coord& pixel_coord, const SlicParams& params) {
  const int rank = pixel_coord.size();
  const int channels = static_cast<int>(pixel_value.size());
  if (static_cast<int>(center.size()) != channels + rank)
    throw std::invalid_argument("squared_distance: center size must be channels + rank");
  if (params.grid.size() != rank)
    throw std::invalid_argument("squared_distance: grid rank mismatch");
  return detail::squared_distance_raw(center.data(), pixel_value.data(), pixel_coord.data(),
                                      channels, rank, params.grid.data(),
                                      params.weight_m * params.weight_m);
}

/// Cluster centers on a regular grid: ceil(dims_i / S_i) cells per axis,
/// each center at its cell center (offset floor(S_i / 2), clamped inside
/// the image), intensity read from the image. Cells are enumerated
/// row-major, first axis fastest.
inline ClusterTable init_centers(const NDImage& img, const SlicParams& params) {
  params.validate(img.dims());
  const int rank = img.rank();
  const Shape& dims = img.dims();

  Shape cells;
  std::int64_t k = 1;
  for (int a = 0; a < rank; ++a) {
    cells.push_back((dims[a] + params.grid[a] - 1) / params.grid[a]);
    k *= cells[a];
  }

  ClusterTable table(img.channels(), rank, k);
  std::int64_t id = 0;
  for (const Coord& cell : region_pixels(ImageRegion{Coord::filled(rank, 0), cells})) {
    Coord coord;
    for (int a = 0; a < rank; ++a)
      coord.push_back(std::min(cell[a] * params.grid[a] + params.grid[a] / 2, dims[a] - 1));
    auto center = table.center(id++);
    const auto value = img.pixel(linear_index(coord, dims));
    for (int c = 0; c < img.channels(); ++c) center[c] = value[c];
    for (int a = 0; a < rank; ++a) center[img.channels() + a] = static_cast<double>(coord[a]);
  }
  return table;
}

/// Moves every center to the minimum of gradient_magnitude_sq within its
/// 3^n neighborhood (clamped at borders) and re-reads the intensity there.
/// Ties break to the first minimum in row-major scan order, so on constant
/// images a center lands on its neighborhood's row-major-first pixel.
inline ClusterTable perturb_centers(const NDImage& img, ClusterTable table, int workers = 1) {
  const int rank = img.rank();
  const int channels = img.channels();
  const Shape& dims = img.dims();

  parallel_for_indices(table.count(), workers, [&](int, std::int64_t k) {
    auto center = table.center(k);
    ImageRegion hood;
    for (int a = 0; a < rank; ++a) {
      hood.index.push_back(std::llround(center[channels + a]) - 1);
      hood.size.push_back(3);
    }
    hood = clamp_region(hood, dims);

    bool first = true;
    double best = 0.0;
    Coord best_coord;
    for (const Coord& c : region_pixels(hood)) {
      const double g = gradient_magnitude_sq(img, c);
      if (first || g < best) {
        first = false;
        best = g;
        best_coord = c;
      }
    }

    const auto value = img.pixel(linear_index(best_coord, dims));
    for (int c = 0; c < channels; ++c) center[c] = value[c];
    for (int a = 0; a < rank; ++a) center[channels + a] = static_cast<double>(best_coord[a]);
  });
  return table;
}

/// One label/distance update pass restricted to `region` (one slab of a
/// disjoint decomposition). For every cluster whose search window
/// intersects the region and every pixel in the intersection, the pixel's
/// label and best distance are updated when the new squared distance is
/// strictly smaller. Lower cluster ids are visited first, so on exact ties
/// the smallest id that reached the pixel first wins and keeps it.
inline void assign_labels(const NDImage& img, const ClusterTable& table, const SlicParams& params,
                          LabelMap& labels, DistanceMap& dists, const ImageRegion& region) {
  const int rank = img.rank();
  const int channels = img.channels();
  const Shape& dims = img.dims();
  const Shape strides = strides_of(dims);
  const double m_sq = params.weight_m * params.weight_m;
  const double* image_data = img.data().data();
  const std::int64_t* grid = params.grid.data();

  for (std::int64_t k = 0; k < table.count(); ++k) {
    const auto center = table.center(k);
    const ImageRegion window =
        intersect_regions(detail::search_window(center, channels, params.grid, dims), region);
    const std::int64_t n = window.pixel_count();
    if (n == 0) continue;

    Coord cur = window.index;
    std::int64_t off = detail::linear_offset(cur, strides);
    for (std::int64_t i = 0; i < n; ++i) {
      const double d = detail::squared_distance_raw(center.data(), image_data + off * channels,
                                                    cur.data(), channels, rank, grid, m_sq);
      if (d < dists[off]) {
        dists[off] = d;
        labels[off] = static_cast<std::uint32_t>(k);
      }
      for (int a = 0; a < rank; ++a) {
        ++cur[a];
        off += strides[a];
        if (cur[a] < window.index[a] + window.size[a]) break;
        cur[a] = window.index[a];
        off -= strides[a] * window.size[a];
      }
    }
  }
}

/// Per-label sums of [intensity | coordinates] and pixel counts over
/// exactly the region's pixels, visited row-major. Every pixel must carry
/// a defined label.
inline ClusterAccumulatorMap accumulate_region(const NDImage& img, const LabelMap& labels,
                                               const ImageRegion& region) {
  const int rank = img.rank();
  const int channels = img.channels();
  const Shape strides = strides_of(img.dims());
  const double* image_data = img.data().data();

  ClusterAccumulatorMap acc(channels + rank);
  const std::int64_t n = region.pixel_count();
  if (n == 0) return acc;

  Coord cur = region.index;
  std::int64_t off = detail::linear_offset(cur, strides);
  for (std::int64_t i = 0; i < n; ++i) {
    const std::uint32_t label = labels[off];
    if (label == LabelMap::kUndefined)
      throw std::logic_error("accumulate_region: pixel with undefined label");
    double* sums = acc.grow_to(label);
    const double* value = image_data + off * channels;
    for (int c = 0; c < channels; ++c) sums[c] += value[c];
    for (int a = 0; a < rank; ++a) sums[channels + a] += static_cast<double>(cur[a]);
    acc.add_count(label);
    for (int a = 0; a < rank; ++a) {
      ++cur[a];
      off += strides[a];
      if (cur[a] < region.index[a] + region.size[a]) break;
      cur[a] = region.index[a];
      off -= strides[a] * region.size[a];
    }
  }
  return acc;
}

/// Merges the per-region accumulators in the given (slab) order, then
/// replaces every center with a positive count by the mean of its
/// accumulated joint vectors. Centers with count zero keep their previous
/// value. Returns the new table and the residual.
inline std::pair<ClusterTable, Residual> reduce_and_update(
    const ClusterTable& table, std::span<const ClusterAccumulatorMap> partials) {
  ClusterAccumulatorMap merged(table.stride());
  for (const ClusterAccumulatorMap& p : partials) merged.merge(p);

  ClusterTable updated = table;
  double residual_sq = 0.0;
  for (std::int64_t k = 0; k < table.count(); ++k) {
    const std::int64_t count = merged.count(k);
    if (count == 0) continue;
    const auto sums = merged.sums(k);
    auto center = updated.center(k);
    const auto old_center = table.center(k);
    for (int i = 0; i < table.stride(); ++i) {
      center[i] = sums[i] / static_cast<double>(count);
      const double delta = center[i] - old_center[i];
      residual_sq += delta * delta;
    }
  }
  return {std::move(updated), std::sqrt(residual_sq)};
}

struct SlicResult {
  LabelMap labels;
  ClusterTable centers;
  std::vector<Residual> residuals;
};

/// Runs the full clustering pipeline (before connectivity enforcement):
/// init, perturb, then up to max_iterations rounds of assignment and
/// cluster update. Termination is on iteration count; residuals are
/// reported for monitoring (and optionally for the early-stop threshold).
inline SlicResult run_slic(const NDImage& img, const SlicParams& params, int workers = 1) {
  params.validate(img.dims());
  if (workers < 1) throw std::invalid_argument("run_slic: workers must be >= 1");

  ClusterTable table = perturb_centers(img, init_centers(img, params), workers);
  LabelMap labels(img.dims());
  DistanceMap dists(img.dims());

  const SlabDecomposition decomp = decompose(img.dims(), params.grid);
  const int iterations = params.iterations_for(img.rank());
  std::vector<Residual> residuals;
  residuals.reserve(iterations);

  for (int iter = 0; iter < iterations; ++iter) {
    parallel_for_slabs(decomp, workers, [&](std::int64_t, const ImageRegion& slab) {
      assign_labels(img, table, params, labels, dists, slab);
    });

    std::vector<ClusterAccumulatorMap> partials(decomp.slab_count(),
                                                ClusterAccumulatorMap(table.stride()));
    parallel_for_slabs(decomp, workers, [&](std::int64_t i, const ImageRegion& slab) {
      partials[i] = accumulate_region(img, labels, slab);
    });

    auto [updated, residual] = reduce_and_update(table, partials);
    table = std::move(updated);
    residuals.push_back(residual);
    if (params.residual_threshold && residual <= *params.residual_threshold) break;
  }

  return SlicResult{std::move(labels), std::move(table), std::move(residuals)};
}

}  // namespace sslic
