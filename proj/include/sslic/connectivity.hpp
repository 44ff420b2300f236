// Spatial connectivity enforcement: relabels stray connected components so
// every final label value occupies exactly one face-connected region of
// sufficient size.
//
// Three steps: (1) markers start all-false, (2) in parallel over clusters,
// the component reachable from each cluster's seed is marked final when it
// beats the size threshold, (3) a single-threaded raster sweep gives every
// remaining component a fresh label (big ones) or merges it into an
// adjacent finalized component (small ones).
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sslic/image.hpp"
#include "sslic/parallel.hpp"
#include "sslic/slic.hpp"

namespace sslic {

/// One flag per pixel, true once the label at that pixel is final.
struct MarkerMap {
  Shape dims;
  std::vector<std::uint8_t> flags;

  explicit MarkerMap(Shape d)
      : dims(std::move(d)), flags(static_cast<std::size_t>(pixel_count(dims)), 0) {}
};

/// Components must exceed floor(prod_i S_i / 4) pixels to keep their label.
inline std::int64_t size_threshold(const GridSize& grid) {
  std::int64_t p = 1;
  for (std::int64_t s : grid) p *= s;
  return p / 4;
}

namespace detail {

// Scanline flood fill over face-connected pixels of one label value.
// Appends the component's flat offsets to `out` (unordered). `visited` is
// caller-owned scratch, all-zero on entry; the touched entries are cleared
// again before returning so the buffer can be reused across calls.
inline void scanline_fill(const std::vector<std::uint32_t>& labels, const Shape& dims,
                          const Shape& strides, std::int64_t seed, std::uint32_t label,
                          std::vector<std::uint8_t>& visited, std::vector<std::int64_t>& out) {
  const int rank = dims.size();
  const std::size_t start = out.size();

  std::vector<std::int64_t> stack;
  stack.push_back(seed);
  visited[seed] = 1;

  while (!stack.empty()) {
    const std::int64_t off = stack.back();
    stack.pop_back();
    Coord coord = decode_index(off, dims);

    // Expand the run along axis 0.
    std::int64_t lo = off;
    std::int64_t x0 = coord[0];
    while (x0 > 0 && !visited[lo - 1] && labels[lo - 1] == label) {
      --x0;
      --lo;
      visited[lo] = 1;
    }
    std::int64_t hi = off;
    std::int64_t x1 = coord[0];
    while (x1 + 1 < dims[0] && !visited[hi + 1] && labels[hi + 1] == label) {
      ++x1;
      ++hi;
      visited[hi] = 1;
    }

    for (std::int64_t o = lo; o <= hi; ++o) {
      out.push_back(o);
      for (int a = 1; a < rank; ++a) {
        if (coord[a] > 0) {
          const std::int64_t n = o - strides[a];
          if (!visited[n] && labels[n] == label) {
            visited[n] = 1;
            stack.push_back(n);
          }
        }
        if (coord[a] + 1 < dims[a]) {
          const std::int64_t n = o + strides[a];
          if (!visited[n] && labels[n] == label) {
            visited[n] = 1;
            stack.push_back(n);
          }
        }
      }
    }
  }

  for (std::size_t i = start; i < out.size(); ++i) visited[out[i]] = 0;
}

}  // namespace detail

/// Face-connected (2n-neighbor) component of `label` containing `seed`,
/// as flat offsets in ascending order.
inline std::vector<std::int64_t> flood_fill(const LabelMap& labels, const Coord& seed,
                                            std::uint32_t label) {
  const std::int64_t seed_off = linear_index(seed, labels.dims());
  if (labels[seed_off] != label)
    throw std::invalid_argument("flood_fill: seed does not carry the requested label");

  std::vector<std::uint8_t> visited(labels.pixel_count(), 0);
  std::vector<std::int64_t> out;
  detail::scanline_fill(labels.data(), labels.dims(), strides_of(labels.dims()), seed_off, label,
                        visited, out);
  std::sort(out.begin(), out.end());
  return out;
}

/// For each cluster k: seed at the rounded center coordinate if it still
/// carries label k, otherwise at the row-major-first occurrence of k in the
/// [S_0 x ... x S_{n-1}] neighborhood centered there. When a seed is found
/// and its component exceeds the size threshold, all its pixels are marked
/// final. Clusters without a seed are left unmarked. Runs in parallel over
/// clusters; components of distinct clusters are disjoint pixel sets.
inline void finalize_cluster_components(const LabelMap& labels, const ClusterTable& table,
                                        const SlicParams& params, MarkerMap& markers,
                                        int workers = 1) {
  const Shape& dims = labels.dims();
  const Shape strides = strides_of(dims);
  const int rank = dims.size();
  const int channels = table.channels();
  const std::int64_t min_size = size_threshold(params.grid);

  const int buffer_count = std::max(workers, 1);
  std::vector<std::vector<std::uint8_t>> visited(buffer_count);
  std::vector<std::vector<std::int64_t>> component(buffer_count);

  parallel_for_indices(table.count(), workers, [&](int worker, std::int64_t k) {
    if (visited[worker].empty()) visited[worker].assign(labels.pixel_count(), 0);

    const auto center = table.center(k);
    Coord anchor;
    for (int a = 0; a < rank; ++a)
      anchor.push_back(
          std::clamp<std::int64_t>(std::llround(center[channels + a]), 0, dims[a] - 1));

    std::int64_t seed = -1;
    if (labels.at(anchor) == static_cast<std::uint32_t>(k)) {
      seed = linear_index(anchor, dims);
    } else {
      ImageRegion hood;
      for (int a = 0; a < rank; ++a) {
        hood.index.push_back(anchor[a] - params.grid[a] / 2);
        hood.size.push_back(params.grid[a]);
      }
      hood = clamp_region(hood, dims);
      for (const Coord& c : region_pixels(hood)) {
        const std::int64_t off = detail::linear_offset(c, strides);
        if (labels[off] == static_cast<std::uint32_t>(k)) {
          seed = off;
          break;
        }
      }
    }
    if (seed < 0) return;

    component[worker].clear();
    detail::scanline_fill(labels.data(), dims, strides, seed, static_cast<std::uint32_t>(k),
                          visited[worker], component[worker]);
    if (static_cast<std::int64_t>(component[worker].size()) > min_size)
      for (std::int64_t off : component[worker]) markers.flags[off] = 1;
  });
}

/// Single-threaded raster sweep over the marker map. Each still-unfinalized
/// component either receives the next fresh label (size strictly above
/// min_size) or is merged into the most recently scanned finalized pixel
/// among those face-adjacent to it, which keeps every surviving label one
/// connected region. A component with no finalized neighbor at all adopts
/// an adjacent pending label and is re-examined when the sweep reaches the
/// merged component. Returns the next unused label id.
inline std::uint32_t sweep_relabel(LabelMap& labels, MarkerMap& markers, std::int64_t min_size,
                                   std::uint32_t k_start) {
  const Shape& dims = labels.dims();
  const Shape strides = strides_of(dims);
  const int rank = dims.size();
  const std::int64_t n = labels.pixel_count();

  std::vector<std::uint8_t> visited(n, 0);
  std::vector<std::int64_t> component;
  std::uint32_t next_label = k_start;

  for (std::int64_t off = 0; off < n; ++off) {
    if (markers.flags[off]) continue;
    const std::uint32_t label = labels[off];

    component.clear();
    detail::scanline_fill(labels.data(), dims, strides, off, label, visited, component);

    if (static_cast<std::int64_t>(component.size()) > min_size) {
      for (std::int64_t o : component) {
        labels[o] = next_label;
        markers.flags[o] = 1;
      }
      ++next_label;
      continue;
    }

    // Scan the component's face neighbors for merge targets.
    std::int64_t best_before = -1;       // finalized, already scanned
    std::int64_t best_after = -1;        // finalized ahead of the sweep
    std::int64_t best_pending = -1;      // not finalized yet
    std::uint32_t label_before = 0, label_after = 0, label_pending = 0;
    for (std::int64_t o : component) {
      const Coord coord = decode_index(o, dims);
      for (int a = 0; a < rank; ++a) {
        for (int dir = -1; dir <= 1; dir += 2) {
          const std::int64_t c = coord[a] + dir;
          if (c < 0 || c >= dims[a]) continue;
          const std::int64_t adj = o + dir * strides[a];
          if (labels[adj] == label) continue;
          if (markers.flags[adj]) {
            if (adj < off) {
              if (adj > best_before) {
                best_before = adj;
                label_before = labels[adj];
              }
            } else if (best_after < 0 || adj < best_after) {
              best_after = adj;
              label_after = labels[adj];
            }
          } else if (best_pending < 0 || adj < best_pending) {
            best_pending = adj;
            label_pending = labels[adj];
          }
        }
      }
    }

    if (best_before >= 0 || best_after >= 0) {
      const std::uint32_t target = best_before >= 0 ? label_before : label_after;
      for (std::int64_t o : component) {
        labels[o] = target;
        markers.flags[o] = 1;
      }
    } else if (best_pending >= 0) {
      // No finalized neighbor exists yet; adopt the pending neighbor's
      // label and leave the merged component for a later scan position.
      for (std::int64_t o : component) labels[o] = label_pending;
    } else {
      // Isolated whole-image component; cannot be below min_size unless it
      // is the entire domain, which the fresh-label branch already took.
      for (std::int64_t o : component) {
        labels[o] = next_label;
        markers.flags[o] = 1;
      }
      ++next_label;
    }
  }
  return next_label;
}

/// Full stage-3 pipeline. The result assigns every label value exactly one
/// face-connected component; applying it twice equals applying it once.
inline LabelMap enforce_connectivity(const LabelMap& labels, const ClusterTable& table,
                                     const SlicParams& params, int workers = 1) {
  LabelMap out = labels;
  MarkerMap markers(out.dims());
  finalize_cluster_components(out, table, params, markers, workers);
  sweep_relabel(out, markers, size_threshold(params.grid),
                static_cast<std::uint32_t>(table.count()));
  return out;
}

}  // namespace sslic
