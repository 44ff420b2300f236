// Deterministic region decomposition and the fork-join execution contract.
//
// The decomposition is a fixed function of image dims and supergrid size,
// never of the worker count: one slab per supergrid row along the last
// (slowest-varying) axis. Workers pull slab indices from a shared counter;
// per-slab results are collected by slab index, so merged output is
// independent of how work was scheduled. This is what makes every stage of
// the pipeline bitwise reproducible for any worker count.
#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "sslic/image.hpp"

namespace sslic {

/// Pairwise-disjoint slabs covering the full image domain, ordered
/// ascending along the split axis.
struct SlabDecomposition {
  std::vector<ImageRegion> slabs;

  std::int64_t slab_count() const { return static_cast<std::int64_t>(slabs.size()); }
};

/// ceil(dims_last / S_last) slabs split along the last axis.
inline SlabDecomposition decompose(const Shape& dims, const GridSize& grid) {
  const int rank = dims.size();
  const int axis = rank - 1;
  const std::int64_t extent = dims[axis];
  const std::int64_t step = grid[axis];
  SlabDecomposition out;
  for (std::int64_t start = 0; start < extent; start += step) {
    ImageRegion slab{Coord::filled(rank, 0), dims};
    slab.index[axis] = start;
    slab.size[axis] = std::min(step, extent - start);
    out.slabs.push_back(slab);
  }
  return out;
}

namespace detail {

// Pull-based fork-join loop over [0, count). body(worker_id, index).
// worker_id < workers identifies the executing worker so callers can keep
// per-worker scratch. A failing task aborts the phase; the pending error
// with the lowest index is rethrown after the join.
template <class Body>
void pull_loop(std::int64_t count, int workers, Body&& body) {
  if (count <= 0) return;
  if (workers < 1) throw std::invalid_argument("parallel: workers must be >= 1");
  const int used = static_cast<int>(std::min<std::int64_t>(workers, count));

  if (used == 1) {
    for (std::int64_t i = 0; i < count; ++i) body(0, i);
    return;
  }

  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::int64_t error_index = -1;
  std::exception_ptr error;

  auto run = [&](int worker_id) {
    for (;;) {
      const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count || failed.load(std::memory_order_relaxed)) return;
      try {
        body(worker_id, i);
      } catch (...) {
        failed.store(true, std::memory_order_relaxed);
        std::lock_guard<std::mutex> lock(error_mutex);
        if (error_index < 0 || i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(used - 1);
  for (int w = 1; w < used; ++w) pool.emplace_back(run, w);
  run(0);
  for (std::thread& t : pool) t.join();

  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Executes body(slab_index, region) exactly once per slab with up to
/// `workers` threads. Returns after a full join; callers retrieve per-slab
/// results by slab index regardless of execution order.
template <class Body>
void parallel_for_slabs(const SlabDecomposition& decomp, int workers, Body&& body) {
  detail::pull_loop(decomp.slab_count(), workers,
                    [&](int, std::int64_t i) { body(i, decomp.slabs[i]); });
}

/// Executes body(worker_id, index) exactly once per index in [0, count).
template <class Body>
void parallel_for_indices(std::int64_t count, int workers, Body&& body) {
  detail::pull_loop(count, workers, body);
}

}  // namespace sslic
