// Acceptance suite: runs every gate criterion end to end and prints one
// PASS/FAIL line per criterion. Exits nonzero if any criterion fails.
//
// Criterion 4 is hardware-qualified: its speedup thresholds apply on
// machines with at least 4 physical cores. On smaller machines the study
// still runs (with the worker counts the machine supports) and the
// threshold check reports SKIP; the measured numbers are printed either
// way and still feed the Amdahl consistency check of criterion 5.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sslic/sslic.hpp"
#include "support/oracles.hpp"

using namespace sslic;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  enum Kind { kPass, kFail, kSkip } kind = kPass;
  std::string detail;
};

Outcome pass(std::string detail = "") { return {Outcome::kPass, std::move(detail)}; }
Outcome fail(std::string detail) { return {Outcome::kFail, std::move(detail)}; }
Outcome skip(std::string detail) { return {Outcome::kSkip, std::move(detail)}; }

int physical_cores() {
  std::ifstream cpuinfo("/proc/cpuinfo");
  std::set<std::pair<int, int>> cores;
  int physical_id = -1;
  std::string line;
  while (std::getline(cpuinfo, line)) {
    if (line.rfind("physical id", 0) == 0)
      physical_id = std::atoi(line.substr(line.find(':') + 1).c_str());
    else if (line.rfind("core id", 0) == 0)
      cores.emplace(physical_id, std::atoi(line.substr(line.find(':') + 1).c_str()));
  }
  if (!cores.empty()) return static_cast<int>(cores.size());
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

fs::path work_dir() {
  fs::path d = fs::temp_directory_path() / "sslic_acceptance";
  fs::create_directories(d);
  return d;
}

// ---- shared randomized corpus for criteria 1 and 2 ----

struct CorpusCase {
  NDImage img;
  SlicParams params;
};

std::vector<CorpusCase> make_corpus(int count) {
  std::mt19937_64 rng(0x55110C);
  std::vector<CorpusCase> corpus;
  corpus.reserve(count);
  for (int i = 0; i < count; ++i) {
    const int rank = std::uniform_int_distribution<int>(1, 3)(rng);
    const int channels = rng() % 2 == 0 ? 1 : 3;
    NDImage img = oracle::random_image(rng, rank, 24, channels);
    SlicParams params;
    params.grid = oracle::random_grid(rng, img.dims());
    params.weight_m = oracle::random_weight(rng);
    corpus.push_back(CorpusCase{std::move(img), params});
  }
  return corpus;
}

const std::vector<CorpusCase>& corpus() {
  static std::vector<CorpusCase> c = make_corpus(200);
  return c;
}

// ---- criterion implementations ----

Outcome criterion1_oracle_equivalence() {
  int checked = 0;
  for (const CorpusCase& c : corpus()) {
    oracle::RefParams ref;
    for (std::int64_t s : c.params.grid) ref.grid.push_back(s);
    ref.weight_m = c.params.weight_m;
    const std::vector<std::uint32_t> expected = oracle::reference_slic_labels(c.img, ref);

    for (int workers : {1, 2, 4, 8}) {
      const SlicResult result = run_slic(c.img, c.params, workers);
      if (result.labels.data() != expected)
        return fail("case " + std::to_string(checked) + ", workers " + std::to_string(workers) +
                    ": label map differs from the sequential reference");
    }
    ++checked;
  }
  return pass(std::to_string(checked) + " randomized cases, workers {1,2,4,8}, bitwise equal");
}

Outcome criterion2_connectivity_postcondition() {
  int components_checked = 0;
  for (std::size_t i = 0; i < corpus().size(); ++i) {
    const CorpusCase& c = corpus()[i];
    const SlicResult result = run_slic(c.img, c.params, 1);
    const LabelMap out = enforce_connectivity(result.labels, result.centers, c.params, 2);

    const auto analysis = oracle::analyze_components(out.data(), out.dims());
    const std::int64_t min_size = size_threshold(c.params.grid);
    for (const auto& [label, roots] : analysis.roots_per_label) {
      if (roots.size() != 1)
        return fail("case " + std::to_string(i) + ": label " + std::to_string(label) + " has " +
                    std::to_string(roots.size()) + " components");
      if (label >= result.centers.count()) {
        for (std::int64_t root : roots)
          if (analysis.component_size.at(root) <= min_size)
            return fail("case " + std::to_string(i) + ": fresh label " + std::to_string(label) +
                        " has size " + std::to_string(analysis.component_size.at(root)) +
                        " <= " + std::to_string(min_size));
      }
      ++components_checked;
    }
  }
  return pass(std::to_string(corpus().size()) + " cases, " +
              std::to_string(components_checked) + " label values, zero violations");
}

Outcome criterion3_published_arithmetic() {
  struct Row {
    double t1, tp;
    int p;
    double speedup, efficiency;
  };
  const Row rows[] = {
      {7609.695, 3798.146, 2, 2.004, 1.002},
      {7609.695, 263.890, 44, 28.837, 0.655},
      {7609.695, 229.544, 88, 33.151, 0.377},
  };
  for (const Row& r : rows) {
    const double s = relative_speedup(r.t1, r.tp);
    const double e = relative_efficiency(s, r.p);
    if (std::abs(s - r.speedup) > 0.001)
      return fail("speedup for p=" + std::to_string(r.p) + " is " + std::to_string(s));
    if (std::abs(e - r.efficiency) > 0.001)
      return fail("efficiency for p=" + std::to_string(r.p) + " is " + std::to_string(e));
  }
  const double s88 = relative_speedup(8408.861, 328.298);
  if (std::abs(s88 - 25.614) > 0.001)
    return fail("with-connectivity speedup for p=88 is " + std::to_string(s88));
  return pass("published speedup/efficiency values reproduced within 0.001");
}

// Shared between criteria 4 and 5.
struct ScalingState {
  ScalingReport report;
  std::vector<int> workers;
  bool qualified = false;
  double elapsed_seconds = 0.0;
};

ScalingState& scaling_state() {
  static ScalingState state;
  return state;
}

NDImage synthetic_photo(std::int64_t w, std::int64_t h) {
  NDImage img = NDImage::zeros(Shape{w, h}, 3);
  for (const Coord& c : region_pixels(img.full_region())) {
    const double x = static_cast<double>(c[0]) / static_cast<double>(w);
    const double y = static_cast<double>(c[1]) / static_cast<double>(h);
    double r = 90.0 + 110.0 * x + 18.0 * std::sin(14.0 * x + 3.0 * y);
    double g = 120.0 + 80.0 * y + 14.0 * std::sin(10.0 * y) * std::cos(6.0 * x);
    double b = 160.0 - 70.0 * x + 22.0 * std::cos(8.0 * (x + y));
    // a few colored disks for feature boundaries
    const double cx[3] = {0.3, 0.7, 0.55};
    const double cy[3] = {0.35, 0.25, 0.75};
    const double cr[3] = {0.18, 0.12, 0.2};
    const double shift[3][3] = {{70, -40, -60}, {-50, 60, 10}, {-30, -30, 70}};
    for (int d = 0; d < 3; ++d) {
      const double dist = std::hypot(x - cx[d], y - cy[d]);
      if (dist < cr[d]) {
        r += shift[d][0];
        g += shift[d][1];
        b += shift[d][2];
      }
    }
    img.at(c, 0) = std::clamp(std::round(r), 0.0, 255.0);
    img.at(c, 1) = std::clamp(std::round(g), 0.0, 255.0);
    img.at(c, 2) = std::clamp(std::round(b), 0.0, 255.0);
  }
  return img;
}

Outcome criterion4_desk_scale_scaling() {
  ScalingState& state = scaling_state();
  const int cores = physical_cores();
  state.qualified = cores >= 4;

  state.workers = {1, 2};
  if (state.qualified) state.workers.push_back(4);

  const NDImage photo = synthetic_photo(2048, 1216);
  SlicParams params;
  params.grid = GridSize{50, 50};
  params.weight_m = 10.0;
  params.max_iterations = 5;

  const auto start = std::chrono::steady_clock::now();
  state.report = run_scaling_study(photo, params, state.workers, 5, true);
  state.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::ostringstream measured;
  measured.precision(3);
  measured << std::fixed;
  double s2 = 0.0, s4 = 0.0;
  for (std::size_t i = 0; i < state.report.records.size(); ++i) {
    const TimingRecord& r = state.report.records[i];
    if (r.with_connectivity) continue;
    measured << " S(" << r.workers << ")=" << state.report.speedups[i];
    if (r.workers == 2) s2 = state.report.speedups[i];
    if (r.workers == 4) s4 = state.report.speedups[i];
  }
  measured << ", " << state.elapsed_seconds << "s";

  if (state.elapsed_seconds >= 120.0)
    return fail("study exceeded the 2 minute budget:" + measured.str());
  if (!state.qualified)
    return skip("machine has " + std::to_string(cores) +
                " physical cores (< 4); thresholds not applicable, measured:" + measured.str());
  if (s2 < 1.6) return fail("S(2) = " + std::to_string(s2) + " < 1.6");
  if (s4 < 2.6) return fail("S(4) = " + std::to_string(s4) + " < 2.6");
  return pass("S(2) >= 1.6 and S(4) >= 2.6 on " + std::to_string(cores) +
              " physical cores;" + measured.str());
}

Outcome criterion5_amdahl_fit() {
  // exact recovery on model-generated timings
  for (double alpha : {0.0, 0.05, 0.1, 0.5, 1.0}) {
    std::vector<TimingRecord> records;
    for (int p : {1, 2, 4, 8, 16})
      records.push_back({p, 100.0 * (alpha + (1.0 - alpha) / p), false});
    const double fitted = fit_alpha(records);
    if (std::abs(fitted - alpha) > 1e-6)
      return fail("alpha " + std::to_string(alpha) + " recovered as " + std::to_string(fitted));
  }

  // measured data from criterion 4 must respect its own fitted bound
  const ScalingState& state = scaling_state();
  if (state.report.records.empty())
    return fail("criterion 4 produced no measurements to validate");

  std::vector<TimingRecord> primary;
  for (const TimingRecord& r : state.report.records)
    if (!r.with_connectivity) primary.push_back(r);
  const double fitted = fit_alpha(primary);

  std::ostringstream detail;
  detail.precision(4);
  detail << std::fixed << "model recovery exact; measured fit alpha = " << fitted;
  for (const TimingRecord& r : primary) {
    const double s = relative_speedup(primary[0].time_seconds, r.time_seconds);
    const double bound = amdahl_bound(fitted, r.workers);
    if (s > bound * 1.05)
      return fail("S(" + std::to_string(r.workers) + ") = " + std::to_string(s) +
                  " exceeds the fitted bound " + std::to_string(bound) + " by more than 5%");
  }
  return pass(detail.str());
}

Outcome criterion6_uniform_geometry() {
  NDImage img = NDImage::zeros(Shape{100, 100}, 1);
  for (double& v : img.data()) v = 42.0;

  SlicParams params;
  params.grid = GridSize{50, 50};
  const SlicResult result = run_slic(img, params, 1);
  const LabelMap out = enforce_connectivity(result.labels, result.centers, params);

  for (const Coord& c : region_pixels(img.full_region())) {
    const std::uint32_t expected =
        static_cast<std::uint32_t>((c[0] < 50 ? 0 : 1) + (c[1] < 50 ? 0 : 2));
    if (out.at(c) != expected)
      return fail("pixel (" + std::to_string(c[0]) + "," + std::to_string(c[1]) + ") has label " +
                  std::to_string(out.at(c)) + ", expected " + std::to_string(expected));
  }
  return pass("labels form the 4 axis-aligned 50x50 init cells exactly");
}

Outcome criterion7_qualitative_harness() {
  const fs::path dir = work_dir();
  const fs::path photo = dir / "photo.png";
  const fs::path labels = dir / "photo_labels.hdr";
  const fs::path overlay = dir / "photo_contour.png";

  write_volume(photo, synthetic_photo(512, 512));

  const std::string segment = std::string(SSLIC_CLI_PATH) + " segment --in " + photo.string() +
                              " --out " + labels.string() +
                              " --grid 32,32 --weight 10 --iters 10 --lab-convert" +
                              " >/dev/null 2>&1";
  int status = std::system(segment.c_str());
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
    return fail("segment exited with " + std::to_string(WEXITSTATUS(status)));

  const std::string contour = std::string(SSLIC_CLI_PATH) + " contour --in " + photo.string() +
                              " --labels " + labels.string() + " --out " + overlay.string() +
                              " >/dev/null 2>&1";
  status = std::system(contour.c_str());
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
    return fail("contour exited with " + std::to_string(WEXITSTATUS(status)));
  if (!fs::exists(overlay) || fs::file_size(overlay) == 0)
    return fail("contour overlay was not written");

  const LabelMap result = read_labels(labels);
  std::set<std::uint32_t> distinct;
  for (std::int64_t i = 0; i < result.pixel_count(); ++i) distinct.insert(result[i]);
  const auto count = static_cast<std::int64_t>(distinct.size());
  if (count < 180 || count > 340)
    return fail("superpixel count " + std::to_string(count) + " outside [180, 340]");
  return pass("segment+contour completed; " + std::to_string(count) +
              " superpixels for nominal 256");
}

// ---- criterion 8: the per-module invariant suites, 1000 cases each ----

Outcome suite_index_roundtrip() {
  std::mt19937_64 rng(81);
  for (int trial = 0; trial < 1000; ++trial) {
    const int rank = std::uniform_int_distribution<int>(1, 4)(rng);
    Shape dims;
    for (int a = 0; a < rank; ++a)
      dims.push_back(std::uniform_int_distribution<std::int64_t>(1, 16)(rng));
    const std::int64_t off =
        std::uniform_int_distribution<std::int64_t>(0, pixel_count(dims) - 1)(rng);
    if (linear_index(decode_index(off, dims), dims) != off)
      return fail("index round-trip broke at trial " + std::to_string(trial));
  }
  return pass();
}

Outcome suite_clamp_idempotent() {
  std::mt19937_64 rng(82);
  for (int trial = 0; trial < 1000; ++trial) {
    const int rank = std::uniform_int_distribution<int>(1, 4)(rng);
    Shape dims;
    ImageRegion r;
    for (int a = 0; a < rank; ++a) {
      dims.push_back(std::uniform_int_distribution<std::int64_t>(1, 24)(rng));
      r.index.push_back(std::uniform_int_distribution<std::int64_t>(-40, 40)(rng));
      r.size.push_back(std::uniform_int_distribution<std::int64_t>(0, 50)(rng));
    }
    const ImageRegion once = clamp_region(r, dims);
    if (!(clamp_region(once, dims) == once))
      return fail("clamp idempotence broke at trial " + std::to_string(trial));
    std::int64_t count = 0;
    for ([[maybe_unused]] const Coord& c : region_pixels(once)) ++count;
    if (count != once.pixel_count())
      return fail("region pixel count broke at trial " + std::to_string(trial));
  }
  return pass();
}

Outcome suite_distance_laws() {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 1000; ++trial) {
    const int rank = std::uniform_int_distribution<int>(1, 4)(rng);
    const int channels = std::uniform_int_distribution<int>(1, 4)(rng);
    SlicParams params;
    Coord coord;
    std::vector<double> center, pixel;
    std::uniform_real_distribution<double> val(-100.0, 100.0);
    for (int a = 0; a < rank; ++a) {
      params.grid.push_back(std::uniform_int_distribution<std::int64_t>(1, 12)(rng));
      coord.push_back(std::uniform_int_distribution<std::int64_t>(0, 30)(rng));
    }
    for (int c = 0; c < channels; ++c) {
      center.push_back(val(rng));
      pixel.push_back(val(rng));
    }
    for (int a = 0; a < rank; ++a) center.push_back(val(rng));
    params.weight_m = oracle::random_weight(rng);

    const double base = squared_distance(center, pixel, coord, params);
    if (!(base >= 0.0)) return fail("negative distance at trial " + std::to_string(trial));

    SlicParams tiny = params;
    tiny.weight_m = 1e-300;
    const double color = squared_distance(center, pixel, coord, tiny);
    const double spatial = base - color;

    const double lambda = 3.0;
    SlicParams scaled = params;
    scaled.weight_m = params.weight_m * lambda;
    const double after = squared_distance(center, pixel, coord, scaled);
    if (std::abs((after - color) - lambda * lambda * spatial) >
        1e-9 * (1.0 + std::abs(spatial) * lambda * lambda))
      return fail("weight scaling law broke at trial " + std::to_string(trial));

    // identity of indiscernibles at the center itself
    std::vector<double> self(center.begin(), center.begin() + channels);
    Coord self_coord;
    for (int a = 0; a < rank; ++a) self_coord.push_back(std::llround(center[channels + a]));
    std::vector<double> exact_center = center;
    for (int a = 0; a < rank; ++a)
      exact_center[channels + a] = static_cast<double>(self_coord[a]);
    if (squared_distance(exact_center, self, self_coord, params) != 0.0)
      return fail("zero-distance identity broke at trial " + std::to_string(trial));
  }
  return pass();
}

Outcome suite_monotone_distance() {
  std::mt19937_64 rng(84);
  for (int trial = 0; trial < 1000; ++trial) {
    const int rank = std::uniform_int_distribution<int>(1, 2)(rng);
    const NDImage img = oracle::random_image(rng, rank, 10, 1);
    SlicParams params;
    params.grid = oracle::random_grid(rng, img.dims());

    ClusterTable table = perturb_centers(img, init_centers(img, params));
    LabelMap labels(img.dims());
    DistanceMap dists(img.dims());
    const SlabDecomposition d = decompose(img.dims(), params.grid);

    std::vector<double> previous(dists.data());
    for (int iter = 0; iter < 4; ++iter) {
      for (const ImageRegion& slab : d.slabs)
        assign_labels(img, table, params, labels, dists, slab);
      for (std::int64_t i = 0; i < dists.pixel_count(); ++i)
        if (dists[i] > previous[i])
          return fail("distance increased at trial " + std::to_string(trial));
      previous = dists.data();

      std::vector<ClusterAccumulatorMap> partials;
      for (const ImageRegion& slab : d.slabs)
        partials.push_back(accumulate_region(img, labels, slab));
      table = reduce_and_update(table, partials).first;
    }
  }
  return pass();
}

Outcome suite_accumulation_merge() {
  std::mt19937_64 rng(85);
  for (int trial = 0; trial < 1000; ++trial) {
    const int rank = std::uniform_int_distribution<int>(1, 3)(rng);
    const int channels = std::uniform_int_distribution<int>(1, 3)(rng);
    const NDImage img = oracle::random_image(rng, rank, 6, channels);
    LabelMap labels(img.dims());
    std::uniform_int_distribution<std::uint32_t> lab(0, 4);
    for (std::int64_t i = 0; i < labels.pixel_count(); ++i) labels[i] = lab(rng);

    const GridSize grid = oracle::random_grid(rng, img.dims());
    ClusterAccumulatorMap merged(channels + rank);
    for (const ImageRegion& slab : decompose(img.dims(), grid).slabs)
      merged.merge(accumulate_region(img, labels, slab));
    const ClusterAccumulatorMap whole = accumulate_region(img, labels, img.full_region());

    if (merged.label_count() != whole.label_count())
      return fail("merge label count broke at trial " + std::to_string(trial));
    for (std::int64_t l = 0; l < whole.label_count(); ++l) {
      if (merged.count(l) != whole.count(l))
        return fail("merge count broke at trial " + std::to_string(trial));
      for (int i = 0; i < whole.stride(); ++i)
        if (merged.sums(l)[i] != whole.sums(l)[i])
          return fail("merge sums broke at trial " + std::to_string(trial));
    }
  }
  return pass();
}

Outcome suite_format_roundtrip() {
  const fs::path dir = work_dir();
  std::mt19937_64 rng(86);
  for (int trial = 0; trial < 1000; ++trial) {
    if (trial % 2 == 0) {
      const int rank = std::uniform_int_distribution<int>(1, 3)(rng);
      const int channels = std::uniform_int_distribution<int>(1, 3)(rng);
      const NDImage img = oracle::random_image(rng, rank, 5, channels);
      write_volume(dir / "suite.hdr", img);
      const NDImage back = read_volume(dir / "suite.hdr");
      if (!(back.dims() == img.dims()) || back.channels() != img.channels() ||
          back.data() != img.data())
        return fail("volume round-trip broke at trial " + std::to_string(trial));
    } else {
      const int rank = std::uniform_int_distribution<int>(1, 3)(rng);
      Shape dims;
      for (int a = 0; a < rank; ++a)
        dims.push_back(std::uniform_int_distribution<std::int64_t>(1, 5)(rng));
      LabelMap labels(dims);
      std::uniform_int_distribution<std::uint32_t> lab(0, 1u << 20);
      for (std::int64_t i = 0; i < labels.pixel_count(); ++i) labels[i] = lab(rng);
      write_labels(dir / "suite_labels.hdr", labels);
      if (!(read_labels(dir / "suite_labels.hdr") == labels))
        return fail("label round-trip broke at trial " + std::to_string(trial));
    }
  }
  return pass();
}

Outcome criterion8_invariant_suites() {
  const std::pair<const char*, std::function<Outcome()>> suites[] = {
      {"index round-trip", suite_index_roundtrip},
      {"clamp idempotence", suite_clamp_idempotent},
      {"distance laws", suite_distance_laws},
      {"monotone distance", suite_monotone_distance},
      {"accumulation merge", suite_accumulation_merge},
      {"format round-trip", suite_format_roundtrip},
  };
  for (const auto& [name, fn] : suites) {
    const Outcome o = fn();
    if (o.kind == Outcome::kFail) return fail(std::string(name) + ": " + o.detail);
  }
  return pass("6 invariant suites, 1000 cases each");
}

}  // namespace

int main() {
  const std::pair<std::string, std::function<Outcome()>> criteria[] = {
      {"1. oracle equivalence across worker counts", criterion1_oracle_equivalence},
      {"2. connectivity post-condition", criterion2_connectivity_postcondition},
      {"3. published speedup/efficiency arithmetic", criterion3_published_arithmetic},
      {"4. desk-scale strong scaling", criterion4_desk_scale_scaling},
      {"5. Amdahl fit recovery and bound consistency", criterion5_amdahl_fit},
      {"6. uniform-image grid geometry", criterion6_uniform_geometry},
      {"7. qualitative parity harness (segment + contour)", criterion7_qualitative_harness},
      {"8. per-module invariant suites", criterion8_invariant_suites},
  };

  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome outcome;
    try {
      outcome = fn();
    } catch (const std::exception& e) {
      outcome = fail(std::string("unexpected exception: ") + e.what());
    }
    const char* tag = outcome.kind == Outcome::kPass   ? "PASS"
                      : outcome.kind == Outcome::kSkip ? "SKIP"
                                                       : "FAIL";
    std::cout << tag << "  " << name;
    if (!outcome.detail.empty()) std::cout << " -- " << outcome.detail;
    std::cout << '\n';
    if (outcome.kind == Outcome::kFail) ++failures;
  }

  if (failures > 0) std::cout << failures << " criterion(s) failed\n";
  return failures == 0 ? 0 : 1;
}
