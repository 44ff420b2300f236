// Strong-scaling measurement and analysis: wall-clock timings over worker
// counts, relative speedup/efficiency, and a least-squares serial-fraction
// fit against the T(p) = T(1) * (alpha + (1 - alpha) / p) model.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sslic/connectivity.hpp"
#include "sslic/slic.hpp"

namespace sslic {

/// One measured configuration: the minimum wall time over r repetitions.
struct TimingRecord {
  int workers = 1;
  double time_seconds = 0.0;
  bool with_connectivity = false;

  friend bool operator==(const TimingRecord&, const TimingRecord&) = default;
};

/// Timing records plus the derived speedups S(p) = T(1)/T(p), efficiencies
/// E(p) = S(p)/p (aligned with records), and the fitted serial fraction.
struct ScalingReport {
  std::vector<TimingRecord> records;
  std::vector<double> speedups;
  std::vector<double> efficiencies;
  double alpha = 0.0;

  friend bool operator==(const ScalingReport&, const ScalingReport&) = default;
};

inline double relative_speedup(double t1, double tp) {
  if (!(t1 > 0.0) || !(tp > 0.0))
    throw std::invalid_argument("relative_speedup: times must be positive");
  return t1 / tp;
}

inline double relative_efficiency(double speedup, int p) {
  if (p < 1) throw std::invalid_argument("relative_efficiency: p must be >= 1");
  return speedup / static_cast<double>(p);
}

/// Amdahl upper bound on relative speedup for serial fraction alpha.
inline double amdahl_bound(double alpha, int p) {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("amdahl_bound: alpha outside [0,1]");
  if (p < 1) throw std::invalid_argument("amdahl_bound: p must be >= 1");
  return 1.0 / (alpha + (1.0 - alpha) / static_cast<double>(p));
}

/// Matching upper bound on relative efficiency: 1 / (1 + alpha (p - 1)).
inline double amdahl_efficiency_bound(double alpha, int p) {
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("amdahl_efficiency_bound: alpha outside [0,1]");
  if (p < 1) throw std::invalid_argument("amdahl_efficiency_bound: p must be >= 1");
  return 1.0 / (1.0 + alpha * static_cast<double>(p - 1));
}

/// Least-squares fit of the serial fraction from measured timings. With
/// x_p = 1 - 1/p and y_p = T(p)/T(1) - 1/p the model is y = alpha * x;
/// the fit is clamped to [0, 1]. Requires at least two distinct worker
/// counts including p = 1. Scale-invariant in the times.
inline double fit_alpha(const std::vector<TimingRecord>& records) {
  double t1 = 0.0;
  for (const TimingRecord& r : records)
    if (r.workers == 1) t1 = r.time_seconds;
  if (!(t1 > 0.0)) throw std::invalid_argument("fit_alpha: need a record with p = 1");

  double sxx = 0.0;
  double sxy = 0.0;
  int distinct_above_one = 0;
  for (const TimingRecord& r : records) {
    if (r.workers < 1 || !(r.time_seconds > 0.0))
      throw std::invalid_argument("fit_alpha: invalid record");
    const double inv_p = 1.0 / static_cast<double>(r.workers);
    const double x = 1.0 - inv_p;
    const double y = r.time_seconds / t1 - inv_p;
    sxx += x * x;
    sxy += x * y;
    if (r.workers > 1) ++distinct_above_one;
  }
  if (distinct_above_one == 0)
    throw std::invalid_argument("fit_alpha: need at least two distinct worker counts");
  return std::clamp(sxy / sxx, 0.0, 1.0);
}

namespace detail {

// Derives speedups/efficiencies per series (shared with/without flag) and
// fits alpha on the without-connectivity series when present.
inline ScalingReport make_report(std::vector<TimingRecord> records) {
  ScalingReport report;
  report.records = std::move(records);

  double t1[2] = {0.0, 0.0};
  for (const TimingRecord& r : report.records)
    if (r.workers == 1) t1[r.with_connectivity ? 1 : 0] = r.time_seconds;

  for (const TimingRecord& r : report.records) {
    const double base = t1[r.with_connectivity ? 1 : 0];
    const double s = relative_speedup(base, r.time_seconds);
    report.speedups.push_back(s);
    report.efficiencies.push_back(relative_efficiency(s, r.workers));
  }

  std::vector<TimingRecord> primary;
  for (const TimingRecord& r : report.records)
    if (!r.with_connectivity) primary.push_back(r);
  if (primary.empty())
    for (const TimingRecord& r : report.records) primary.push_back(r);
  bool fittable = false;
  for (const TimingRecord& r : primary) fittable = fittable || r.workers > 1;
  // A single-point study carries no scaling information; report the fully
  // serial fraction rather than inventing one.
  report.alpha = fittable ? fit_alpha(primary) : 1.0;
  return report;
}

}  // namespace detail

/// Runs the full pipeline r times per worker count and records the minimum
/// wall time (monotonic clock). With measure_connectivity, two series are
/// produced: without and with the connectivity enforcement step. Otherwise
/// a single series follows params.enforce_connectivity. The worker list
/// must contain 1, the baseline of the relative metrics.
inline ScalingReport run_scaling_study(const NDImage& img, const SlicParams& base_params,
                                       const std::vector<int>& worker_list, int repetitions,
                                       bool measure_connectivity) {
  if (repetitions < 1) throw std::invalid_argument("run_scaling_study: repetitions must be >= 1");
  bool has_one = false;
  for (int p : worker_list) has_one = has_one || p == 1;
  if (!has_one) throw std::invalid_argument("run_scaling_study: worker list must contain 1");

  std::vector<bool> variants;
  if (measure_connectivity)
    variants = {false, true};
  else
    variants = {base_params.enforce_connectivity};

  std::vector<TimingRecord> records;
  for (bool with_connectivity : variants) {
    for (int p : worker_list) {
      double best = std::numeric_limits<double>::infinity();
      for (int rep = 0; rep < repetitions; ++rep) {
        const auto start = std::chrono::steady_clock::now();
        // Timed scope: parameter setup plus the segmentation call.
        SlicParams params = base_params;
        params.enforce_connectivity = with_connectivity;
        SlicResult result = run_slic(img, params, p);
        if (with_connectivity)
          enforce_connectivity(result.labels, result.centers, params, p);
        const auto stop = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(stop - start).count());
      }
      records.push_back(TimingRecord{p, best, with_connectivity});
    }
  }
  return detail::make_report(std::move(records));
}

/// CSV emission: one row per record plus the fitted alpha as a trailing
/// comment. Round-trips exactly through parse_scaling_csv.
inline void emit_scaling_csv(const ScalingReport& report, std::ostream& os) {
  os << "p,time_s,speedup,efficiency,connectivity\n";
  os.precision(17);
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    const TimingRecord& r = report.records[i];
    os << r.workers << ',' << r.time_seconds << ',' << report.speedups[i] << ','
       << report.efficiencies[i] << ',' << (r.with_connectivity ? 1 : 0) << '\n';
  }
  os << "# alpha," << report.alpha << '\n';
}

inline std::string emit_scaling_csv(const ScalingReport& report) {
  std::ostringstream os;
  emit_scaling_csv(report, os);
  return os.str();
}

inline ScalingReport parse_scaling_csv(std::istream& is) {
  ScalingReport report;
  std::string line;
  if (!std::getline(is, line) || line != "p,time_s,speedup,efficiency,connectivity")
    throw std::invalid_argument("parse_scaling_csv: missing header row");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("# alpha,", 0) == 0) {
      report.alpha = std::stod(line.substr(8));
      continue;
    }
    std::istringstream row(line);
    TimingRecord r;
    double speedup = 0.0, efficiency = 0.0;
    int connectivity = 0;
    char comma = 0;
    if (!(row >> r.workers >> comma >> r.time_seconds >> comma >> speedup >> comma >>
          efficiency >> comma >> connectivity))
      throw std::invalid_argument("parse_scaling_csv: malformed row: " + line);
    r.with_connectivity = connectivity != 0;
    report.records.push_back(r);
    report.speedups.push_back(speedup);
    report.efficiencies.push_back(efficiency);
  }
  return report;
}

inline ScalingReport parse_scaling_csv(const std::string& text) {
  std::istringstream is(text);
  return parse_scaling_csv(is);
}

/// Markdown table in the appendix layout: one row per worker count, time/
/// efficiency/speedup columns per series, alpha in the footer.
inline std::string emit_scaling_markdown(const ScalingReport& report) {
  const bool both = [&] {
    bool with = false, without = false;
    for (const TimingRecord& r : report.records) (r.with_connectivity ? with : without) = true;
    return with && without;
  }();

  std::ostringstream os;
  os.precision(6);
  os << std::fixed;
  if (both) {
    os << "| Threads | Time (sec) | Efficiency | Speedup | Time (sec) | Efficiency | Speedup |\n";
    os << "|---|---|---|---|---|---|---|\n";
    os << "| | Without Connectivity | | | With Connectivity | | |\n";
    std::vector<int> ps;
    for (const TimingRecord& r : report.records)
      if (!r.with_connectivity) ps.push_back(r.workers);
    for (int p : ps) {
      os << "| " << p << " |";
      for (bool conn : {false, true}) {
        for (std::size_t i = 0; i < report.records.size(); ++i) {
          if (report.records[i].workers == p && report.records[i].with_connectivity == conn) {
            os << ' ' << report.records[i].time_seconds << " | " << report.efficiencies[i]
               << " | " << report.speedups[i] << " |";
            break;
          }
        }
      }
      os << '\n';
    }
  } else {
    os << "| Threads | Time (sec) | Efficiency | Speedup |\n";
    os << "|---|---|---|---|\n";
    for (std::size_t i = 0; i < report.records.size(); ++i) {
      os << "| " << report.records[i].workers << " | " << report.records[i].time_seconds << " | "
         << report.efficiencies[i] << " | " << report.speedups[i] << " |\n";
    }
  }
  os << "\nSerial fraction (Amdahl fit): alpha = " << report.alpha << '\n';
  return os.str();
}

}  // namespace sslic
