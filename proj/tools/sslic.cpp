// sslic command line: superpixel segmentation, contour rendering, and the
// strong-scaling benchmark.
//
// Exit codes: 0 success, 1 usage error, 2 I/O error, 3 algorithm
// precondition failure. Diagnostics go to standard error.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "sslic/sslic.hpp"

namespace {

int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Default supergrid: 50 pixels per axis, clamped to the image extent.
sslic::GridSize resolve_grid(const std::vector<std::int64_t>& flag, const sslic::Shape& dims) {
  sslic::GridSize grid;
  if (flag.empty()) {
    for (std::int64_t d : dims) grid.push_back(std::min<std::int64_t>(50, d));
    return grid;
  }
  if (static_cast<int>(flag.size()) != dims.size())
    throw std::invalid_argument("--grid needs one size per image dimension (" +
                                std::to_string(dims.size()) + ")");
  for (std::int64_t s : flag) grid.push_back(s);
  return grid;
}

int run(int argc, char** argv) {
  CLI::App app{"Scalable n-dimensional SLIC superpixels"};
  app.require_subcommand(1);

  std::string in_path, out_path, labels_path, residuals_path, report_path;
  std::vector<std::int64_t> grid_flag;
  double weight = 10.0;
  int iters = 0;
  int threads = 0;  // 0 = unset; resolved to SSLIC_THREADS or core count
  bool no_connectivity = false;
  bool lab_convert = false;
  std::vector<int> thread_list;
  int reps = 5;
  bool split_connectivity = false;

  CLI::App* segment = app.add_subcommand("segment", "Segment an image into superpixels");
  segment->add_option("--in", in_path, "Input image (PNG or detached header)")->required();
  segment->add_option("--out", out_path, "Output label map header path")->required();
  segment->add_option("--grid", grid_flag, "Supergrid sizes per axis (default 50 per axis)")
      ->delimiter(',');
  segment->add_option("--weight", weight, "Spatial weight m (default 10)");
  segment->add_option("--iters", iters, "Iterations (default 10 for 2D, 5 for 3D+)");
  segment->add_option("--threads", threads, "Worker count (default: logical cores)")
      ->envname("SSLIC_THREADS");
  segment->add_flag("--no-connectivity", no_connectivity, "Skip connectivity enforcement");
  segment->add_flag("--lab-convert", lab_convert, "Convert 3-channel sRGB input to CIE-Lab");
  segment->add_option("--residuals", residuals_path, "Write per-iteration residuals to a file");

  CLI::App* contour = app.add_subcommand("contour", "Render label boundaries onto an image");
  contour->add_option("--in", in_path, "Input image")->required();
  contour->add_option("--labels", labels_path, "Label map header path")->required();
  contour->add_option("--out", out_path, "Output image path")->required();

  CLI::App* bench = app.add_subcommand("bench", "Strong-scaling study over worker counts");
  bench->add_option("--in", in_path, "Input image")->required();
  bench->add_option("--threads", thread_list, "Worker counts, e.g. 1,2,4 (must include 1)")
      ->delimiter(',')
      ->required();
  bench->add_option("--reps", reps, "Repetitions per configuration; minimum time is kept");
  bench->add_flag("--split-connectivity", split_connectivity,
                  "Time the pipeline both with and without connectivity enforcement");
  bench->add_option("--report", report_path, "CSV report output path")->required();
  bench->add_option("--grid", grid_flag, "Supergrid sizes per axis (default 50 per axis)")
      ->delimiter(',');
  bench->add_option("--weight", weight, "Spatial weight m (default 10)");
  bench->add_option("--iters", iters, "Iterations (default 10 for 2D, 5 for 3D+)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*segment) {
    sslic::NDImage img = sslic::read_volume(in_path);
    if (lab_convert) img = sslic::convert_image_to_lab(img);

    sslic::SlicParams params;
    params.grid = resolve_grid(grid_flag, img.dims());
    params.weight_m = weight;
    params.max_iterations = iters;
    params.enforce_connectivity = !no_connectivity;

    if (threads <= 0) threads = default_threads();
    sslic::SlicResult result = sslic::run_slic(img, params, threads);
    sslic::LabelMap labels =
        params.enforce_connectivity
            ? sslic::enforce_connectivity(result.labels, result.centers, params, threads)
            : std::move(result.labels);
    sslic::write_labels(out_path, labels);

    if (!residuals_path.empty()) {
      std::ofstream rf(residuals_path);
      if (!rf)
        throw sslic::io_error(sslic::io_errc::write_failed, "cannot open " + residuals_path);
      rf.precision(17);
      for (double r : result.residuals) rf << r << '\n';
    }
    return 0;
  }

  if (*contour) {
    const sslic::NDImage img = sslic::read_volume(in_path);
    const sslic::LabelMap labels = sslic::read_labels(labels_path);
    sslic::write_volume(out_path, sslic::mask_label_contour(img, labels));
    return 0;
  }

  if (*bench) {
    bool has_one = false;
    for (int p : thread_list) has_one = has_one || p == 1;
    if (!has_one) {
      std::cerr << "bench: --threads must include 1 (the speedup baseline)\n";
      return 1;
    }

    const sslic::NDImage img = sslic::read_volume(in_path);
    sslic::SlicParams params;
    params.grid = resolve_grid(grid_flag, img.dims());
    params.weight_m = weight;
    params.max_iterations = iters;

    const sslic::ScalingReport report =
        sslic::run_scaling_study(img, params, thread_list, reps, split_connectivity);

    std::ofstream csv(report_path);
    if (!csv) throw sslic::io_error(sslic::io_errc::write_failed, "cannot open " + report_path);
    sslic::emit_scaling_csv(report, csv);
    std::cout << sslic::emit_scaling_markdown(report);
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const sslic::io_error& e) {
    std::cerr << "sslic: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "sslic: " << e.what() << '\n';
    return 3;
  }
}
