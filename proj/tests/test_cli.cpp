#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "sslic/bench.hpp"
#include "sslic/io.hpp"
#include "sslic/slic.hpp"

using namespace sslic;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SSLIC_CLI_PATH) + " " + args + " 2>/dev/null >/dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path cli_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "sslic_cli_tests";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

NDImage make_test_image(std::int64_t w, std::int64_t h, int channels, unsigned seed) {
  std::mt19937_64 rng(seed);
  NDImage img = NDImage::zeros(Shape{w, h}, channels);
  for (double& v : img.data()) v = std::uniform_int_distribution<int>(0, 255)(rng);
  return img;
}

}  // namespace

TEST_CASE("usage errors exit with code 1", "[cli]") {
  CHECK(run_cli("segment") == 1);                    // missing --in/--out
  CHECK(run_cli("") == 1);                           // missing subcommand
  CHECK(run_cli("segment --in a.hdr") == 1);         // missing --out
  CHECK(run_cli("--help") == 0);
}

TEST_CASE("I/O failures exit with code 2", "[cli]") {
  const fs::path dir = cli_dir();
  CHECK(run_cli("segment --in " + (dir / "nope.hdr").string() + " --out " +
                (dir / "out.hdr").string()) == 2);
}

TEST_CASE("algorithm precondition failures exit with code 3", "[cli]") {
  const fs::path dir = cli_dir();
  write_volume(dir / "small.hdr", make_test_image(6, 6, 1, 1));
  // grid larger than the image
  CHECK(run_cli("segment --in " + (dir / "small.hdr").string() + " --out " +
                (dir / "out.hdr").string() + " --grid 7,7") == 3);
}

TEST_CASE("segment runs the documented defaults", "[cli]") {
  const fs::path dir = cli_dir();
  write_volume(dir / "img.hdr", make_test_image(24, 18, 3, 2));

  const std::string residuals = (dir / "residuals.txt").string();
  CHECK(run_cli("segment --in " + (dir / "img.hdr").string() + " --out " +
                (dir / "labels.hdr").string() + " --grid 6,6 --residuals " + residuals) == 0);

  // 2D default: 10 iterations, one residual per iteration
  std::ifstream rf(residuals);
  int lines = 0;
  std::string line;
  while (std::getline(rf, line)) ++lines;
  CHECK(lines == 10);

  const LabelMap labels = read_labels(dir / "labels.hdr");
  CHECK(labels.dims() == Shape{24, 18});

  // --no-connectivity leaves the raw clustering labels in place
  CHECK(run_cli("segment --in " + (dir / "img.hdr").string() + " --out " +
                (dir / "rawlabels.hdr").string() + " --grid 6,6 --no-connectivity") == 0);
  const LabelMap raw = read_labels(dir / "rawlabels.hdr");
  std::uint32_t max_label = 0;
  for (std::int64_t i = 0; i < raw.pixel_count(); ++i) max_label = std::max(max_label, raw[i]);
  CHECK(max_label < 12);  // 4 x 3 init grid, no fresh labels were introduced
}

TEST_CASE("segment output is identical for any thread count", "[cli]") {
  const fs::path dir = cli_dir();
  write_volume(dir / "det.hdr", make_test_image(32, 24, 3, 3));

  const std::string base = "segment --in " + (dir / "det.hdr").string() + " --grid 8,8";
  CHECK(run_cli(base + " --out " + (dir / "t1.hdr").string() + " --threads 1") == 0);
  CHECK(run_cli(base + " --out " + (dir / "t7.hdr").string() + " --threads 7") == 0);

  std::ifstream a(dir / "t1.raw", std::ios::binary), b(dir / "t7.raw", std::ios::binary);
  const std::string bytes_a((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  const std::string bytes_b((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  CHECK(bytes_a == bytes_b);
}

TEST_CASE("SSLIC_THREADS provides the default and the flag overrides it", "[cli]") {
  const fs::path dir = cli_dir();
  write_volume(dir / "env.hdr", make_test_image(16, 16, 1, 4));

  const std::string cmd = "SSLIC_THREADS=2 " + std::string(SSLIC_CLI_PATH) + " segment --in " +
                          (dir / "env.hdr").string() + " --out " + (dir / "envout.hdr").string() +
                          " --grid 4,4 2>/dev/null >/dev/null";
  const int status = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(status) == 0);

  const std::string bad = "SSLIC_THREADS=notanumber " + std::string(SSLIC_CLI_PATH) +
                          " segment --in " + (dir / "env.hdr").string() + " --out " +
                          (dir / "envout.hdr").string() +
                          " --grid 4,4 --threads 2 2>/dev/null >/dev/null";
  // explicit flag wins over a broken environment value
  CHECK(WEXITSTATUS(std::system(bad.c_str())) == 0);
}

TEST_CASE("contour renders label boundaries", "[cli]") {
  const fs::path dir = cli_dir();
  const NDImage img = make_test_image(20, 20, 3, 5);
  write_volume(dir / "cimg.hdr", img);

  CHECK(run_cli("segment --in " + (dir / "cimg.hdr").string() + " --out " +
                (dir / "clabels.hdr").string() + " --grid 5,5") == 0);
  CHECK(run_cli("contour --in " + (dir / "cimg.hdr").string() + " --labels " +
                (dir / "clabels.hdr").string() + " --out " + (dir / "contour.hdr").string()) == 0);

  const NDImage overlay = read_volume(dir / "contour.hdr");
  const LabelMap labels = read_labels(dir / "clabels.hdr");
  const NDImage expected = mask_label_contour(img, labels);
  CHECK(overlay.data() == expected.data());
}

TEST_CASE("bench emits a CSV report with the baseline row", "[cli]") {
  const fs::path dir = cli_dir();
  write_volume(dir / "bimg.hdr", make_test_image(24, 24, 1, 6));

  const std::string report = (dir / "report.csv").string();
  CHECK(run_cli("bench --in " + (dir / "bimg.hdr").string() +
                " --threads 1,2 --reps 1 --grid 6,6 --report " + report) == 0);

  std::ifstream csv(report);
  const ScalingReport parsed = parse_scaling_csv(csv);
  REQUIRE(parsed.records.size() == 2);
  CHECK(parsed.records[0].workers == 1);
  CHECK(parsed.speedups[0] == 1.0);
  CHECK(parsed.efficiencies[0] == 1.0);

  CHECK(run_cli("bench --in " + (dir / "bimg.hdr").string() +
                " --threads 2,4 --reps 1 --grid 6,6 --report " + report) == 1);
}
