#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "tslasso/errors.hpp"
#include "tslasso/pointcloud.hpp"

#include <cstring>
#include <fstream>

using namespace tslasso;


TEST_CASE("csv parses a 3x2 matrix") {
  const auto path = std::filesystem::temp_directory_path() / "tslasso_pc_small.csv";
  std::ofstream(path) << "1,0\n0,1\n0,0";
  const PointCloud pc = load_matrix(path, MatrixFormat::kCsv);
  CHECK(pc.n() == 3);
  CHECK(pc.dim() == 2);
  CHECK(pc.points()(1, 1) == 1.0);
}

TEST_CASE("csv header flag skips one line") {
  const auto path = std::filesystem::temp_directory_path() / "tslasso_pc_header.csv";
  std::ofstream(path) << "a,b\n1,2\n";
  const PointCloud pc = load_matrix(path, MatrixFormat::kCsv, true);
  CHECK(pc.n() == 1);
  CHECK(pc.points()(0, 1) == 2.0);
}

TEST_CASE("csv failures") {
  SUBCASE("empty file") {
    const auto path = std::filesystem::temp_directory_path() / "tslasso_pc_empty.csv";
    std::ofstream(path) << "";
    CHECK_THROWS_AS(load_matrix(path, MatrixFormat::kCsv), FormatError);
  }
  SUBCASE("nan") {
    const auto path = std::filesystem::temp_directory_path() / "tslasso_pc_nan.csv";
    std::ofstream(path) << "1,2\nnan,3\n";
    CHECK_THROWS_AS(load_matrix(path, MatrixFormat::kCsv), FormatError);
  }
  SUBCASE("ragged rows") {
    const auto path = std::filesystem::temp_directory_path() / "tslasso_pc_ragged.csv";
    std::ofstream(path) << "1,2\n3\n";
    CHECK_THROWS_AS(load_matrix(path, MatrixFormat::kCsv), FormatError);
  }
  SUBCASE("non-numeric") {
    const auto path = std::filesystem::temp_directory_path() / "tslasso_pc_text.csv";
    std::ofstream(path) << "1,2\n3,x\n";
    try {
      load_matrix(path, MatrixFormat::kCsv);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_matrix("/nonexistent/tslasso.f64", MatrixFormat::kRawF64), IOError);
  }
}

TEST_CASE("raw-binary-f64 round-trips bit-exactly") {
  Rng rng(11);
  Eigen::MatrixXd m = tstest::gaussian_matrix(17, 5, rng);
  m(0, 0) = 1e-300;
  m(3, 2) = -0.0;
  const auto path = std::filesystem::temp_directory_path() / "tslasso_pc_roundtrip.f64";
  write_matrix(path, m, MatrixFormat::kRawF64);
  const PointCloud back = load_matrix(path);
  REQUIRE(back.n() == 17);
  REQUIRE(back.dim() == 5);
  for (Index r = 0; r < 17; ++r)
    for (Index c = 0; c < 5; ++c) {
      const double a = back.points()(r, c), b = m(r, c);
      CHECK(std::memcmp(&a, &b, sizeof(double)) == 0);
    }
  CHECK(std::signbit(back.points()(3, 2)));
}

TEST_CASE("raw-binary-f64 rejects truncated payloads") {
  const auto path = std::filesystem::temp_directory_path() / "tslasso_pc_trunc.f64";
  write_matrix(path, Eigen::MatrixXd::Ones(4, 3), MatrixFormat::kRawF64);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
  CHECK_THROWS_AS(load_matrix(path), FormatError);
}

TEST_CASE("csv write and read agree") {
  Rng rng(3);
  const Eigen::MatrixXd m = tstest::gaussian_matrix(6, 4, rng);
  const auto path = std::filesystem::temp_directory_path() / "tslasso_pc_rt.csv";
  write_matrix(path, m, MatrixFormat::kCsv);
  CHECK((load_matrix(path).points() - m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("point cloud rejects empty and non-finite data") {
  CHECK_THROWS_AS(PointCloud(Eigen::MatrixXd(0, 3)), FormatError);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(1, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(PointCloud{m}, FormatError);
}

TEST_CASE("radius neighbors on three collinear points") {
  Eigen::MatrixXd m(3, 2);
  m << 0, 0, 1, 0, 3, 0;
  const PointCloud pc(m);
  const NeighborSet nb = radius_neighbors(pc, 0, 1.5);
  CHECK(nb.center == 0);
  CHECK(nb.members == std::vector<Index>{0, 1});
  CHECK(nb.distances[0] == 0.0);
  CHECK(nb.distances[1] == doctest::Approx(1.0));
}

TEST_CASE("radius below the minimum spacing isolates the center") {
  Eigen::MatrixXd m(3, 2);
  m << 0, 0, 1, 0, 3, 0;
  const NeighborSet nb = radius_neighbors(PointCloud(m), 2, 0.5);
  CHECK(nb.members == std::vector<Index>{2});
}

TEST_CASE("radius neighbors rejects a bad center") {
  const PointCloud pc(Eigen::MatrixXd::Zero(3, 2));
  CHECK_THROWS_AS(radius_neighbors(pc, 3, 1.0), IndexError);
  CHECK_THROWS_AS(radius_neighbors(pc, -1, 1.0), IndexError);
}

TEST_CASE("radius neighbors matches a double-loop oracle and is symmetric") {
  Rng rng(5);
  Eigen::MatrixXd m(100, 2);
  for (Index i = 0; i < 100; ++i) m.row(i) << rng.uniform(), rng.uniform();
  const PointCloud pc(m);
  std::vector<std::vector<Index>> all(100);
  for (Index i = 0; i < 100; ++i) {
    std::vector<Index> expect;
    for (Index j = 0; j < 100; ++j) {
      const double dx = m(i, 0) - m(j, 0), dy = m(i, 1) - m(j, 1);
      if (std::sqrt(dx * dx + dy * dy) <= 0.2) expect.push_back(j);
    }
    all[static_cast<std::size_t>(i)] = radius_neighbors(pc, i, 0.2).members;
    CHECK(all[static_cast<std::size_t>(i)] == expect);
  }
  for (Index i = 0; i < 100; ++i)
    for (Index j : all[static_cast<std::size_t>(i)]) {
      const auto& back = all[static_cast<std::size_t>(j)];
      CHECK(std::find(back.begin(), back.end(), i) != back.end());
    }
}

TEST_CASE("kernel values") {
  CHECK(kernel_value(KernelKind::kGaussian, 0.0) == 1.0);
  CHECK(kernel_value(KernelKind::kEpanechnikov, 0.5) == doctest::Approx(0.75));
  CHECK(kernel_value(KernelKind::kConstant, 0.9) == 1.0);
  for (auto k : {KernelKind::kGaussian, KernelKind::kEpanechnikov, KernelKind::kConstant}) {
    const std::vector<double> dist{2.0};
    CHECK(kernel_weights(dist, {k, 1.0})[0] == 0.0);
  }
  const std::vector<double> half{0.5};
  CHECK(kernel_weights(half, {KernelKind::kGaussian, 1.0})[0] == doctest::Approx(std::exp(-0.25)));
}

TEST_CASE("kernel weights are nonnegative and nonincreasing in distance") {
  std::vector<double> dist;
  for (int k = 0; k <= 300; ++k) dist.push_back(0.005 * k);
  for (auto k : {KernelKind::kGaussian, KernelKind::kEpanechnikov, KernelKind::kConstant}) {
    const auto w = kernel_weights(dist, {k, 1.0});
    for (std::size_t i = 0; i < w.size(); ++i) {
      CHECK(w[i] >= 0.0);
      if (i) CHECK(w[i] <= w[i - 1]);
    }
  }
}

TEST_CASE("kernel names parse") {
  CHECK(parse_kernel_kind("gaussian") == KernelKind::kGaussian);
  CHECK(to_string(parse_kernel_kind("epanechnikov")) == "epanechnikov");
  CHECK_THROWS_AS(parse_kernel_kind("tophat"), ConfigError);
}
