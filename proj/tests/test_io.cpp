#include <doctest.h>

#include <filesystem>

#include "bdgraphtv/errors.hpp"
#include "bdgraphtv/io.hpp"

using namespace bdgraphtv;
namespace fs = std::filesystem;

TEST_CASE("points and fields round-trip exactly") {
  const fs::path dir = fs::temp_directory_path() / "bdgraphtv_test_io";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const Domain d = Domain::unit_box(3);
  const EmpiricalMeasure cloud = sample(d, Density::uniform(d), 50, 77);
  write_points_csv(dir / "p.csv", cloud);
  const EmpiricalMeasure back = read_points_csv(dir / "p.csv");
  CHECK(back.points() == cloud.points());
  CHECK(back.seed() == 77);

  Eigen::MatrixXd v = Eigen::MatrixXd::Random(2, 50) * 1e-7;
  v(0, 0) = 1.0 / 3.0;
  const NodeField f(v);
  write_field_csv(dir / "u.csv", f);
  CHECK(read_field_csv(dir / "u.csv").values() == v);

  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK_THROWS_AS((void)read_points_csv(dir / "missing.csv"), IoError);
}
