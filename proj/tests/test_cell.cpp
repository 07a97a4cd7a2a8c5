#include <doctest.h>

#include <cmath>
#include <random>

#include "ueglab/cell.hpp"
#include "ueglab/error.hpp"

using namespace ueglab;

TEST_CASE("density and Wigner-Seitz radius conversions") {
  // closed form (3 / (4 pi rho))^(1/3)
  CHECK(density_to_rs(2.0) == doctest::Approx(0.4923725109213483).epsilon(1e-12));
  CHECK(density_to_rs(0.029842) == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(rs_to_density(0.49237) == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(rs_to_density(1.0) == doctest::Approx(0.238732414637843).epsilon(1e-12));
  CHECK(std::abs(rs_to_density(density_to_rs(0.1)) - 0.1) <= 1e-12 * 0.1);

  CHECK_THROWS_AS(density_to_rs(0.0), Error);
  CHECK_THROWS_AS(density_to_rs(-1.0), Error);
  CHECK_THROWS_AS(rs_to_density(0.0), Error);
  CHECK_THROWS_AS(rs_to_density(-2.0), Error);
}

TEST_CASE("conversion roundtrip holds across decades") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> logu(-8.0, 4.0);
  for (int i = 0; i < 2000; ++i) {
    const double rho = std::pow(10.0, logu(gen));
    CHECK(std::abs(rs_to_density(density_to_rs(rho)) - rho) <= 1e-12 * rho);
  }
}

TEST_CASE("cell invariants") {
  const auto cell = SimulationCell::from_density(64, 0.1);
  CHECK(cell.electron_count() == 64);
  CHECK(std::abs(cell.density() - 64 / std::pow(cell.edge_length(), 3)) <= 1e-12 * cell.density());
  CHECK(std::abs(cell.density() - 0.1) <= 1e-12);
  CHECK(cell.wigner_seitz_radius() == doctest::Approx(density_to_rs(0.1)).epsilon(1e-12));

  CHECK_THROWS_AS(SimulationCell(0, 1.0), Error);
  CHECK_THROWS_AS(SimulationCell(4, 0.0), Error);
  CHECK_THROWS_AS(SimulationCell::from_density(4, -0.1), Error);
}

TEST_CASE("minimum image convention") {
  const SimulationCell cell(8, 2.0);
  const double L = cell.edge_length();

  auto wrapped = minimum_image({0.6 * L, 0, 0}, cell);
  CHECK(wrapped[0] == doctest::Approx(-0.4 * L));
  CHECK(wrapped[1] == 0.0);

  wrapped = minimum_image({0, 0, 0}, cell);
  CHECK(wrapped == Vec3{0, 0, 0});

  // half-open interval: +L/2 maps to -L/2
  wrapped = minimum_image({L / 2, 0, 0}, cell);
  CHECK(wrapped[0] == -L / 2);
  wrapped = minimum_image({-L / 2, 0, 0}, cell);
  CHECK(wrapped[0] == -L / 2);
}

TEST_CASE("minimum image properties on random displacements") {
  const SimulationCell cell(27, 3.7);
  const double L = cell.edge_length();
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-5 * L, 5 * L);
  for (int i = 0; i < 5000; ++i) {
    const Vec3 d{u(gen), u(gen), u(gen)};
    const Vec3 once = cell.minimum_image(d);
    const Vec3 twice = cell.minimum_image(once);
    CHECK(once == twice);
    CHECK(norm(once) <= 0.5 * std::sqrt(3.0) * L);
    for (int c = 0; c < 3; ++c) {
      CHECK(once[c] >= -L / 2);
      CHECK(once[c] < L / 2);
      // same equivalence class modulo L
      const double periods = (d[c] - once[c]) / L;
      CHECK(std::abs(periods - std::round(periods)) < 1e-9);
    }
    const Vec3 w = cell.wrap(d);
    for (int c = 0; c < 3; ++c) {
      CHECK(w[c] >= 0.0);
      CHECK(w[c] < L);
    }
  }
}
