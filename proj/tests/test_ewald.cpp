#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles/lattice_sum.hpp"
#include "support.hpp"
#include "ueglab/error.hpp"
#include "ueglab/ewald.hpp"

using namespace ueglab;

namespace {
// Frozen from tests/oracles/lattice_sum.hpp (long-double Ewald alpha scan,
// cross-checked against direct cell summation); values for L = 1 scale as 1/L.
constexpr double oracle_image_constant_l1 = -2.837297479480619;
constexpr double oracle_half_edge_pair_l1 = -0.0959323049398044;
}  // namespace

TEST_CASE("single charge image energy matches the lattice-sum oracle") {
  for (double L : {1.0, 2.0, 5.0, 10.0}) {
    const SimulationCell cell(1, L);
    const auto params = EwaldParameters::create(cell);
    CHECK(params.image_constant() < 0.0);
    const std::vector<Vec3> one{{0.3 * L, 0.1 * L, 0.7 * L}};
    const double u = total_pair_energy(one, params, cell);
    CHECK(std::abs(u - oracle_image_constant_l1 / (2 * L)) < 1e-6);
    CHECK(std::abs(u - oracle_image_constant_l1 / (2 * L)) < 1e-11);
    // literature simple-cubic magnitude, sanity only
    CHECK(u * 2 * L == doctest::Approx(-2.8373).epsilon(1e-4));
  }
}

TEST_CASE("two charges half a cell apart match the oracle") {
  const SimulationCell cell(2, 5.0);
  const double L = cell.edge_length();
  const auto params = EwaldParameters::create(cell);
  const std::vector<Vec3> two{{1.0, 2.0, 3.0}, {1.0 + L / 2, 2.0, 3.0}};
  const double expected = (oracle_image_constant_l1 + oracle_half_edge_pair_l1) / L;
  CHECK(std::abs(total_pair_energy(two, params, cell) - expected) < 1e-11);
  CHECK(std::abs(params.pair_potential({L / 2, 0, 0}) - oracle_half_edge_pair_l1 / L) < 1e-12);

  // live evaluation of the oracle at an off-axis separation
  const oracle::EwaldReference ref{L, 4.5L / L, 4, 10};
  const Vec3 d{0.31 * L, -0.17 * L, 0.05 * L};
  CHECK(std::abs(params.pair_potential(d) - double(ref.pair({d[0], d[1], d[2]}))) < 1e-11);
}

TEST_CASE("energy is invariant to the splitting parameter") {
  const auto cell = SimulationCell::from_density(16, 0.1);
  const auto pos = testing::random_positions(cell, 2024);
  double lo = 1e300, hi = -1e300;
  for (double a = 5.0; a <= 9.0 + 1e-12; a += 0.5) {
    const double u = total_pair_energy(pos, EwaldParameters::create(cell, a, 1e-14), cell);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(hi - lo < 1e-8);
}

TEST_CASE("pairwise and structure-factor routes agree") {
  const auto cell = SimulationCell::from_density(12, 0.05);
  const auto params = EwaldParameters::create(cell);
  const auto pos = testing::random_positions(cell, 5);
  double pairwise = 0.5 * pos.size() * params.image_constant();
  for (std::size_t i = 0; i < pos.size(); ++i)
    for (std::size_t j = i + 1; j < pos.size(); ++j) pairwise += params.pair_potential(pos[i] - pos[j]);
  CHECK(std::abs(pairwise - total_pair_energy(pos, params, cell)) < 1e-10);

  for (std::size_t i = 0; i < pos.size(); ++i) {
    Vec3 f{0, 0, 0};
    for (std::size_t j = 0; j < pos.size(); ++j)
      if (j != i) f += params.pair_force(pos[i] - pos[j]);
    const Vec3 g = force_on_particle(pos, i, params, cell);
    for (int c = 0; c < 3; ++c) CHECK(std::abs(f[c] - g[c]) < 1e-10);
  }
}

TEST_CASE("forces match central finite differences") {
  const auto cell = SimulationCell::from_density(16, 0.1);
  const auto params = EwaldParameters::create(cell);
  auto pos = testing::random_positions(cell, 99);
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const Vec3 f = force_on_particle(pos, i, params, cell);
    for (int c = 0; c < 3; ++c) {
      auto plus = pos, minus = pos;
      plus[i][c] += h;
      minus[i][c] -= h;
      const double fd =
          -(total_pair_energy(plus, params, cell) - total_pair_energy(minus, params, cell)) / (2 * h);
      worst = std::max(worst, std::abs(fd - f[c]));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("force symmetries") {
  const SimulationCell cell(2, 4.0);
  const auto params = EwaldParameters::create(cell);
  const std::vector<Vec3> two{{1.0, 1.2, 2.0}, {2.3, 0.4, 2.9}};
  const Vec3 f0 = force_on_particle(two, 0, params, cell);
  const Vec3 f1 = force_on_particle(two, 1, params, cell);
  for (int c = 0; c < 3; ++c) CHECK(f0[c] == doctest::Approx(-f1[c]).epsilon(1e-12));

  const SimulationCell single(1, 4.0);
  const auto p1 = EwaldParameters::create(single);
  const std::vector<Vec3> centre{{2.0, 2.0, 2.0}};
  const Vec3 f = force_on_particle(centre, 0, p1, single);
  CHECK(norm(f) < 1e-14);

  const auto big = SimulationCell::from_density(16, 0.1);
  const auto pb = EwaldParameters::create(big);
  const auto pos = testing::random_positions(big, 3);
  Vec3 total{0, 0, 0};
  for (std::size_t i = 0; i < pos.size(); ++i) total += force_on_particle(pos, i, pb, big);
  CHECK(norm(total) < 1e-9);
}

TEST_CASE("energy symmetries") {
  const auto cell = SimulationCell::from_density(10, 0.02);
  const auto params = EwaldParameters::create(cell);
  const double L = cell.edge_length();
  auto pos = testing::random_positions(cell, 17);
  const double u = total_pair_energy(pos, params, cell);

  auto shifted = pos;
  for (auto& r : shifted) r = cell.wrap(r + Vec3{0.37 * L, -1.3, 0.21});
  CHECK(std::abs(total_pair_energy(shifted, params, cell) - u) < 1e-10);

  auto permuted = pos;
  std::reverse(permuted.begin(), permuted.end());
  std::swap(permuted[1], permuted[4]);
  CHECK(std::abs(total_pair_energy(permuted, params, cell) - u) < 1e-10);

  auto translated = pos;
  translated[3][0] += L;
  CHECK(std::abs(total_pair_energy(translated, params, cell) - u) < 1e-10);
}

TEST_CASE("coincident charges are rejected") {
  const SimulationCell cell(2, 3.0);
  const auto params = EwaldParameters::create(cell);
  const std::vector<Vec3> two{{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0 + 1e-12}};
  try {
    (void)total_pair_energy(two, params, cell);
    FAIL("expected a degenerate-configuration error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate_configuration);
  }
  CHECK_THROWS_AS((void)force_on_particle(two, 0, params, cell), Error);
}

TEST_CASE("incremental updates track full recomputation") {
  const auto cell = SimulationCell::from_density(16, 0.1);
  const auto params = EwaldParameters::create(cell, 6.0, 1e-8);
  EwaldCache cache(params, cell, testing::random_positions(cell, 8));
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::uniform_int_distribution<std::size_t> pick(0, 15);
  for (int step = 0; step < 2000; ++step) {
    const std::size_t i = pick(gen);
    const Vec3 trial = cache.positions()[i] + Vec3{u(gen), u(gen), u(gen)};
    const double before = cache.energy();
    const double delta = cache.trial_move(i, trial);
    if (step % 2 == 0) {
      cache.accept();
      CHECK(cache.energy() == before + delta);
    }
  }
  const double incremental = cache.energy();
  const Vec3 f_incremental = cache.force_on(0);
  const double full = total_pair_energy(cache.positions(), params, cell);
  CHECK(std::abs(incremental - full) < 1e-9);
  const Vec3 f_full = force_on_particle(cache.positions(), 0, params, cell);
  for (int c = 0; c < 3; ++c) CHECK(std::abs(f_incremental[c] - f_full[c]) < 1e-9);
}
