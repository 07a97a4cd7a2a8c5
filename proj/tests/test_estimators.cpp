#include <doctest.h>

#include <cmath>

#include "oracles/lattice_sum.hpp"
#include "ueglab/error.hpp"
#include "ueglab/estimators.hpp"

using namespace ueglab;

TEST_CASE("Thomas-Fermi kinetic energy") {
  CHECK(thomas_fermi(1.0) == doctest::Approx(2.8712).epsilon(2e-5));
  CHECK(thomas_fermi(0.0) == 0.0);
  CHECK(thomas_fermi(8.0 * 0.37) == doctest::Approx(4.0 * thomas_fermi(0.37)).epsilon(1e-13));
  CHECK_THROWS_AS(thomas_fermi(-1e-3), Error);
}

TEST_CASE("Dirac exchange energy") {
  CHECK(dirac_exchange(1.0) == doctest::Approx(-0.738559).epsilon(1e-6));
  CHECK(dirac_exchange(0.0) == 0.0);
  CHECK(dirac_exchange(8.0 * 0.02) == doctest::Approx(2.0 * dirac_exchange(0.02)).epsilon(1e-13));
  CHECK_THROWS_AS(dirac_exchange(-2.0), Error);
}

TEST_CASE("nonlocal kinetic estimator") {
  BlockAccumulator acc({std::string(observable_reference_force_sq), std::string(observable_pair_energy)}, 4);
  for (int i = 0; i < 80; ++i) {
    const double s[2] = {2.0 + 0.1 * (i % 7), -0.3};
    acc.add(s);
  }
  SUBCASE("zero coupling gives exactly zero") {
    const auto t = nonlocal_kinetic(acc, 0.0);
    CHECK(t.mean == 0.0);
    CHECK(t.error == 0.0);
  }
  SUBCASE("scales the force estimate by gamma^2 / 8") {
    const auto f = acc.estimate(observable_reference_force_sq);
    const auto t = nonlocal_kinetic(acc, 2.0);
    CHECK(t.mean == doctest::Approx(0.5 * f.mean).epsilon(1e-15));
    CHECK(t.error == doctest::Approx(0.5 * f.error).epsilon(1e-15));
    CHECK(t.mean >= 0);
  }
  SUBCASE("too few blocks are rejected") {
    BlockAccumulator small({std::string(observable_reference_force_sq)}, 4);
    for (int i = 0; i < 60; ++i) {
      const double s = 1.0;
      small.add({&s, 1});
    }
    CHECK_THROWS_AS(nonlocal_kinetic(small, 1.0), Error);
  }
}

TEST_CASE("frozen two-electron configuration reproduces the oracle force") {
  const double gamma = 1.3, L = 5.0;
  const SimulationCell cell(2, L);
  const auto ewald = EwaldParameters::create(cell);
  const Vec3 a{0.5, 0.5, 0.5}, b{2.1, 1.4, 0.9};

  BlockAccumulator acc({std::string(observable_reference_force_sq)}, 2);
  const double f2 = norm2(force_on_particle(std::vector<Vec3>{a, b}, 0, ewald, cell));
  for (int i = 0; i < 40; ++i) acc.add({&f2, 1});
  const auto t = nonlocal_kinetic(acc, gamma);

  const oracle::EwaldReference ref{L, 6.0L / L, 4, 14};
  const oracle::vec d{a[0] - b[0], a[1] - b[1], a[2] - b[2]};
  long double grad2 = 0;
  for (int c = 0; c < 3; ++c) {
    oracle::vec p = d, m = d;
    p[c] += 1e-5L;
    m[c] -= 1e-5L;
    const long double g = (ref.pair(p) - ref.pair(m)) / 2e-5L;
    grad2 += g * g;
  }
  CHECK(t.mean == doctest::Approx(static_cast<double>(gamma * gamma / 8 * grad2)).epsilon(1e-8));
  CHECK(t.error < 1e-15);
}

TEST_CASE("estimator is unchanged when another electron is the reference") {
  const auto cell = SimulationCell::from_density(16, 0.1);
  const ConditionalModel model(2.0 * cell.wigner_seitz_radius(), cell, EwaldParameters::create(cell, 6.0, 1e-8));
  SamplerConfig cfg;
  cfg.warmup_steps = 20000;
  cfg.sample_steps = 16 * 16 * 200;
  cfg.block_length = 16;
  BlockAccumulator first({"f"}, 16), last({"f"}, 16);
  run_chain(model, cfg, 404, 0, [&](const EwaldCache& cache) {
    const double f0 = norm2(cache.force_on(0)), f15 = norm2(cache.force_on(15));
    first.add({&f0, 1});
    last.add({&f15, 1});
  });
  const double g2 = model.gamma() * model.gamma() / 8;
  const auto a = first.estimate("f"), b = last.estimate("f");
  CHECK(std::abs(g2 * (a.mean - b.mean)) < 3 * g2 * std::hypot(a.error, b.error));
}

TEST_CASE("objective combines observables block by block") {
  BlockAccumulator acc({std::string(observable_reference_force_sq), std::string(observable_pair_energy)}, 3);
  for (int i = 0; i < 90; ++i) {
    const double s[2] = {1.0 + 0.01 * (i % 11), -0.5 + 0.003 * (i % 5)};
    acc.add(s);
  }
  const double gamma = 1.6;
  const auto w = objective(acc, gamma);
  const auto t = nonlocal_kinetic(acc, gamma), v = pair_energy(acc);
  CHECK(w.mean == doctest::Approx(t.mean + v.mean).epsilon(1e-14));
  CHECK(w.blocks == 30);
  CHECK(w.error > 0);
  const double coef[2] = {0.0, 1.0};
  CHECK(linear_combination(acc, coef).mean == doctest::Approx(v.mean).epsilon(1e-15));
}

TEST_CASE("assemble bookkeeping") {
  const double rho = 0.05;
  SUBCASE("uncorrelated limit") {
    const auto c = assemble(rho, {0.0, 0.0, 20}, {dirac_exchange(rho), 0.0, 20});
    CHECK(c.t_c.mean == 0.0);
    CHECK(c.v_c.mean == 0.0);
    CHECK(c.e_c.mean == 0.0);
  }
  SUBCASE("quadrature error and exact sum") {
    const auto c = assemble(rho, {0.012, 0.003, 20}, {-0.61, 0.004, 20});
    CHECK(c.e_c.error == doctest::Approx(0.005).epsilon(1e-14));
    CHECK(c.e_c.mean == c.t_c.mean + c.v_c.mean);
    CHECK(c.v_c.mean == -0.61 - dirac_exchange(rho));
    CHECK(c.thomas_fermi == thomas_fermi(rho));
  }
}

TEST_CASE("correlation signs at an interacting point") {
  const double rho = 0.1;
  const auto cell = SimulationCell::from_density(64, rho);
  const ConditionalModel model(cell.wigner_seitz_radius(), cell, EwaldParameters::create(cell, 7.0, 1e-6));
  SamplerConfig cfg;
  cfg.warmup_steps = 64000;
  cfg.sample_steps = 64 * 16 * 64;
  cfg.block_length = 16;
  const auto acc = run_chain(model, cfg, 7, 0).accumulator;
  const auto c = assemble(rho, nonlocal_kinetic(acc, model.gamma()), pair_energy(acc));
  CHECK(c.t_c.mean > 3 * c.t_c.error);
  CHECK(c.v_c.mean < -3 * c.v_c.error);
}
