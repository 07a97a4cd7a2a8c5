#include "ueglab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ueglab/error.hpp"

namespace ueglab {
namespace {

constexpr double pi = std::numbers::pi;

void check_density(double density) {
  require(density >= 0 && std::isfinite(density), "density must be finite and non-negative");
}

}  // namespace

double thomas_fermi(double density) {
  check_density(density);
  return 0.3 * std::pow(3.0 * pi * pi, 2.0 / 3.0) * std::pow(density, 2.0 / 3.0);
}

double dirac_exchange(double density) {
  check_density(density);
  return -0.75 * std::cbrt(3.0 / pi) * std::cbrt(density);
}

EstimateWithError nonlocal_kinetic(const EstimateWithError& reference_force_sq, double gamma) {
  require(gamma >= 0, "gamma must be non-negative");
  if (reference_force_sq.blocks < minimum_blocks)
    fail(ErrorCode::insufficient_data, "nonlocal kinetic estimate needs at least " +
                                           std::to_string(minimum_blocks) + " blocks");
  if (gamma == 0.0) return {0.0, 0.0, reference_force_sq.blocks};
  const double scale = gamma * gamma / 8.0;
  return {scale * reference_force_sq.mean, scale * reference_force_sq.error, reference_force_sq.blocks};
}

EstimateWithError nonlocal_kinetic(const BlockAccumulator& accumulator, double gamma) {
  return nonlocal_kinetic(accumulator.estimate(observable_reference_force_sq), gamma);
}

EstimateWithError pair_energy(const BlockAccumulator& accumulator) {
  return accumulator.estimate(observable_pair_energy);
}

EstimateWithError linear_combination(const BlockAccumulator& accumulator, std::span<const double> coefficients) {
  const auto& names = accumulator.observables();
  require(coefficients.size() == names.size(), "one coefficient per observable is required");
  const std::size_t n = accumulator.block_count();
  if (n < minimum_blocks)
    fail(ErrorCode::insufficient_data, "estimate needs at least " + std::to_string(minimum_blocks) +
                                           " blocks, have " + std::to_string(n));
  std::vector<double> combined(n, 0.0);
  for (std::size_t o = 0; o < names.size(); ++o) {
    if (coefficients[o] == 0.0) continue;
    const auto& means = accumulator.block_means(o);
    for (std::size_t b = 0; b < n; ++b) combined[b] += coefficients[o] * means[b];
  }
  std::sort(combined.begin(), combined.end());
  double sum = 0.0;
  for (double x : combined) sum += x;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double x : combined) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)), n};
}

EstimateWithError objective(const BlockAccumulator& accumulator, double gamma) {
  require(gamma >= 0, "gamma must be non-negative");
  std::vector<double> coefficients(accumulator.observables().size(), 0.0);
  for (std::size_t o = 0; o < coefficients.size(); ++o) {
    if (accumulator.observables()[o] == observable_reference_force_sq) coefficients[o] = gamma * gamma / 8.0;
    if (accumulator.observables()[o] == observable_pair_energy) coefficients[o] = 1.0;
  }
  return linear_combination(accumulator, coefficients);
}

CorrelationBreakdown assemble(double density, const EstimateWithError& t_nloc, const EstimateWithError& v_ee) {
  CorrelationBreakdown out;
  out.density = density;
  out.thomas_fermi = thomas_fermi(density);
  out.dirac_exchange = dirac_exchange(density);
  out.t_nloc = t_nloc;
  out.v_ee = v_ee;
  out.t_c = t_nloc;
  out.v_c = {v_ee.mean - out.dirac_exchange, v_ee.error, v_ee.blocks};
  out.e_c = {out.t_c.mean + out.v_c.mean, std::hypot(out.t_c.error, out.v_c.error),
             std::min(t_nloc.blocks, v_ee.blocks)};
  return out;
}

}  // namespace ueglab
