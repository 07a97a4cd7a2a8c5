#include "ueglab/conditional_model.hpp"

#include <string>

#include "ueglab/error.hpp"

namespace ueglab {

ParticleConfiguration ParticleConfiguration::wrapped(const SimulationCell& cell, std::vector<Vec3> positions) {
  require(positions.size() == static_cast<std::size_t>(cell.electron_count()),
          "configuration holds " + std::to_string(positions.size()) + " positions but the cell has " +
              std::to_string(cell.electron_count()) + " electrons");
  for (auto& r : positions) r = cell.wrap(r);
  return ParticleConfiguration{std::move(positions)};
}

ConditionalModel::ConditionalModel(double gamma, SimulationCell cell, EwaldParameters ewald)
    : gamma_(gamma), cell_(std::move(cell)), ewald_(std::move(ewald)) {
  require(gamma >= 0 && std::isfinite(gamma), "gamma must be finite and non-negative");
  require(std::abs(ewald_.edge_length() - cell_.edge_length()) <= 1e-12 * cell_.edge_length(),
          "Ewald parameters were built for a different cell");
}

double log_weight(const ParticleConfiguration& config, const ConditionalModel& model) {
  const double energy = total_pair_energy(config.positions, model.ewald(), model.cell());
  if (model.gamma() == 0.0) return 0.0;
  const double n = static_cast<double>(config.positions.size());
  return -model.gamma() * (energy - 0.5 * n * model.ewald().image_constant());
}

Vec3 reference_gradient(const ParticleConfiguration& config, const ConditionalModel& model) {
  require(!config.positions.empty(), "empty configuration");
  const Vec3 force = force_on_particle(config.positions, 0, model.ewald(), model.cell());
  if (model.gamma() == 0.0) return {0, 0, 0};
  return model.gamma() * force;
}

double reference_force_squared(const ParticleConfiguration& config, const ConditionalModel& model,
                               std::size_t index) {
  return norm2(force_on_particle(config.positions, index, model.ewald(), model.cell()));
}

}  // namespace ueglab
