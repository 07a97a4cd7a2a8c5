#pragma once

#include <vector>

#include "ueglab/cell.hpp"
#include "ueglab/ewald.hpp"

namespace ueglab {

/// Electron positions wrapped into [0, L)^3. Index 0 is the reference
/// electron that the conditional distribution is built around.
struct ParticleConfiguration {
  std::vector<Vec3> positions;

  /// Wraps `positions` into the cell; the count must match the cell.
  static ParticleConfiguration wrapped(const SimulationCell& cell, std::vector<Vec3> positions);
};

/// Conditional many-body distribution
///   f(r_2..r_N | r_1) = prod_n exp(E(r_1) - gamma v(r_1, r_n)) prod_{i>j!=1} exp(-gamma v(r_i, r_j))
/// with v the Ewald pair potential of the periodic cell. In a uniform gas the
/// normalization E(r_1) does not depend on r_1, so it is never evaluated:
/// it drops out of Metropolis ratios and of grad_{r_1} log f.
class ConditionalModel {
 public:
  ConditionalModel(double gamma, SimulationCell cell, EwaldParameters ewald);

  double gamma() const { return gamma_; }
  const SimulationCell& cell() const { return cell_; }
  const EwaldParameters& ewald() const { return ewald_; }

 private:
  double gamma_;
  SimulationCell cell_;
  EwaldParameters ewald_;
};

/// log f up to the configuration-independent E(r_1): -gamma sum_{i<j} v_E(r_i, r_j).
double log_weight(const ParticleConfiguration& config, const ConditionalModel& model);

/// grad_{r_1} log f = -gamma sum_{n != 1} grad_{r_1} v_E(r_1, r_n), i.e. gamma
/// times the Ewald force on the reference electron.
Vec3 reference_gradient(const ParticleConfiguration& config, const ConditionalModel& model);

/// |sum_{n != index} grad v_E(r_index, r_n)|^2, the gamma-free part of
/// |reference_gradient|^2 with electron `index` taken as the reference.
double reference_force_squared(const ParticleConfiguration& config, const ConditionalModel& model,
                               std::size_t index = 0);

}  // namespace ueglab
