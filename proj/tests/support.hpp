#pragma once

#include <random>
#include <vector>

#include "ueglab/cell.hpp"

namespace testing {

inline std::vector<ueglab::Vec3> random_positions(const ueglab::SimulationCell& cell, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, cell.edge_length());
  std::vector<ueglab::Vec3> out(cell.electron_count());
  for (auto& r : out) r = {u(gen), u(gen), u(gen)};
  return out;
}

}  // namespace testing
