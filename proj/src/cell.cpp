#include "ueglab/cell.hpp"

#include <numbers>

#include "ueglab/error.hpp"

namespace ueglab {

double density_to_rs(double density) {
  require(density > 0 && std::isfinite(density), "density must be positive and finite");
  return std::cbrt(3.0 / (4.0 * std::numbers::pi * density));
}

double rs_to_density(double rs) {
  require(rs > 0 && std::isfinite(rs), "Wigner-Seitz radius must be positive and finite");
  return 3.0 / (4.0 * std::numbers::pi * rs * rs * rs);
}

SimulationCell::SimulationCell(int electron_count, double edge_length)
    : electron_count_(electron_count), edge_length_(edge_length) {
  require(electron_count >= 1, "cell needs at least one electron");
  require(edge_length > 0 && std::isfinite(edge_length), "cell edge length must be positive");
  density_ = electron_count / volume();
  rs_ = density_to_rs(density_);
}

SimulationCell SimulationCell::from_density(int electron_count, double density) {
  require(density > 0 && std::isfinite(density), "density must be positive and finite");
  require(electron_count >= 1, "cell needs at least one electron");
  return SimulationCell(electron_count, std::cbrt(electron_count / density));
}

Vec3 SimulationCell::minimum_image(const Vec3& displacement) const {
  const double half = 0.5 * edge_length_;
  Vec3 out;
  for (int d = 0; d < 3; ++d) {
    double x = displacement[d] - edge_length_ * std::floor(displacement[d] / edge_length_ + 0.5);
    // floor() can land one period off when x/L + 1/2 rounds onto an integer
    if (x < -half) x += edge_length_;
    if (x >= half) x -= edge_length_;
    out[d] = x;
  }
  return out;
}

Vec3 SimulationCell::wrap(const Vec3& position) const {
  Vec3 out;
  for (int d = 0; d < 3; ++d) {
    double x = position[d] - edge_length_ * std::floor(position[d] / edge_length_);
    if (x < 0) x += edge_length_;
    if (x >= edge_length_) x -= edge_length_;
    out[d] = x;
  }
  return out;
}

}  // namespace ueglab
