#pragma once

#include <array>
#include <cmath>

namespace ueglab {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline Vec3& operator+=(Vec3& a, const Vec3& b) {
  a[0] += b[0];
  a[1] += b[1];
  a[2] += b[2];
  return a;
}
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }

/// Wigner-Seitz radius (bohr) of a uniform gas with `density` electrons per bohr^3.
double density_to_rs(double density);
/// Inverse of density_to_rs.
double rs_to_density(double rs);

/// Periodic cubic cell holding `electron_count` electrons; Hartree atomic units.
class SimulationCell {
 public:
  SimulationCell(int electron_count, double edge_length);
  static SimulationCell from_density(int electron_count, double density);

  int electron_count() const { return electron_count_; }
  double edge_length() const { return edge_length_; }
  double volume() const { return edge_length_ * edge_length_ * edge_length_; }
  double density() const { return density_; }
  double wigner_seitz_radius() const { return rs_; }

  /// Maps each component into [-L/2, L/2).
  Vec3 minimum_image(const Vec3& displacement) const;
  /// Maps each component into [0, L).
  Vec3 wrap(const Vec3& position) const;

 private:
  int electron_count_;
  double edge_length_;
  double density_;
  double rs_;
};

inline Vec3 minimum_image(const Vec3& displacement, const SimulationCell& cell) {
  return cell.minimum_image(displacement);
}

}  // namespace ueglab
