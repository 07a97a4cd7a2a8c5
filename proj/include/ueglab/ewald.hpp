#pragma once

#include <complex>
#include <span>
#include <vector>

#include "ueglab/cell.hpp"

namespace ueglab {

/// Reciprocal lattice vector from the half space (first nonzero index
/// positive). `weight` is (4 pi / V) exp(-k^2 / 4 alpha^2) / k^2, so a sum
/// over the half space of weight * |S(k)|^2 is the full reciprocal energy.
struct ReciprocalVector {
  std::array<int, 3> index;
  Vec3 k;
  double weight;
};

/// Run of reciprocal vectors sharing their first two indices, with the third
/// index increasing by one from `c_first`.
struct ReciprocalRow {
  int a, b, c_first;
  std::size_t begin, count;
};

/// Ewald splitting for N unit charges in a cubic cell with a uniform
/// neutralizing background and tinfoil boundary conditions.
///
/// The pair potential is
///   v_E(d) = sum_n erfc(alpha |d + nL|) / |d + nL|
///          + (4 pi / V) sum_{k != 0} exp(-k^2 / 4 alpha^2) / k^2 cos(k.d)
///          - pi / (alpha^2 V),
/// which averages to zero over the cell (the k = 0 Hartree term cancels
/// against the background). The image constant xi is the same expression
/// for a charge with its own images, with the bare origin term removed and
/// the Gaussian self energy -2 alpha / sqrt(pi) added.
class EwaldParameters {
 public:
  static constexpr double default_alpha_edge = 6.0;
  static constexpr double default_tolerance = 1e-12;

  /// Splitting alpha = alpha_edge / L. Both cutoffs are chosen so the
  /// neglected terms are below `tolerance` relative to their leading values:
  /// erfc(alpha r_c) <= tolerance and exp(-k_c^2 / 4 alpha^2) <= tolerance.
  static EwaldParameters create(const SimulationCell& cell, double alpha_edge = default_alpha_edge,
                                double tolerance = default_tolerance);

  double alpha() const { return alpha_; }
  double real_space_cutoff() const { return real_cutoff_; }
  int reciprocal_shell_max() const { return shell_max_; }
  double edge_length() const { return edge_; }
  double volume() const { return edge_ * edge_ * edge_; }
  const std::vector<ReciprocalVector>& reciprocal_vectors() const { return recip_; }
  const std::vector<ReciprocalRow>& reciprocal_rows() const { return rows_; }
  /// weight of each reciprocal vector, contiguous.
  const std::vector<double>& reciprocal_weights() const { return weights_; }
  /// Lattice translations that can bring a minimum-image displacement within
  /// the real-space cutoff.
  const std::vector<Vec3>& image_shifts() const { return shifts_; }
  double image_constant() const { return xi_; }
  /// -pi / (alpha^2 V), carried by every pair.
  double pair_constant() const { return pair_constant_; }

  /// v_E for a displacement (any image; minimum-imaged internally).
  double pair_potential(const Vec3& displacement) const;
  /// -grad_d v_E(d): force on the first charge of a pair separated by d.
  Vec3 pair_force(const Vec3& displacement) const;

  /// Real-space part of v_E for a minimum-image displacement.
  double real_space_potential(const Vec3& min_image_displacement) const;
  Vec3 real_space_force(const Vec3& min_image_displacement) const;

 private:
  EwaldParameters() = default;

  double alpha_ = 0;
  double edge_ = 0;
  double real_cutoff_ = 0;
  int shell_max_ = 0;
  double xi_ = 0;
  double pair_constant_ = 0;
  std::vector<ReciprocalVector> recip_;
  std::vector<ReciprocalRow> rows_;
  std::vector<double> weights_;
  std::vector<Vec3> shifts_;
};

/// Separations below this (bohr) are treated as coincident charges.
inline constexpr double coincidence_distance = 1e-10;

/// U = sum_{i<j} v_E(r_i - r_j) + (N/2) xi, evaluated with structure factors.
double total_pair_energy(std::span<const Vec3> positions, const EwaldParameters& params,
                         const SimulationCell& cell);

/// -dU/dr_index.
Vec3 force_on_particle(std::span<const Vec3> positions, std::size_t index,
                       const EwaldParameters& params, const SimulationCell& cell);

/// Structure factors S(k) = sum_j exp(i k.r_j) kept in step with single
/// particle moves, for O(N + N_k) energy differences.
class EwaldCache {
 public:
  EwaldCache(const EwaldParameters& params, const SimulationCell& cell, std::vector<Vec3> positions);

  const std::vector<Vec3>& positions() const { return positions_; }
  double energy() const { return energy_; }

  /// U(after moving `index` to `trial`) - U(now). Leaves the trial phases in
  /// an internal buffer for a following accept(). Throws on coincidence.
  double trial_move(std::size_t index, const Vec3& trial);
  /// Applies the most recent trial_move.
  void accept();

  /// Recomputes structure factors and energy from scratch.
  void refresh();

  /// -dU/dr_index from the cached structure factors.
  Vec3 force_on(std::size_t index) const;

 private:
  void phases(const Vec3& r, std::vector<std::complex<double>>& out) const;
  double real_space_sum(std::size_t index, const Vec3& r) const;

  std::size_t recip_count() const { return params_.reciprocal_vectors().size(); }

  EwaldParameters params_;
  SimulationCell cell_;
  std::vector<Vec3> positions_;
  std::vector<std::complex<double>> structure_;
  // phase_[i * recip_count() + k] = exp(i k.r_i)
  std::vector<std::complex<double>> phase_;
  std::vector<std::complex<double>> new_phase_;
  mutable std::vector<std::complex<double>> table_;
  double energy_ = 0;
  double pending_delta_ = 0;
  std::size_t pending_index_ = 0;
  Vec3 pending_position_{};
  bool pending_ = false;
};

}  // namespace ueglab
