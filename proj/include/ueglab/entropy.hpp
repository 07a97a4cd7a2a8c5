#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ueglab {

enum class LogBase { natural, two };

/// A uniform density, or a spherically symmetric density tabulated on a
/// radial grid. Radial integrals use the trapezoid rule with weights 4 pi r^2.
class GriddedDensity {
 public:
  enum class Kind { uniform, radial };

  /// rho = norm / volume everywhere in a region of the given volume.
  static GriddedDensity uniform(double norm, double volume);
  /// Strictly increasing radii (bohr), rho >= 0. The quadrature of rho must
  /// reproduce `norm` within 1e-6 relative.
  static GriddedDensity radial(std::vector<double> radii, std::vector<double> values, double norm);

  Kind kind() const { return kind_; }
  double norm() const { return norm_; }
  double volume() const { return volume_; }  // uniform only
  const std::vector<double>& radii() const { return radii_; }
  /// One value for a uniform density, one per radius otherwise.
  const std::vector<double>& values() const { return values_; }

  /// sigma = rho / norm, normalized to 1.
  GriddedDensity normalized() const;

  /// Integral of g(r) over the domain, g given on the grid.
  double integrate(std::span<const double> g) const;

 private:
  GriddedDensity() = default;
  Kind kind_ = Kind::uniform;
  double norm_ = 0;
  double volume_ = 0;
  std::vector<double> radii_;
  std::vector<double> values_;
};

/// -sum p log p, with 0 log 0 = 0. p_i >= 0 and sum p = 1 within 1e-9.
double shannon_discrete(std::span<const double> p, LogBase base = LogBase::natural);
/// -integral rho log rho.
double shannon_continuous(const GriddedDensity& density);
/// s = -rho log rho on the density's grid.
std::vector<double> entropy_density(const GriddedDensity& density);
/// |grad(-log rho)| on the radial grid: central differences inside,
/// second-order one-sided differences at the ends. Needs >= 3 points and
/// rho > 0 everywhere. A uniform density yields {0}.
std::vector<double> local_wavevector(const GriddedDensity& density);
/// (1/8) integral |grad rho|^2 / rho; zero for a uniform density.
double fisher_weizsacker(const GriddedDensity& density);
/// J = exp(2 S / 3) / (2 pi).
double dehesa_measure(double entropy);

/// Joint counts over binned radii (r1, r2).
class PairHistogram {
 public:
  /// Bin edges strictly increasing, at least two per axis.
  PairHistogram(std::vector<double> edges1, std::vector<double> edges2);
  /// Counts given directly, row-major [bin1][bin2].
  PairHistogram(std::vector<double> edges1, std::vector<double> edges2, std::vector<double> counts);

  /// Adds a sample; values outside the edges are ignored and return false.
  bool add(double r1, double r2, double weight = 1.0);

  std::size_t bins1() const { return edges1_.size() - 1; }
  std::size_t bins2() const { return edges2_.size() - 1; }
  double count(std::size_t i, std::size_t j) const { return counts_[i * bins2() + j]; }
  double total() const { return total_; }
  std::vector<double> marginal1() const;
  std::vector<double> marginal2() const;
  const std::vector<double>& edges1() const { return edges1_; }
  const std::vector<double>& edges2() const { return edges2_; }

 private:
  std::vector<double> edges1_, edges2_;
  std::vector<double> counts_;
  double total_ = 0;
};

/// Plug-in estimate sum p12 log(p12 / (p1 p2)) over occupied bins; rounding
/// below zero is clipped. Its upward bias for independent data is about
/// mutual_information_bias(h).
double mutual_information(const PairHistogram& histogram);
/// (bins1 - 1)(bins2 - 1) / (2 total).
double mutual_information_bias(const PairHistogram& histogram);

/// Shannon entropy of a diagonal density matrix, natural log.
double von_neumann(std::span<const double> eigenvalues);

struct OccupationList {
  std::vector<double> occupations;  // each in [0, 1]
  double scale = 1.0;               // hartree
};
/// scale * sum n log n.
double collins_sum(const OccupationList& occupations);

/// rho(k) tabulated against k / k_F. The grid starts at 0, reaches at least
/// 2 and is non-decreasing: a repeated abscissa marks a jump, so piecewise
/// constant distributions integrate exactly.
struct MomentumDistribution {
  std::vector<double> k;
  std::vector<double> values;
};
/// -integral rho(k) log rho(k) d(k/k_F).
double ziesche_entropy(const MomentumDistribution& distribution);

}  // namespace ueglab
