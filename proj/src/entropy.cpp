#include "ueglab/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "ueglab/error.hpp"

namespace ueglab {
namespace {

constexpr double pi = std::numbers::pi;

double xlogx(double x) { return x > 0 ? x * std::log(x) : 0.0; }

void check_probabilities(std::span<const double> p) {
  require(!p.empty(), "probability sequence is empty");
  double sum = 0;
  for (double x : p) {
    require(x >= 0 && std::isfinite(x), "probabilities must be finite and non-negative");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "probabilities sum to " << sum << ", not 1";
    fail(ErrorCode::invalid_argument, msg.str());
  }
}

// d/dr on a non-uniform grid; exact for quadratics.
std::vector<double> derivative(std::span<const double> r, std::span<const double> y) {
  const std::size_t n = r.size();
  std::vector<double> out(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hm = r[i] - r[i - 1], hp = r[i + 1] - r[i];
    out[i] = (hm * hm * y[i + 1] - hp * hp * y[i - 1] + (hp * hp - hm * hm) * y[i]) / (hm * hp * (hm + hp));
  }
  auto one_sided = [&](std::size_t a, std::size_t b, std::size_t c) {
    // derivative at r[a] from the quadratic through a, b, c
    const double h1 = r[b] - r[a], h2 = r[c] - r[a];
    return (-(h1 + h2) / (h1 * h2)) * y[a] + (h2 / (h1 * (h2 - h1))) * y[b] - (h1 / (h2 * (h2 - h1))) * y[c];
  };
  out[0] = one_sided(0, 1, 2);
  out[n - 1] = one_sided(n - 1, n - 2, n - 3);
  return out;
}

std::vector<double> minus_log(const GriddedDensity& d) {
  std::vector<double> y;
  for (std::size_t i = 0; i < d.values().size(); ++i) {
    const double rho = d.values()[i];
    if (!(rho > 0))
      fail(ErrorCode::invalid_argument,
           "gradient functionals need rho > 0; grid point " + std::to_string(i) + " has rho = " + std::to_string(rho));
    y.push_back(-std::log(rho));
  }
  return y;
}

}  // namespace

GriddedDensity GriddedDensity::uniform(double norm, double volume) {
  require(norm > 0 && std::isfinite(norm), "uniform density needs a positive norm");
  require(volume > 0 && std::isfinite(volume), "uniform density needs a positive volume");
  GriddedDensity d;
  d.kind_ = Kind::uniform;
  d.norm_ = norm;
  d.volume_ = volume;
  d.values_ = {norm / volume};
  return d;
}

GriddedDensity GriddedDensity::radial(std::vector<double> radii, std::vector<double> values, double norm) {
  require(radii.size() >= 2, "radial density needs at least two grid points");
  require(radii.size() == values.size(), "radii and values differ in length");
  require(norm > 0 && std::isfinite(norm), "radial density needs a positive norm");
  require(radii.front() >= 0, "radii must be non-negative");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    require(std::isfinite(radii[i]) && std::isfinite(values[i]), "radial density contains a non-finite entry");
    require(values[i] >= 0, "density values must be non-negative");
    if (i > 0) require(radii[i] > radii[i - 1], "radii must be strictly increasing");
  }
  GriddedDensity d;
  d.kind_ = Kind::radial;
  d.norm_ = norm;
  d.radii_ = std::move(radii);
  d.values_ = std::move(values);
  const double q = d.integrate(d.values_);
  if (std::abs(q - norm) > 1e-6 * norm) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "density integrates to " << q << " but its declared norm is " << norm;
    fail(ErrorCode::invalid_argument, msg.str());
  }
  return d;
}

GriddedDensity GriddedDensity::normalized() const {
  GriddedDensity d = *this;
  for (auto& v : d.values_) v /= norm_;
  d.norm_ = 1.0;
  return d;
}

double GriddedDensity::integrate(std::span<const double> g) const {
  require(g.size() == values_.size(), "integrand does not match the density grid");
  if (kind_ == Kind::uniform) return g[0] * volume_;
  double sum = 0;
  for (std::size_t i = 0; i + 1 < radii_.size(); ++i) {
    const double a = radii_[i], b = radii_[i + 1];
    sum += 0.5 * (b - a) * (a * a * g[i] + b * b * g[i + 1]);
  }
  return 4 * pi * sum;
}

double shannon_discrete(std::span<const double> p, LogBase base) {
  check_probabilities(p);
  double s = 0;
  for (double x : p) s -= xlogx(x);
  return base == LogBase::two ? s / std::numbers::ln2 : s;
}

std::vector<double> entropy_density(const GriddedDensity& density) {
  std::vector<double> s;
  for (double rho : density.values()) s.push_back(-xlogx(rho));
  return s;
}

double shannon_continuous(const GriddedDensity& density) {
  if (density.kind() == GriddedDensity::Kind::uniform) {
    const double n = density.norm();
    return -n * std::log(n / density.volume());
  }
  return density.integrate(entropy_density(density));
}

std::vector<double> local_wavevector(const GriddedDensity& density) {
  if (density.kind() == GriddedDensity::Kind::uniform) return {0.0};
  require(density.radii().size() >= 3, "local wave-vector needs at least three grid points");
  auto k = derivative(density.radii(), minus_log(density));
  for (auto& x : k) x = std::abs(x);
  return k;
}

double fisher_weizsacker(const GriddedDensity& density) {
  if (density.kind() == GriddedDensity::Kind::uniform) return 0.0;
  const auto k = local_wavevector(density);
  std::vector<double> g(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) g[i] = density.values()[i] * k[i] * k[i];
  return density.integrate(g) / 8.0;
}

double dehesa_measure(double entropy) { return std::exp(2.0 * entropy / 3.0) / (2.0 * pi); }

PairHistogram::PairHistogram(std::vector<double> edges1, std::vector<double> edges2)
    : edges1_(std::move(edges1)), edges2_(std::move(edges2)) {
  for (const auto* e : {&edges1_, &edges2_}) {
    require(e->size() >= 2, "histogram axes need at least two edges");
    for (std::size_t i = 1; i < e->size(); ++i) require((*e)[i] > (*e)[i - 1], "bin edges must increase");
  }
  counts_.assign(bins1() * bins2(), 0.0);
}

PairHistogram::PairHistogram(std::vector<double> edges1, std::vector<double> edges2, std::vector<double> counts)
    : PairHistogram(std::move(edges1), std::move(edges2)) {
  require(counts.size() == counts_.size(), "count table does not match the bin layout");
  for (double c : counts) {
    require(c >= 0 && std::isfinite(c), "counts must be finite and non-negative");
    total_ += c;
  }
  counts_ = std::move(counts);
}

bool PairHistogram::add(double r1, double r2, double weight) {
  require(weight >= 0 && std::isfinite(weight), "sample weight must be non-negative");
  auto bin = [](const std::vector<double>& e, double r) -> std::ptrdiff_t {
    if (!(r >= e.front()) || !(r < e.back())) return -1;
    return std::upper_bound(e.begin(), e.end(), r) - e.begin() - 1;
  };
  const auto i = bin(edges1_, r1), j = bin(edges2_, r2);
  if (i < 0 || j < 0) return false;
  counts_[static_cast<std::size_t>(i) * bins2() + static_cast<std::size_t>(j)] += weight;
  total_ += weight;
  return true;
}

std::vector<double> PairHistogram::marginal1() const {
  std::vector<double> m(bins1(), 0.0);
  for (std::size_t i = 0; i < bins1(); ++i)
    for (std::size_t j = 0; j < bins2(); ++j) m[i] += count(i, j);
  return m;
}

std::vector<double> PairHistogram::marginal2() const {
  std::vector<double> m(bins2(), 0.0);
  for (std::size_t i = 0; i < bins1(); ++i)
    for (std::size_t j = 0; j < bins2(); ++j) m[j] += count(i, j);
  return m;
}

double mutual_information(const PairHistogram& h) {
  if (!(h.total() > 0)) fail(ErrorCode::insufficient_data, "mutual information of an empty histogram");
  const auto m1 = h.marginal1(), m2 = h.marginal2();
  const double n = h.total();
  double info = 0;
  for (std::size_t i = 0; i < h.bins1(); ++i)
    for (std::size_t j = 0; j < h.bins2(); ++j) {
      const double c = h.count(i, j);
      if (c > 0) info += (c / n) * std::log(c * n / (m1[i] * m2[j]));
    }
  return std::max(0.0, info);
}

double mutual_information_bias(const PairHistogram& h) {
  if (!(h.total() > 0)) fail(ErrorCode::insufficient_data, "bias bound of an empty histogram");
  return double(h.bins1() - 1) * double(h.bins2() - 1) / (2.0 * h.total());
}

double von_neumann(std::span<const double> eigenvalues) { return shannon_discrete(eigenvalues, LogBase::natural); }

double collins_sum(const OccupationList& occ) {
  require(std::isfinite(occ.scale), "Collins scale must be finite");
  double sum = 0;
  for (double n : occ.occupations) {
    require(n >= 0 && n <= 1, "occupation numbers must lie in [0, 1]");
    sum += xlogx(n);
  }
  return occ.scale * sum;
}

double ziesche_entropy(const MomentumDistribution& m) {
  const auto& k = m.k;
  require(k.size() >= 2 && k.size() == m.values.size(), "momentum grid and values must match, two points minimum");
  require(k.front() == 0.0, "momentum grid must start at k = 0");
  require(k.back() >= 2.0, "momentum grid must reach at least 2 k_F");
  for (std::size_t i = 0; i < k.size(); ++i) {
    require(m.values[i] >= 0 && std::isfinite(m.values[i]), "momentum distribution values must be non-negative");
    if (i > 0) require(k[i] >= k[i - 1], "momentum grid must not decrease");
  }
  double s = 0;
  for (std::size_t i = 0; i + 1 < k.size(); ++i)
    s += 0.5 * (k[i + 1] - k[i]) * (xlogx(m.values[i]) + xlogx(m.values[i + 1]));
  return s == 0.0 ? 0.0 : -s;
}

}  // namespace ueglab
