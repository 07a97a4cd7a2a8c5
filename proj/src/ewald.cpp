#include "ueglab/ewald.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ueglab/error.hpp"

namespace ueglab {
namespace {

constexpr double pi = std::numbers::pi;
const double two_over_sqrt_pi = 2.0 / std::sqrt(pi);

// Smallest x with erfc(x) <= tolerance.
double inverse_erfc(double tolerance) {
  double lo = 0.0, hi = 30.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (std::erfc(mid) > tolerance)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

void check_separation(double r) {
  if (r < coincidence_distance)
    fail(ErrorCode::degenerate_configuration,
         "coincident charges (separation " + std::to_string(r) + " bohr)");
}

}  // namespace

EwaldParameters EwaldParameters::create(const SimulationCell& cell, double alpha_edge, double tolerance) {
  require(alpha_edge > 0 && std::isfinite(alpha_edge), "Ewald alpha*L must be positive");
  require(tolerance > 0 && tolerance < 1, "Ewald tolerance must lie in (0, 1)");

  EwaldParameters p;
  p.edge_ = cell.edge_length();
  const double L = p.edge_;
  p.alpha_ = alpha_edge / L;
  p.real_cutoff_ = inverse_erfc(tolerance) / p.alpha_;
  const double k_cut = 2.0 * p.alpha_ * std::sqrt(-std::log(tolerance));
  const double n_cut = k_cut * L / (2.0 * pi);
  p.shell_max_ = static_cast<int>(std::floor(n_cut));
  p.pair_constant_ = -pi / (p.alpha_ * p.alpha_ * p.volume());

  const double four_pi_over_v = 4.0 * pi / p.volume();
  const double two_pi_over_l = 2.0 * pi / L;
  const int m = p.shell_max_;
  for (int a = 0; a <= m; ++a)
    for (int b = -m; b <= m; ++b)
      for (int c = -m; c <= m; ++c) {
        const bool half_space = a > 0 || (a == 0 && b > 0) || (a == 0 && b == 0 && c > 0);
        if (!half_space) continue;
        if (double(a * a + b * b + c * c) > n_cut * n_cut) continue;
        const Vec3 k{two_pi_over_l * a, two_pi_over_l * b, two_pi_over_l * c};
        const double k2 = norm2(k);
        const double weight = four_pi_over_v * std::exp(-k2 / (4.0 * p.alpha_ * p.alpha_)) / k2;
        if (p.rows_.empty() || p.rows_.back().a != a || p.rows_.back().b != b)
          p.rows_.push_back({a, b, c, p.recip_.size(), 0});
        ++p.rows_.back().count;
        p.recip_.push_back({{a, b, c}, k, weight});
        p.weights_.push_back(weight);
      }

  // For a minimum-image d, |d_c + n_c L| >= max(0, |n_c| L - L/2) per component.
  const int reach = static_cast<int>(std::ceil(p.real_cutoff_ / L + 1.0));
  auto closest = [L](int n) { return std::max(0.0, (std::abs(n) - 0.5) * L); };
  for (int a = -reach; a <= reach; ++a)
    for (int b = -reach; b <= reach; ++b)
      for (int c = -reach; c <= reach; ++c) {
        const double ca = closest(a), cb = closest(b), cc = closest(c);
        if (ca * ca + cb * cb + cc * cc < p.real_cutoff_ * p.real_cutoff_)
          p.shifts_.push_back({a * L, b * L, c * L});
      }

  double xi = 0.0;
  for (int a = -reach; a <= reach; ++a)
    for (int b = -reach; b <= reach; ++b)
      for (int c = -reach; c <= reach; ++c) {
        if (a == 0 && b == 0 && c == 0) continue;
        const double r = L * std::sqrt(double(a * a + b * b + c * c));
        if (r < p.real_cutoff_) xi += std::erfc(p.alpha_ * r) / r;
      }
  for (const auto& g : p.recip_) xi += 2.0 * g.weight;
  xi += -p.alpha_ * two_over_sqrt_pi + p.pair_constant_;
  p.xi_ = xi;
  return p;
}

double EwaldParameters::real_space_potential(const Vec3& d) const {
  double sum = 0.0;
  const double rc2 = real_cutoff_ * real_cutoff_;
  for (const auto& s : shifts_) {
    const Vec3 r = d + s;
    const double r2 = norm2(r);
    if (r2 >= rc2) continue;
    const double rr = std::sqrt(r2);
    check_separation(rr);
    sum += std::erfc(alpha_ * rr) / rr;
  }
  return sum;
}

Vec3 EwaldParameters::real_space_force(const Vec3& d) const {
  Vec3 f{0, 0, 0};
  const double rc2 = real_cutoff_ * real_cutoff_;
  for (const auto& s : shifts_) {
    const Vec3 r = d + s;
    const double r2 = norm2(r);
    if (r2 >= rc2) continue;
    const double rr = std::sqrt(r2);
    check_separation(rr);
    const double ar = alpha_ * rr;
    const double mag = (std::erfc(ar) / rr + alpha_ * two_over_sqrt_pi * std::exp(-ar * ar)) / r2;
    f += mag * r;
  }
  return f;
}

double EwaldParameters::pair_potential(const Vec3& displacement) const {
  const double L = edge_;
  Vec3 d = displacement;
  for (auto& x : d) x -= L * std::floor(x / L + 0.5);
  double v = real_space_potential(d);
  for (const auto& g : recip_) v += 2.0 * g.weight * std::cos(dot(g.k, d));
  return v + pair_constant_;
}

Vec3 EwaldParameters::pair_force(const Vec3& displacement) const {
  const double L = edge_;
  Vec3 d = displacement;
  for (auto& x : d) x -= L * std::floor(x / L + 0.5);
  Vec3 f = real_space_force(d);
  for (const auto& g : recip_) f += (2.0 * g.weight * std::sin(dot(g.k, d))) * g.k;
  return f;
}

double total_pair_energy(std::span<const Vec3> positions, const EwaldParameters& params,
                         const SimulationCell& cell) {
  return EwaldCache(params, cell, {positions.begin(), positions.end()}).energy();
}

Vec3 force_on_particle(std::span<const Vec3> positions, std::size_t index, const EwaldParameters& params,
                       const SimulationCell& cell) {
  require(index < positions.size(), "particle index out of range");
  return EwaldCache(params, cell, {positions.begin(), positions.end()}).force_on(index);
}

EwaldCache::EwaldCache(const EwaldParameters& params, const SimulationCell& cell, std::vector<Vec3> positions)
    : params_(params), cell_(cell), positions_(std::move(positions)) {
  require(std::abs(params_.edge_length() - cell_.edge_length()) <= 1e-12 * cell_.edge_length(),
          "Ewald parameters were built for a different cell");
  refresh();
}

namespace {

// Plain complex product; std::complex operator* carries inf/nan recovery
// that blocks vectorization.
inline std::complex<double> mul(std::complex<double> a, std::complex<double> b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

}  // namespace

void EwaldCache::phases(const Vec3& r, std::vector<std::complex<double>>& out) const {
  const int m = params_.reciprocal_shell_max();
  const std::size_t width = 2 * m + 1;
  table_.resize(3 * width);
  const double two_pi_over_l = 2.0 * std::numbers::pi / params_.edge_length();
  for (int d = 0; d < 3; ++d) {
    auto* t = table_.data() + d * width + m;  // t[j] = exp(i 2 pi j x / L), j in [-m, m]
    const std::complex<double> unit = std::polar(1.0, two_pi_over_l * r[d]);
    t[0] = 1.0;
    for (int j = 1; j <= m; ++j) {
      t[j] = mul(t[j - 1], unit);
      t[-j] = std::conj(t[j]);
    }
  }
  out.resize(recip_count());
  const auto* tx = table_.data() + m;
  const auto* ty = table_.data() + width + m;
  const auto* tz = table_.data() + 2 * width + m;
  for (const auto& row : params_.reciprocal_rows()) {
    const std::complex<double> txy = mul(tx[row.a], ty[row.b]);
    const auto* z = tz + row.c_first;
    auto* o = out.data() + row.begin;
    for (std::size_t j = 0; j < row.count; ++j) o[j] = mul(txy, z[j]);
  }
}

double EwaldCache::real_space_sum(std::size_t index, const Vec3& r) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < positions_.size(); ++j) {
    if (j == index) continue;
    sum += params_.real_space_potential(cell_.minimum_image(r - positions_[j]));
  }
  return sum;
}

void EwaldCache::refresh() {
  const std::size_t n = positions_.size();
  const std::size_t nk = recip_count();
  structure_.assign(nk, 0.0);
  phase_.resize(n * nk);
  std::vector<std::complex<double>> row;
  for (std::size_t i = 0; i < n; ++i) {
    phases(positions_[i], row);
    std::copy(row.begin(), row.end(), phase_.begin() + i * nk);
    for (std::size_t k = 0; k < nk; ++k) structure_[k] += row[k];
  }

  double real = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      real += params_.real_space_potential(cell_.minimum_image(positions_[i] - positions_[j]));

  double recip = 0.0, self = 0.0;
  const auto& vecs = params_.reciprocal_vectors();
  for (std::size_t k = 0; k < nk; ++k) {
    recip += vecs[k].weight * std::norm(structure_[k]);
    self += vecs[k].weight;
  }
  const double count = static_cast<double>(n);
  energy_ = real + recip - count * self + 0.5 * count * (count - 1.0) * params_.pair_constant() +
            0.5 * count * params_.image_constant();
  pending_ = false;
}

double EwaldCache::trial_move(std::size_t index, const Vec3& trial) {
  require(index < positions_.size(), "particle index out of range");
  const Vec3 r_new = cell_.wrap(trial);
  const double real = real_space_sum(index, r_new) - real_space_sum(index, positions_[index]);

  phases(r_new, new_phase_);
  const std::size_t nk = recip_count();
  const auto* old_row = phase_.data() + index * nk;
  const double* weight = params_.reciprocal_weights().data();
  double recip = 0.0;
  for (std::size_t k = 0; k < nk; ++k) {
    const double dr = new_phase_[k].real() - old_row[k].real();
    const double di = new_phase_[k].imag() - old_row[k].imag();
    const double sr = structure_[k].real(), si = structure_[k].imag();
    recip += weight[k] * (2.0 * (sr * dr + si * di) + dr * dr + di * di);
  }
  pending_delta_ = real + recip;
  pending_index_ = index;
  pending_position_ = r_new;
  pending_ = true;
  return pending_delta_;
}

void EwaldCache::accept() {
  require(pending_, "accept() without a preceding trial_move()");
  const std::size_t nk = recip_count();
  auto* row = phase_.data() + pending_index_ * nk;
  for (std::size_t k = 0; k < nk; ++k) {
    structure_[k] += new_phase_[k] - row[k];
    row[k] = new_phase_[k];
  }
  positions_[pending_index_] = pending_position_;
  energy_ += pending_delta_;
  pending_ = false;
}

Vec3 EwaldCache::force_on(std::size_t index) const {
  require(index < positions_.size(), "particle index out of range");
  Vec3 f{0, 0, 0};
  const Vec3& r = positions_[index];
  for (std::size_t j = 0; j < positions_.size(); ++j) {
    if (j == index) continue;
    f += params_.real_space_force(cell_.minimum_image(r - positions_[j]));
  }
  const std::size_t nk = recip_count();
  const auto* row = phase_.data() + index * nk;
  const auto& vecs = params_.reciprocal_vectors();
  for (std::size_t k = 0; k < nk; ++k) {
    // Im[exp(i k.r) conj(S)]
    const double im = row[k].imag() * structure_[k].real() - row[k].real() * structure_[k].imag();
    f += (2.0 * vecs[k].weight * im) * vecs[k].k;
  }
  return f;
}

}  // namespace ueglab
