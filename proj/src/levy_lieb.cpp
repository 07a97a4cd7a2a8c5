#include "ueglab/levy_lieb.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "ueglab/error.hpp"
#include "ueglab/estimators.hpp"
#include "ueglab/parallel.hpp"

namespace ueglab {
namespace {

constexpr const char* flag_labels[] = {"vertex_outside_bracket", "boundary_minimum", "nonconvex",
                                       "grid_beats_optimum"};

std::size_t argmin(std::span<const double> w) {
  return static_cast<std::size_t>(std::min_element(w.begin(), w.end()) - w.begin());
}

bool same_gamma(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

}  // namespace

std::vector<std::string> flag_names(unsigned flags) {
  std::vector<std::string> out;
  for (unsigned bit = 0; bit < std::size(flag_labels); ++bit)
    if (flags & (1u << bit)) out.emplace_back(flag_labels[bit]);
  return out;
}

std::string join_flags(unsigned flags) {
  std::string out;
  for (const auto& name : flag_names(flags)) out += (out.empty() ? "" : ";") + name;
  return out;
}

VertexFit fit_vertex(std::span<const double> gamma, std::span<const double> w, std::span<const double> w_error,
                     double lo, double hi) {
  const std::size_t n = gamma.size();
  require(n >= 3, "a vertex fit needs at least three grid points");
  require(w.size() == n && w_error.size() == n, "grid, objective and error lengths differ");
  require(lo <= hi, "bracket is reversed");
  for (std::size_t i = 1; i < n; ++i) require(gamma[i] > gamma[i - 1], "gamma grid must be strictly increasing");

  VertexFit fit;
  const std::size_t m = argmin(w);
  fit.count = std::min<std::size_t>(5, n);
  fit.first = std::min(m > 2 ? m - 2 : 0, n - fit.count);
  fit.center = gamma[m];

  const bool weighted = std::all_of(w_error.begin(), w_error.end(), [](double e) { return e > 0; });
  Eigen::MatrixXd design(fit.count, 3);
  Eigen::VectorXd rhs(fit.count), weight(fit.count);
  for (std::size_t i = 0; i < fit.count; ++i) {
    const std::size_t g = fit.first + i;
    const double x = gamma[g] - fit.center;
    design.row(i) << 1.0, x, x * x;
    rhs(i) = w[g];
    weight(i) = weighted ? 1.0 / (w_error[g] * w_error[g]) : 1.0;
  }
  const Eigen::Matrix3d normal = design.transpose() * weight.asDiagonal() * design;
  const Eigen::Vector3d coef = normal.ldlt().solve(design.transpose() * weight.asDiagonal() * rhs);
  Eigen::Matrix3d cov = normal.inverse();
  if (!weighted) {
    const Eigen::VectorXd resid = rhs - design * coef;
    const double dof = static_cast<double>(fit.count) - 3.0;
    cov *= dof > 0 ? resid.squaredNorm() / dof : 0.0;
  }
  fit.c0 = coef(0);
  fit.c1 = coef(1);
  fit.c2 = coef(2);

  if (m == 0 && same_gamma(gamma[0], lo)) fit.flags |= flag_boundary_minimum;
  if (m == n - 1 && same_gamma(gamma[n - 1], hi)) fit.flags |= flag_boundary_minimum;

  if (!(fit.c2 > 0)) {
    fit.flags |= flag_nonconvex;
    fit.gamma_star = gamma[m];
    const double left = m > 0 ? gamma[m] - gamma[m - 1] : 0.0;
    const double right = m + 1 < n ? gamma[m + 1] - gamma[m] : 0.0;
    fit.gamma_star_error = 0.5 * std::max(left, right);
    return fit;
  }
  const double vertex = fit.center - fit.c1 / (2 * fit.c2);
  const Eigen::Vector2d jac(-1.0 / (2 * fit.c2), fit.c1 / (2 * fit.c2 * fit.c2));
  const double variance = jac.dot(cov.block<2, 2>(1, 1) * jac);
  fit.gamma_star_error = std::sqrt(std::max(0.0, variance));
  if (vertex < lo || vertex > hi) {
    fit.flags |= flag_vertex_outside_bracket;
    fit.gamma_star = vertex < lo ? lo : hi;
  } else {
    fit.gamma_star = vertex;
  }
  return fit;
}

GammaScan scan_objective(const GammaSearch& search, const GammaEvaluator& evaluate) {
  require(search.lo >= 0 && std::isfinite(search.hi), "gamma bracket must satisfy 0 <= lo <= hi");
  require(search.hi >= search.lo, "gamma bracket must satisfy 0 <= lo <= hi");
  GammaScan scan;
  scan.search = search;
  if (search.hi == search.lo) {
    scan.gamma_star = search.lo;
    return scan;
  }
  require(search.grid_size >= 5, "grid_size must be at least 5");

  auto absorb = [&](std::vector<GammaPoint> fresh, std::size_t expected) {
    require(fresh.size() == expected, "evaluator returned the wrong number of points");
    if (fresh.empty()) return;
    for (auto& p : fresh) scan.points.push_back(std::move(p));
    std::sort(scan.points.begin(), scan.points.end(),
              [](const GammaPoint& a, const GammaPoint& b) { return a.gamma < b.gamma; });
  };

  const std::size_t g = search.grid_size;
  std::vector<double> grid(g);
  for (std::size_t i = 0; i < g; ++i)
    grid[i] = i + 1 == g ? search.hi : search.lo + (search.hi - search.lo) * double(i) / double(g - 1);
  absorb(evaluate(grid, 0), g);

  for (std::size_t pass = 1; pass <= search.refine_passes; ++pass) {
    std::size_t m = 0;
    for (std::size_t i = 1; i < scan.points.size(); ++i)
      if (scan.points[i].w.mean < scan.points[m].w.mean) m = i;
    const double left = scan.points[m > 0 ? m - 1 : 0].gamma;
    const double right = scan.points[std::min(m + 1, scan.points.size() - 1)].gamma;
    std::vector<double> fresh;
    for (std::size_t j = 0; j < g; ++j) {
      const double x = left + (right - left) * double(j + 1) / double(g + 1);
      const bool known = std::any_of(scan.points.begin(), scan.points.end(),
                                     [&](const GammaPoint& p) { return same_gamma(p.gamma, x); });
      if (!known) fresh.push_back(x);
    }
    absorb(evaluate(fresh, pass), fresh.size());
  }

  std::vector<double> gammas, ws, errs;
  for (const auto& p : scan.points) {
    gammas.push_back(p.gamma);
    ws.push_back(p.w.mean);
    errs.push_back(p.w.error);
  }
  scan.fit = fit_vertex(gammas, ws, errs, search.lo, search.hi);
  scan.gamma_star = scan.fit.gamma_star;
  scan.gamma_star_error = scan.fit.gamma_star_error;
  scan.flags = scan.fit.flags;
  return scan;
}

std::vector<GammaPoint> evaluate_gammas(double density, const ChainPlan& plan, std::span<const double> gammas,
                                        std::size_t replicas, std::uint64_t stream_offset) {
  require(replicas >= 1, "at least one replica per gamma is required");
  const auto cell = SimulationCell::from_density(plan.electrons, density);
  const auto ewald = EwaldParameters::create(cell, plan.ewald.alpha_edge, plan.ewald.tolerance);

  const std::size_t chains = gammas.size() * replicas;
  std::vector<ChainResult> results(chains);
  parallel_for(chains, plan.lanes, [&](std::size_t c) {
    const ConditionalModel model(gammas[c / replicas], cell, ewald);
    results[c] = run_chain(model, plan.sampler, plan.master_seed, plan.stream_base + stream_offset + c);
  });

  std::vector<GammaPoint> points(gammas.size());
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    auto& point = points[i];
    point.gamma = gammas[i];
    BlockAccumulator pooled;
    for (std::size_t r = 0; r < replicas; ++r) {
      const std::size_t c = i * replicas + r;
      auto& res = results[c];
      pooled = merge(pooled, res.accumulator);
      point.chains.push_back({gammas[i], plan.stream_base + stream_offset + c, res.seed, res.acceptance,
                              res.proposal_width, std::move(res.warnings)});
    }
    point.w = objective(pooled, point.gamma);
    point.t_nloc = nonlocal_kinetic(pooled, point.gamma);
    point.v_ee = pair_energy(pooled);
  }
  return points;
}

GammaScan optimize_gamma(double density, const ChainPlan& plan, const GammaSearch& search) {
  require(density > 0, "density must be positive");
  require(search.replicas >= 2, "replicas must be at least 2");
  const std::uint64_t per_pass = search.grid_size * search.replicas;
  return scan_objective(search, [&](std::span<const double> gammas, std::size_t pass) {
    return evaluate_gammas(density, plan, gammas, search.replicas, pass * per_pass);
  });
}

}  // namespace ueglab
