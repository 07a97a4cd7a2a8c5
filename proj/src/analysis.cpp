#include "ueglab/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "ueglab/error.hpp"
#include "ueglab/format.hpp"

namespace ueglab {
namespace {

bool in_window(double x, double lo, double hi) {
  const double slack = 1e-12;
  return x >= lo * (1 - slack) && x <= hi * (1 + slack);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

}  // namespace

LogFitResult fit_log_model(const std::vector<FitPoint>& points, double window_lo, double window_hi) {
  require(window_lo > 0 && window_hi >= window_lo, "fit window must satisfy 0 < lo <= hi");
  std::vector<FitPoint> used;
  for (const auto& p : points) {
    require(p.density > 0 && std::isfinite(p.density), "fit densities must be positive");
    if (!in_window(p.density, window_lo, window_hi)) continue;
    require(p.error > 0 && std::isfinite(p.error), "fit errors must be positive");
    require(std::isfinite(p.value), "fit values must be finite");
    used.push_back(p);
  }
  if (used.size() < 3)
    fail(ErrorCode::insufficient_data, "log fit needs at least 3 points in [" + format_number(window_lo) + ", " +
                                           format_number(window_hi) + "], found " + std::to_string(used.size()));
  const auto [lo_it, hi_it] = std::minmax_element(
      used.begin(), used.end(), [](const FitPoint& a, const FitPoint& b) { return a.density < b.density; });
  if (lo_it->density == hi_it->density)
    fail(ErrorCode::invalid_argument, "log fit is singular: every point has the same density");

  const std::size_t n = used.size();
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd y(n), weight(n);
  for (std::size_t i = 0; i < n; ++i) {
    design.row(i) << 1.0, std::log(used[i].density);
    y(i) = used[i].value;
    weight(i) = 1.0 / (used[i].error * used[i].error);
  }
  const Eigen::Matrix2d normal = design.transpose() * weight.asDiagonal() * design;
  const Eigen::Vector2d coef = normal.ldlt().solve(design.transpose() * weight.asDiagonal() * y);
  const Eigen::Matrix2d cov = normal.inverse();

  LogFitResult fit;
  fit.a = coef(0);
  fit.b = coef(1);
  fit.a_error = std::sqrt(cov(0, 0));
  fit.b_error = std::sqrt(cov(1, 1));
  fit.cov_ab = cov(0, 1);
  const double y_bar = weight.dot(y) / weight.sum();
  const Eigen::VectorXd resid = y - design * coef;
  const double ss_res = weight.dot(resid.cwiseProduct(resid));
  const Eigen::VectorXd dev = y.array() - y_bar;
  const double ss_tot = weight.dot(dev.cwiseProduct(dev));
  fit.r2 = ss_tot > 0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  fit.window_lo = lo_it->density;
  fit.window_hi = hi_it->density;
  fit.points = n;
  return fit;
}

std::pair<double, double> gamma_bracket(double density, const ScanConfig& config) {
  if (config.bracket_lo || config.bracket_hi) {
    require(config.bracket_lo && config.bracket_hi, "an absolute gamma bracket needs both ends");
    return {*config.bracket_lo, *config.bracket_hi};
  }
  require(config.bracket_scale >= 0, "gamma bracket scale must be non-negative");
  return {0.0, config.bracket_scale * density_to_rs(density)};
}

DensityScanRecord scan_density(double density, std::size_t index, const ScanConfig& config) {
  require(density > 0 && std::isfinite(density), "densities must be positive");
  require(config.production_replicas >= 1, "production_replicas must be at least 1");
  const auto cell = SimulationCell::from_density(config.plan.electrons, density);

  DensityScanRecord rec;
  rec.density = density;
  rec.rs = cell.wigner_seitz_radius();
  rec.electrons = config.plan.electrons;

  ChainPlan plan = config.plan;
  plan.stream_base = config.plan.stream_base + index * density_stream_stride;
  const auto [lo, hi] = gamma_bracket(density, config);
  GammaSearch search{lo, hi, config.grid_size, config.replicas, config.refine_passes};
  rec.scan = lo == hi ? scan_objective(search, {}) : optimize_gamma(density, plan, search);
  rec.gamma_star = rec.scan.gamma_star;
  rec.gamma_star_error = rec.scan.gamma_star_error;
  rec.flags = rec.scan.flags;

  const std::uint64_t offset = (1 + config.refine_passes) * config.grid_size * config.replicas;
  const double star[1] = {rec.gamma_star};
  auto production = evaluate_gammas(density, plan, star, config.production_replicas, offset);
  auto& point = production.front();
  rec.production = std::move(point.chains);
  rec.w_star = point.w;
  rec.breakdown = assemble(density, point.t_nloc, point.v_ee);

  for (const auto& p : rec.scan.points)
    if (rec.w_star.mean - p.w.mean > 3 * std::hypot(rec.w_star.error, p.w.error)) rec.flags |= flag_grid_beats_optimum;
  return rec;
}

std::vector<DensityScanRecord> density_scan(const ScanConfig& config) {
  require(!config.densities.empty(), "density scan needs at least one density");
  std::vector<DensityScanRecord> out;
  for (std::size_t i = 0; i < config.densities.size(); ++i) out.push_back(scan_density(config.densities[i], i, config));
  return out;
}

ReferenceTable ingest_reference(std::istream& in, const std::string& source) {
  ReferenceTable table;
  std::string line;
  std::size_t line_no = 0;
  bool seen_row = false;
  auto bad = [&](const std::string& why) {
    fail(ErrorCode::parse_error, source + ":" + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split_fields(text);
    const bool first = !seen_row;
    seen_row = true;
    if (first && !parse_number(fields[0])) continue;  // header
    if (fields.size() < 2 || fields.size() > 3) bad("expected 2 or 3 fields (r_s, e_c[, e_c_err])");
    const auto rs = parse_number(fields[0]);
    const auto ec = parse_number(fields[1]);
    if (!rs) bad("r_s '" + std::string(fields[0]) + "' is not a number");
    if (!ec) bad("e_c '" + std::string(fields[1]) + "' is not a number");
    if (!(*rs > 0) || !std::isfinite(*rs)) bad("r_s must be positive");
    if (!std::isfinite(*ec)) bad("e_c must be finite");
    ReferencePoint p{*rs, rs_to_density(*rs), *ec, std::nullopt};
    if (fields.size() == 3 && !fields[2].empty()) {
      const auto err = parse_number(fields[2]);
      if (!err || !(*err > 0)) bad("e_c_err must be a positive number");
      p.e_c_error = *err;
    }
    table.rows.push_back(p);
  }
  if (in.bad()) fail(ErrorCode::io_error, "read error in " + source);
  if (table.rows.empty()) table.warnings.push_back(source + ": reference table has no rows");
  return table;
}

void export_reference(std::ostream& out, const std::vector<ReferencePoint>& rows) {
  const bool errors = std::any_of(rows.begin(), rows.end(), [](const ReferencePoint& p) { return p.e_c_error; });
  out << "# r_s in bohr; e_c in hartree per electron\n";
  out << (errors ? "r_s,e_c,e_c_err\n" : "r_s,e_c\n");
  for (const auto& p : rows) {
    out << format_number(p.rs) << ',' << format_number(p.e_c);
    if (errors) out << ',' << (p.e_c_error ? format_number(*p.e_c_error) : "");
    out << '\n';
  }
}

ExponentialEntropyTerms exponential_entropy_eval(const GriddedDensity& density, double alpha, double w) {
  ExponentialEntropyTerms t;
  t.entropy = shannon_continuous(density);
  t.rho_log_rho = -t.entropy;
  t.exponential = alpha * std::exp(w * t.entropy);
  t.weizsacker = fisher_weizsacker(density);
  t.first_order = alpha * (1.0 + w * t.entropy);
  return t;
}

}  // namespace ueglab
