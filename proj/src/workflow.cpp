#include "ueglab/workflow.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ueglab/analysis.hpp"
#include "ueglab/error.hpp"
#include "ueglab/ewald.hpp"
#include "ueglab/format.hpp"
#include "ueglab/sampler.hpp"

namespace ueglab {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const std::map<std::string, std::vector<KeySpec>, std::less<>>& key_table() {
  static const std::map<std::string, std::vector<KeySpec>, std::less<>> table{
      {"scan",
       {
           {"densities", "0.002,0.01,0.05,0.1,0.25", "comma-separated densities (e/bohr^3)"},
           {"electrons", "64", "electrons per cell"},
           {"seed", "20260101", "master seed; chain k of density i uses stream i*2^20 + k"},
           {"warmup_steps", "auto", "warmup single-electron steps per chain (auto = 10000 N)"},
           {"sample_steps", "auto", "sampling steps per chain (auto = 15625 N, 1e6 at N = 64)"},
           {"block_length", "64", "measurements per block"},
           {"measure_interval", "0", "steps between measurements (0 = N)"},
           {"adapt_interval", "2000", "warmup steps between proposal-width updates"},
           {"refresh_interval", "100000", "steps between full energy recomputations"},
           {"initial_width", "0.3", "initial proposal cube side in units of L"},
           {"ewald_alpha_edge", "7", "Ewald splitting alpha times L"},
           {"ewald_tolerance", "1e-6", "Ewald truncation tolerance for both cutoffs"},
           {"gamma_bracket_scale", "6", "default bracket is [0, scale * r_s] (1/hartree)"},
           {"gamma_lo", "", "absolute bracket start; needs gamma_hi"},
           {"gamma_hi", "", "absolute bracket end; needs gamma_lo"},
           {"gamma_grid_size", "5", "gamma points per pass (>= 5)"},
           {"gamma_replicas", "2", "chains per gamma point (>= 2)"},
           {"gamma_refine_passes", "1", "refinement passes around the running minimum"},
           {"production_replicas", "4", "chains at gamma*"},
           {"fit_window_lo", "0.002", "log-fit window start (e/bohr^3)"},
           {"fit_window_hi", "0.25", "log-fit window end for t_c and v_c"},
           {"fit_ec_window_hi", "auto", "log-fit window end for e_c (auto = largest density)"},
           {"threads", "0", "worker lanes (0 = UEGLAB_THREADS or hardware); never changes results"},
       }},
      {"entropy",
       {
           {"input", "", "radial density table with columns r,rho"},
           {"norm", "1", "declared norm of the table"},
           {"uniform_norm", "", "electron count of a uniform density (used without input)"},
           {"uniform_volume", "", "volume of a uniform density (bohr^3)"},
           {"log_base", "e", "base of reported Shannon entropies: e or 2"},
           {"alpha", "1", "prefactor alpha of alpha exp(w S)"},
           {"w", "0.1", "exponent w of alpha exp(w S)"},
       }},
      {"madelung",
       {
           {"electrons", "1", "electrons in the cell"},
           {"edge", "1", "cell edge L (bohr)"},
           {"alpha_lo", "5", "smallest alpha L"},
           {"alpha_hi", "9", "largest alpha L"},
           {"alpha_steps", "9", "alpha values in the scan"},
           {"tolerance", "1e-12", "Ewald truncation tolerance"},
           {"seed", "1", "seed for random positions when electrons > 1"},
           {"oracle", "", "CSV of frozen N,L,energy reference values"},
           {"spread_tolerance", "1e-8", "pass threshold for the alpha-scan spread (hartree)"},
           {"oracle_tolerance", "1e-6", "pass threshold against the oracle (hartree)"},
       }},
      {"fit",
       {
           {"input", "", "scan.csv from the scan command, or a reference table r_s,e_c[,e_c_err]"},
           {"window_lo", "0.002", "fit window start (e/bohr^3)"},
           {"window_hi", "0.25", "fit window end (e/bohr^3)"},
       }},
  };
  return table;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::string fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Typed view of the effective configuration.
class Settings {
 public:
  Settings(const RunConfig& config) : config_(config), values_(config.effective()) {}

  std::string text(const std::string& key) const { return values_.at(key); }
  bool has(const std::string& key) const { return !values_.at(key).empty(); }

  double number(const std::string& key) const {
    const auto v = parse_number(text(key));
    if (!v || !std::isfinite(*v)) bad(key, "expected a finite number");
    return *v;
  }
  double positive(const std::string& key) const {
    const double v = number(key);
    if (!(v > 0)) bad(key, "must be positive");
    return v;
  }
  std::uint64_t count(const std::string& key) const {
    const auto s = std::string(trim(text(key)));
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) bad(key, "expected a non-negative integer");
    return v;
  }
  std::vector<double> list(const std::string& key) const {
    std::vector<double> out;
    const std::string all = text(key);
    std::string_view rest = all;
    while (true) {
      const auto comma = rest.find(',');
      const auto v = parse_number(rest.substr(0, comma));
      if (!v || !std::isfinite(*v)) bad(key, "expected comma-separated numbers");
      out.push_back(*v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    return out;
  }
  [[noreturn]] void bad(const std::string& key, const std::string& why) const {
    fail(ErrorCode::invalid_argument,
         config_.origin(key) + ": " + key + " = '" + text(key) + "': " + why);
  }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  const RunConfig& config_;
  std::map<std::string, std::string> values_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // source line of each row
};

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  while (true) {
    const auto comma = line.find(',');
    out.emplace_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) return out;
    line.remove_prefix(comma + 1);
  }
}

CsvTable read_csv(const std::string& content, const std::string& source) {
  CsvTable t;
  std::istringstream in(content);
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    auto fields = split_csv(text);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      fail(ErrorCode::parse_error, source + ":" + std::to_string(no) + ": expected " +
                                       std::to_string(t.header.size()) + " fields, found " +
                                       std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
    t.lines.push_back(no);
  }
  if (t.header.empty()) fail(ErrorCode::parse_error, source + ": no header row");
  return t;
}

std::ptrdiff_t column(const CsvTable& t, std::string_view name) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  return it == t.header.end() ? -1 : it - t.header.begin();
}

double cell_number(const CsvTable& t, std::size_t row, std::ptrdiff_t col, const std::string& source) {
  const auto v = parse_number(t.rows[row][static_cast<std::size_t>(col)]);
  if (!v || !std::isfinite(*v))
    fail(ErrorCode::parse_error, source + ":" + std::to_string(t.lines[row]) + ": column '" +
                                     t.header[static_cast<std::size_t>(col)] + "' holds '" +
                                     t.rows[row][static_cast<std::size_t>(col)] + "', not a number");
  return *v;
}

std::string absolute_path(const std::string& path) {
  return path.empty() ? path : fs::absolute(fs::path(path)).lexically_normal().string();
}

struct Output {
  std::string name;
  std::string content;
};

struct Product {
  std::vector<Output> files;
  json details = json::object();
  std::vector<std::string> warnings;
  std::vector<std::string> flags;
  std::vector<json> inputs;
};

std::string num(double v) { return format_number(v == 0 ? 0.0 : v); }

// RFC 4180 quoting for free-text fields.
std::string field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

const char* fit_header = "quantity,A,A_err,B,B_err,cov_AB,r2,window_lo,window_hi,n_points,note\n";

void fit_row(std::ostringstream& out, const std::string& name, const std::vector<FitPoint>& pts, double lo,
             double hi, Product& product) {
  try {
    const auto f = fit_log_model(pts, lo, hi);
    out << name << ',' << num(f.a) << ',' << num(f.a_error) << ',' << num(f.b) << ',' << num(f.b_error) << ','
        << num(f.cov_ab) << ',' << num(f.r2) << ',' << num(f.window_lo) << ',' << num(f.window_hi) << ','
        << f.points << ",\n";
  } catch (const Error& e) {
    out << name << ",,,,,,,,,0," << field(e.what()) << '\n';
    product.warnings.push_back(name + " fit skipped: " + e.what());
  }
}

void fit_units(std::ostringstream& out) {
  out << "# y = A + B log(rho); rho in e/bohr^3, natural log; A, B in hartree per electron\n" << fit_header;
}

// ---------------------------------------------------------------- scan

Product run_scan(Settings& s, const ProgressSink& progress) {
  ScanConfig cfg;
  cfg.densities = s.list("densities");
  for (double d : cfg.densities)
    if (!(d > 0)) s.bad("densities", "densities must be positive");
  const auto electrons = s.count("electrons");
  if (electrons < 1 || electrons > 100000) s.bad("electrons", "must lie in [1, 100000]");
  cfg.plan.electrons = static_cast<int>(electrons);
  if (s.text("warmup_steps") == "auto") s.set("warmup_steps", std::to_string(10000 * electrons));
  if (s.text("sample_steps") == "auto") s.set("sample_steps", std::to_string(15625 * electrons));
  auto& sam = cfg.plan.sampler;
  sam.warmup_steps = s.count("warmup_steps");
  sam.sample_steps = s.count("sample_steps");
  sam.block_length = s.count("block_length");
  sam.measure_interval = s.count("measure_interval");
  sam.adapt_interval = s.count("adapt_interval");
  sam.refresh_interval = s.count("refresh_interval");
  sam.initial_width = s.positive("initial_width");
  if (sam.sample_steps == 0) s.bad("sample_steps", "must be positive");
  if (sam.block_length == 0) s.bad("block_length", "must be positive");
  if (sam.adapt_interval == 0) s.bad("adapt_interval", "must be positive");
  cfg.plan.ewald = {s.positive("ewald_alpha_edge"), s.positive("ewald_tolerance")};
  if (cfg.plan.ewald.tolerance >= 1) s.bad("ewald_tolerance", "must be below 1");
  cfg.plan.master_seed = s.count("seed");
  cfg.plan.lanes = s.count("threads");
  cfg.bracket_scale = s.number("gamma_bracket_scale");
  if (cfg.bracket_scale < 0) s.bad("gamma_bracket_scale", "must be non-negative");
  if (s.has("gamma_lo") != s.has("gamma_hi")) s.bad(s.has("gamma_lo") ? "gamma_lo" : "gamma_hi", "set both gamma_lo and gamma_hi");
  if (s.has("gamma_lo")) {
    cfg.bracket_lo = s.number("gamma_lo");
    cfg.bracket_hi = s.number("gamma_hi");
    if (*cfg.bracket_lo < 0 || *cfg.bracket_hi < *cfg.bracket_lo) s.bad("gamma_hi", "bracket must satisfy 0 <= lo <= hi");
  }
  cfg.grid_size = s.count("gamma_grid_size");
  cfg.replicas = s.count("gamma_replicas");
  cfg.refine_passes = s.count("gamma_refine_passes");
  cfg.production_replicas = s.count("production_replicas");
  if (cfg.grid_size < 5) s.bad("gamma_grid_size", "must be at least 5");
  if (cfg.replicas < 2) s.bad("gamma_replicas", "must be at least 2");
  if (cfg.production_replicas < 1) s.bad("production_replicas", "must be at least 1");
  if ((1 + cfg.refine_passes) * cfg.grid_size * cfg.replicas + cfg.production_replicas > density_stream_stride)
    s.bad("gamma_refine_passes", "too many chains per density");
  const double window_lo = s.positive("fit_window_lo");
  const double window_hi = s.positive("fit_window_hi");
  if (s.text("fit_ec_window_hi") == "auto")
    s.set("fit_ec_window_hi", num(std::max(window_hi, *std::max_element(cfg.densities.begin(), cfg.densities.end()))));
  const double ec_window_hi = s.positive("fit_ec_window_hi");

  std::vector<DensityScanRecord> records;
  for (std::size_t i = 0; i < cfg.densities.size(); ++i) {
    if (progress) progress("density " + std::to_string(i + 1) + "/" + std::to_string(cfg.densities.size()) + ": rho = " + num(cfg.densities[i]));
    records.push_back(scan_density(cfg.densities[i], i, cfg));
    const auto& r = records.back();
    if (progress)
      progress("  gamma* = " + num(r.gamma_star) + ", e_c = " + num(r.breakdown.e_c.mean) + " +- " +
               num(r.breakdown.e_c.error) + (r.flags ? " [" + join_flags(r.flags) + "]" : ""));
  }

  Product p;
  std::ostringstream scan, grid, fit;
  scan << "# rho in e/bohr^3; rs in bohr; gamma_star in 1/hartree; t_c, v_c, e_c in hartree per electron\n"
       << "rho,rs,gamma_star,t_c,t_c_err,v_c,v_c_err,e_c,e_c_err,N,flags\n";
  grid << "# rho in e/bohr^3; gamma in 1/hartree; w = t_nloc + v_ee in hartree per electron\n"
       << "rho,gamma,w_mean,w_err,t_nloc,t_nloc_err,v_ee,v_ee_err,flags\n";
  json chains = json::array();
  auto chain_json = [&](const ChainRecord& c, double rho, const char* role) {
    chains.push_back({{"rho", rho}, {"role", role}, {"gamma", c.gamma}, {"stream", c.stream}, {"seed", c.seed},
                      {"acceptance", c.acceptance}, {"proposal_width", c.proposal_width}});
    for (const auto& w : c.warnings) p.warnings.push_back("rho " + num(rho) + ", stream " + std::to_string(c.stream) + ": " + w);
  };
  std::vector<FitPoint> tc, vc, ec;
  for (const auto& r : records) {
    const auto& b = r.breakdown;
    scan << num(r.density) << ',' << num(r.rs) << ',' << num(r.gamma_star) << ',' << num(b.t_c.mean) << ','
         << num(b.t_c.error) << ',' << num(b.v_c.mean) << ',' << num(b.v_c.error) << ',' << num(b.e_c.mean) << ','
         << num(b.e_c.error) << ',' << r.electrons << ',' << join_flags(r.flags) << '\n';
    for (std::size_t i = 0; i < r.scan.points.size(); ++i) {
      const auto& pt = r.scan.points[i];
      std::string flags;
      if (i >= r.scan.fit.first && i < r.scan.fit.first + r.scan.fit.count) flags = "vertex_fit";
      if (std::any_of(pt.chains.begin(), pt.chains.end(), [](const ChainRecord& c) { return !c.warnings.empty(); }))
        flags += flags.empty() ? "acceptance" : ";acceptance";
      grid << num(r.density) << ',' << num(pt.gamma) << ',' << num(pt.w.mean) << ',' << num(pt.w.error) << ','
           << num(pt.t_nloc.mean) << ',' << num(pt.t_nloc.error) << ',' << num(pt.v_ee.mean) << ','
           << num(pt.v_ee.error) << ',' << flags << '\n';
      for (const auto& c : pt.chains) chain_json(c, r.density, "scan");
    }
    for (const auto& c : r.production) chain_json(c, r.density, "production");
    for (const auto& name : flag_names(r.flags)) p.flags.push_back("rho " + num(r.density) + ": " + name);
    tc.push_back({r.density, b.t_c.mean, b.t_c.error});
    vc.push_back({r.density, b.v_c.mean, b.v_c.error});
    ec.push_back({r.density, b.e_c.mean, b.e_c.error});
  }
  fit_units(fit);
  fit_row(fit, "t_c", tc, window_lo, window_hi, p);
  fit_row(fit, "v_c", vc, window_lo, window_hi, p);
  fit_row(fit, "e_c", ec, window_lo, ec_window_hi, p);

  p.files = {{"scan.csv", scan.str()}, {"fit_report.csv", fit.str()}, {"gamma_scan.csv", grid.str()}};
  p.details["master_seed"] = cfg.plan.master_seed;
  p.details["chains"] = chains;
  return p;
}

// ---------------------------------------------------------------- entropy

Product run_entropy(Settings& s) {
  Product p;
  const std::string base = s.text("log_base");
  if (base != "e" && base != "2") s.bad("log_base", "expected e or 2");
  const double to_base = base == "2" ? 1.0 / std::log(2.0) : 1.0;
  const double alpha = s.number("alpha"), w = s.number("w");

  std::optional<GriddedDensity> density;
  if (s.has("input")) {
    const std::string path = s.text("input");
    const std::string content = read_file(path);
    p.inputs.push_back({{"key", "input"}, {"path", path}, {"fnv1a64", fnv1a(content)}});
    const auto t = read_csv(content, path);
    const auto rc = column(t, "r"), vc = column(t, "rho");
    if (rc < 0 || vc < 0) fail(ErrorCode::parse_error, path + ": header must name columns r and rho");
    std::vector<double> r, rho;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      r.push_back(cell_number(t, i, rc, path));
      rho.push_back(cell_number(t, i, vc, path));
      if (i > 0 && !(r[i] > r[i - 1]))
        fail(ErrorCode::parse_error, path + ":" + std::to_string(t.lines[i]) + ": r must increase");
      if (rho[i] < 0) fail(ErrorCode::parse_error, path + ":" + std::to_string(t.lines[i]) + ": rho is negative");
    }
    density = GriddedDensity::radial(std::move(r), std::move(rho), s.positive("norm"));
  } else {
    if (!s.has("uniform_norm") || !s.has("uniform_volume"))
      s.bad("input", "give a density table or both uniform_norm and uniform_volume");
    density = GriddedDensity::uniform(s.positive("uniform_norm"), s.positive("uniform_volume"));
  }
  const bool radial = density->kind() == GriddedDensity::Kind::radial;
  const auto& d = *density;
  const auto sigma = d.normalized();
  const auto terms = exponential_entropy_eval(d, alpha, w);
  const double s_sigma = shannon_continuous(sigma);
  const std::string unit = base == "2" ? "bits" : "nats";

  std::ostringstream out;
  out << "# rho in e/bohr^3 on r in bohr; entropies in " << unit << "; fisher and t_w in hartree\n"
      << "descriptor,value,note\n";
  auto row = [&](const std::string& name, std::optional<double> v, const std::string& note) {
    out << name << ',' << (v ? num(*v) : "") << ',' << field(note) << '\n';
  };
  const std::string no_gradient = "needs a radial table";
  row("norm", d.norm(), radial ? "declared; quadrature checked to 1e-6" : "uniform");
  row("shannon", terms.entropy * to_base, "-integral rho log rho");
  row("shannon_sigma", s_sigma * to_base, "sigma = rho / norm");
  row("rho_log_rho", terms.rho_log_rho * to_base, "integral rho log rho");
  row("dehesa_j", dehesa_measure(s_sigma), "exp(2 S_sigma / 3) / (2 pi) with natural log");
  if (radial) {
    row("fisher_weizsacker", terms.weizsacker, "(1/8) integral |grad rho|^2 / rho");
  } else {
    row("fisher_weizsacker", std::nullopt, no_gradient);
  }
  row("alpha", alpha, "");
  row("w", w, "");
  row("alpha_exp_wS", terms.exponential, "natural-log S");
  row("first_order", terms.first_order, "alpha (1 + w S)");
  if (radial) {
    row("kinetic_functional", terms.weizsacker + terms.exponential, "t_w + alpha exp(w S)");
  } else {
    row("kinetic_functional", std::nullopt, no_gradient);
  }
  p.files.push_back({"entropy.csv", out.str()});

  if (radial) {
    std::ostringstream prof;
    prof << "# r in bohr; rho in e/bohr^3; s = -rho log rho; k = |grad(-log rho)| in 1/bohr\n"
         << "r,rho,s,k\n";
    const auto sd = entropy_density(d);
    std::vector<double> k;
    try {
      k = local_wavevector(d);
    } catch (const Error& e) {
      p.warnings.push_back(std::string("local wave-vector skipped: ") + e.what());
    }
    for (std::size_t i = 0; i < d.radii().size(); ++i)
      prof << num(d.radii()[i]) << ',' << num(d.values()[i]) << ',' << num(sd[i]) << ','
           << (k.empty() ? "" : num(k[i])) << '\n';
    p.files.push_back({"entropy_profile.csv", prof.str()});
  }
  return p;
}

// ---------------------------------------------------------------- madelung

Product run_madelung(Settings& s) {
  Product p;
  const auto electrons = s.count("electrons");
  if (electrons < 1 || electrons > 100000) s.bad("electrons", "must lie in [1, 100000]");
  const double edge = s.positive("edge");
  const double lo = s.positive("alpha_lo"), hi = s.positive("alpha_hi");
  if (hi < lo) s.bad("alpha_hi", "must not be below alpha_lo");
  const auto steps = s.count("alpha_steps");
  if (steps < 1 || (steps == 1 && hi != lo)) s.bad("alpha_steps", "need at least 2 steps for a range");
  const double tol = s.positive("tolerance");
  if (tol >= 1) s.bad("tolerance", "must be below 1");
  const double spread_tol = s.positive("spread_tolerance"), oracle_tol = s.positive("oracle_tolerance");

  const SimulationCell cell(static_cast<int>(electrons), edge);
  std::vector<Vec3> positions(electrons, Vec3{0, 0, 0});
  if (electrons > 1) {
    RandomStream rng(s.count("seed"), 0);
    for (auto& r : positions) r = {edge * rng.uniform(), edge * rng.uniform(), edge * rng.uniform()};
  }

  std::ostringstream scan;
  scan << "# alpha in 1/bohr; cutoff in bohr; energies in hartree\n"
       << "alpha_edge,alpha,real_cutoff,reciprocal_shell_max,energy,image_constant\n";
  double e_min = INFINITY, e_max = -INFINITY, e_last = 0;
  for (std::uint64_t i = 0; i < steps; ++i) {
    const double a = steps == 1 ? lo : (i + 1 == steps ? hi : lo + (hi - lo) * double(i) / double(steps - 1));
    const auto params = EwaldParameters::create(cell, a, tol);
    const double u = total_pair_energy(positions, params, cell);
    e_min = std::min(e_min, u);
    e_max = std::max(e_max, u);
    e_last = u;
    scan << num(a) << ',' << num(params.alpha()) << ',' << num(params.real_space_cutoff()) << ','
         << params.reciprocal_shell_max() << ',' << num(u) << ',' << num(params.image_constant()) << '\n';
  }
  const double spread = e_max - e_min;
  const bool spread_pass = spread < spread_tol;

  std::ostringstream summary;
  summary << "# energies in hartree\nkey,value\n";
  summary << "electrons," << electrons << '\n' << "edge," << num(edge) << '\n';
  summary << "energy," << num(e_last) << '\n';
  summary << "alpha_spread," << num(spread) << '\n';
  summary << "alpha_spread_pass," << (spread_pass ? "true" : "false") << '\n';
  if (electrons == 1) summary << "literature_magnitude," << num(-2.837297 / (2 * edge)) << '\n';
  if (!spread_pass) p.flags.push_back("alpha-scan spread " + num(spread) + " exceeds " + num(spread_tol));

  std::optional<double> reference;
  if (s.has("oracle")) {
    const std::string path = s.text("oracle");
    if (!fs::exists(path)) {
      p.warnings.push_back("oracle file '" + path + "' not found; comparison skipped");
    } else {
      const std::string content = read_file(path);
      p.inputs.push_back({{"key", "oracle"}, {"path", path}, {"fnv1a64", fnv1a(content)}});
      const auto t = read_csv(content, path);
      const auto nc = column(t, "N"), lc = column(t, "L"), ec = column(t, "energy");
      if (nc < 0 || lc < 0 || ec < 0) fail(ErrorCode::parse_error, path + ": header must name N, L and energy");
      for (std::size_t i = 0; i < t.rows.size(); ++i)
        if (cell_number(t, i, nc, path) == double(electrons) &&
            std::abs(cell_number(t, i, lc, path) - edge) <= 1e-12 * edge)
          reference = cell_number(t, i, ec, path);
      if (!reference) p.warnings.push_back("oracle has no row for N = " + std::to_string(electrons) + ", L = " + num(edge) + "; comparison skipped");
    }
  }
  if (reference) {
    const double dev = std::abs(e_last - *reference);
    summary << "oracle_energy," << num(*reference) << '\n'
            << "oracle_deviation," << num(dev) << '\n'
            << "oracle_pass," << (dev < oracle_tol ? "true" : "false") << '\n';
    if (!(dev < oracle_tol)) p.flags.push_back("oracle deviation " + num(dev) + " exceeds " + num(oracle_tol));
  } else {
    summary << "oracle_energy,\noracle_deviation,\noracle_pass,skipped\n";
  }
  p.files = {{"madelung.csv", scan.str()}, {"madelung_summary.csv", summary.str()}};
  return p;
}

// ---------------------------------------------------------------- fit

Product run_fit(Settings& s) {
  Product p;
  if (!s.has("input")) s.bad("input", "an input table is required");
  const std::string path = s.text("input");
  const std::string content = read_file(path);
  p.inputs.push_back({{"key", "input"}, {"path", path}, {"fnv1a64", fnv1a(content)}});
  const double lo = s.positive("window_lo"), hi = s.positive("window_hi");
  if (hi < lo) s.bad("window_hi", "must not be below window_lo");

  std::ostringstream fit;
  fit_units(fit);
  const auto probe = read_csv(content, path);
  auto fit_or_throw = [&](const std::string& name, const std::vector<FitPoint>& pts) {
    const auto f = fit_log_model(pts, lo, hi);  // invalid windows are input errors here
    fit << name << ',' << num(f.a) << ',' << num(f.a_error) << ',' << num(f.b) << ',' << num(f.b_error) << ','
        << num(f.cov_ab) << ',' << num(f.r2) << ',' << num(f.window_lo) << ',' << num(f.window_hi) << ','
        << f.points << ",\n";
  };
  if (column(probe, "rho") >= 0) {
    for (const std::string q : {"t_c", "v_c", "e_c"}) {
      const auto rc = column(probe, "rho"), vc = column(probe, q), ec = column(probe, q + "_err");
      if (vc < 0 || ec < 0) fail(ErrorCode::parse_error, path + ": scan table lacks " + q + " or " + q + "_err");
      std::vector<FitPoint> pts;
      for (std::size_t i = 0; i < probe.rows.size(); ++i)
        pts.push_back({cell_number(probe, i, rc, path), cell_number(probe, i, vc, path), cell_number(probe, i, ec, path)});
      fit_or_throw(q, pts);
    }
  } else {
    std::istringstream in(content);
    const auto table = ingest_reference(in, path);
    p.warnings.insert(p.warnings.end(), table.warnings.begin(), table.warnings.end());
    std::vector<FitPoint> pts;
    bool unweighted = false;
    for (const auto& r : table.rows) {
      unweighted |= !r.e_c_error;
      pts.push_back({r.density, r.e_c, r.e_c_error.value_or(1.0)});
    }
    if (unweighted) p.warnings.push_back("rows without e_c_err were given unit weight");
    fit_or_throw("e_c", pts);
  }
  p.files = {{"fit_report.csv", fit.str()}};
  return p;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"scan", "entropy", "madelung", "fit"};
  return names;
}

const std::vector<KeySpec>& command_keys(std::string_view command) {
  const auto it = key_table().find(command);
  if (it == key_table().end()) fail(ErrorCode::invalid_argument, "unknown command '" + std::string(command) + "'");
  return it->second;
}

RunConfig::RunConfig(std::string command) : command_(std::move(command)) { command_keys(command_); }

void RunConfig::load(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto hash = line.find('#');
    const auto text = trim(std::string_view(line).substr(0, hash));
    if (text.empty()) continue;
    const std::string where = source + ":" + std::to_string(no);
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) fail(ErrorCode::parse_error, where + ": expected 'key = value'");
    const std::string key(trim(text.substr(0, eq)));
    if (key.empty()) fail(ErrorCode::parse_error, where + ": missing key before '='");
    const auto& keys = command_keys(command_);
    if (std::none_of(keys.begin(), keys.end(), [&](const KeySpec& k) { return k.key == key; }))
      fail(ErrorCode::parse_error, where + ": unknown key '" + key + "' for command " + command_);
    entries_[key] = {std::string(trim(text.substr(eq + 1))), where};
  }
  if (in.bad()) fail(ErrorCode::io_error, "read error in " + source);
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot open config file '" + path + "'");
  load(in, path);
}

void RunConfig::set(const std::string& key, const std::string& value, const std::string& origin) {
  const auto& keys = command_keys(command_);
  if (std::none_of(keys.begin(), keys.end(), [&](const KeySpec& k) { return k.key == key; }))
    fail(ErrorCode::invalid_argument, origin + ": unknown key '" + key + "' for command " + command_);
  entries_[key] = {value, origin};
}

std::optional<std::string> RunConfig::value(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.value;
}

std::string RunConfig::origin(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? "default" : it->second.origin;
}

std::map<std::string, std::string> RunConfig::effective() const {
  std::map<std::string, std::string> out;
  for (const auto& k : command_keys(command_)) {
    const auto v = value(k.key);
    out[k.key] = v ? *v : k.default_value;
  }
  return out;
}

RunOutcome execute(const RunConfig& config, const std::string& out_dir, const ProgressSink& progress) {
  Settings settings(config);
  for (const char* key : {"input", "oracle"})
    if (settings.values().count(key)) settings.set(key, absolute_path(settings.text(key)));

  const std::string started = utc_now();
  Product product;
  const auto& cmd = config.command();
  if (cmd == "scan")
    product = run_scan(settings, progress);
  else if (cmd == "entropy")
    product = run_entropy(settings);
  else if (cmd == "madelung")
    product = run_madelung(settings);
  else
    product = run_fit(settings);
  const std::string finished = utc_now();

  json manifest;
  manifest["artifact"] = "ueglab";
  manifest["version"] = UEGLAB_VERSION;
  manifest["command"] = cmd;
  manifest["config"] = settings.values();
  manifest["started_utc"] = started;
  manifest["finished_utc"] = finished;
  for (auto& [k, v] : product.details.items()) manifest[k] = v;
  manifest["inputs"] = product.inputs;
  json outputs = json::array();
  for (const auto& f : product.files) outputs.push_back({{"file", f.name}, {"fnv1a64", fnv1a(f.content)}});
  manifest["outputs"] = outputs;
  manifest["flags"] = product.flags;
  manifest["warnings"] = product.warnings;

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::io_error, "cannot create output directory '" + out_dir + "': " + ec.message());
  RunOutcome outcome;
  auto write = [&](const std::string& name, const std::string& content) {
    const auto path = fs::path(out_dir) / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << content) || !out.flush()) fail(ErrorCode::io_error, "cannot write '" + path.string() + "'");
    outcome.outputs.push_back(name);
  };
  for (const auto& f : product.files) write(f.name, f.content);
  write("manifest.json", manifest.dump(2) + "\n");
  outcome.warnings = std::move(product.warnings);
  outcome.flags = std::move(product.flags);
  return outcome;
}

RunConfig config_from_manifest(const std::string& manifest_path) {
  json m;
  try {
    m = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, manifest_path + ": " + e.what());
  }
  if (!m.is_object() || m.value("artifact", "") != "ueglab" || !m.contains("command") || !m.contains("config") ||
      !m["config"].is_object())
    fail(ErrorCode::parse_error, manifest_path + ": not a ueglab manifest");
  RunConfig config(m["command"].get<std::string>());
  for (const auto& [key, value] : m["config"].items()) {
    if (!value.is_string()) fail(ErrorCode::parse_error, manifest_path + ": config value of '" + key + "' is not a string");
    config.set(key, value.get<std::string>(), manifest_path);
  }
  return config;
}

}  // namespace ueglab
