#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ueglab/entropy.hpp"
#include "ueglab/estimators.hpp"
#include "ueglab/levy_lieb.hpp"

namespace ueglab {

struct FitPoint {
  double density;  // e/bohr^3
  double value;
  double error;  // > 0
};

/// Weighted least squares y = A + B log(rho), natural log, rho in e/bohr^3.
struct LogFitResult {
  double a = 0, b = 0;
  double a_error = 0, b_error = 0;
  double cov_ab = 0;
  double r2 = 0;         // weighted, with intercept
  double window_lo = 0;  // smallest and largest density used
  double window_hi = 0;
  std::size_t points = 0;
};

/// Fits the points with window_lo <= rho <= window_hi (1e-12 relative
/// slack). Parameter covariances take the errors as absolute. Fewer than
/// three points, or all at one density, are rejected.
LogFitResult fit_log_model(const std::vector<FitPoint>& points, double window_lo, double window_hi);

struct ScanConfig {
  std::vector<double> densities{0.002, 0.01, 0.05, 0.1, 0.25};
  ChainPlan plan;
  double bracket_scale = 6.0;  // default bracket [0, bracket_scale * r_s]
  std::optional<double> bracket_lo, bracket_hi;  // absolute bracket, overrides the scale
  std::size_t grid_size = 5;
  std::size_t replicas = 2;
  std::size_t refine_passes = 1;
  std::size_t production_replicas = 4;
};

/// Streams reserved per density; density i uses [i * stride, (i + 1) * stride).
inline constexpr std::uint64_t density_stream_stride = 1u << 20;

struct DensityScanRecord {
  double density = 0;
  double rs = 0;
  int electrons = 0;
  double gamma_star = 0;
  double gamma_star_error = 0;
  CorrelationBreakdown breakdown;
  EstimateWithError w_star;  // objective from the production chains
  GammaScan scan;
  std::vector<ChainRecord> production;
  unsigned flags = 0;
};

/// Gamma bracket used at `density` under `config`.
std::pair<double, double> gamma_bracket(double density, const ScanConfig& config);

/// Optimizes gamma, then runs production chains at gamma* and assembles
/// the correlation energies, for one density.
DensityScanRecord scan_density(double density, std::size_t index, const ScanConfig& config);
std::vector<DensityScanRecord> density_scan(const ScanConfig& config);

/// External (r_s, e_c) reference row with its converted density.
struct ReferencePoint {
  double rs = 0;
  double density = 0;
  double e_c = 0;
  std::optional<double> e_c_error;
};

struct ReferenceTable {
  std::vector<ReferencePoint> rows;
  std::vector<std::string> warnings;
};

/// Reads CSV rows "r_s,e_c[,e_c_err]". Blank lines and '#' comments are
/// skipped, as is a first non-numeric row (header). Malformed rows raise
/// parse_error naming `source` and the line number.
ReferenceTable ingest_reference(std::istream& in, const std::string& source = "<input>");
/// Writes a table that ingest_reference reads back unchanged.
void export_reference(std::ostream& out, const std::vector<ReferencePoint>& rows);

struct ExponentialEntropyTerms {
  double entropy = 0;          // S
  double rho_log_rho = 0;      // integral rho log rho = -S
  double exponential = 0;      // alpha exp(w S)
  double weizsacker = 0;       // (1/8) integral |grad rho|^2 / rho
  double first_order = 0;      // alpha (1 + w S)
};

/// Evaluates T_w + alpha exp(w S) and its first-order expansion side by side.
ExponentialEntropyTerms exponential_entropy_eval(const GriddedDensity& density, double alpha, double w);

}  // namespace ueglab
