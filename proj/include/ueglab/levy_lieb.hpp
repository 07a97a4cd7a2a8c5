#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ueglab/sampler.hpp"

namespace ueglab {

/// Scan flags, combined bitwise.
enum ScanFlag : unsigned {
  flag_vertex_outside_bracket = 1u << 0,  // quadratic vertex clamped to a bracket end
  flag_boundary_minimum = 1u << 1,        // lowest grid point sits on a bracket end
  flag_nonconvex = 1u << 2,               // no positive curvature around the minimum
  flag_grid_beats_optimum = 1u << 3,      // a grid point lies 3 errors below w(gamma*)
};

/// Names of the set flags in bit order, e.g. {"nonconvex"}.
std::vector<std::string> flag_names(unsigned flags);
/// Flag names joined with ';' (empty when no flag is set).
std::string join_flags(unsigned flags);

/// Weighted quadratic w ~ c0 + c1 x + c2 x^2 with x = gamma - center, fitted
/// to at most five grid points around the lowest one.
struct VertexFit {
  double center = 0;
  double c0 = 0, c1 = 0, c2 = 0;
  double gamma_star = 0;
  double gamma_star_error = 0;  // delta method on (c1, c2)
  unsigned flags = 0;
  std::size_t first = 0;  // window of grid points used
  std::size_t count = 0;
};

/// `gamma` strictly increasing. Errors weight the fit as 1/err^2; if any is
/// zero the fit is unweighted and its covariance scaled by the residuals.
/// The vertex is clamped to [lo, hi]; with no positive curvature the lowest
/// grid point is returned.
VertexFit fit_vertex(std::span<const double> gamma, std::span<const double> w, std::span<const double> w_error,
                     double lo, double hi);

/// Provenance of one Markov chain.
struct ChainRecord {
  double gamma = 0;
  std::uint64_t stream = 0;
  std::uint64_t seed = 0;
  double acceptance = 0;
  double proposal_width = 0;
  std::vector<std::string> warnings;
};

struct GammaPoint {
  double gamma = 0;
  EstimateWithError w;
  EstimateWithError t_nloc;
  EstimateWithError v_ee;
  std::vector<ChainRecord> chains;
};

struct GammaSearch {
  double lo = 0;
  double hi = 0;
  std::size_t grid_size = 5;      // points per pass
  std::size_t replicas = 2;       // chains per point
  std::size_t refine_passes = 1;  // passes between the neighbours of the running minimum
};

struct GammaScan {
  GammaSearch search;
  std::vector<GammaPoint> points;  // every evaluated point, by increasing gamma
  VertexFit fit;
  double gamma_star = 0;
  double gamma_star_error = 0;
  unsigned flags = 0;
};

/// Evaluates the objective at each gamma of one pass.
using GammaEvaluator = std::function<std::vector<GammaPoint>(std::span<const double> gammas, std::size_t pass)>;

/// Grid search with refinement and a quadratic vertex, for any evaluator.
/// The first pass spans [lo, hi] with grid_size points; each refinement
/// places grid_size interior points between the neighbours of the lowest
/// point found so far, skipping any already evaluated. lo == hi skips the
/// search and returns gamma* = lo.
GammaScan scan_objective(const GammaSearch& search, const GammaEvaluator& evaluate);

struct EwaldSettings {
  double alpha_edge = 7.0;
  double tolerance = 1e-6;
};

/// Chains and seeding shared by every gamma of a density.
struct ChainPlan {
  int electrons = 64;
  SamplerConfig sampler;
  EwaldSettings ewald;
  std::uint64_t master_seed = 0;
  std::uint64_t stream_base = 0;  // chain k of this plan uses stream stream_base + k
  std::size_t lanes = 0;          // 0 = default_lane_count()
};

/// Runs `replicas` chains at each gamma (streams plan.stream_base + offset +
/// i * replicas + r) and pools them per gamma.
std::vector<GammaPoint> evaluate_gammas(double density, const ChainPlan& plan, std::span<const double> gammas,
                                        std::size_t replicas, std::uint64_t stream_offset);

/// Minimizes w(gamma) = t_nloc + v_ee at fixed density. Pass p uses stream
/// offsets starting at p * grid_size * replicas.
GammaScan optimize_gamma(double density, const ChainPlan& plan, const GammaSearch& search);

}  // namespace ueglab
