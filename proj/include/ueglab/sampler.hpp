#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ueglab/conditional_model.hpp"
#include "ueglab/ewald.hpp"

namespace ueglab {

/// Seed of stream `stream` under `master_seed`: two SplitMix64 rounds over
/// master_seed ^ (stream * 0x9E3779B97F4A7C15). The derived value seeds a
/// std::mt19937_64, so a chain's draws depend only on (master_seed, stream)
/// and never on how chains are scheduled.
std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t stream);

class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t stream);

  /// Uniform double in [0, 1) from the top 53 bits of one engine draw.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

struct EstimateWithError {
  double mean = 0;
  double error = 0;  // standard error of the mean from the block variance
  std::size_t blocks = 0;
};

/// Blocks must reach this count before an error bar is reported.
inline constexpr std::size_t minimum_blocks = 16;

/// Fixed-length block averages for a set of observables sampled together.
///
/// Block means are stored, and statistics are summed in sorted order, so
/// estimates do not depend on the order in which blocks or accumulators were
/// combined. merge() concatenates in a canonical order, which makes it
/// commutative bit for bit.
class BlockAccumulator {
 public:
  BlockAccumulator() = default;
  BlockAccumulator(std::vector<std::string> observables, std::size_t block_length);

  /// One sample: a value per observable, in observable order.
  void add(std::span<const double> sample);

  const std::vector<std::string>& observables() const { return names_; }
  std::size_t block_length() const { return block_length_; }
  std::size_t block_count() const { return names_.empty() ? 0 : blocks_.front().size(); }
  const std::vector<double>& block_means(std::size_t observable) const { return blocks_.at(observable); }

  /// Throws insufficient_data below minimum_blocks complete blocks.
  EstimateWithError estimate(std::string_view observable) const;

  bool operator==(const BlockAccumulator&) const = default;

 private:
  friend BlockAccumulator merge(const BlockAccumulator& a, const BlockAccumulator& b);
  std::size_t index_of(std::string_view observable) const;

  std::vector<std::string> names_;
  std::size_t block_length_ = 0;
  std::vector<std::vector<double>> blocks_;  // [observable][block]
  std::vector<double> partial_sum_;
  std::size_t partial_count_ = 0;
};

/// Pools two accumulators of identical observables and block length. An
/// empty accumulator (default constructed) is the identity. Incomplete
/// trailing blocks are pooled; when together they reach a full block length,
/// they close a single block.
BlockAccumulator merge(const BlockAccumulator& a, const BlockAccumulator& b);

struct SamplerConfig {
  std::uint64_t warmup_steps = 640000;  // 10 * N * 1000 at N = 64
  std::uint64_t sample_steps = 1000000;
  std::uint64_t block_length = 64;       // measurements per block
  std::uint64_t measure_interval = 0;    // steps between measurements, 0 = N
  std::uint64_t adapt_interval = 2000;   // warmup steps between width updates
  std::uint64_t refresh_interval = 100000;
  double initial_width = 0.3;            // proposal cube side, in units of L
};

/// Observables recorded by run_chain, in accumulator order.
inline constexpr std::string_view observable_reference_force_sq = "reference_force_sq";
inline constexpr std::string_view observable_pair_energy = "pair_energy";

struct ChainState {
  EwaldCache cache;           // configuration and incrementally updated U
  std::uint64_t steps = 0;
  double proposal_width = 0;  // bohr
  RandomStream rng;
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
};

/// Uniformly random start for a chain; draws from `rng` before the chain does.
ChainState initial_chain_state(const ConditionalModel& model, double proposal_width, RandomStream rng);

/// Metropolis acceptance for a change `delta_log_weight` in log f, given a
/// uniform draw u in [0, 1).
inline bool metropolis_accept(double delta_log_weight, double u) {
  return delta_log_weight >= 0.0 || u < std::exp(delta_log_weight);
}

/// One single-electron displacement drawn uniformly from a cube of side
/// proposal_width. Proposals that land on another electron are rejected.
void metropolis_step(ChainState& state, const ConditionalModel& model);

struct ChainResult {
  BlockAccumulator accumulator;
  double acceptance = 0;      // during sampling
  double proposal_width = 0;  // frozen width after warmup
  double energy_drift = 0;    // |cached U - recomputed U| at the last refresh
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

/// Observer invoked at every measurement with the current cache.
using ChainObserver = std::function<void(const EwaldCache&)>;

/// Warmup with proposal-width adaptation towards 40-60 % acceptance, then
/// sampling with the width frozen. Measures |F_ref|^2 (gamma-free) and U/N
/// every measure_interval steps.
ChainResult run_chain(const ConditionalModel& model, const SamplerConfig& config, std::uint64_t master_seed,
                      std::uint64_t stream, const ChainObserver& observer = {});

}  // namespace ueglab
