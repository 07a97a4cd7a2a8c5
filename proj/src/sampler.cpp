#include "ueglab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "ueglab/error.hpp"

namespace ueglab {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t stream) {
  std::uint64_t state = master_seed ^ (stream * 0x9E3779B97F4A7C15ULL);
  splitmix64(state);
  return splitmix64(state);
}

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t stream)
    : master_seed_(master_seed), stream_(stream), engine_(derive_stream_seed(master_seed, stream)) {}

BlockAccumulator::BlockAccumulator(std::vector<std::string> observables, std::size_t block_length)
    : names_(std::move(observables)), block_length_(block_length) {
  require(!names_.empty(), "accumulator needs at least one observable");
  require(block_length_ > 0, "block length must be positive");
  blocks_.resize(names_.size());
  partial_sum_.assign(names_.size(), 0.0);
}

void BlockAccumulator::add(std::span<const double> sample) {
  require(sample.size() == names_.size(), "sample size does not match the observable count");
  for (std::size_t i = 0; i < sample.size(); ++i) partial_sum_[i] += sample[i];
  if (++partial_count_ == block_length_) {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      blocks_[i].push_back(partial_sum_[i] / static_cast<double>(block_length_));
      partial_sum_[i] = 0.0;
    }
    partial_count_ = 0;
  }
}

std::size_t BlockAccumulator::index_of(std::string_view observable) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == observable) return i;
  fail(ErrorCode::invalid_argument, "unknown observable '" + std::string(observable) + "'");
}

EstimateWithError BlockAccumulator::estimate(std::string_view observable) const {
  const auto& means = blocks_.at(index_of(observable));
  const std::size_t n = means.size();
  if (n < minimum_blocks)
    fail(ErrorCode::insufficient_data, "observable '" + std::string(observable) + "' has " +
                                           std::to_string(n) + " complete blocks, need " +
                                           std::to_string(minimum_blocks));
  std::vector<double> sorted(means);
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double x : sorted) sum += x;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double x : sorted) ss += (x - mean) * (x - mean);
  const double variance = ss / static_cast<double>(n - 1);
  return {mean, std::sqrt(variance / static_cast<double>(n)), n};
}

BlockAccumulator merge(const BlockAccumulator& a, const BlockAccumulator& b) {
  if (a.names_.empty()) return b;
  if (b.names_.empty()) return a;
  require(a.names_ == b.names_, "cannot merge accumulators with different observables");
  require(a.block_length_ == b.block_length_, "cannot merge accumulators with different block lengths");

  const bool a_first = std::tie(a.blocks_, a.partial_sum_, a.partial_count_) <=
                       std::tie(b.blocks_, b.partial_sum_, b.partial_count_);
  const BlockAccumulator& first = a_first ? a : b;
  const BlockAccumulator& second = a_first ? b : a;

  BlockAccumulator out(first.names_, first.block_length_);
  for (std::size_t i = 0; i < out.names_.size(); ++i) {
    out.blocks_[i] = first.blocks_[i];
    out.blocks_[i].insert(out.blocks_[i].end(), second.blocks_[i].begin(), second.blocks_[i].end());
    out.partial_sum_[i] = first.partial_sum_[i] + second.partial_sum_[i];
  }
  out.partial_count_ = first.partial_count_ + second.partial_count_;
  if (out.partial_count_ >= out.block_length_) {
    for (std::size_t i = 0; i < out.names_.size(); ++i) {
      out.blocks_[i].push_back(out.partial_sum_[i] / static_cast<double>(out.partial_count_));
      out.partial_sum_[i] = 0.0;
    }
    out.partial_count_ = 0;
  }
  return out;
}

ChainState initial_chain_state(const ConditionalModel& model, double proposal_width, RandomStream rng) {
  const auto& cell = model.cell();
  const double L = cell.edge_length();
  std::vector<Vec3> positions(cell.electron_count());
  for (auto& r : positions) r = {L * rng.uniform(), L * rng.uniform(), L * rng.uniform()};
  return ChainState{EwaldCache(model.ewald(), cell, std::move(positions)), 0, proposal_width, std::move(rng)};
}

void metropolis_step(ChainState& state, const ConditionalModel& model) {
  const auto n = state.cache.positions().size();
  auto& rng = state.rng;
  const auto index = std::min(static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)), n - 1);
  const double w = state.proposal_width;
  const Vec3 step{w * (rng.uniform() - 0.5), w * (rng.uniform() - 0.5), w * (rng.uniform() - 0.5)};
  const double u = rng.uniform();
  ++state.steps;
  ++state.proposed;

  double delta_energy = 0.0;
  try {
    delta_energy = state.cache.trial_move(index, state.cache.positions()[index] + step);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::degenerate_configuration) return;
    throw;
  }
  const double delta_log_weight = model.gamma() == 0.0 ? 0.0 : -model.gamma() * delta_energy;
  if (metropolis_accept(delta_log_weight, u)) {
    state.cache.accept();
    ++state.accepted;
  }
}

ChainResult run_chain(const ConditionalModel& model, const SamplerConfig& config, std::uint64_t master_seed,
                      std::uint64_t stream, const ChainObserver& observer) {
  require(config.sample_steps > 0, "sample_steps must be positive");
  require(config.block_length > 0, "block_length must be positive");
  require(config.adapt_interval > 0, "adapt_interval must be positive");
  require(config.initial_width > 0, "initial proposal width must be positive");

  const auto& cell = model.cell();
  const double L = cell.edge_length();
  const std::uint64_t n = static_cast<std::uint64_t>(cell.electron_count());
  const std::uint64_t measure_every = config.measure_interval == 0 ? n : config.measure_interval;
  const std::uint64_t refresh_every = config.refresh_interval == 0 ? config.sample_steps : config.refresh_interval;

  ChainResult result;
  result.seed = derive_stream_seed(master_seed, stream);
  ChainState state = initial_chain_state(model, config.initial_width * L, RandomStream(master_seed, stream));

  std::uint64_t window_proposed = 0, window_accepted = 0;
  for (std::uint64_t step = 0; step < config.warmup_steps; ++step) {
    const auto before = state.accepted;
    metropolis_step(state, model);
    ++window_proposed;
    window_accepted += state.accepted - before;
    if (window_proposed == config.adapt_interval) {
      const double rate = static_cast<double>(window_accepted) / static_cast<double>(window_proposed);
      if (rate > 0.6)
        state.proposal_width = std::min(state.proposal_width * 1.25, L);
      else if (rate < 0.4)
        state.proposal_width *= 0.8;
      window_proposed = window_accepted = 0;
    }
    if ((step + 1) % refresh_every == 0) state.cache.refresh();
  }
  state.cache.refresh();

  result.accumulator = BlockAccumulator(
      {std::string(observable_reference_force_sq), std::string(observable_pair_energy)}, config.block_length);
  state.proposed = state.accepted = 0;
  const double per_particle = 1.0 / static_cast<double>(n);
  for (std::uint64_t step = 0; step < config.sample_steps; ++step) {
    metropolis_step(state, model);
    if ((step + 1) % refresh_every == 0) {
      const double cached = state.cache.energy();
      state.cache.refresh();
      result.energy_drift = std::max(result.energy_drift, std::abs(cached - state.cache.energy()));
    }
    if ((step + 1) % measure_every == 0) {
      const double sample[2] = {norm2(state.cache.force_on(0)), state.cache.energy() * per_particle};
      result.accumulator.add(sample);
      if (observer) observer(state.cache);
    }
  }

  result.acceptance = static_cast<double>(state.accepted) / static_cast<double>(state.proposed);
  result.proposal_width = state.proposal_width;
  if (result.acceptance < 0.05 || result.acceptance > 0.95) {
    std::ostringstream msg;
    msg << "acceptance " << result.acceptance << " outside [0.05, 0.95] at gamma " << model.gamma();
    result.warnings.push_back(msg.str());
  }
  return result;
}

}  // namespace ueglab
