#pragma once

#include <cstdint>
#include <vector>

#include "lossnet/engine.hpp"
#include "lossnet/model.hpp"
#include "lossnet/samplepath.hpp"

namespace lossnet {

// Frozen copy of everything the reject-all-L counterfactual needs: idle
// count, pending completions, the next H arrival, and cursor snapshots into
// A_H / S_H. Building one never touches the live state.
struct CounterfactualState {
  double start_time = 0.0;
  int idle = 0;
  std::vector<double> completions;  // min-heap on time
  double next_h_arrival = 0.0;
  std::size_t ah_index = 0;
  std::size_t sh_index = 0;

  static CounterfactualState from_live(const Simulation& sim);
};

enum class RaceVerdict { HitLower, HitUpper, WindowExpired };

struct RaceOutcome {
  RaceVerdict verdict = RaceVerdict::HitLower;
  double hit_time = 0.0;  // hours after start_time
  std::uint64_t transitions = 0;
};

// Test instrumentation: one record per variate the rollout consumed, with
// the model time at which that variate's value becomes observable.
struct AccessEvent {
  StreamId stream;
  std::size_t index;
  double realization_time;
};

std::uint64_t default_transition_cap(const ModelParams& params);

// Rolls the counterfactual forward (reject every L, accept every H when a
// server is idle) until the idle count first equals lower or upper.
RaceOutcome race_to_levels(CounterfactualState cf, const SamplePath& path,
                           const ModelParams& params, int lower, int upper,
                           std::uint64_t max_transitions,
                           std::vector<AccessEvent>* access_log = nullptr);

// True iff the counterfactual idle count stays strictly above 1 throughout
// [start, start + w]. The rollout never looks past start + w.
bool window_check(CounterfactualState cf, const SamplePath& path, const ModelParams& params,
                  double w, std::vector<AccessEvent>* access_log = nullptr);

// PFI: accept H iff idle > 0; accept L iff the counterfactual reaches
// floor(sqrt(N)) before 1.
Decision pfi_decide(const Simulation& sim, JobClass cls);

// SSS: accept H iff idle > 0; accept L iff the counterfactual avoids {0,1}
// for the next w hours.
Decision sss_decide(const Simulation& sim, JobClass cls, double w);

}  // namespace lossnet
