#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lossnet/model.hpp"
#include "lossnet/policy.hpp"

namespace lossnet {

struct SweepConfig {
  ModelParams base;  // n is overridden per sweep point
  std::vector<int> n_list;
  std::vector<std::string> policies;
  double horizon = 2000.0;
  std::optional<std::uint64_t> event_budget;  // overrides horizon per N when set
  std::vector<std::uint64_t> seeds;
  double warmup_fraction = 0.05;
  std::string out;

  static SweepConfig from_json_text(const std::string& text);
  void validate() const;
  double horizon_for(int n) const;
};

struct SweepRow {
  int n = 0;
  std::string policy;
  std::uint64_t seed = 0;
  std::string method;  // "exact" | "regenerative" | "batch-means" | "failed"
  double reward_rate = 0.0;
  double gap_point = 0.0;
  double gap_stderr = 0.0;
  double idleness_per_epoch = 0.0;  // mean idleness integral / mean duration
  double hrej_per_hour = 0.0;
  std::uint64_t epoch_count = 0;
  double wallclock_s = 0.0;
  std::string error;  // non-empty for failed cells
};

// One simulated or exactly solved cell. Threshold and accept-all policies
// are solved on the stationary chain; lookahead policies are simulated and
// estimated regeneratively (batch means below the epoch minimum).
SweepRow run_cell(const ModelParams& params, const std::string& policy_text, double horizon,
                  std::uint64_t seed, double warmup_fraction);

// All cells of the config; parallel across cells (LOSSNET_WORKERS), rows in
// canonical (N, policy, seed) order regardless of completion order.
std::vector<SweepRow> run_sweep(const SweepConfig& config);

extern const char* const kSweepCsvHeader;
void write_csv(std::ostream& os, std::span<const SweepRow> rows);

struct SlopeFit {
  double slope = 0.0;      // per unit log N
  double intercept = 0.0;
  double r2 = 0.0;
  double std_error = 0.0;  // residual-based, or propagated when sigmas given
};

// OLS of gap against ln N.
SlopeFit fit_log_slope(std::span<const std::pair<double, double>> points);

// Same fit, but the slope's standard error is propagated from per-point
// measurement errors instead of residuals.
SlopeFit fit_log_slope_weighted(std::span<const std::pair<double, double>> points,
                                std::span<const double> sigmas);

struct CouplingCell {
  int n = 0;
  std::uint64_t epochs = 0;
  std::uint64_t epochs_decoupled = 0;
  double frequency = 0.0;
};

// SSS-vs-AE(SSS, PFI) decoupling frequency per SSS epoch, seeds pooled per N.
std::vector<CouplingCell> coupling_report(const ModelParams& base, std::span<const int> n_list,
                                          double horizon, std::span<const std::uint64_t> seeds,
                                          const WindowSpec& window);

}  // namespace lossnet
