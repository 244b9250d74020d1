#pragma once

#include <memory>
#include <optional>
#include <string>

#include "lossnet/engine.hpp"
#include "lossnet/model.hpp"

namespace lossnet {

// How the SSS window is chosen: explicit hours, the closed-form sufficient
// constant times log(N)/N, or an overriding constant times log(N)/N.
struct WindowSpec {
  enum class Mode { Hours, Auto, Const } mode = Mode::Auto;
  double value = 0.0;  // hours or constant, depending on mode

  double resolve(const ModelParams& params) const;
};

// Policy catalog. Composites nest exactly one level of non-composite
// children and keep their own occupancy; children are consulted on the
// composite's state view.
struct PolicyKind {
  enum class Tag { AcceptAll, Threshold, Pfi, Sss, CompositeAe, CompositeRe };

  Tag tag = Tag::AcceptAll;
  int theta = 0;        // Threshold
  WindowSpec window;    // Sss
  std::shared_ptr<PolicyKind> left, right;  // composites

  static PolicyKind accept_all() { return {}; }
  static PolicyKind threshold(int theta);
  static PolicyKind pfi();
  static PolicyKind sss(WindowSpec w);
  static PolicyKind composite_ae(PolicyKind l, PolicyKind r);
  static PolicyKind composite_re(PolicyKind l, PolicyKind r);

  // "accept-all" | "threshold:<k>" | "pfi" | "sss:<w|auto|c=<const>>" |
  // "ae:<p1>,<p2>" | "re:<p1>,<p2>"
  static PolicyKind parse(const std::string& text);
  std::string to_string() const;

  void validate(const ModelParams& params) const;
};

Decision decide(const PolicyKind& policy, JobClass cls, const Simulation& sim);

// Binds a policy (window resolved against params) into an engine callback.
Simulation::DecisionFn make_decision_fn(const PolicyKind& policy, const ModelParams& params);

struct RunOptions {
  bool action_log = false;
  double warmup_fraction = 0.05;
};

struct RunResult {
  TrajectoryStats stats;
  std::vector<ActionSnapshot> log;
};

RunResult run_policy(const ModelParams& params, const PolicyKind& policy, double horizon,
                     std::uint64_t seed, const RunOptions& opts = {});

struct CouplingStats {
  std::uint64_t epochs = 0;            // SSS-style epochs of the left run
  std::uint64_t epochs_decoupled = 0;  // epochs whose span contains a decoupling
  std::optional<double> first_decoupling;
  double frequency() const { return epochs ? double(epochs_decoupled) / double(epochs) : 0.0; }
};

// Runs both policies on the same sample path (shared seed, independent
// states) and reports how often their idle processes decouple, per epoch of
// the left trajectory.
CouplingStats coupled_run(const ModelParams& params, const PolicyKind& left,
                          const PolicyKind& right, double horizon, std::uint64_t seed);

}  // namespace lossnet
