#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "lossnet/model.hpp"
#include "lossnet/samplepath.hpp"

namespace lossnet {

// The per-run memory needed to evaluate the epoch-start events U, P, W and
// the SSS window event: last L rejection/acceptance/service times, last-hit
// times of the tracked idle levels {0, 1, s-1, s} with s = floor(sqrt(N)),
// and the flag for the idle process touching s-1 while the last accepted L
// was in service.
class HistoryTracker {
 public:
  explicit HistoryTracker(int sqrt_level) : s_level_(sqrt_level) {}

  void on_init(int y0) {
    if (is_tracked(y0)) last_hit_raw(y0) = 0.0;
  }

  // Idle count moved from old_y to new_y at time now.
  void on_level_change(int old_y, int new_y, double now) {
    if (is_tracked(old_y)) last_hit_raw(old_y) = now;
    if (is_tracked(new_y)) last_hit_raw(new_y) = now;
    if (new_y == 1 || old_y == 1) first_l_reject_after_level1_.reset();
    if (new_y == s_level_ - 1 && now < last_l_completion_) hit_sm1_during_last_l_ = true;
  }

  void on_l_reject(double now, int y) {
    last_l_reject_ = now;
    if (y != 1 && !first_l_reject_after_level1_) first_l_reject_after_level1_ = now;
  }

  void on_l_accept(double now, double service_duration) {
    last_l_accept_ = now;
    last_l_service_ = service_duration;
    last_l_completion_ = now + service_duration;
    hit_sm1_during_last_l_ = false;
  }

  // Most recent time the idle process equaled the level; the level is "hit"
  // right now if the process currently sits on it.
  double last_hit(int level, int y_now, double now) const {
    if (level == y_now) return now;
    return is_tracked(level) ? last_hit_const(level) : -kInf;
  }

  // An L rejection occurred strictly after the last visit to level 1.
  bool event_u(int y_now, double now) const {
    return last_l_reject_ && *last_l_reject_ > last_hit(1, y_now, now);
  }

  // The last accepted L job is still in service.
  bool event_w(double now) const { return last_l_accept_ && now < last_l_completion_; }

  // An L job was accepted since the last visit to level s, and the idle
  // process did not touch s-1 while that job was in service.
  bool event_p(int y_now, double now) const {
    return last_l_accept_ && *last_l_accept_ > last_hit(s_level_, y_now, now) &&
           !hit_sm1_during_last_l_;
  }

  // An L job was accepted within the last w hours.
  bool event_p_sss(double now, double w) const {
    return last_l_accept_ && now - *last_l_accept_ < w;
  }

  std::optional<double> last_l_reject_time() const { return last_l_reject_; }
  std::optional<double> last_l_accept_time() const { return last_l_accept_; }
  std::optional<double> last_l_service_duration() const { return last_l_service_; }
  std::optional<double> first_l_reject_after_level1() const {
    return first_l_reject_after_level1_;
  }
  bool hit_sm1_during_last_l() const { return hit_sm1_during_last_l_; }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  bool is_tracked(int level) const {
    return level == 0 || level == 1 || level == s_level_ - 1 || level == s_level_;
  }
  double& last_hit_raw(int level) {
    if (level == 0) return hit_0_;
    if (level == 1) return hit_1_;
    return level == s_level_ - 1 ? hit_sm1_ : hit_s_;
  }
  double last_hit_const(int level) const {
    if (level == 0) return hit_0_;
    if (level == 1) return hit_1_;
    if (level == s_level_ - 1) return hit_sm1_;
    return hit_s_;
  }

  int s_level_;
  std::optional<double> last_l_reject_;
  std::optional<double> last_l_accept_;
  std::optional<double> last_l_service_;
  std::optional<double> first_l_reject_after_level1_;
  double last_l_completion_ = -kInf;
  bool hit_sm1_during_last_l_ = false;
  double hit_0_ = -kInf, hit_1_ = -kInf, hit_sm1_ = -kInf, hit_s_ = -kInf;
};

enum class EventKind { ArrivalH, ArrivalL, Departure };

struct EventRecord {
  double time = 0.0;
  EventKind kind = EventKind::ArrivalH;
  Decision decision = Decision::Reject;  // meaningful for arrivals only
  int y_after = 0;
};

// State immediately before an action, plus cumulative tallies up to (and
// excluding) it. Epoch detection and batch means run over these.
struct ActionSnapshot {
  double time = 0.0;
  int y = 0;
  bool u = false, p = false, w = false;
  double idleness_cum = 0.0;   // integral of Y dt
  double reward_cum = 0.0;
  std::uint64_t h_accepts = 0, h_rejects = 0, l_accepts = 0, l_rejects = 0;
};

struct TrajectoryStats {
  double horizon = 0.0;
  double reward_rate = 0.0;        // from t = 0
  double reward_rate_warm = 0.0;   // after the warm-up cut
  double idleness_avg = 0.0;       // time-average idle servers, from t = 0
  double h_rejects_per_hour = 0.0;
  double l_rejects_per_hour = 0.0;
  std::uint64_t h_accepts = 0, h_rejects = 0, l_accepts = 0, l_rejects = 0;
  std::uint64_t events = 0;
};

struct InServiceJob {
  double completion = 0.0;
  JobClass cls = JobClass::H;
};

// Discrete-event core. Drives the two arrival clocks and the service
// completions against a SamplePath; admission is delegated to a decision
// callback queried at each arrival.
class Simulation {
 public:
  using DecisionFn = std::function<Decision(JobClass, const Simulation&)>;

  Simulation(const ModelParams& params, std::uint64_t seed);

  EventRecord step(const DecisionFn& decide);
  void run_until(double horizon, const DecisionFn& decide);

  void enable_action_log() { log_actions_ = true; }
  const std::vector<ActionSnapshot>& action_log() const { return action_log_; }

  TrajectoryStats stats(double warmup_fraction = 0.05) const;

  const ModelParams& params() const { return params_; }
  const SamplePath& path() const { return path_; }
  const Cursor& cursor() const { return cursor_; }
  const HistoryTracker& tracker() const { return tracker_; }
  const std::vector<InServiceJob>& in_service() const { return in_service_; }

  double now() const { return now_; }
  int idle() const { return params_.n - static_cast<int>(in_service_.size()); }
  double next_arrival(JobClass cls) const {
    return cls == JobClass::H ? next_arrival_h_ : next_arrival_l_;
  }
  double next_event_time() const;
  double reward() const { return reward_; }
  double idleness_integral() const { return idleness_integral_; }
  std::uint64_t accepts(JobClass cls) const {
    return cls == JobClass::H ? h_accepts_ : l_accepts_;
  }
  std::uint64_t rejects(JobClass cls) const {
    return cls == JobClass::H ? h_rejects_ : l_rejects_;
  }
  std::uint64_t completions(JobClass cls) const {
    return cls == JobClass::H ? h_completions_ : l_completions_;
  }
  std::uint64_t events() const { return events_; }

 private:
  void advance_clock(double t);
  void change_idle_to(int new_y);
  void record_snapshot();

  ModelParams params_;
  SamplePath path_;
  Cursor cursor_;
  HistoryTracker tracker_;

  double now_ = 0.0;
  std::vector<InServiceJob> in_service_;  // min-heap on completion time
  double next_arrival_h_ = 0.0;
  double next_arrival_l_ = 0.0;

  double reward_ = 0.0;
  double idleness_integral_ = 0.0;
  std::uint64_t h_accepts_ = 0, h_rejects_ = 0, l_accepts_ = 0, l_rejects_ = 0;
  std::uint64_t h_completions_ = 0, l_completions_ = 0;
  std::uint64_t events_ = 0;

  bool log_actions_ = false;
  std::vector<ActionSnapshot> action_log_;
};

}  // namespace lossnet
