#include "lossnet/engine.hpp"

#include <algorithm>
#include <cmath>

namespace lossnet {

namespace {
struct LaterCompletion {
  bool operator()(const InServiceJob& a, const InServiceJob& b) const {
    return a.completion > b.completion;
  }
};
}  // namespace

Simulation::Simulation(const ModelParams& params, std::uint64_t seed)
    : params_(params), path_(seed), tracker_(params.sqrt_level()) {
  params_.validate();
  in_service_.reserve(params_.n);
  next_arrival_h_ = draw_next(cursor_, path_, StreamId::AH) / (params_.lambda_h * params_.n);
  next_arrival_l_ = draw_next(cursor_, path_, StreamId::AL) / (params_.lambda_l * params_.n);
  tracker_.on_init(params_.n);
}

double Simulation::next_event_time() const {
  double t = std::min(next_arrival_h_, next_arrival_l_);
  if (!in_service_.empty()) t = std::min(t, in_service_.front().completion);
  return t;
}

void Simulation::advance_clock(double t) {
  idleness_integral_ += idle() * (t - now_);
  now_ = t;
}

void Simulation::change_idle_to(int new_y) {
  tracker_.on_level_change(idle(), new_y, now_);
}

void Simulation::record_snapshot() {
  if (!log_actions_) return;
  ActionSnapshot snap;
  snap.time = now_;
  snap.y = idle();
  snap.u = tracker_.event_u(snap.y, now_);
  snap.p = tracker_.event_p(snap.y, now_);
  snap.w = tracker_.event_w(now_);
  snap.idleness_cum = idleness_integral_;
  snap.reward_cum = reward_;
  snap.h_accepts = h_accepts_;
  snap.h_rejects = h_rejects_;
  snap.l_accepts = l_accepts_;
  snap.l_rejects = l_rejects_;
  action_log_.push_back(snap);
}

EventRecord Simulation::step(const DecisionFn& decide) {
  const double t_c =
      in_service_.empty() ? std::numeric_limits<double>::infinity() : in_service_.front().completion;

  EventRecord rec;
  // Ties have probability zero; break them H-arrival < L-arrival < departure.
  if (next_arrival_h_ <= next_arrival_l_ && next_arrival_h_ <= t_c) {
    rec.kind = EventKind::ArrivalH;
    rec.time = next_arrival_h_;
  } else if (next_arrival_l_ <= t_c) {
    rec.kind = EventKind::ArrivalL;
    rec.time = next_arrival_l_;
  } else {
    rec.kind = EventKind::Departure;
    rec.time = t_c;
  }

  advance_clock(rec.time);
  record_snapshot();

  switch (rec.kind) {
    case EventKind::ArrivalH: {
      rec.decision = decide(JobClass::H, *this);
      if (rec.decision == Decision::Accept) {
        if (idle() == 0)
          throw PolicyContractViolation("policy accepted an H job into a full system");
        const double s = draw_next(cursor_, path_, StreamId::SH) / params_.mu;
        change_idle_to(idle() - 1);
        in_service_.push_back({now_ + s, JobClass::H});
        std::push_heap(in_service_.begin(), in_service_.end(), LaterCompletion{});
        reward_ += params_.r_h;
        ++h_accepts_;
      } else {
        ++h_rejects_;
      }
      next_arrival_h_ =
          now_ + draw_next(cursor_, path_, StreamId::AH) / (params_.lambda_h * params_.n);
      break;
    }
    case EventKind::ArrivalL: {
      rec.decision = decide(JobClass::L, *this);
      if (rec.decision == Decision::Accept) {
        if (idle() == 0)
          throw PolicyContractViolation("policy accepted an L job into a full system");
        const double s = draw_next(cursor_, path_, StreamId::SL) / params_.mu;
        tracker_.on_l_accept(now_, s);
        change_idle_to(idle() - 1);
        in_service_.push_back({now_ + s, JobClass::L});
        std::push_heap(in_service_.begin(), in_service_.end(), LaterCompletion{});
        reward_ += params_.r_l;
        ++l_accepts_;
      } else {
        tracker_.on_l_reject(now_, idle());
        ++l_rejects_;
      }
      next_arrival_l_ =
          now_ + draw_next(cursor_, path_, StreamId::AL) / (params_.lambda_l * params_.n);
      break;
    }
    case EventKind::Departure: {
      const int old_y = idle();
      std::pop_heap(in_service_.begin(), in_service_.end(), LaterCompletion{});
      const JobClass cls = in_service_.back().cls;
      in_service_.pop_back();
      tracker_.on_level_change(old_y, old_y + 1, now_);
      if (cls == JobClass::H)
        ++h_completions_;
      else
        ++l_completions_;
      break;
    }
  }
  ++events_;
  rec.y_after = idle();
  return rec;
}

void Simulation::run_until(double horizon, const DecisionFn& decide) {
  if (horizon <= now_) throw std::invalid_argument("horizon must exceed current time");
  while (next_event_time() <= horizon) step(decide);
  advance_clock(horizon);
}

TrajectoryStats Simulation::stats(double warmup_fraction) const {
  TrajectoryStats s;
  s.horizon = now_;
  if (now_ <= 0) return s;
  s.reward_rate = reward_ / now_;
  s.idleness_avg = idleness_integral_ / now_;
  s.h_rejects_per_hour = h_rejects_ / now_;
  s.l_rejects_per_hour = l_rejects_ / now_;
  s.h_accepts = h_accepts_;
  s.h_rejects = h_rejects_;
  s.l_accepts = l_accepts_;
  s.l_rejects = l_rejects_;
  s.events = events_;

  s.reward_rate_warm = s.reward_rate;
  const double cut = warmup_fraction * now_;
  if (cut > 0 && !action_log_.empty()) {
    auto it = std::lower_bound(action_log_.begin(), action_log_.end(), cut,
                               [](const ActionSnapshot& a, double t) { return a.time < t; });
    if (it != action_log_.end() && it->time < now_)
      s.reward_rate_warm = (reward_ - it->reward_cum) / (now_ - it->time);
  }
  return s;
}

}  // namespace lossnet
