#include "lossnet/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "lossnet/analytic.hpp"
#include "lossnet/lookahead.hpp"

namespace lossnet {

double WindowSpec::resolve(const ModelParams& params) const {
  switch (mode) {
    case Mode::Hours:
      if (!(value > 0)) throw std::invalid_argument("window hours must be positive");
      return value;
    case Mode::Auto:
      return sss_window(params);
    case Mode::Const:
      return sss_window(params, value);
  }
  throw std::logic_error("unreachable");
}

PolicyKind PolicyKind::threshold(int theta) {
  PolicyKind p;
  p.tag = Tag::Threshold;
  p.theta = theta;
  return p;
}

PolicyKind PolicyKind::pfi() {
  PolicyKind p;
  p.tag = Tag::Pfi;
  return p;
}

PolicyKind PolicyKind::sss(WindowSpec w) {
  PolicyKind p;
  p.tag = Tag::Sss;
  p.window = w;
  return p;
}

PolicyKind PolicyKind::composite_ae(PolicyKind l, PolicyKind r) {
  PolicyKind p;
  p.tag = Tag::CompositeAe;
  p.left = std::make_shared<PolicyKind>(std::move(l));
  p.right = std::make_shared<PolicyKind>(std::move(r));
  return p;
}

PolicyKind PolicyKind::composite_re(PolicyKind l, PolicyKind r) {
  PolicyKind p = composite_ae(std::move(l), std::move(r));
  p.tag = Tag::CompositeRe;
  return p;
}

namespace {

bool is_composite(const PolicyKind& p) {
  return p.tag == PolicyKind::Tag::CompositeAe || p.tag == PolicyKind::Tag::CompositeRe;
}

WindowSpec parse_window(const std::string& spec) {
  WindowSpec w;
  if (spec == "auto") {
    w.mode = WindowSpec::Mode::Auto;
  } else if (spec.rfind("c=", 0) == 0) {
    w.mode = WindowSpec::Mode::Const;
    w.value = std::stod(spec.substr(2));
  } else {
    w.mode = WindowSpec::Mode::Hours;
    w.value = std::stod(spec);
  }
  return w;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

PolicyKind PolicyKind::parse(const std::string& text) {
  if (text == "accept-all") return accept_all();
  if (text == "pfi") return pfi();
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("unknown policy: " + text);
  const std::string head = text.substr(0, colon);
  const std::string rest = text.substr(colon + 1);
  if (head == "threshold") return threshold(std::stoi(rest));
  if (head == "sss") return sss(parse_window(rest));
  if (head == "ae" || head == "re") {
    const auto comma = rest.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("composite needs two children: " + text);
    PolicyKind l = parse(rest.substr(0, comma));
    PolicyKind r = parse(rest.substr(comma + 1));
    if (is_composite(l) || is_composite(r))
      throw std::invalid_argument("composites nest only one level: " + text);
    return head == "ae" ? composite_ae(std::move(l), std::move(r))
                        : composite_re(std::move(l), std::move(r));
  }
  throw std::invalid_argument("unknown policy: " + text);
}

std::string PolicyKind::to_string() const {
  switch (tag) {
    case Tag::AcceptAll:
      return "accept-all";
    case Tag::Threshold:
      return "threshold:" + std::to_string(theta);
    case Tag::Pfi:
      return "pfi";
    case Tag::Sss:
      switch (window.mode) {
        case WindowSpec::Mode::Auto: return "sss:auto";
        case WindowSpec::Mode::Const: return "sss:c=" + format_number(window.value);
        case WindowSpec::Mode::Hours: return "sss:" + format_number(window.value);
      }
      break;
    case Tag::CompositeAe:
      return "ae:" + left->to_string() + "," + right->to_string();
    case Tag::CompositeRe:
      return "re:" + left->to_string() + "," + right->to_string();
  }
  throw std::logic_error("unreachable");
}

void PolicyKind::validate(const ModelParams& params) const {
  switch (tag) {
    case Tag::AcceptAll:
    case Tag::Pfi:
      break;
    case Tag::Threshold:
      if (theta < 0 || theta > params.n)
        throw std::invalid_argument("threshold must be in [0, N]");
      break;
    case Tag::Sss:
      window.resolve(params);  // throws on a bad spec
      break;
    case Tag::CompositeAe:
    case Tag::CompositeRe:
      if (!left || !right) throw std::invalid_argument("composite missing a child");
      if (is_composite(*left) || is_composite(*right))
        throw std::invalid_argument("composites nest only one level");
      left->validate(params);
      right->validate(params);
      break;
  }
}

Decision decide(const PolicyKind& policy, JobClass cls, const Simulation& sim) {
  switch (policy.tag) {
    case PolicyKind::Tag::AcceptAll:
      return sim.idle() > 0 ? Decision::Accept : Decision::Reject;
    case PolicyKind::Tag::Threshold:
      if (cls == JobClass::H) return sim.idle() > 0 ? Decision::Accept : Decision::Reject;
      return sim.idle() > policy.theta ? Decision::Accept : Decision::Reject;
    case PolicyKind::Tag::Pfi:
      return pfi_decide(sim, cls);
    case PolicyKind::Tag::Sss:
      return sss_decide(sim, cls, policy.window.resolve(sim.params()));
    case PolicyKind::Tag::CompositeAe:
      return (decide(*policy.left, cls, sim) == Decision::Accept ||
              decide(*policy.right, cls, sim) == Decision::Accept)
                 ? Decision::Accept
                 : Decision::Reject;
    case PolicyKind::Tag::CompositeRe:
      return (decide(*policy.left, cls, sim) == Decision::Reject ||
              decide(*policy.right, cls, sim) == Decision::Reject)
                 ? Decision::Reject
                 : Decision::Accept;
  }
  throw std::logic_error("unreachable");
}

Simulation::DecisionFn make_decision_fn(const PolicyKind& policy, const ModelParams& params) {
  policy.validate(params);
  PolicyKind bound = policy;
  if (bound.tag == PolicyKind::Tag::Sss) {
    bound.window = {WindowSpec::Mode::Hours, bound.window.resolve(params)};
  }
  return [bound](JobClass cls, const Simulation& sim) { return decide(bound, cls, sim); };
}

RunResult run_policy(const ModelParams& params, const PolicyKind& policy, double horizon,
                     std::uint64_t seed, const RunOptions& opts) {
  Simulation sim(params, seed);
  if (opts.action_log) sim.enable_action_log();
  sim.run_until(horizon, make_decision_fn(policy, params));
  RunResult result;
  result.stats = sim.stats(opts.warmup_fraction);
  result.log = sim.action_log();
  return result;
}

namespace {

struct Trace {
  std::vector<std::pair<double, int>> steps;  // (action time, Y after action)
  std::vector<double> epoch_boundaries;       // action times with Y-before == 0
};

Trace run_trace(const ModelParams& params, const PolicyKind& policy, double horizon,
                std::uint64_t seed) {
  Trace trace;
  Simulation sim(params, seed);
  const auto fn = make_decision_fn(policy, params);
  int y_before = params.n;
  while (sim.next_event_time() <= horizon) {
    const EventRecord rec = sim.step(fn);
    if (y_before == 0) trace.epoch_boundaries.push_back(rec.time);
    trace.steps.emplace_back(rec.time, rec.y_after);
    y_before = rec.y_after;
  }
  return trace;
}

}  // namespace

CouplingStats coupled_run(const ModelParams& params, const PolicyKind& left,
                          const PolicyKind& right, double horizon, std::uint64_t seed) {
  const Trace tl = run_trace(params, left, horizon, seed);
  const Trace tr = run_trace(params, right, horizon, seed);

  // Intervals over which the two idle step functions disagree.
  std::vector<std::pair<double, double>> decoupled;
  std::size_t i = 0, j = 0;
  int yl = params.n, yr = params.n;
  bool mismatched = false;
  double mismatch_start = 0.0;
  while (i < tl.steps.size() || j < tr.steps.size()) {
    double t;
    if (j >= tr.steps.size() || (i < tl.steps.size() && tl.steps[i].first <= tr.steps[j].first))
      t = tl.steps[i].first;
    else
      t = tr.steps[j].first;
    while (i < tl.steps.size() && tl.steps[i].first <= t) yl = tl.steps[i++].second;
    while (j < tr.steps.size() && tr.steps[j].first <= t) yr = tr.steps[j++].second;
    if (yl != yr && !mismatched) {
      mismatched = true;
      mismatch_start = t;
    } else if (yl == yr && mismatched) {
      mismatched = false;
      decoupled.emplace_back(mismatch_start, t);
    }
  }
  if (mismatched) decoupled.emplace_back(mismatch_start, horizon);

  CouplingStats stats;
  if (!decoupled.empty()) stats.first_decoupling = decoupled.front().first;

  // An epoch counts as decoupled when a decoupling begins inside it; carrying
  // an already-divergent state across a boundary does not recount it.
  const auto& b = tl.epoch_boundaries;
  if (b.size() >= 2) {
    std::size_t d = 0;
    for (std::size_t k = 0; k + 1 < b.size(); ++k) {
      const double start = b[k], end = b[k + 1];
      ++stats.epochs;
      while (d < decoupled.size() && decoupled[d].first < start) ++d;
      if (d < decoupled.size() && decoupled[d].first < end) ++stats.epochs_decoupled;
    }
  }
  return stats;
}

}  // namespace lossnet
