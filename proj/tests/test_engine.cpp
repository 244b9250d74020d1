#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lossnet/analytic.hpp"
#include "lossnet/engine.hpp"

using namespace lossnet;

namespace {

ModelParams reference(int n) {
  ModelParams p;
  p.n = n;
  return p;
}

Decision accept_all(JobClass, const Simulation& sim) {
  return sim.idle() > 0 ? Decision::Accept : Decision::Reject;
}

Decision reject_l(JobClass cls, const Simulation& sim) {
  if (sim.idle() == 0) return Decision::Reject;
  return cls == JobClass::H ? Decision::Accept : Decision::Reject;
}

}  // namespace

TEST_CASE("starts empty with every server idle") {
  const ModelParams p = reference(7);
  Simulation sim(p, 1);
  CHECK(sim.idle() == 7);
  CHECK(sim.now() == 0.0);
  CHECK(sim.in_service().empty());
}

TEST_CASE("invalid parameters are rejected") {
  ModelParams p = reference(5);
  p.lambda_l = 0.1;  // lambda_h + lambda_l < mu: not overloaded
  CHECK_THROWS_AS(Simulation(p, 1), std::invalid_argument);
}

TEST_CASE("first arrivals come from the scaled unit-rate clocks") {
  const ModelParams p = reference(4);
  Simulation sim(p, 17);
  const SamplePath path(17);
  CHECK(sim.next_arrival(JobClass::H) ==
        doctest::Approx(path.value_at(StreamId::AH, 0) / (p.lambda_h * p.n)).epsilon(1e-15));
  CHECK(sim.next_arrival(JobClass::L) ==
        doctest::Approx(path.value_at(StreamId::AL, 0) / (p.lambda_l * p.n)).epsilon(1e-15));
}

TEST_CASE("an accepted job departs after its scaled service draw") {
  const ModelParams p = reference(4);
  Simulation sim(p, 9);
  // Step until the first acceptance, then verify the booked completion.
  while (sim.accepts(JobClass::H) + sim.accepts(JobClass::L) == 0) sim.step(accept_all);
  REQUIRE(sim.in_service().size() == 1);
  const InServiceJob job = sim.in_service().front();
  const SamplePath path(9);
  const StreamId stream = job.cls == JobClass::H ? StreamId::SH : StreamId::SL;
  CHECK(job.completion ==
        doctest::Approx(sim.now() + path.value_at(stream, 0) / p.mu - 0.0).epsilon(1e-12));
  const double before = sim.now();
  // No further arrival before the departure -> the departure frees the server.
  while (sim.in_service().size() == 1 && sim.idle() < 4) sim.step(reject_l);
  CHECK(sim.now() >= before);
}

TEST_CASE("hand trace of the first events against raw variates") {
  const ModelParams p = reference(2);
  const std::uint64_t seed = 31;
  Simulation sim(p, seed);
  const SamplePath path(seed);

  // Re-derive the schedule independently with plain arithmetic.
  const double ah = p.lambda_h * p.n, al = p.lambda_l * p.n;
  double next_h = path.value_at(StreamId::AH, 0) / ah;
  double next_l = path.value_at(StreamId::AL, 0) / al;
  std::size_t ah_i = 1, al_i = 1, sh_i = 0, sl_i = 0;
  std::vector<double> busy;  // completion times
  double t = 0.0;
  int accepted = 0;

  for (int step = 0; step < 40; ++step) {
    double dep = busy.empty() ? std::numeric_limits<double>::infinity()
                              : *std::min_element(busy.begin(), busy.end());
    const double tmin = std::min({next_h, next_l, dep});
    const EventRecord rec = sim.step(accept_all);
    CHECK(rec.time == doctest::Approx(tmin).epsilon(1e-12));
    t = tmin;
    if (next_h == tmin) {
      CHECK(rec.kind == EventKind::ArrivalH);
      if (busy.size() < 2) {
        CHECK(rec.decision == Decision::Accept);
        busy.push_back(t + path.value_at(StreamId::SH, sh_i++) / p.mu);
        ++accepted;
      } else {
        CHECK(rec.decision == Decision::Reject);
      }
      next_h = t + path.value_at(StreamId::AH, ah_i++) / ah;
    } else if (next_l == tmin) {
      CHECK(rec.kind == EventKind::ArrivalL);
      if (busy.size() < 2) {
        CHECK(rec.decision == Decision::Accept);
        busy.push_back(t + path.value_at(StreamId::SL, sl_i++) / p.mu);
        ++accepted;
      } else {
        CHECK(rec.decision == Decision::Reject);
      }
      next_l = t + path.value_at(StreamId::AL, al_i++) / al;
    } else {
      CHECK(rec.kind == EventKind::Departure);
      busy.erase(std::min_element(busy.begin(), busy.end()));
    }
    CHECK(rec.y_after == 2 - static_cast<int>(busy.size()));
  }
  CHECK(accepted >= 2);  // the trace exercised acceptances, not just rejections
}

TEST_CASE("long accept-all run matches the exact birth-death reward") {
  const ModelParams p = reference(2);
  const double exact = threshold_reward(p, 0);
  Simulation sim(p, 4242);
  sim.run_until(100000.0, accept_all);
  const TrajectoryStats st = sim.stats();
  // Rough regenerative-cycle bound on the standard error of the rate.
  CHECK(std::abs(st.reward_rate_warm - exact) < 0.06);
  CHECK(st.reward_rate <= p.n * (p.lambda_h * p.r_h + p.lambda_l * p.r_l) + 1e-9);
}

TEST_CASE("same seed replays the same trajectory") {
  const ModelParams p = reference(5);
  Simulation a(p, 77), b(p, 77);
  a.run_until(500.0, accept_all);
  b.run_until(500.0, accept_all);
  CHECK(a.reward() == b.reward());
  CHECK(a.events() == b.events());
  CHECK(a.idleness_integral() == b.idleness_integral());
  CHECK(a.accepts(JobClass::L) == b.accepts(JobClass::L));
}

TEST_CASE("flow conservation: accepts = completions + in service") {
  const ModelParams p = reference(10);
  Simulation sim(p, 3);
  sim.run_until(2000.0, accept_all);
  const std::uint64_t accepted = sim.accepts(JobClass::H) + sim.accepts(JobClass::L);
  const std::uint64_t completed = sim.completions(JobClass::H) + sim.completions(JobClass::L);
  CHECK(accepted == completed + sim.in_service().size());
  std::uint64_t h_in_service = 0;
  for (const auto& j : sim.in_service())
    if (j.cls == JobClass::H) ++h_in_service;
  CHECK(sim.accepts(JobClass::H) == sim.completions(JobClass::H) + h_in_service);
}

TEST_CASE("work conservation: idleness integral matches busy time") {
  const ModelParams p = reference(6);
  Simulation sim(p, 12);
  double busy_integral = 0.0;
  double last_t = 0.0;
  int busy = 0;
  for (int i = 0; i < 20000; ++i) {
    const EventRecord rec = sim.step(accept_all);
    busy_integral += busy * (rec.time - last_t);
    last_t = rec.time;
    busy = p.n - rec.y_after;
  }
  busy_integral += busy * (sim.now() - last_t);
  CHECK(sim.idleness_integral() + busy_integral ==
        doctest::Approx(p.n * sim.now()).epsilon(1e-9));
}

TEST_CASE("reward increments only by the per-class prices") {
  const ModelParams p = reference(3);
  Simulation sim(p, 8);
  double prev = 0.0;
  for (int i = 0; i < 5000; ++i) {
    sim.step(accept_all);
    const double inc = sim.reward() - prev;
    const bool ok = std::abs(inc) < 1e-12 || std::abs(inc - p.r_l) < 1e-12 ||
                    std::abs(inc - p.r_h) < 1e-12;
    CHECK(ok);
    prev = sim.reward();
  }
}

TEST_CASE("acceptance into a full system is a contract violation") {
  const ModelParams p = reference(2);
  Simulation sim(p, 5);
  const auto bad = [](JobClass, const Simulation&) { return Decision::Accept; };
  CHECK_THROWS_AS(
      [&] {
        for (int i = 0; i < 100000; ++i) sim.step(bad);
      }(),
      PolicyContractViolation);
}

TEST_CASE("full-system arrivals never enter under a sane policy") {
  const ModelParams p = reference(2);
  Simulation sim(p, 5);
  for (int i = 0; i < 50000; ++i) {
    const EventRecord rec = sim.step(accept_all);
    CHECK(rec.y_after >= 0);
    CHECK(rec.y_after <= p.n);
  }
}

TEST_CASE("threshold occupancy distribution matches the product form") {
  for (int n : {2, 10, 50}) {
    for (int theta : {0, 2, 5}) {
      if (theta > n) continue;
      const ModelParams p = reference(n);
      Simulation sim(p, 1000 + n + theta);
      const auto fn = [theta](JobClass cls, const Simulation& s) {
        if (s.idle() == 0) return Decision::Reject;
        if (cls == JobClass::H) return Decision::Accept;
        return s.idle() > theta ? Decision::Accept : Decision::Reject;
      };
      // Accumulate the empirical busy distribution over event intervals.
      std::vector<double> occ(static_cast<std::size_t>(n) + 1, 0.0);
      double last_t = 0.0;
      int busy = 0;
      const double horizon = 20000.0 / n + 2000.0;
      while (sim.next_event_time() <= horizon) {
        const EventRecord rec = sim.step(fn);
        occ[static_cast<std::size_t>(busy)] += rec.time - last_t;
        last_t = rec.time;
        busy = n - rec.y_after;
      }
      const auto pi = stationary_distribution(threshold_busy_chain(p, theta));
      double tv = 0.0;
      for (std::size_t k = 0; k <= static_cast<std::size_t>(n); ++k)
        tv += std::abs(occ[k] / last_t - pi[k]);
      CHECK(tv / 2.0 < 0.05);
    }
  }
}
