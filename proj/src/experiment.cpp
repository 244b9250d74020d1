#include "lossnet/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "lossnet/analytic.hpp"
#include "lossnet/estimators.hpp"

namespace lossnet {

using nlohmann::json;

SweepConfig SweepConfig::from_json_text(const std::string& text) {
  const json j = json::parse(text);
  SweepConfig c;
  if (j.contains("params")) {
    const json& p = j.at("params");
    if (p.contains("lambda_h")) c.base.lambda_h = p.at("lambda_h").get<double>();
    if (p.contains("lambda_l")) c.base.lambda_l = p.at("lambda_l").get<double>();
    if (p.contains("mu")) c.base.mu = p.at("mu").get<double>();
    if (p.contains("r_h")) c.base.r_h = p.at("r_h").get<double>();
    if (p.contains("r_l")) c.base.r_l = p.at("r_l").get<double>();
  }
  c.n_list = j.at("n_list").get<std::vector<int>>();
  c.policies = j.at("policies").get<std::vector<std::string>>();
  if (j.contains("horizon")) c.horizon = j.at("horizon").get<double>();
  if (j.contains("event_budget")) c.event_budget = j.at("event_budget").get<std::uint64_t>();
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (c.seeds.empty()) c.seeds = {1};
  if (j.contains("warmup_fraction")) c.warmup_fraction = j.at("warmup_fraction").get<double>();
  if (j.contains("out")) c.out = j.at("out").get<std::string>();
  c.validate();
  return c;
}

void SweepConfig::validate() const {
  if (policies.empty()) throw std::invalid_argument("sweep config: nothing to run (no policies)");
  if (n_list.empty()) throw std::invalid_argument("sweep config: empty n_list");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1])
      throw std::invalid_argument("sweep config: n_list must be strictly increasing");
  for (const auto& p : policies) PolicyKind::parse(p);  // throws on a bad string
  if (!(horizon > 0)) throw std::invalid_argument("sweep config: horizon must be positive");
  if (seeds.empty()) throw std::invalid_argument("sweep config: no seeds");
  if (!(warmup_fraction >= 0 && warmup_fraction < 1))
    throw std::invalid_argument("sweep config: warmup_fraction must be in [0, 1)");
}

double SweepConfig::horizon_for(int n) const {
  if (!event_budget) return horizon;
  // Approximate event rate: arrivals plus at most mu per busy server.
  const double rate = n * (base.lambda_h + base.lambda_l + base.mu);
  return static_cast<double>(*event_budget) / rate;
}

namespace {

bool is_exact_policy(const PolicyKind& p) {
  return p.tag == PolicyKind::Tag::AcceptAll || p.tag == PolicyKind::Tag::Threshold;
}

SweepRow simulate_cell(const ModelParams& params, const PolicyKind& policy,
                       const std::string& policy_text, double horizon, std::uint64_t seed,
                       double warmup_fraction) {
  SweepRow row;
  row.n = params.n;
  row.policy = policy_text;
  row.seed = seed;

  RunOptions opts;
  opts.action_log = true;
  opts.warmup_fraction = warmup_fraction;
  const RunResult run = run_policy(params, policy, horizon, seed, opts);
  row.reward_rate = run.stats.reward_rate;
  row.hrej_per_hour = run.stats.h_rejects_per_hour;

  const auto epochs = policy.tag == PolicyKind::Tag::Pfi ? detect_pfi_epochs(run.log)
                                                         : detect_sss_epochs(run.log);
  row.epoch_count = epochs.size();
  if (!epochs.empty()) {
    double idle_sum = 0.0, dur_sum = 0.0;
    for (const auto& e : epochs) {
      idle_sum += e.idleness;
      dur_sum += e.duration();
    }
    if (dur_sum > 0) row.idleness_per_epoch = idle_sum / dur_sum;
  }

  constexpr std::size_t kMinEpochs = 30;
  if (epochs.size() >= kMinEpochs) {
    const GapEstimate g = regenerative_gap(epochs, params, kMinEpochs);
    row.method = "regenerative";
    row.gap_point = g.point;
    row.gap_stderr = g.std_error;
  } else {
    const double cut = warmup_fraction * horizon;
    const GapEstimate g = reward_rate_batch_means(run.log, cut, horizon * 0.999, 20);
    row.method = "batch-means";
    row.gap_point = fluid_reward(params) - g.point;
    row.gap_stderr = g.std_error;
  }
  return row;
}

}  // namespace

SweepRow run_cell(const ModelParams& params, const std::string& policy_text, double horizon,
                  std::uint64_t seed, double warmup_fraction) {
  const auto t0 = std::chrono::steady_clock::now();
  SweepRow row;
  row.n = params.n;
  row.policy = policy_text;
  row.seed = seed;
  try {
    const PolicyKind policy = PolicyKind::parse(policy_text);
    policy.validate(params);
    if (is_exact_policy(policy)) {
      const int theta = policy.tag == PolicyKind::Tag::Threshold ? policy.theta : 0;
      row.method = "exact";
      row.reward_rate = threshold_reward(params, theta);
      row.gap_point = fluid_reward(params) - row.reward_rate;
      row.gap_stderr = 0.0;
      row.hrej_per_hour = threshold_h_rejection_rate(params, theta);
    } else {
      row = simulate_cell(params, policy, policy_text, horizon, seed, warmup_fraction);
    }
  } catch (const std::exception& e) {
    row.method = "failed";
    row.error = e.what();
  }
  row.wallclock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

std::vector<SweepRow> run_sweep(const SweepConfig& config) {
  config.validate();
  config.base.validate();

  struct Cell {
    int n;
    std::string policy;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (int n : config.n_list)
    for (const auto& p : config.policies)
      for (std::uint64_t s : config.seeds) cells.push_back({n, p, s});

  std::vector<SweepRow> rows(cells.size());
  unsigned workers = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("LOSSNET_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) workers = static_cast<unsigned>(v);
  }
  workers = std::max(1u, std::min<unsigned>(workers, cells.size()));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
      const Cell& c = cells[i];
      rows[i] = run_cell(config.base.with_n(c.n), c.policy, config.horizon_for(c.n), c.seed,
                         config.warmup_fraction);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

const char* const kSweepCsvHeader =
    "N,policy,seed,method,reward_rate,gap_point,gap_stderr,idleness_per_epoch,"
    "hrej_per_hour,epoch_count,wallclock_s";

void write_csv(std::ostream& os, std::span<const SweepRow> rows) {
  os << kSweepCsvHeader << "\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%s,%llu,%s,%.10g,%.10g,%.10g,%.10g,%.10g,%llu,%.3f",
                  r.n, r.policy.c_str(), static_cast<unsigned long long>(r.seed),
                  r.method.c_str(), r.reward_rate, r.gap_point, r.gap_stderr,
                  r.idleness_per_epoch, r.hrej_per_hour,
                  static_cast<unsigned long long>(r.epoch_count), r.wallclock_s);
    os << buf << "\n";
  }
}

SlopeFit fit_log_slope(std::span<const std::pair<double, double>> points) {
  return fit_log_slope_weighted(points, {});
}

SlopeFit fit_log_slope_weighted(std::span<const std::pair<double, double>> points,
                                std::span<const double> sigmas) {
  std::vector<double> xs;
  for (const auto& [n, gap] : points) {
    if (!(n > 1)) throw std::invalid_argument("fit requires N > 1");
    xs.push_back(std::log(n));
  }
  const std::size_t m = points.size();
  if (m < 2) throw std::invalid_argument("fit requires at least 2 points");
  {
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back())
      throw std::invalid_argument("fit requires at least 2 distinct N");
  }
  if (!sigmas.empty() && sigmas.size() != m)
    throw std::invalid_argument("one sigma per point required");

  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    xbar += xs[i];
    ybar += points[i].second;
  }
  xbar /= static_cast<double>(m);
  ybar /= static_cast<double>(m);

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = xs[i] - xbar, dy = points[i].second - ybar;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }

  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;

  double ss_res = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double resid = points[i].second - (fit.intercept + fit.slope * xs[i]);
    ss_res += resid * resid;
  }
  fit.r2 = syy > 0 ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;

  if (sigmas.empty()) {
    fit.std_error = m > 2 ? std::sqrt(ss_res / static_cast<double>(m - 2) / sxx) : 0.0;
  } else {
    double var = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double c = (xs[i] - xbar) / sxx;
      var += c * c * sigmas[i] * sigmas[i];
    }
    fit.std_error = std::sqrt(var);
  }
  return fit;
}

std::vector<CouplingCell> coupling_report(const ModelParams& base, std::span<const int> n_list,
                                          double horizon, std::span<const std::uint64_t> seeds,
                                          const WindowSpec& window) {
  std::vector<CouplingCell> cells;
  for (int n : n_list) {
    const ModelParams params = base.with_n(n);
    const PolicyKind sss = PolicyKind::sss(window);
    const PolicyKind ae = PolicyKind::composite_ae(PolicyKind::sss(window), PolicyKind::pfi());
    CouplingCell cell;
    cell.n = n;
    for (std::uint64_t seed : seeds) {
      const CouplingStats s = coupled_run(params, sss, ae, horizon, seed);
      cell.epochs += s.epochs;
      cell.epochs_decoupled += s.epochs_decoupled;
    }
    cell.frequency = cell.epochs ? double(cell.epochs_decoupled) / double(cell.epochs) : 0.0;
    cells.push_back(cell);
  }
  return cells;
}

}  // namespace lossnet
