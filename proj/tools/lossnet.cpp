#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lossnet/analytic.hpp"
#include "lossnet/engine.hpp"
#include "lossnet/estimators.hpp"
#include "lossnet/experiment.hpp"
#include "lossnet/model.hpp"
#include "lossnet/policy.hpp"

using nlohmann::json;
using namespace lossnet;

namespace {

void add_param_flags(CLI::App* cmd, ModelParams& params) {
  cmd->add_option("--lambda-h", params.lambda_h, "H arrival rate per server (1/hour)");
  cmd->add_option("--lambda-l", params.lambda_l, "L arrival rate per server (1/hour)");
  cmd->add_option("--mu", params.mu, "service rate (1/hour)");
  cmd->add_option("--r-h", params.r_h, "reward per H job");
  cmd->add_option("--r-l", params.r_l, "reward per L job");
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot open output file: " + path);
  return file;
}

const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::ArrivalH: return "arrival_h";
    case EventKind::ArrivalL: return "arrival_l";
    case EventKind::Departure: return "departure";
  }
  return "?";
}

int cmd_simulate(const ModelParams& params, const std::string& policy_text, double horizon,
                 std::uint64_t seed, double warmup, const std::string& out,
                 const std::string& event_log_path) {
  if (!event_log_path.empty()) {
    std::ofstream elog(event_log_path);
    if (!elog) throw std::runtime_error("cannot open event log: " + event_log_path);
    Simulation sim(params, seed);
    const auto fn = make_decision_fn(PolicyKind::parse(policy_text), params);
    while (sim.next_event_time() <= horizon) {
      const EventRecord rec = sim.step(fn);
      json line = {{"time", rec.time},
                   {"event", event_kind_name(rec.kind)},
                   {"y", rec.y_after}};
      if (rec.kind != EventKind::Departure)
        line["decision"] = rec.decision == Decision::Accept ? "accept" : "reject";
      elog << line.dump() << "\n";
    }
  }
  const SweepRow row = run_cell(params, policy_text, horizon, seed, warmup);
  if (row.method == "failed") throw std::runtime_error(row.error);
  std::ofstream file;
  std::ostream& os = open_out(file, out);
  write_csv(os, std::span(&row, 1));
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_override) {
  std::ifstream in(config_path);
  if (!in) throw std::runtime_error("cannot open config: " + config_path);
  std::stringstream ss;
  ss << in.rdbuf();
  SweepConfig config = SweepConfig::from_json_text(ss.str());
  if (!out_override.empty()) config.out = out_override;

  const std::vector<SweepRow> rows = run_sweep(config);
  std::ofstream file;
  std::ostream& os = open_out(file, config.out);
  write_csv(os, rows);
  for (const auto& r : rows)
    if (r.method == "failed")
      std::cerr << json({{"warning", "cell failed"},
                         {"n", r.n},
                         {"policy", r.policy},
                         {"seed", r.seed},
                         {"error", r.error}})
                       .dump()
                << "\n";
  return 0;
}

int cmd_exact(const ModelParams& base, const std::vector<int>& n_list, bool all_theta,
              const std::string& out, const std::string& plot_out) {
  std::ofstream file;
  std::ostream& os = open_out(file, out);
  std::ofstream plot;
  if (!plot_out.empty()) {
    plot.open(plot_out);
    if (!plot) throw std::runtime_error("cannot open plot file: " + plot_out);
  }
  os << "N,theta,reward,gap\n";
  char buf[160];
  for (int n : n_list) {
    const ModelParams params = base.with_n(n);
    const double fluid = fluid_reward(params);
    if (all_theta) {
      for (int theta = 0; theta <= n; ++theta) {
        const double r = threshold_reward(params, theta);
        std::snprintf(buf, sizeof buf, "%d,%d,%.10g,%.10g", n, theta, r, fluid - r);
        os << buf << "\n";
      }
    } else {
      const int theta = best_threshold(params);
      const double r = threshold_reward(params, theta);
      std::snprintf(buf, sizeof buf, "%d,%d,%.10g,%.10g", n, theta, r, fluid - r);
      os << buf << "\n";
      if (plot.is_open()) plot << n << " " << (fluid - r) << "\n";
    }
  }
  return 0;
}

int cmd_couple(const ModelParams& base, const std::vector<int>& n_list, double horizon,
               const std::vector<std::uint64_t>& seeds, const std::string& window_text,
               const std::string& out) {
  WindowSpec window;
  if (window_text == "auto") {
    window.mode = WindowSpec::Mode::Auto;
  } else if (window_text.rfind("c=", 0) == 0) {
    window = {WindowSpec::Mode::Const, std::stod(window_text.substr(2))};
  } else {
    window = {WindowSpec::Mode::Hours, std::stod(window_text)};
  }
  const auto cells = coupling_report(base, n_list, horizon, seeds, window);
  std::ofstream file;
  std::ostream& os = open_out(file, out);
  os << "N,epochs,epochs_decoupled,frequency\n";
  char buf[128];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof buf, "%d,%llu,%llu,%.10g", c.n,
                  static_cast<unsigned long long>(c.epochs),
                  static_cast<unsigned long long>(c.epochs_decoupled), c.frequency);
    os << buf << "\n";
  }
  return 0;
}

int cmd_fit(const std::string& in_path, const std::string& out) {
  std::ifstream in(in_path);
  if (!in) throw std::runtime_error("cannot open input CSV: " + in_path);
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("empty CSV");

  auto split = [](const std::string& line) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) cols.push_back(tok);
    return cols;
  };
  const auto head = split(header);
  int n_col = -1, gap_col = -1, method_col = -1;
  for (std::size_t i = 0; i < head.size(); ++i) {
    if (head[i] == "N") n_col = static_cast<int>(i);
    if (head[i] == "gap_point" || head[i] == "gap") gap_col = static_cast<int>(i);
    if (head[i] == "method") method_col = static_cast<int>(i);
  }
  if (n_col < 0 || gap_col < 0)
    throw std::runtime_error("CSV must carry N and gap_point (or gap) columns");

  std::vector<std::pair<double, double>> points;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cols = split(line);
    if (method_col >= 0 && cols[method_col] == "failed") continue;
    points.emplace_back(std::stod(cols[n_col]), std::stod(cols[gap_col]));
  }
  const SlopeFit fit = fit_log_slope(points);
  const json result = {{"points", points.size()},
                       {"slope", fit.slope},
                       {"intercept", fit.intercept},
                       {"r2", fit.r2},
                       {"slope_stderr", fit.std_error}};
  std::ofstream file;
  std::ostream& os = open_out(file, out);
  os << result.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-class overloaded loss network simulation lab"};
  app.require_subcommand(1);

  ModelParams params;
  std::string policy_text = "accept-all";
  double horizon = 1000.0;
  std::uint64_t seed = 1;
  double warmup = 0.05;
  std::string out, event_log_path, config_path, plot_out, in_path;
  std::vector<int> n_list;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::string window_text = "auto";
  bool all_theta = false;

  auto* simulate = app.add_subcommand("simulate", "run one (N, policy, seed) cell");
  simulate->add_option("--n", params.n, "server count")->required();
  simulate->add_option("--policy", policy_text, "policy string")->required();
  simulate->add_option("--horizon", horizon, "simulated hours");
  simulate->add_option("--seed", seed, "sample-path seed");
  simulate->add_option("--warmup", warmup, "warm-up fraction");
  simulate->add_option("--out", out, "output CSV path (default stdout)");
  simulate->add_option("--event-log", event_log_path, "newline-delimited event export");
  add_param_flags(simulate, params);

  auto* sweep = app.add_subcommand("sweep", "run a config-driven sweep");
  sweep->add_option("--config", config_path, "JSON sweep config")->required();
  sweep->add_option("--out", out, "override the config's output path");

  auto* exact = app.add_subcommand("exact", "analytic trunk-reservation sweep");
  exact->add_option("--n", n_list, "server counts")->required();
  exact->add_flag("--all-theta", all_theta, "emit every theta, not just the best");
  exact->add_option("--out", out, "output CSV path (default stdout)");
  exact->add_option("--plot-out", plot_out, "two-column (N, gap) data file");
  add_param_flags(exact, params);

  auto* couple = app.add_subcommand("couple", "SSS-vs-AE decoupling report");
  couple->add_option("--n", n_list, "server counts")->required();
  couple->add_option("--horizon", horizon, "simulated hours per cell");
  couple->add_option("--seeds", seeds, "sample-path seeds (pooled)");
  couple->add_option("--window", window_text, "SSS window: hours, auto, or c=<const>");
  couple->add_option("--out", out, "output CSV path (default stdout)");
  add_param_flags(couple, params);

  auto* fit = app.add_subcommand("fit", "OLS of gap against ln N over a sweep CSV");
  fit->add_option("--in", in_path, "input CSV")->required();
  fit->add_option("--out", out, "output JSON path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed())
      return cmd_simulate(params, policy_text, horizon, seed, warmup, out, event_log_path);
    if (sweep->parsed()) return cmd_sweep(config_path, out);
    if (exact->parsed()) return cmd_exact(params, n_list, all_theta, out, plot_out);
    if (couple->parsed()) return cmd_couple(params, n_list, horizon, seeds, window_text, out);
    if (fit->parsed()) return cmd_fit(in_path, out);
  } catch (const std::exception& e) {
    std::cerr << json({{"error", e.what()}}).dump() << "\n";
    return 1;
  }
  return 0;
}
