#include "lossnet/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lossnet {

double fluid_reward(const ModelParams& params) {
  params.validate();
  return params.n * (params.r_h * params.lambda_h + params.r_l * (params.mu - params.lambda_h));
}

double sss_window_constant(const ModelParams& params) {
  const double lh = params.lambda_h, ll = params.lambda_l, mu = params.mu;
  const double num = 8.0 * (7.0 * lh + mu) * (lh + mu) * (lh + ll + mu) * (lh + ll + mu);
  const double den = lh * (mu - lh) * (mu - lh) * (lh + ll - mu) * (lh + ll - mu);
  return num / den;
}

double sss_window(const ModelParams& params, std::optional<double> c_override) {
  if (params.n < 2) throw std::invalid_argument("sss_window requires N >= 2");
  const double c = c_override ? *c_override : sss_window_constant(params);
  if (c <= 0) throw std::invalid_argument("window constant must be positive");
  return c * std::log(static_cast<double>(params.n)) / params.n;
}

std::vector<double> stationary_distribution(const BirthDeathSpec& spec) {
  const std::size_t m = spec.size();
  if (m == 0 || spec.death.size() != m)
    throw std::invalid_argument("malformed birth-death spec");
  if (spec.death[0] != 0.0 || spec.birth[m - 1] != 0.0)
    throw std::invalid_argument("boundary rates must vanish");

  // log pi_k (unnormalized): sum of log(birth_j / death_{j+1}) for j < k.
  std::vector<double> logpi(m, 0.0);
  for (std::size_t k = 1; k < m; ++k) {
    if (spec.birth[k - 1] <= 0.0 || spec.death[k] <= 0.0)
      throw std::invalid_argument("chain not irreducible on 0..M");
    logpi[k] = logpi[k - 1] + std::log(spec.birth[k - 1]) - std::log(spec.death[k]);
  }
  const double shift = *std::max_element(logpi.begin(), logpi.end());
  double total = 0.0;
  std::vector<double> pi(m);
  for (std::size_t k = 0; k < m; ++k) {
    pi[k] = std::exp(logpi[k] - shift);
    total += pi[k];
  }
  for (auto& p : pi) p /= total;
  return pi;
}

BirthDeathSpec threshold_busy_chain(const ModelParams& params, int theta) {
  params.validate();
  if (theta < 0 || theta > params.n)
    throw std::invalid_argument("threshold must be in [0, N]");
  const int n = params.n;
  // Busy-server count: both classes admitted while more than theta servers
  // are idle (k < N - theta), only H above that.
  BirthDeathSpec chain;
  chain.birth.assign(n + 1, 0.0);
  chain.death.assign(n + 1, 0.0);
  for (int k = 0; k < n; ++k) {
    chain.birth[k] =
        (k < n - theta) ? n * (params.lambda_h + params.lambda_l) : n * params.lambda_h;
  }
  for (int k = 1; k <= n; ++k) chain.death[k] = k * params.mu;
  return chain;
}

double threshold_h_rejection_rate(const ModelParams& params, int theta) {
  const std::vector<double> pi = stationary_distribution(threshold_busy_chain(params, theta));
  return params.n * params.lambda_h * pi[params.n];
}

double threshold_reward(const ModelParams& params, int theta) {
  const int n = params.n;
  const std::vector<double> pi = stationary_distribution(threshold_busy_chain(params, theta));
  double p_not_full = 0.0, p_below_reserve = 0.0;
  for (int k = 0; k < n; ++k) {
    p_not_full += pi[k];
    if (k < n - theta) p_below_reserve += pi[k];
  }
  return params.r_h * n * params.lambda_h * p_not_full +
         params.r_l * n * params.lambda_l * p_below_reserve;
}

int best_threshold(const ModelParams& params) {
  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int theta = 0; theta <= params.n; ++theta) {
    const double v = threshold_reward(params, theta);
    if (v > best_val) {
      best_val = v;
      best = theta;
    }
  }
  return best;
}

double best_threshold_reward(const ModelParams& params) {
  return threshold_reward(params, best_threshold(params));
}

BirthDeathSpec reject_all_l_idle_chain(const ModelParams& params, int max_level) {
  if (max_level < 1 || max_level > params.n)
    throw std::invalid_argument("max_level must be in [1, N]");
  BirthDeathSpec chain;
  chain.birth.assign(max_level + 1, 0.0);
  chain.death.assign(max_level + 1, 0.0);
  for (int y = 0; y < max_level; ++y) chain.birth[y] = params.mu * (params.n - y);
  for (int y = 1; y <= max_level; ++y) chain.death[y] = params.n * params.lambda_h;
  return chain;
}

double hit_probability(const BirthDeathSpec& spec, int start, int lower, int upper) {
  if (!(lower <= start && start <= upper && lower < upper))
    throw std::invalid_argument("need lower <= start <= upper, lower < upper");
  if (static_cast<std::size_t>(upper) >= spec.size())
    throw std::invalid_argument("upper exceeds state space");
  if (start == lower) return 0.0;
  if (start == upper) return 1.0;

  // Harmonic system h(y) = [death_y h(y-1) + birth_y h(y+1)] / (death_y + birth_y)
  // with h(lower)=0, h(upper)=1. Its solution is a ratio of prefix sums of
  // the products rho_i = prod death_j/birth_j; accumulate those in log space.
  double log_rho = 0.0;
  double log_num = -std::numeric_limits<double>::infinity();
  double log_den = -std::numeric_limits<double>::infinity();
  auto log_add = [](double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b < a) std::swap(a, b);
    return b + std::log1p(std::exp(a - b));
  };
  for (int i = lower; i < upper; ++i) {
    if (i > lower) {
      if (spec.birth[i] <= 0.0 || spec.death[i] <= 0.0)
        throw std::invalid_argument("interior rates must be positive");
      log_rho += std::log(spec.death[i]) - std::log(spec.birth[i]);
    }
    if (i < start) log_num = log_add(log_num, log_rho);
    log_den = log_add(log_den, log_rho);
  }
  return std::exp(log_num - log_den);
}

double race_probability(const ModelParams& params, int start, int lower, int upper) {
  params.validate();
  return hit_probability(reject_all_l_idle_chain(params, params.n), start, lower, upper);
}

double transient_absorption(const ModelParams& params, int start, double w) {
  params.validate();
  if (start < 2 || start > params.n) throw std::invalid_argument("start must be in [2, N]");
  if (w < 0) throw std::invalid_argument("horizon must be non-negative");
  if (w == 0) return 0.0;

  const int n = params.n;
  const double down = n * params.lambda_h;
  double rate_cap = 0.0;
  for (int y = 2; y <= n; ++y) rate_cap = std::max(rate_cap, params.mu * (n - y) + down);
  const double lam = rate_cap * w;

  std::vector<double> v(n + 1, 0.0);
  v[start] = 1.0;
  double absorbed_mass = 0.0;  // mass in {0,1} of the current step distribution

  double result = 0.0;
  double log_pois = -lam;  // log P(K = k), k = 0
  double cum = std::exp(log_pois);
  result += std::exp(log_pois) * absorbed_mass;

  constexpr double kTail = 1e-12;
  constexpr std::size_t kMaxSteps = 10'000'000;
  std::size_t k = 0;
  std::vector<double> next(n + 1, 0.0);
  while (cum < 1.0 - kTail) {
    if (++k > kMaxSteps)
      throw std::runtime_error("transient_absorption: uniformization step budget exceeded");
    std::fill(next.begin(), next.end(), 0.0);
    next[0] = v[0];
    next[1] = v[1];
    for (int y = 2; y <= n; ++y) {
      const double mass = v[y];
      if (mass == 0.0) continue;
      const double up = params.mu * (n - y);
      next[y] += mass * (1.0 - (up + down) / rate_cap);
      if (y < n) next[y + 1] += mass * up / rate_cap;
      next[y - 1] += mass * down / rate_cap;
    }
    v.swap(next);
    absorbed_mass = v[0] + v[1];
    log_pois += std::log(lam) - std::log(static_cast<double>(k));
    const double p = std::exp(log_pois);
    cum += p;
    result += p * absorbed_mass;
  }
  // Remaining Poisson tail: absorbed mass can only grow, so assigning the
  // current mass to the tail keeps the truncation error below kTail.
  result += (1.0 - cum) * absorbed_mass;
  return std::min(result, 1.0);
}

double walk_ruin_prob(double p_up, int start, int lower, int upper) {
  if (!(p_up > 0.0 && p_up < 1.0)) throw std::invalid_argument("p_up must be in (0,1)");
  if (!(lower <= start && start <= upper && lower < upper))
    throw std::invalid_argument("need lower <= start <= upper, lower < upper");
  const double y = start - lower, b = upper - lower;
  if (p_up == 0.5) return y / b;
  const double log_r = std::log1p(-p_up) - std::log(p_up);  // log((1-p)/p)
  return std::expm1(y * log_r) / std::expm1(b * log_r);
}

}  // namespace lossnet
