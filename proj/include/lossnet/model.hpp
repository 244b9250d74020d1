#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace lossnet {

enum class JobClass { H, L };

enum class Decision { Accept, Reject };

inline const char* to_string(JobClass c) { return c == JobClass::H ? "H" : "L"; }

// Thrown when a lookahead race exceeds its transition budget. The race
// terminates almost surely, so hitting the cap signals a misconfiguration.
struct TransitionCapExceeded : std::runtime_error {
  explicit TransitionCapExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct PolicyContractViolation : std::logic_error {
  explicit PolicyContractViolation(const std::string& what) : std::logic_error(what) {}
};

// N servers, per-server arrival rates lambda_h/lambda_l, service rate mu,
// per-job rewards r_h/r_l. Overload: lambda_h < mu < lambda_h + lambda_l.
struct ModelParams {
  int n = 1;
  double lambda_h = 0.7;
  double lambda_l = 0.8;
  double mu = 1.0;
  double r_h = 2.0;
  double r_l = 1.0;

  void validate() const {
    if (n < 1) throw std::invalid_argument("server count must be >= 1");
    if (!(lambda_h > 0 && lambda_l > 0 && mu > 0))
      throw std::invalid_argument("rates must be positive");
    if (!(lambda_h < mu && mu < lambda_h + lambda_l))
      throw std::invalid_argument("overload condition lambda_h < mu < lambda_h + lambda_l violated");
    if (!(r_h > r_l && r_l > 0))
      throw std::invalid_argument("rewards must satisfy r_h > r_l > 0");
  }

  // floor(sqrt(N)), the PFI upper race level.
  int sqrt_level() const {
    int s = static_cast<int>(std::sqrt(static_cast<double>(n)));
    while ((s + 1) * static_cast<long long>(s + 1) <= n) ++s;
    while (static_cast<long long>(s) * s > n) --s;
    return s;
  }

  ModelParams with_n(int servers) const {
    ModelParams p = *this;
    p.n = servers;
    return p;
  }
};

}  // namespace lossnet
