#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "delaysched/errors.hpp"
#include "delaysched/optimal_alpha.hpp"
#include "test_support.hpp"

using namespace delaysched;
using testing::reference_config;

namespace {

// Brute-force maximizer of log V over alpha = 0, 1/(n-1), ..., 1.
double grid_argmax(const SystemConfig& cfg, int points) {
  double best_alpha = 0.0;
  double best = -INFINITY;
  for (int k = 0; k < points; ++k) {
    const double alpha = static_cast<double>(k) / (points - 1);
    const double v = log_system_utility(cfg, alpha);
    if (v > best) {
      best = v;
      best_alpha = alpha;
    }
  }
  return best_alpha;
}

// Independent bisection on g(alpha) built from the constants only.
double bisect_equation(const OptimalityConstants& k) {
  const auto g = [&](double a) {
    return k.tolerant_scale * std::exp(a * k.tolerant_rate) - k.sensitive_scale * std::exp(a * k.sensitive_rate) +
           k.offset;
  };
  double lo = 0.0, hi = 1.0;
  const bool rising = g(lo) < 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    ((g(mid) < 0.0) == rising ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("log system utility") {
  const SystemConfig cfg = reference_config(0.4, 0.2);
  // beta1 log U1(4/3) + beta2 log U2(35/12), mpmath at 40 digits.
  CHECK(log_system_utility(cfg, 1.0) == doctest::Approx(-0.037795429527187387).epsilon(1e-13));
  CHECK(log_system_utility(cfg, 0.0) == doctest::Approx(-0.057263028983053287).epsilon(1e-13));
  for (int k = 0; k <= 10; ++k) CHECK(log_system_utility(cfg, k / 10.0) <= 0.0);

  const PriorityDelayTable flat{1.5, 1.5, 2.5, 2.5};
  CHECK(log_system_utility(cfg, flat, 0.2) == doctest::Approx(log_system_utility(cfg, flat, 0.9)));
  CHECK(z_prime(cfg, flat, 0.3) == 0.0);
}

TEST_CASE("z_prime matches the derivative of log V") {
  const SystemConfig cfg = reference_config(0.4, 0.2);
  // mpmath derivative of the literal objective.
  CHECK(z_prime(cfg, 1.0) == doctest::Approx(0.0040857561540069845).epsilon(1e-11));
  CHECK(z_prime(cfg, 0.0) == doctest::Approx(0.037873445523177621).epsilon(1e-11));

  std::mt19937_64 rng(99);
  for (int i = 0; i < 50; ++i) {
    const SystemConfig c = testing::random_stable_config(rng);
    for (double alpha : {0.1, 0.5, 0.9}) {
      const double h = 1e-6;
      const double fd = (log_system_utility(c, alpha + h) - log_system_utility(c, alpha - h)) / (2.0 * h);
      CHECK(z_prime(c, alpha) == doctest::Approx(fd).epsilon(1e-5).scale(1e-6));
    }
  }
}

TEST_CASE("optimality constants") {
  const OptimalityConstants k = optimality_constants(reference_config(0.4, 0.2));
  CHECK(k.gain_ratio == doctest::Approx(5.297157622739018).epsilon(1e-13));
  CHECK(k.offset == doctest::Approx(4.297157622739018).epsilon(1e-13));
  CHECK(k.sensitive_rate == doctest::Approx(0.8541666666666667).epsilon(1e-13));
  CHECK(k.tolerant_rate == doctest::Approx(0.3 * (1.125 - 35.0 / 12.0)).epsilon(1e-13));
  CHECK(k.sensitive_scale == doctest::Approx(std::exp(5.0 - 2.1875)).epsilon(1e-13));
  CHECK(k.tolerant_scale == doctest::Approx(k.gain_ratio * std::exp(0.3 * (10.0 - 1.125))).epsilon(1e-13));

  SystemConfig symmetric = reference_config(0.3, 0.3);
  symmetric.classes[1] = symmetric.classes[0];
  const OptimalityConstants s = optimality_constants(symmetric);
  CHECK(s.gain_ratio == doctest::Approx(1.0));
  CHECK(s.offset == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(optimality_constants(reference_config(0.0, 0.3)), DegenerateGapError);
}

TEST_CASE("solve_alpha branches at the sweep ends") {
  const AlphaSolution low = solve_alpha(reference_config(0.4, 0.01));
  CHECK(low.alpha == 0.0);
  CHECK(low.branch == AlphaBranch::kClampedZero);
  CHECK(low.slope_at_zero < 0.0);
  CHECK(low.slope_at_one < 0.0);

  const AlphaSolution high = solve_alpha(reference_config(0.4, 0.46));
  CHECK(high.alpha == 1.0);
  CHECK(high.branch == AlphaBranch::kClampedOne);
  CHECK(to_string(high.branch) == "clamped-1");
  CHECK(high.log_utility == doctest::Approx(log_system_utility(reference_config(0.4, 0.46), 1.0)));
}

TEST_CASE("interior roots rise with lambda2 and match the grid maximizer") {
  // With these parameters the interior branch spans roughly 0.078 < lambda2 < 0.154.
  double previous = 0.0;
  for (double lambda2 = 0.08; lambda2 <= 0.1501; lambda2 += 0.005) {
    const SystemConfig cfg = reference_config(0.4, lambda2);
    const AlphaSolution s = solve_alpha(cfg);
    CAPTURE(lambda2);
    CHECK(s.branch == AlphaBranch::kInterior);
    CHECK(s.alpha > previous);
    CHECK(s.alpha < 1.0);
    CHECK(std::abs(z_prime(cfg, s.alpha)) <= 1e-8);
    CHECK(std::abs(s.alpha - grid_argmax(cfg, 1001)) <= 0.002);
    previous = s.alpha;
  }
  for (double lambda2 = 0.15; lambda2 <= 0.2001; lambda2 += 0.005) {
    const SystemConfig cfg = reference_config(0.4, lambda2);
    CAPTURE(lambda2);
    CHECK(std::abs(solve_alpha(cfg).alpha - grid_argmax(cfg, 1001)) <= 0.002);
  }
}

TEST_CASE("properties over random configurations") {
  std::mt19937_64 rng(314159);
  int interior = 0;
  for (int i = 0; i < 300; ++i) {
    const SystemConfig cfg = testing::random_stable_config(rng);
    CAPTURE(i);

    // Concavity: second differences on a 101-point grid.
    std::vector<double> v(101);
    for (int k = 0; k <= 100; ++k) v[k] = log_system_utility(cfg, k / 100.0);
    for (int k = 1; k < 100; ++k) CHECK(v[k + 1] - 2.0 * v[k] + v[k - 1] <= 1e-8);

    const AlphaSolution s = solve_alpha(cfg);
    for (int k = 0; k <= 100; ++k) CHECK(s.log_utility >= v[k] - 1e-9);

    if (s.slope_at_zero < 0.0 && s.slope_at_one < 0.0) CHECK(s.alpha == 0.0);
    if (s.slope_at_zero > 0.0 && s.slope_at_one > 0.0) CHECK(s.alpha == 1.0);
    if (s.branch == AlphaBranch::kInterior) {
      ++interior;
      CHECK(std::abs(z_prime(cfg, s.alpha)) <= 1e-8);
      CHECK(std::abs(bisect_equation(optimality_constants(cfg)) - s.alpha) <= 1e-6);
    }
  }
  CHECK(interior > 5);
}
