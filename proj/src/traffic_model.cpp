#include "delaysched/traffic_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "delaysched/errors.hpp"

namespace delaysched {

double clamped_exp(double x) { return std::exp(std::clamp(x, -kExponentClamp, kExponentClamp)); }

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double UtilityCurve::scale() const { return 1.0 + clamped_exp(-steepness * inflection); }

double UtilityCurve::offset() const { return 1.0 / (1.0 + clamped_exp(steepness * inflection)); }

double utility(const UtilityCurve& curve, double latency) {
  if (!(latency >= 0.0)) throw std::domain_error("utility: latency must be non-negative");
  const double numerator = 1.0 + clamped_exp(-curve.steepness * curve.inflection);
  const double denominator = 1.0 + clamped_exp(curve.steepness * (latency - curve.inflection));
  return std::min(1.0, numerator / denominator);
}

double log_utility(const UtilityCurve& curve, double latency) {
  if (!(latency >= 0.0)) throw std::domain_error("log_utility: latency must be non-negative");
  const double ab = curve.steepness * curve.inflection;
  const double value = softplus(-ab) - softplus(curve.steepness * (latency - curve.inflection));
  return std::min(0.0, value);
}

double SystemConfig::service_rate(ClassId id) const { return server_rate / of(id).packet_size; }

double SystemConfig::mean_service_time(ClassId id) const { return of(id).packet_size / server_rate; }

double SystemConfig::second_moment(ClassId id) const {
  if (const auto& m = of(id).service_second_moment) return *m;
  const double mean = mean_service_time(id);
  return mean * mean;
}

double SystemConfig::utilization(ClassId id) const { return of(id).arrival_rate / service_rate(id); }

double SystemConfig::total_utilization() const {
  return utilization(ClassId::kOne) + utilization(ClassId::kTwo);
}

void SystemConfig::validate() const {
  if (!(server_rate > 0.0)) throw std::invalid_argument("server_rate must be > 0");
  for (ClassId id : kClasses) {
    const ClassParams& p = of(id);
    const std::string label = "class" + std::to_string(number_of(id));
    if (!(p.arrival_rate >= 0.0)) throw std::invalid_argument(label + ".lambda must be >= 0");
    if (!(p.packet_size > 0.0)) throw std::invalid_argument(label + ".size must be > 0");
    if (!(p.curve.steepness > 0.0)) throw std::invalid_argument(label + ".a must be > 0");
    if (!(p.curve.inflection > 0.0)) throw std::invalid_argument(label + ".b must be > 0");
    if (!(p.weight > 0.0)) throw std::invalid_argument(label + ".beta must be > 0");
    if (p.service_second_moment) {
      const double mean = mean_service_time(id);
      // Allow a few ulps so that (s/r)^2 written out in decimal still validates.
      if (!(*p.service_second_moment >= mean * mean * (1.0 - 1e-12)))
        throw std::invalid_argument(label + ".second_moment must be >= (size/rate)^2");
    }
  }
}

void SystemConfig::require_stable() const {
  const double rho1 = utilization(ClassId::kOne);
  const double rho2 = utilization(ClassId::kTwo);
  if (rho1 + rho2 < 1.0) return;
  std::ostringstream msg;
  msg << "unstable system: rho1=" << rho1 << " rho2=" << rho2 << " (rho1+rho2=" << rho1 + rho2
      << " >= 1)";
  throw UnstableSystemError(msg.str());
}

SystemConfig SystemConfig::with_arrival_rate(ClassId id, double rate) const {
  SystemConfig copy = *this;
  copy.of(id).arrival_rate = rate;
  return copy;
}

}  // namespace delaysched
