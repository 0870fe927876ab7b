#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>

namespace delaysched {

/// Class 1 is delay-sensitive, class 2 is delay-tolerant.
enum class ClassId : std::uint8_t { kOne = 0, kTwo = 1 };

constexpr std::size_t index_of(ClassId id) { return static_cast<std::size_t>(id); }
constexpr ClassId other(ClassId id) { return id == ClassId::kOne ? ClassId::kTwo : ClassId::kOne; }
constexpr int number_of(ClassId id) { return static_cast<int>(id) + 1; }
inline constexpr std::array<ClassId, 2> kClasses{ClassId::kOne, ClassId::kTwo};

/// Exponentials are evaluated with their argument clamped to this magnitude.
inline constexpr double kExponentClamp = 700.0;

double clamped_exp(double x);

/// log(1 + e^x) without overflow.
double softplus(double x);

/// Logistic 1 / (1 + e^{-x}) without overflow.
double logistic(double x);

/// Sigmoidal delay utility U(l) = 1 - c (1/(1+e^{-a(l-b)}) - d), normalized so U(0) = 1.
struct UtilityCurve {
  double steepness = 1.0;   // a, 1/s
  double inflection = 1.0;  // b, s

  /// c = (1 + e^{ab}) / e^{ab}
  double scale() const;
  /// d = 1 / (1 + e^{ab})
  double offset() const;

  bool operator==(const UtilityCurve&) const = default;
};

/// Evaluated as (1 + e^{-ab}) / (1 + e^{a(l-b)}), which is algebraically the
/// sigmoid above but never overflows. Throws std::domain_error for l < 0.
double utility(const UtilityCurve& curve, double latency);

/// log U(l), exact in the log domain for any a(l-b).
double log_utility(const UtilityCurve& curve, double latency);

struct ClassParams {
  double arrival_rate = 0.0;  // packets/s
  double packet_size = 1.0;   // bytes
  UtilityCurve curve;
  double weight = 1.0;  // beta
  /// Second moment of the service time (s^2). Unset means constant packet size.
  std::optional<double> service_second_moment;

  bool operator==(const ClassParams&) const = default;
};

struct SystemConfig {
  double server_rate = 1.0;  // bytes/s
  std::array<ClassParams, 2> classes;

  const ClassParams& of(ClassId id) const { return classes[index_of(id)]; }
  ClassParams& of(ClassId id) { return classes[index_of(id)]; }

  double service_rate(ClassId id) const;       // mu_i = r / s_i
  double mean_service_time(ClassId id) const;  // 1 / mu_i
  double second_moment(ClassId id) const;      // X^2 bar
  double utilization(ClassId id) const;        // rho_i
  double total_utilization() const;
  bool stable() const { return total_utilization() < 1.0; }

  /// Throws std::invalid_argument when a field violates its invariant.
  void validate() const;

  /// Throws UnstableSystemError naming both utilizations unless stable().
  void require_stable() const;

  SystemConfig with_arrival_rate(ClassId id, double rate) const;

  bool operator==(const SystemConfig&) const = default;
};

}  // namespace delaysched
