#include "delaysched/des_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <exception>
#include <mutex>
#include <queue>
#include <stdexcept>
#include <thread>

#include "delaysched/errors.hpp"
#include "delaysched/rng.hpp"

namespace delaysched {
namespace {

enum class EventKind : std::uint8_t { kArrival1, kArrival2, kDeparture, kRegimeSwitch };

struct Event {
  double time;
  std::uint64_t sequence;  // insertion order breaks time ties
  EventKind kind;
  std::uint64_t token;

  bool operator>(const Event& rhs) const {
    if (time != rhs.time) return time > rhs.time;
    return sequence > rhs.sequence;
  }
};

class EventCalendar {
 public:
  void schedule(double time, EventKind kind, std::uint64_t token = 0) {
    events_.push(Event{time, next_sequence_++, kind, token});
  }
  bool empty() const { return events_.empty(); }
  const Event& next() const { return events_.top(); }
  Event pop() {
    Event e = events_.top();
    events_.pop();
    return e;
  }

 private:
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::uint64_t next_sequence_ = 0;
};

// Welford accumulator for sojourn times.
struct Moments {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  double utility_sum = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }
};

class Simulation {
 public:
  explicit Simulation(const SimRunSpec& spec)
      : spec_(spec),
        cfg_(spec.config),
        policy_(spec.policy),
        preemptive_(is_preemptive(spec.policy)),
        warmup_(spec.horizon * spec.warmup_fraction),
        arrival_rng_{make_stream(spec.seed, Stream::kClass1Arrivals),
                     make_stream(spec.seed, Stream::kClass2Arrivals)},
        work_rng_{make_stream(spec.seed, Stream::kClass1Work), make_stream(spec.seed, Stream::kClass2Work)},
        policy_rng_(make_stream(spec.seed, Stream::kPolicy)) {}

  SimMetrics execute() {
    for (ClassId id : kClasses) schedule_arrival(id, 0.0);
    if (auto t = policy_.next_regime_switch(0.0)) calendar_.schedule(*t, EventKind::kRegimeSwitch);

    while (!calendar_.empty() && calendar_.next().time <= spec_.horizon) {
      const Event event = calendar_.pop();
      advance(event.time);
      switch (event.kind) {
        case EventKind::kArrival1: on_arrival(ClassId::kOne); break;
        case EventKind::kArrival2: on_arrival(ClassId::kTwo); break;
        case EventKind::kDeparture:
          if (event.token == service_token_ && in_service_) on_departure();
          break;
        case EventKind::kRegimeSwitch:
          if (auto t = policy_.next_regime_switch(now_)) calendar_.schedule(*t, EventKind::kRegimeSwitch);
          dispatch(true);
          break;
      }
      if (!in_service_ && !queues_state_.all_empty())
        throw std::logic_error("work conservation violated: server idle with packets waiting");
    }
    advance(spec_.horizon);
    return metrics();
  }

 private:
  void schedule_arrival(ClassId id, double from) {
    const double rate = cfg_.of(id).arrival_rate;
    if (!(rate > 0.0)) return;
    std::exponential_distribution<double> gap(rate);
    calendar_.schedule(from + gap(arrival_rng_[index_of(id)]),
                       id == ClassId::kOne ? EventKind::kArrival1 : EventKind::kArrival2);
  }

  void advance(double t) {
    const double window_start = std::max(now_, warmup_);
    if (t > window_start) {
      const double dt = t - window_start;
      for (ClassId id : kClasses) {
        const std::size_t i = index_of(id);
        const std::size_t in_system =
            queues_[i].size() + ((in_service_ && in_service_->cls == id) ? 1u : 0u);
        area_[i] += static_cast<double>(in_system) * dt;
      }
      if (in_service_) {
        busy_time_ += dt;
        if (policy_.favored(now_) == ClassId::kOne) regime1_busy_time_ += dt;
      }
    }
    now_ = t;
  }

  bool system_empty() const { return !in_service_ && queues_state_.all_empty(); }

  void on_arrival(ClassId id) {
    const std::size_t i = index_of(id);
    const bool was_empty = system_empty();
    Packet p;
    p.cls = id;
    p.sequence = next_sequence_[i]++;
    p.arrival_time = now_;
    p.size = spec_.work_samplers[i] ? spec_.work_samplers[i](work_rng_[i]) : cfg_.of(id).packet_size;
    p.remaining_work = p.size;
    if (now_ >= warmup_) ++window_arrivals_[i];
    enqueue_back(std::move(p));
    if (was_empty) policy_.on_busy_period_start(now_, policy_rng_);
    schedule_arrival(id, now_);
    dispatch(true);
  }

  void on_departure() {
    Packet p = std::move(*in_service_);
    in_service_.reset();
    p.served_work += p.remaining_work;
    p.remaining_work = 0.0;
    p.departure_time = now_;
    record(p);
    dispatch(false);
  }

  void record(const Packet& p) {
    const std::size_t i = index_of(p.cls);
    if (last_departed_[i] && p.sequence < *last_departed_[i]) ++fifo_violations_;
    last_departed_[i] = p.sequence;
    max_work_error_ = std::max(max_work_error_, std::abs(p.served_work - p.size) / p.size);
    if (p.arrival_time >= warmup_) {
      const double sojourn = p.departure_time - p.arrival_time;
      moments_[i].add(sojourn);
      moments_[i].utility_sum += utility(cfg_.of(p.cls).curve, sojourn);
    }
    if (spec_.on_departure) spec_.on_departure(p);
  }

  void enqueue_back(Packet p) {
    const std::size_t i = index_of(p.cls);
    ++queues_state_.packets[i];
    queues_state_.backlog_bytes[i] += p.remaining_work;
    queues_[i].push_back(std::move(p));
  }

  void enqueue_front(Packet p) {
    const std::size_t i = index_of(p.cls);
    ++queues_state_.packets[i];
    queues_state_.backlog_bytes[i] += p.remaining_work;
    queues_[i].push_front(std::move(p));
  }

  Packet dequeue(ClassId id) {
    const std::size_t i = index_of(id);
    Packet p = std::move(queues_[i].front());
    queues_[i].pop_front();
    --queues_state_.packets[i];
    queues_state_.backlog_bytes[i] -= p.remaining_work;
    if (queues_state_.packets[i] == 0) queues_state_.backlog_bytes[i] = 0.0;
    return p;
  }

  // Chooses what the server does next. With `may_preempt`, a preemptive policy
  // may interrupt the packet in service; it keeps its remaining work and
  // returns to the head of its class queue.
  void dispatch(bool may_preempt) {
    if (in_service_) {
      if (!(preemptive_ && may_preempt)) return;
      QueueState with_current = queues_state_;
      ++with_current.packets[index_of(in_service_->cls)];
      const std::optional<ClassId> wanted = policy_.select(with_current, now_);
      if (wanted == in_service_->cls) return;
      Packet interrupted = std::move(*in_service_);
      in_service_.reset();
      ++service_token_;
      const double done = std::min(interrupted.remaining_work, (now_ - service_start_) * cfg_.server_rate);
      interrupted.served_work += done;
      interrupted.remaining_work -= done;
      enqueue_front(std::move(interrupted));
      ++preemptions_;
    }
    const std::optional<ClassId> choice = policy_.select(queues_state_, now_);
    if (!choice) return;
    if (queues_state_.empty(*choice)) throw std::logic_error("scheduler selected an empty queue");
    in_service_ = dequeue(*choice);
    service_start_ = now_;
    calendar_.schedule(now_ + in_service_->remaining_work / cfg_.server_rate, EventKind::kDeparture,
                       ++service_token_);
  }

  SimMetrics metrics() const {
    SimMetrics m;
    m.horizon = spec_.horizon;
    m.warmup = warmup_;
    m.seed = spec_.seed;
    m.rng_algorithm = std::string(kRngAlgorithm);
    m.preemptions = preemptions_;
    m.fifo_violations = fifo_violations_;
    m.max_work_error = max_work_error_;
    const double window = spec_.horizon - warmup_;
    m.busy_fraction = window > 0.0 ? busy_time_ / window : 0.0;
    if (policy_.favored(0.0) && busy_time_ > 0.0) m.regime1_fraction = regime1_busy_time_ / busy_time_;
    std::uint64_t total = 0;
    for (ClassId id : kClasses) {
      const std::size_t i = index_of(id);
      ClassMetrics& c = m.classes[i];
      c.served = moments_[i].count;
      c.arrivals = window_arrivals_[i];
      c.mean_in_system = window > 0.0 ? area_[i] / window : 0.0;
      if (c.served > 0) {
        c.mean_sojourn = moments_[i].mean;
        c.sojourn_variance = c.served > 1 ? moments_[i].m2 / static_cast<double>(c.served - 1) : 0.0;
        c.mean_packet_utility = moments_[i].utility_sum / static_cast<double>(c.served);
      }
      total += c.served;
    }
    if (total == 0) throw InsufficientDataError("no post-warm-up departures; horizon too short or no arrivals");
    return m;
  }

  const SimRunSpec& spec_;
  const SystemConfig& cfg_;
  PolicyState policy_;
  bool preemptive_;
  double warmup_;
  std::array<std::mt19937_64, 2> arrival_rng_;
  std::array<std::mt19937_64, 2> work_rng_;
  std::mt19937_64 policy_rng_;

  EventCalendar calendar_;
  double now_ = 0.0;
  std::array<std::deque<Packet>, 2> queues_;
  QueueState queues_state_;
  std::optional<Packet> in_service_;
  double service_start_ = 0.0;
  std::uint64_t service_token_ = 0;

  std::array<std::uint64_t, 2> next_sequence_{0, 0};
  std::array<std::optional<std::uint64_t>, 2> last_departed_;
  std::array<Moments, 2> moments_;
  std::array<double, 2> area_{0.0, 0.0};
  std::array<std::uint64_t, 2> window_arrivals_{0, 0};
  double busy_time_ = 0.0;
  double regime1_busy_time_ = 0.0;
  std::uint64_t preemptions_ = 0;
  std::uint64_t fifo_violations_ = 0;
  double max_work_error_ = 0.0;
};

}  // namespace

SimMetrics run(const SimRunSpec& spec) {
  spec.config.validate();
  validate(spec.policy);
  if (!(spec.horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
  if (!(spec.warmup_fraction >= 0.0 && spec.warmup_fraction < 0.5))
    throw std::invalid_argument("warmup_fraction must lie in [0, 0.5)");
  if (!spec.allow_unstable) spec.config.require_stable();
  return Simulation(spec).execute();
}

double horizon_for_departures(const SystemConfig& cfg, double departures, double warmup_fraction) {
  const double rate = cfg.of(ClassId::kOne).arrival_rate + cfg.of(ClassId::kTwo).arrival_rate;
  if (!(rate > 0.0)) throw std::invalid_argument("no arrivals");
  return departures / (rate * (1.0 - warmup_fraction));
}

Estimate estimate(std::span<const double> values) {
  Estimate e;
  double sum = 0.0;
  for (double v : values) {
    if (std::isnan(v)) continue;
    sum += v;
    ++e.samples;
  }
  if (e.samples == 0) return e;
  const double n = static_cast<double>(e.samples);
  e.mean = sum / n;
  if (e.samples == 1) {
    e.ci_half_width = 0.0;
    return e;
  }
  double ss = 0.0;
  for (double v : values)
    if (!std::isnan(v)) ss += (v - e.mean) * (v - e.mean);
  e.ci_half_width = 1.959963984540054 * std::sqrt(ss / (n - 1.0) / n);
  return e;
}

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& task) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            task(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

ReplicateSummary replicate(const SimRunSpec& spec, std::size_t n, std::uint64_t master_seed, unsigned jobs) {
  if (n == 0) throw std::invalid_argument("replicate: need at least one seed");
  ReplicateSummary summary;
  summary.runs.resize(n);
  parallel_for(n, jobs, [&](std::size_t k) {
    SimRunSpec copy = spec;
    copy.seed = replicate_seed(master_seed, k);
    summary.runs[k] = run(copy);
  });

  std::vector<double> values(n);
  const auto collect = [&](auto&& field) {
    for (std::size_t k = 0; k < n; ++k) values[k] = field(summary.runs[k]);
    return estimate(values);
  };
  for (ClassId id : kClasses) {
    const std::size_t i = index_of(id);
    summary.sojourn[i] = collect([i](const SimMetrics& m) { return m.classes[i].mean_sojourn; });
    summary.sojourn_variance[i] = collect([i](const SimMetrics& m) { return m.classes[i].sojourn_variance; });
    summary.in_system[i] = collect([i](const SimMetrics& m) { return m.classes[i].mean_in_system; });
  }
  summary.busy_fraction = collect([](const SimMetrics& m) { return m.busy_fraction; });
  return summary;
}

}  // namespace delaysched
