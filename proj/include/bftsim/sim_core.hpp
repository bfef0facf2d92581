#pragma once

// Discrete-event core: clock, event queue, service-time sampling and
// single-server FIFO stations. Knows nothing about protocols or routing;
// message payloads are opaque 32-bit handles owned by the caller.

#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <random>
#include <vector>

namespace bftsim::sim {

// One time unit is one validator message-service time at rate 1.
using SimTime = double;

using StationId = std::uint32_t;
using MessageHandle = std::uint32_t;

enum class EventKind : std::uint8_t { ServiceCompletion, TimerExpiry };

struct Event {
  SimTime time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::ServiceCompletion;
  StationId station = 0;
  std::uint64_t payload = 0;
};

// Min-heap on (time, seq). Ties between simultaneous events are broken by
// insertion order, which makes every run reproducible.
class EventQueue {
 public:
  // Throws StructuralError when `time` precedes the current clock.
  void schedule(SimTime time, EventKind kind, StationId station, std::uint64_t payload);

  [[nodiscard]] bool empty() const { return heap_.empty(); }
  [[nodiscard]] std::size_t size() const { return heap_.size(); }
  [[nodiscard]] SimTime now() const { return now_; }
  [[nodiscard]] const Event& top() const { return heap_.top(); }

  // Removes the earliest event and advances the clock to its time.
  Event pop();

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  SimTime now_ = 0.0;
  std::uint64_t next_seq_ = 0;
};

enum class ServiceDistribution { Exponential, Deterministic };

// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t stream() const { return stream_; }
  std::mt19937_64& engine() { return engine_; }

  // Uniform in [0, bound).
  std::uint32_t uniform_index(std::uint32_t bound);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

// Exponential: Exp(rate) draw. Deterministic: exactly 1/rate.
// Throws ConfigError for a non-positive or non-finite rate.
SimTime sample_service_time(double rate, ServiceDistribution dist, RngStream& rng);

enum class StationRole : std::uint8_t { Validator, Switch };

class Station {
 public:
  Station(StationId id, StationRole role, double rate, ServiceDistribution dist, RngStream rng);

  [[nodiscard]] StationId id() const { return id_; }
  [[nodiscard]] StationRole role() const { return role_; }
  [[nodiscard]] double rate() const { return rate_; }
  [[nodiscard]] ServiceDistribution distribution() const { return dist_; }
  [[nodiscard]] bool busy() const { return in_service_.has_value(); }
  [[nodiscard]] bool crashed() const { return crashed_; }
  [[nodiscard]] std::size_t queue_length() const { return queue_.size(); }
  [[nodiscard]] std::uint64_t served() const { return served_; }

  void crash() { crashed_ = true; }

  // Enqueues a message. Returns the completion time when the station was idle
  // and service begins immediately, otherwise nullopt.
  std::optional<SimTime> enqueue(MessageHandle msg, SimTime now);

  // Finishes the message in service. If another message is waiting its
  // service begins at `now` and its completion time is written to `next`.
  MessageHandle complete(SimTime now, std::optional<SimTime>& next);

 private:
  StationId id_;
  StationRole role_;
  double rate_;
  ServiceDistribution dist_;
  RngStream rng_;
  std::deque<MessageHandle> queue_;
  std::optional<MessageHandle> in_service_;
  std::uint64_t served_ = 0;
  bool crashed_ = false;
};

// Owns the clock, the stations and the event queue. Callers drive it one
// event at a time and react to completions and timer expiries.
class Engine {
 public:
  StationId add_station(StationRole role, double rate, ServiceDistribution dist, RngStream rng);

  [[nodiscard]] SimTime now() const { return queue_.now(); }
  [[nodiscard]] Station& station(StationId id) { return stations_.at(id); }
  [[nodiscard]] const Station& station(StationId id) const { return stations_.at(id); }
  [[nodiscard]] std::size_t station_count() const { return stations_.size(); }

  // Hands a message to a station at the current instant. Returns false when
  // the station is crashed and the message was dropped.
  bool deliver(MessageHandle msg, StationId target);

  void schedule_timer(StationId station, SimTime at, std::uint64_t token);

  [[nodiscard]] bool idle() const { return queue_.empty(); }

  // Pops the next event. Service completions are finalized on the station
  // before being returned, with the finished message in `payload`.
  Event next();

 private:
  EventQueue queue_;
  std::vector<Station> stations_;
};

}  // namespace bftsim::sim
