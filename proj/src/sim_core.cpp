#include "bftsim/sim_core.hpp"

#include <cmath>
#include <string>

#include "bftsim/errors.hpp"

namespace bftsim::sim {

void EventQueue::schedule(SimTime time, EventKind kind, StationId station, std::uint64_t payload) {
  if (!(time >= now_) || !std::isfinite(time)) {
    throw StructuralError("past event: t=" + std::to_string(time) + " < clock=" + std::to_string(now_));
  }
  heap_.push(Event{time, next_seq_++, kind, station, payload});
}

Event EventQueue::pop() {
  Event ev = heap_.top();
  heap_.pop();
  now_ = ev.time;
  return ev;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ a);
  h = mix64(h ^ (b + 0x632be59bd9b4e019ULL));
  h = mix64(h ^ (c + 0x85157af5ULL));
  return h;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(mix_seed(seed, stream)) {}

std::uint32_t RngStream::uniform_index(std::uint32_t bound) {
  // Lemire's multiply-shift with rejection; exact and portable.
  std::uint64_t x = engine_() >> 32;
  std::uint64_t m = x * bound;
  auto low = static_cast<std::uint32_t>(m);
  if (low < bound) {
    const std::uint32_t threshold = static_cast<std::uint32_t>(-bound) % bound;
    while (low < threshold) {
      x = engine_() >> 32;
      m = x * bound;
      low = static_cast<std::uint32_t>(m);
    }
  }
  return static_cast<std::uint32_t>(m >> 32);
}

SimTime sample_service_time(double rate, ServiceDistribution dist, RngStream& rng) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw ConfigError("service rate must be positive and finite, got " + std::to_string(rate));
  }
  if (dist == ServiceDistribution::Deterministic) return 1.0 / rate;
  // Inverse CDF on (0, 1]; avoids log(0).
  const double u = 1.0 - std::generate_canonical<double, 53>(rng.engine());
  return -std::log(u) / rate;
}

Station::Station(StationId id, StationRole role, double rate, ServiceDistribution dist, RngStream rng)
    : id_(id), role_(role), rate_(rate), dist_(dist), rng_(std::move(rng)) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw ConfigError("station " + std::to_string(id) + ": service rate must be positive");
  }
}

std::optional<SimTime> Station::enqueue(MessageHandle msg, SimTime now) {
  if (in_service_) {
    queue_.push_back(msg);
    return std::nullopt;
  }
  in_service_ = msg;
  return now + sample_service_time(rate_, dist_, rng_);
}

MessageHandle Station::complete(SimTime now, std::optional<SimTime>& next) {
  if (!in_service_) throw StructuralError("completion on idle station " + std::to_string(id_));
  const MessageHandle done = *in_service_;
  ++served_;
  in_service_.reset();
  next.reset();
  if (!queue_.empty()) {
    in_service_ = queue_.front();
    queue_.pop_front();
    next = now + sample_service_time(rate_, dist_, rng_);
  }
  return done;
}

StationId Engine::add_station(StationRole role, double rate, ServiceDistribution dist, RngStream rng) {
  const auto id = static_cast<StationId>(stations_.size());
  stations_.emplace_back(id, role, rate, dist, std::move(rng));
  return id;
}

bool Engine::deliver(MessageHandle msg, StationId target) {
  Station& st = stations_.at(target);
  if (st.crashed()) return false;
  if (auto done = st.enqueue(msg, now())) {
    queue_.schedule(*done, EventKind::ServiceCompletion, target, 0);
  }
  return true;
}

void Engine::schedule_timer(StationId station, SimTime at, std::uint64_t token) {
  queue_.schedule(at, EventKind::TimerExpiry, station, token);
}

Event Engine::next() {
  Event ev = queue_.pop();
  if (ev.kind == EventKind::ServiceCompletion) {
    std::optional<SimTime> follow;
    ev.payload = stations_[ev.station].complete(ev.time, follow);
    if (follow) queue_.schedule(*follow, EventKind::ServiceCompletion, ev.station, 0);
  }
  return ev;
}

}  // namespace bftsim::sim
