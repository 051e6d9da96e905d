#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bumpwatch/classifier.hpp"
#include "bumpwatch/detector.hpp"
#include "bumpwatch/filter.hpp"
#include "bumpwatch/formats.hpp"
#include "bumpwatch/recording_io.hpp"

namespace bumpwatch {

using Clock = std::chrono::steady_clock;

struct PipelineConfig {
  std::optional<FilterSpec> filter;  // empty: raw data
  DetectorConfig detector{};
  ClassifierOptions classifier{};
  RecordOptions records{};
};

// ---- Offline reference path ---------------------------------------------------------

inline std::vector<DetectionEvent> extract_events(const SampleStream& stream,
                                                  const PipelineConfig& cfg,
                                                  std::vector<std::string>* warnings = nullptr) {
  if (!cfg.filter) return detect_events(stream, cfg.detector, warnings);
  const auto coeffs = design_lowpass(*cfg.filter);
  return detect_events(apply_filter(coeffs, stream), cfg.detector, warnings);
}

inline std::vector<std::string> process_recording(const SampleStream& stream,
                                                  const SegmentModel& model,
                                                  const PipelineConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& e : extract_events(stream, cfg))
    out.push_back(result_record(e, classify(e.frame, model, cfg.classifier), cfg.records).dump());
  return out;
}

// ---- Incremental path -----------------------------------------------------------------

struct PipelineStats {
  std::size_t accepted = 0;
  std::size_t malformed = 0;
  std::size_t out_of_order = 0;
  std::size_t gaps = 0;
  std::size_t missing_samples = 0;
  std::size_t events = 0;
  std::size_t queue_dropped = 0;
  double max_emit_latency_ms = 0.0;
};

// Filter, detector and classifier driven one sample at a time. Samples that go back in
// time are dropped; a jump beyond the spacing tolerance counts as lost samples and
// clears any half-seen excursion.
class LivePipeline {
 public:
  LivePipeline(SegmentModel model, PipelineConfig cfg)
      : model_(std::move(model)), cfg_(std::move(cfg)), detector_(cfg_.detector) {
    if (cfg_.filter) {
      coeffs_ = design_lowpass(*cfg_.filter);
      filter_.emplace(*coeffs_);
    }
  }
  LivePipeline(const LivePipeline&) = delete;
  LivePipeline& operator=(const LivePipeline&) = delete;

  std::optional<std::string> push(const SensorSample& raw) {
    if (!raw.finite()) {
      ++stats_.malformed;
      return std::nullopt;
    }
    if (last_t_ && raw.t_ms <= *last_t_) {
      ++stats_.out_of_order;
      return std::nullopt;
    }
    const double nominal = nominal_spacing_ms(cfg_.detector.rate_hz);
    if (last_t_) {
      const double dt = raw.t_ms - *last_t_;
      if (dt > nominal * (1.0 + kSpacingTolerance)) {
        ++stats_.gaps;
        stats_.missing_samples += static_cast<std::size_t>(std::llround(dt / nominal)) - 1;
        detector_.reset_peaks();
      }
    }
    last_t_ = raw.t_ms;
    ++stats_.accepted;
    const SensorSample s = filter_ ? filter_->step(raw) : raw;
    if (auto e = detector_.push(s)) return emit(*e);
    return std::nullopt;
  }

  std::optional<std::string> push_datagram(std::string_view d) {
    auto s = parse_datagram(d);
    if (!s) {
      ++stats_.malformed;
      return std::nullopt;
    }
    return push(*s);
  }

  std::optional<std::string> finish() {
    if (auto e = detector_.finish()) return emit(*e);
    return std::nullopt;
  }

  const PipelineStats& stats() const noexcept { return stats_; }
  PipelineStats& stats() noexcept { return stats_; }

 private:
  std::string emit(const DetectionEvent& e) {
    ++stats_.events;
    return result_record(e, classify(e.frame, model_, cfg_.classifier), cfg_.records).dump();
  }

  SegmentModel model_;
  PipelineConfig cfg_;
  std::optional<FilterCoefficients> coeffs_;
  std::optional<SampleFilter> filter_;
  EventDetector detector_;
  std::optional<double> last_t_;
  PipelineStats stats_;
};

// ---- Bounded hand-off between socket and pipeline ------------------------------------

template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

  // Never blocks; when full the oldest item is discarded. Returns true if one was.
  bool push(T item) {
    bool dropped = false;
    {
      std::lock_guard lock(mu_);
      if (items_.size() >= capacity_) {
        items_.pop_front();
        dropped = true;
      }
      items_.push_back(std::move(item));
    }
    cv_.notify_one();
    return dropped;
  }

  std::optional<T> pop_for(std::chrono::milliseconds wait) {
    std::unique_lock lock(mu_);
    if (!cv_.wait_for(lock, wait, [&] { return !items_.empty(); })) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    return item;
  }

  bool empty() const {
    std::lock_guard lock(mu_);
    return items_.empty();
  }

 private:
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> items_;
};

// ---- UDP ------------------------------------------------------------------------------

class UdpSocket {
 public:
  UdpSocket() : fd_(::socket(AF_INET, SOCK_DGRAM, 0)) {
    if (fd_ < 0) throw IoError(std::string("socket: ") + std::strerror(errno));
  }
  ~UdpSocket() {
    if (fd_ >= 0) ::close(fd_);
  }
  UdpSocket(const UdpSocket&) = delete;
  UdpSocket& operator=(const UdpSocket&) = delete;

  int fd() const noexcept { return fd_; }

  void bind(const std::string& host, std::uint16_t port) {
    const auto addr = make_addr(host, port);
    if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) < 0)
      throw IoError("bind " + host + ":" + std::to_string(port) + ": " + std::strerror(errno));
  }

  std::uint16_t local_port() const {
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    return ntohs(addr.sin_port);
  }

  void set_receive_buffer(int bytes) {
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &bytes, sizeof bytes);
  }

  void send_to(std::string_view payload, const std::string& host, std::uint16_t port) {
    const auto addr = make_addr(host, port);
    if (::sendto(fd_, payload.data(), payload.size(), 0, reinterpret_cast<const sockaddr*>(&addr),
                 sizeof addr) < 0)
      throw IoError(std::string("sendto: ") + std::strerror(errno));
  }

  // Waits up to `timeout` for one datagram.
  std::optional<std::string> receive(std::chrono::milliseconds timeout) {
    pollfd p{fd_, POLLIN, 0};
    if (::poll(&p, 1, static_cast<int>(timeout.count())) <= 0) return std::nullopt;
    char buf[2048];
    const auto n = ::recv(fd_, buf, sizeof buf, 0);
    if (n < 0) return std::nullopt;
    return std::string(buf, static_cast<std::size_t>(n));
  }

 private:
  static sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
      throw ConfigError("bad IPv4 address '" + host + "'");
    return addr;
  }

  int fd_;
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks a free port
  std::size_t queue_capacity = 4096;
  // Socket reading and analysis on separate threads; false runs both on one.
  bool threaded = true;
};

// Live listener: datagrams in, result records out through `sink`.
class LiveServer {
 public:
  using Sink = std::function<void(const std::string&)>;

  LiveServer(SegmentModel model, PipelineConfig cfg, ServerOptions opt, Sink sink)
      : opt_(std::move(opt)), pipeline_(std::move(model), std::move(cfg)),
        queue_(opt_.queue_capacity), sink_(std::move(sink)) {
    socket_.set_receive_buffer(1 << 22);
    socket_.bind(opt_.host, opt_.port);
  }
  ~LiveServer() { stop(); }

  std::uint16_t port() const { return socket_.local_port(); }

  void start() {
    if (opt_.threaded) {
      reader_ = std::jthread([this](std::stop_token st) { read_loop(st); });
      worker_ = std::jthread([this](std::stop_token st) { work_loop(st); });
    } else {
      reader_ = std::jthread([this](std::stop_token st) { inline_loop(st); });
    }
  }

  // Stops the threads, drains what was received and flushes a partial frame.
  void stop() {
    if (stopped_.exchange(true)) return;
    reader_.request_stop();
    if (reader_.joinable()) reader_.join();
    worker_.request_stop();
    if (worker_.joinable()) worker_.join();
    while (auto d = queue_.pop_for(std::chrono::milliseconds(0))) handle(*d);
    std::lock_guard lock(mu_);
    if (auto r = pipeline_.finish()) sink_(*r);
  }

  std::size_t received() const noexcept { return received_.load(); }

  PipelineStats stats() const {
    std::lock_guard lock(mu_);
    PipelineStats s = pipeline_.stats();
    s.queue_dropped = queue_dropped_.load();
    s.max_emit_latency_ms = max_latency_ms_;
    return s;
  }

  // Blocks until `n` datagrams have been processed or `timeout` passes.
  bool wait_processed(std::size_t n, std::chrono::milliseconds timeout) const {
    const auto deadline = Clock::now() + timeout;
    while (processed_.load() < n) {
      if (Clock::now() > deadline) return false;
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    return true;
  }

 private:
  struct Datagram {
    std::string payload;
    Clock::time_point arrived;
  };

  void read_loop(std::stop_token st) {
    while (!st.stop_requested()) {
      auto d = socket_.receive(std::chrono::milliseconds(20));
      if (!d) continue;
      ++received_;
      if (queue_.push({std::move(*d), Clock::now()})) ++queue_dropped_;
    }
  }

  void work_loop(std::stop_token st) {
    while (!st.stop_requested() || !queue_.empty()) {
      if (auto d = queue_.pop_for(std::chrono::milliseconds(20))) handle(*d);
    }
  }

  void inline_loop(std::stop_token st) {
    while (!st.stop_requested()) {
      auto d = socket_.receive(std::chrono::milliseconds(20));
      if (!d) continue;
      ++received_;
      handle({std::move(*d), Clock::now()});
    }
  }

  void handle(const Datagram& d) {
    std::lock_guard lock(mu_);
    if (auto r = pipeline_.push_datagram(d.payload)) {
      sink_(*r);
      const double ms = std::chrono::duration<double, std::milli>(Clock::now() - d.arrived).count();
      max_latency_ms_ = std::max(max_latency_ms_, ms);
    }
    ++processed_;
  }

  ServerOptions opt_;
  UdpSocket socket_;
  LivePipeline pipeline_;
  BoundedQueue<Datagram> queue_;
  Sink sink_;
  mutable std::mutex mu_;
  double max_latency_ms_ = 0.0;
  std::atomic<std::size_t> received_{0}, processed_{0}, queue_dropped_{0};
  std::atomic<bool> stopped_{false};
  std::jthread reader_, worker_;
};

// Sends every sample of a stream as one datagram. `burst` datagrams go out back to back
// before a `pause`, which keeps loopback receive buffers from overflowing.
inline std::size_t replay_udp(const SampleStream& stream, const std::string& host,
                              std::uint16_t port, std::size_t burst = 200,
                              std::chrono::microseconds pause = std::chrono::microseconds(2000),
                              const std::function<bool(std::size_t)>& keep = {}) {
  UdpSocket sock;
  std::size_t sent = 0;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (keep && !keep(i)) continue;
    sock.send_to(format_datagram(stream[i]), host, port);
    if (++sent % burst == 0) std::this_thread::sleep_for(pause);
  }
  return sent;
}

}  // namespace bumpwatch
