#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "iwpp/errors.hpp"

namespace iwpp {

enum class QueueStrategy {
  Naive,      ///< one shared-counter reservation per pushed item
  PrefixSum,  ///< items of one processed element are reserved as a single batch
  PerWorker,  ///< per-worker TQ batches flow through the shared BQ into the GBQ
};

std::string_view to_string(QueueStrategy s);
/// Parses "naive", "prefix" or "perworker".
QueueStrategy parse_queue_strategy(std::string_view name);

struct QueueConfig {
  QueueStrategy strategy = QueueStrategy::PerWorker;
  std::size_t tq_capacity = 32;
  std::size_t bq_capacity = 1024;
  /// Bound on the items one round may hold; nullopt means unbounded.
  std::optional<std::size_t> gbq_capacity;
};

/// 10% headroom over the initial wavefront, never below 1024 slots.
inline std::size_t default_gbq_capacity(std::size_t initial_queue_size) {
  const auto padded = static_cast<std::size_t>(std::ceil(static_cast<double>(initial_queue_size) * 1.10));
  return std::max<std::size_t>(padded, 1024);
}

namespace detail {

/// Append-only array whose storage never moves. Writers reserve disjoint index ranges
/// and install segments on demand, so concurrent writes need no lock.
template <typename T>
class SegmentedBuffer {
 public:
  static constexpr std::size_t kSegmentBits = 16;
  static constexpr std::size_t kSegmentSize = std::size_t{1} << kSegmentBits;
  static constexpr std::size_t kMaxSegments = std::size_t{1} << 16;

  SegmentedBuffer() : table_(std::make_unique<std::atomic<T*>[]>(kMaxSegments)) {}
  ~SegmentedBuffer() {
    for (std::size_t s = 0; s < kMaxSegments; ++s) delete[] table_[s].load(std::memory_order_relaxed);
  }
  SegmentedBuffer(const SegmentedBuffer&) = delete;
  SegmentedBuffer& operator=(const SegmentedBuffer&) = delete;

  void write(std::size_t offset, std::span<const T> items) {
    std::size_t done = 0;
    while (done < items.size()) {
      const std::size_t pos = offset + done;
      T* seg = segment(pos >> kSegmentBits);
      const std::size_t in_seg = pos & (kSegmentSize - 1);
      const std::size_t n = std::min(items.size() - done, kSegmentSize - in_seg);
      std::copy_n(items.data() + done, n, seg + in_seg);
      done += n;
    }
  }

  /// Reads are only legal after the writers have been joined by a barrier.
  const T& operator[](std::size_t i) const noexcept {
    return table_[i >> kSegmentBits].load(std::memory_order_relaxed)[i & (kSegmentSize - 1)];
  }

 private:
  T* segment(std::size_t s) {
    if (s >= kMaxSegments) throw std::length_error("wavefront queue exceeds addressable size");
    T* seg = table_[s].load(std::memory_order_acquire);
    if (seg != nullptr) return seg;
    auto fresh = std::make_unique<T[]>(kSegmentSize);
    if (table_[s].compare_exchange_strong(seg, fresh.get(), std::memory_order_acq_rel)) return fresh.release();
    return seg;
  }

  std::unique_ptr<std::atomic<T*>[]> table_;
};

}  // namespace detail

/// Round-based hierarchical queue: per-worker TQ -> shared BQ -> bounded GBQ.
///
/// Items pushed during round k become readable in round k+1 after end_round(). The GBQ
/// bound applies to one round; excess items are dropped and `overflowed()` latches until
/// clear_overflow(). Duplicates are allowed.
///
/// push/flush/step_done may be called concurrently for distinct workers. dequeue is
/// wait-free. load_initial/end_round/reset require every worker to be quiescent.
template <typename T>
class WavefrontQueue {
 public:
  WavefrontQueue(std::size_t n_workers, QueueConfig cfg)
      : cfg_(cfg),
        workers_(n_workers),
        in_(std::make_unique<detail::SegmentedBuffer<T>>()),
        out_(std::make_unique<detail::SegmentedBuffer<T>>()) {
    if (n_workers == 0) throw UsageError("wavefront queue needs at least one worker");
    if (cfg_.tq_capacity == 0 || cfg_.bq_capacity == 0) throw UsageError("queue capacities must be positive");
    if (cfg_.gbq_capacity && *cfg_.gbq_capacity == 0) throw UsageError("gbq capacity must be positive");
    for (auto& w : workers_) w.tq.reserve(cfg_.tq_capacity);
    bq_.reserve(cfg_.bq_capacity);
  }

  const QueueConfig& config() const noexcept { return cfg_; }
  std::size_t n_workers() const noexcept { return workers_.size(); }
  std::size_t gbq_capacity() const noexcept {
    return cfg_.gbq_capacity.value_or(std::numeric_limits<std::size_t>::max());
  }

  /// Installs the initial wavefront as the current round. It is not subject to the GBQ bound.
  void load_initial(std::span<const T> items) {
    in_->write(0, items);
    in_size_ = items.size();
  }

  void push(std::size_t worker, const T& item) {
    WorkerSlot& w = workers_[worker];
    ++w.pushes;
    if (cfg_.strategy == QueueStrategy::Naive) {
      commit(w, std::span<const T>(&item, 1));
      return;
    }
    w.tq.push_back(item);
    if (w.tq.size() >= cfg_.tq_capacity) flush(worker);
  }

  /// Marks the end of one processed element. PrefixSum commits the element's batch here.
  void step_done(std::size_t worker) {
    if (cfg_.strategy == QueueStrategy::PrefixSum) flush(worker);
  }

  /// Drains the worker's TQ one level down (BQ for PerWorker, GBQ for PrefixSum).
  void flush(std::size_t worker) {
    WorkerSlot& w = workers_[worker];
    if (w.tq.empty()) return;
    if (cfg_.strategy == QueueStrategy::PerWorker) {
      std::lock_guard lock(bq_mutex_);
      if (bq_.size() + w.tq.size() > cfg_.bq_capacity) {
        commit(w, bq_);
        bq_.clear();
      }
      if (w.tq.size() > cfg_.bq_capacity) {
        commit(w, w.tq);
      } else {
        bq_.insert(bq_.end(), w.tq.begin(), w.tq.end());
      }
    } else {
      commit(w, w.tq);
    }
    w.tq.clear();
  }

  /// Drains every TQ and the BQ into the GBQ. Single-threaded.
  void flush_all() {
    for (std::size_t i = 0; i < workers_.size(); ++i) flush(i);
    if (!bq_.empty()) {
      commit(workers_.front(), bq_);
      bq_.clear();
    }
  }

  /// Swaps rounds: the GBQ becomes the readable round. Returns its size (0 means done).
  std::size_t end_round() {
    flush_all();
    in_size_ = committed_size();
    out_reserved_.store(0, std::memory_order_relaxed);
    std::swap(in_, out_);
    ++round_index_;
    return in_size_;
  }

  /// Static partition: worker w reads index w + iter * n_workers of the current round.
  std::optional<T> dequeue(std::size_t worker, std::size_t iter, std::size_t n_workers) const noexcept {
    const std::size_t idx = worker + iter * n_workers;
    if (idx >= in_size_) return std::nullopt;
    return (*in_)[idx];
  }

  std::size_t round_size() const noexcept { return in_size_; }
  const T& round_item(std::size_t i) const noexcept { return (*in_)[i]; }
  /// Items already stored in the GBQ for the next round.
  std::size_t committed_size() const noexcept {
    return std::min(out_reserved_.load(std::memory_order_relaxed), gbq_capacity());
  }
  std::size_t round_index() const noexcept { return round_index_; }

  bool overflowed() const noexcept { return overflowed_.load(std::memory_order_relaxed); }
  void clear_overflow() noexcept { overflowed_.store(false, std::memory_order_relaxed); }

  /// Number of atomic reservations made on the GBQ counter (contention proxy).
  std::size_t reservations() const noexcept { return sum(&WorkerSlot::reservations); }
  std::size_t pushes() const noexcept { return sum(&WorkerSlot::pushes); }
  std::size_t dropped() const noexcept { return sum(&WorkerSlot::dropped); }

 private:
  struct alignas(64) WorkerSlot {
    std::vector<T> tq;
    std::size_t pushes = 0;
    std::size_t reservations = 0;
    std::size_t dropped = 0;
  };

  void commit(WorkerSlot& w, std::span<const T> items) {
    if (items.empty()) return;
    ++w.reservations;
    const std::size_t cap = gbq_capacity();
    const std::size_t off = out_reserved_.fetch_add(items.size(), std::memory_order_relaxed);
    const std::size_t room = off >= cap ? 0 : std::min(items.size(), cap - off);
    if (room > 0) out_->write(off, items.first(room));
    if (room < items.size()) {
      w.dropped += items.size() - room;
      overflowed_.store(true, std::memory_order_relaxed);
    }
  }

  std::size_t sum(std::size_t WorkerSlot::*field) const noexcept {
    std::size_t total = 0;
    for (const auto& w : workers_) total += w.*field;
    return total;
  }

  QueueConfig cfg_;
  std::vector<WorkerSlot> workers_;
  std::mutex bq_mutex_;
  std::vector<T> bq_;
  std::unique_ptr<detail::SegmentedBuffer<T>> in_;
  std::unique_ptr<detail::SegmentedBuffer<T>> out_;
  std::size_t in_size_ = 0;
  std::atomic<std::size_t> out_reserved_{0};
  std::atomic<bool> overflowed_{false};
  std::size_t round_index_ = 0;
};

}  // namespace iwpp
