#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <exception>
#include <functional>
#include <iosfwd>
#include <mutex>
#include <string_view>
#include <vector>

namespace iwpp {

enum class TaskKind { TileProp, BorderProp };

std::string_view to_string(TaskKind kind);

using TaskId = std::size_t;

/// One executed task, timestamps in microseconds since the scheduler was created.
struct TaskEvent {
  TaskId id = 0;
  TaskKind kind = TaskKind::TileProp;
  int wave = 0;
  int tile = -1;  ///< -1 for border tasks
  std::size_t worker = 0;
  std::int64_t start_us = 0;
  std::int64_t end_us = 0;
};

/// Demand-driven worker pool over a task dependency graph. Idle workers take the task that
/// became ready first (FCFS). Tasks may submit further tasks while running; run() returns
/// once nothing is pending, ready or running.
class TaskScheduler {
 public:
  using Body = std::function<void(std::size_t worker)>;

  explicit TaskScheduler(std::size_t n_workers);

  TaskId submit(TaskKind kind, int wave, int tile, const std::vector<TaskId>& deps, Body body);
  /// Blocks until all work is done. Rethrows the first exception thrown by a task.
  void run();

  std::size_t n_workers() const noexcept { return n_workers_; }
  /// Completed tasks in completion order.
  std::vector<TaskEvent> events() const;

 private:
  struct Task {
    TaskKind kind;
    int wave;
    int tile;
    Body body;
    std::size_t unmet = 0;
    bool done = false;
    std::vector<TaskId> dependents;
  };

  void worker_loop(std::size_t worker);
  std::int64_t now_us() const;

  std::size_t n_workers_;
  std::chrono::steady_clock::time_point epoch_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Task> tasks_;
  std::deque<TaskId> ready_;
  std::size_t outstanding_ = 0;
  std::exception_ptr failure_;
  std::vector<TaskEvent> events_;
};

/// Writes one JSON object per line: {"task","kind","wave","tile","worker","start_us","end_us"}.
void write_event_log(std::ostream& out, const std::vector<TaskEvent>& events);

}  // namespace iwpp
