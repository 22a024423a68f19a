#include "iwpp/scheduler.hpp"

#include <json.hpp>
#include <ostream>
#include <thread>

#include "iwpp/errors.hpp"

namespace iwpp {

std::string_view to_string(TaskKind kind) { return kind == TaskKind::TileProp ? "TP" : "BP"; }

TaskScheduler::TaskScheduler(std::size_t n_workers)
    : n_workers_(n_workers), epoch_(std::chrono::steady_clock::now()) {
  if (n_workers == 0) throw UsageError("scheduler needs at least one worker");
}

std::int64_t TaskScheduler::now_us() const {
  return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - epoch_).count();
}

TaskId TaskScheduler::submit(TaskKind kind, int wave, int tile, const std::vector<TaskId>& deps, Body body) {
  std::lock_guard lock(mutex_);
  const TaskId id = tasks_.size();
  for (TaskId d : deps)
    if (d >= id) throw UsageError("task dependency must refer to an earlier task");
  tasks_.push_back(Task{kind, wave, tile, std::move(body), 0, false, {}});
  for (TaskId d : deps) {
    if (!tasks_[d].done) {
      ++tasks_[id].unmet;
      tasks_[d].dependents.push_back(id);
    }
  }
  ++outstanding_;
  if (tasks_[id].unmet == 0) ready_.push_back(id);
  cv_.notify_one();
  return id;
}

void TaskScheduler::worker_loop(std::size_t worker) {
  std::unique_lock lock(mutex_);
  for (;;) {
    cv_.wait(lock, [&] { return failure_ || outstanding_ == 0 || !ready_.empty(); });
    if (failure_ || outstanding_ == 0) return;
    const TaskId id = ready_.front();
    ready_.pop_front();
    Body body = std::move(tasks_[id].body);
    TaskEvent ev{id, tasks_[id].kind, tasks_[id].wave, tasks_[id].tile, worker, now_us(), 0};
    lock.unlock();
    std::exception_ptr error;
    try {
      body(worker);
    } catch (...) {
      error = std::current_exception();
    }
    lock.lock();
    ev.end_us = now_us();
    events_.push_back(ev);
    if (error && !failure_) failure_ = error;
    Task& t = tasks_[id];
    t.done = true;
    for (TaskId d : t.dependents)
      if (--tasks_[d].unmet == 0) ready_.push_back(d);
    --outstanding_;
    cv_.notify_all();
  }
}

void TaskScheduler::run() {
  {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers_);
    for (std::size_t w = 0; w < n_workers_; ++w) pool.emplace_back([this, w] { worker_loop(w); });
  }
  if (failure_) std::rethrow_exception(failure_);
}

std::vector<TaskEvent> TaskScheduler::events() const {
  std::lock_guard lock(mutex_);
  return events_;
}

void write_event_log(std::ostream& out, const std::vector<TaskEvent>& events) {
  for (const TaskEvent& e : events) {
    nlohmann::ordered_json j;
    j["task"] = e.id;
    j["kind"] = std::string(to_string(e.kind));
    j["wave"] = e.wave;
    j["tile"] = e.tile;
    j["worker"] = e.worker;
    j["start_us"] = e.start_us;
    j["end_us"] = e.end_us;
    out << j.dump() << '\n';
  }
}

}  // namespace iwpp
