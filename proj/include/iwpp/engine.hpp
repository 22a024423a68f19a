#pragma once

#include <barrier>
#include <concepts>
#include <cstddef>
#include <deque>
#include <exception>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "iwpp/atomic_merge.hpp"
#include "iwpp/image.hpp"
#include "iwpp/neighborhood.hpp"
#include "iwpp/wavefront_queue.hpp"

namespace iwpp {

/// A grid position handed to propagation rules.
struct Cell {
  PixelIndex index;
  int x;
  int y;
};

/// The (PropagationCondition, Update) pair of the wavefront pattern.
///
/// offer(p, value_at_p, q) is the value p proposes for neighbor q; improves(q, candidate,
/// current) is the propagation condition and must be a strict order on q's values, so that
/// repeated merging reaches a fixed point regardless of interleaving.
template <typename R>
concept PropagationRule = requires(const R& rule, const Cell& c, typename R::value_type v) {
  typename R::value_type;
  { rule.offer(c, v, c) } -> std::convertible_to<typename R::value_type>;
  { rule.improves(c, v, v) } -> std::convertible_to<bool>;
};

struct EngineConfig {
  std::size_t n_workers = 1;
  QueueConfig queue{};
  /// Size the GBQ from the initial wavefront (see default_gbq_capacity) instead of queue.gbq_capacity.
  bool auto_gbq_capacity = false;
  /// Abort after this many rounds in a single run.
  std::optional<std::size_t> max_rounds;
};

struct PropagationStats {
  std::size_t initial = 0;       ///< size of the first initial wavefront
  std::size_t queued_total = 0;  ///< elements dequeued over all rounds and runs
  std::size_t rounds = 0;
  std::size_t overflow_count = 0;  ///< re-executions caused by GBQ drops
  std::size_t updates = 0;         ///< merges that changed a cell
  std::size_t reservations = 0;    ///< GBQ reservations (parallel runs only)
  std::size_t dropped = 0;

  PropagationStats& operator+=(const PropagationStats& o) {
    initial += o.initial;
    queued_total += o.queued_total;
    rounds += o.rounds;
    overflow_count += o.overflow_count;
    updates += o.updates;
    reservations += o.reservations;
    dropped += o.dropped;
    return *this;
  }
};

class RoundLimitExceeded : public std::runtime_error {
 public:
  explicit RoundLimitExceeded(std::size_t rounds)
      : std::runtime_error("propagation did not converge within " + std::to_string(rounds) +
                           " rounds; the rule's merge is probably not monotone") {}
};

/// FIFO wavefront propagation restricted to `region`: neighbors outside it are ignored.
template <PropagationRule Rule>
PropagationStats run_sequential(Image<typename Rule::value_type>& grid, const StructuringElement& g,
                                const Rule& rule, std::span<const PixelIndex> seeds, const Rect& region) {
  const Dims dims = grid.dims();
  std::deque<PixelIndex> fifo(seeds.begin(), seeds.end());
  PropagationStats stats;
  stats.initial = seeds.size();
  while (!fifo.empty()) {
    const PixelIndex p = fifo.front();
    fifo.pop_front();
    ++stats.queued_total;
    const Coord pc = dims.coord(p);
    const Cell cp{p, pc.x, pc.y};
    const auto vp = grid[p];
    for_each_neighbor(g.offsets(), pc.x, pc.y, region, [&](int x, int y) {
      const Cell cq{dims.index({x, y}), x, y};
      const auto candidate = rule.offer(cp, vp, cq);
      if (rule.improves(cq, candidate, grid[cq.index])) {
        grid[cq.index] = candidate;
        ++stats.updates;
        fifo.push_back(cq.index);
      }
    });
  }
  return stats;
}

template <PropagationRule Rule>
PropagationStats run_sequential(Image<typename Rule::value_type>& grid, const StructuringElement& g,
                                const Rule& rule, std::span<const PixelIndex> seeds) {
  return run_sequential(grid, g, rule, seeds, Rect::whole(grid.dims()));
}

/// Pixels of `region` that can still improve some neighbor inside `region`, in raster order.
/// Rows are split across `n_workers` threads.
template <PropagationRule Rule>
std::vector<PixelIndex> collect_active(const Image<typename Rule::value_type>& grid, const StructuringElement& g,
                                       const Rule& rule, const Rect& region, std::size_t n_workers = 1) {
  const Dims dims = grid.dims();
  auto scan_rows = [&](int y0, int y1, std::vector<PixelIndex>& out) {
    for (int y = y0; y < y1; ++y) {
      for (int x = region.x0; x < region.x1(); ++x) {
        const Cell cp{dims.index({x, y}), x, y};
        const auto vp = atomic_load(grid[cp.index]);
        bool active = false;
        for_each_neighbor(g.offsets(), x, y, region, [&](int nx, int ny) {
          if (active) return;
          const Cell cq{dims.index({nx, ny}), nx, ny};
          active = rule.improves(cq, rule.offer(cp, vp, cq), atomic_load(grid[cq.index]));
        });
        if (active) out.push_back(cp.index);
      }
    }
  };
  n_workers = std::max<std::size_t>(1, std::min<std::size_t>(n_workers, static_cast<std::size_t>(region.height)));
  std::vector<std::vector<PixelIndex>> parts(n_workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) {
      const int y0 = region.y0 + static_cast<int>(region.height * w / n_workers);
      const int y1 = region.y0 + static_cast<int>(region.height * (w + 1) / n_workers);
      if (n_workers == 1) {
        scan_rows(y0, y1, parts[w]);
      } else {
        pool.emplace_back([&, w, y0, y1] { scan_rows(y0, y1, parts[w]); });
      }
    }
  }
  std::vector<PixelIndex> out;
  for (auto& part : parts) out.insert(out.end(), part.begin(), part.end());
  return out;
}

namespace detail {

/// One overflow-free attempt at the round-based propagation. Returns whether the GBQ dropped
/// elements, in which case the grid holds a valid partial solution.
template <PropagationRule Rule>
bool run_rounds(Image<typename Rule::value_type>& grid, const StructuringElement& g, const Rule& rule,
                std::span<const PixelIndex> seeds, const EngineConfig& cfg, const QueueConfig& qcfg,
                PropagationStats& stats) {
  const std::size_t n = cfg.n_workers;
  const Dims dims = grid.dims();
  const Rect region = Rect::whole(dims);
  WavefrontQueue<PixelIndex> queue(n, qcfg);
  queue.load_initial(seeds);
  stats.queued_total += seeds.size();

  std::vector<std::size_t> updates(n * 8, 0);  // strided to keep counters off shared lines
  std::exception_ptr failure;
  bool done = seeds.empty();
  bool round_limit_hit = false;
  std::size_t rounds = 0;

  auto on_round_end = [&]() noexcept {
    ++rounds;
    const std::size_t next = queue.end_round();
    stats.queued_total += next;
    if (next == 0 || failure) {
      done = true;
    } else if (cfg.max_rounds && rounds >= *cfg.max_rounds) {
      done = true;
      round_limit_hit = true;
    }
  };
  std::barrier sync(static_cast<std::ptrdiff_t>(n), on_round_end);
  std::mutex failure_mutex;

  auto worker = [&](std::size_t w) {
    std::size_t& my_updates = updates[w * 8];
    while (!done) {
      try {
        for (std::size_t iter = 0;; ++iter) {
          const auto item = queue.dequeue(w, iter, n);
          if (!item) break;
          const PixelIndex p = *item;
          const Coord pc = dims.coord(p);
          const Cell cp{p, pc.x, pc.y};
          const auto vp = atomic_load(grid[p]);
          for_each_neighbor(g.offsets(), pc.x, pc.y, region, [&](int x, int y) {
            const Cell cq{dims.index({x, y}), x, y};
            const auto candidate = rule.offer(cp, vp, cq);
            const auto better = [&](const auto& a, const auto& b) { return rule.improves(cq, a, b); };
            const auto prior = atomic_merge(grid[cq.index], candidate, better);
            if (better(candidate, prior)) {
              ++my_updates;
              queue.push(w, cq.index);
            }
          });
          queue.step_done(w);
        }
        queue.flush(w);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
      sync.arrive_and_wait();
    }
  };

  if (!done) {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (std::size_t w = 0; w < n; ++w) pool.emplace_back(worker, w);
  }
  if (failure) std::rethrow_exception(failure);
  stats.rounds += rounds;
  stats.reservations += queue.reservations();
  stats.dropped += queue.dropped();
  for (std::size_t w = 0; w < n; ++w) stats.updates += updates[w * 8];
  if (round_limit_hit) throw RoundLimitExceeded(rounds);
  return queue.overflowed();
}

}  // namespace detail

/// Round-based parallel propagation over the whole grid. Workers take the current round by
/// static partition and merge atomically; a cell is re-queued only by the worker whose merge
/// changed it. If the bounded queue dropped elements, the phase is re-run on its own output
/// with seeds recomputed by a full-grid scan until a run completes without drops.
template <PropagationRule Rule>
PropagationStats run_parallel(Image<typename Rule::value_type>& grid, const StructuringElement& g, const Rule& rule,
                              std::span<const PixelIndex> seeds, const EngineConfig& cfg) {
  if (cfg.n_workers == 0) throw UsageError("n_workers must be at least 1");
  QueueConfig qcfg = cfg.queue;
  if (cfg.auto_gbq_capacity) qcfg.gbq_capacity = default_gbq_capacity(seeds.size());

  PropagationStats stats;
  stats.initial = seeds.size();
  std::vector<PixelIndex> rescanned;
  std::span<const PixelIndex> current = seeds;
  while (detail::run_rounds(grid, g, rule, current, cfg, qcfg, stats)) {
    ++stats.overflow_count;
    rescanned = collect_active(grid, g, rule, Rect::whole(grid.dims()), cfg.n_workers);
    current = rescanned;
  }
  return stats;
}

}  // namespace iwpp
