#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <thread>

#include "iwpp/wavefront_queue.hpp"

using namespace iwpp;

namespace {

using Queue = WavefrontQueue<std::uint32_t>;

QueueConfig config(QueueStrategy s, std::optional<std::size_t> gbq = std::nullopt, std::size_t tq = 32,
                   std::size_t bq = 1024) {
  QueueConfig c;
  c.strategy = s;
  c.gbq_capacity = gbq;
  c.tq_capacity = tq;
  c.bq_capacity = bq;
  return c;
}

std::vector<std::uint32_t> round_contents(const Queue& q) {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < q.round_size(); ++i) out.push_back(q.round_item(i));
  return out;
}

const QueueStrategy kStrategies[] = {QueueStrategy::Naive, QueueStrategy::PrefixSum, QueueStrategy::PerWorker};

}  // namespace

TEST_CASE("strategy names") {
  for (QueueStrategy s : kStrategies) CHECK(parse_queue_strategy(to_string(s)) == s);
  CHECK(parse_queue_strategy("prefix") == QueueStrategy::PrefixSum);
  CHECK_THROWS_AS(parse_queue_strategy("fifo"), UsageError);
}

TEST_CASE("default gbq capacity") {
  CHECK(default_gbq_capacity(0) == 1024);
  CHECK(default_gbq_capacity(1000) == 1100);
  CHECK(default_gbq_capacity(10001) == 11002);
}

TEST_CASE("push one item and flush") {
  for (QueueStrategy s : kStrategies) {
    Queue q(1, config(s));
    q.push(0, 42);
    CHECK(q.end_round() == 1);
    CHECK(round_contents(q) == std::vector<std::uint32_t>{42});
    CHECK_FALSE(q.overflowed());
  }
}

TEST_CASE("gbq capacity drops excess pushes and latches the flag") {
  for (QueueStrategy s : kStrategies) {
    Queue q(1, config(s, 4));
    for (std::uint32_t i = 0; i < 7; ++i) q.push(0, i);
    CHECK(q.end_round() == 4);
    CHECK(q.overflowed());
    CHECK(q.dropped() == 3);
    CHECK(q.end_round() == 0);
    CHECK(q.overflowed());
    q.clear_overflow();
    CHECK_FALSE(q.overflowed());
  }
}

TEST_CASE("flush") {
  for (QueueStrategy s : kStrategies) {
    Queue q(2, config(s));
    q.flush(0);
    CHECK(q.committed_size() == 0);
    for (std::uint32_t i = 0; i < 3; ++i) q.push(0, i);
    q.flush(0);
    q.flush_all();
    CHECK(q.committed_size() == 3);
  }
}

TEST_CASE("two workers keep their own push order") {
  for (QueueStrategy s : kStrategies) {
    Queue q(2, config(s, std::nullopt, 2, 3));
    for (std::uint32_t i = 0; i < 5; ++i) {
      q.push(0, i);
      q.step_done(0);
      q.push(1, 100 + i);
      q.step_done(1);
    }
    CHECK(q.end_round() == 10);
    const auto items = round_contents(q);
    std::vector<std::uint32_t> w0;
    std::vector<std::uint32_t> w1;
    for (auto v : items) (v < 100 ? w0 : w1).push_back(v);
    CHECK(w0 == std::vector<std::uint32_t>{0, 1, 2, 3, 4});
    CHECK(w1 == std::vector<std::uint32_t>{100, 101, 102, 103, 104});
  }
}

TEST_CASE("end_round") {
  Queue q(1, config(QueueStrategy::PerWorker));
  CHECK(q.end_round() == 0);
  for (std::uint32_t i = 0; i < 12; ++i) q.push(0, i);
  CHECK(q.end_round() == 12);
  CHECK(q.round_index() == 2);
}

TEST_CASE("dequeue by static partition") {
  Queue q(2, config(QueueStrategy::PerWorker));
  const std::vector<std::uint32_t> items{10, 11, 12, 13, 14};
  q.load_initial(items);
  CHECK(q.dequeue(0, 0, 2) == 10u);
  CHECK(q.dequeue(0, 1, 2) == 12u);
  CHECK(q.dequeue(0, 2, 2) == 14u);
  CHECK(q.dequeue(0, 3, 2) == std::nullopt);
  CHECK(q.dequeue(1, 0, 2) == 11u);
  CHECK(q.dequeue(1, 1, 2) == 13u);
  CHECK(q.dequeue(1, 2, 2) == std::nullopt);

  Queue empty(3, config(QueueStrategy::Naive));
  for (std::size_t w = 0; w < 3; ++w) CHECK(empty.dequeue(w, 0, 3) == std::nullopt);
}

TEST_CASE("property: dequeue partitions every round exactly (exhaustive small sizes)") {
  for (std::size_t size = 0; size <= 24; ++size) {
    for (std::size_t n = 1; n <= 9; ++n) {
      Queue q(n, config(QueueStrategy::PerWorker));
      std::vector<std::uint32_t> items(size);
      for (std::size_t i = 0; i < size; ++i) items[i] = static_cast<std::uint32_t>(i);
      q.load_initial(items);
      std::vector<int> seen(size, 0);
      for (std::size_t w = 0; w < n; ++w) {
        std::size_t iter = 0;
        for (;; ++iter) {
          const auto v = q.dequeue(w, iter, n);
          if (!v) break;
          ++seen[*v];
        }
        // EMPTY stays EMPTY.
        CHECK_FALSE(q.dequeue(w, iter + 1, n).has_value());
      }
      CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    }
  }
}

TEST_CASE("property: strategies agree, pushes are conserved, overflow iff pushes exceed capacity") {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
    const std::size_t pushes = std::uniform_int_distribution<std::size_t>(0, 300)(rng);
    const std::size_t tq = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    const std::size_t bq = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
    std::vector<std::pair<std::size_t, std::uint32_t>> ops;
    std::vector<bool> step_after;
    for (std::size_t i = 0; i < pushes; ++i) {
      ops.push_back({std::uniform_int_distribution<std::size_t>(0, n - 1)(rng),
                     std::uniform_int_distribution<std::uint32_t>(0, 50)(rng)});
      step_after.push_back(std::bernoulli_distribution(0.3)(rng));
    }
    const std::optional<std::size_t> cap =
        std::bernoulli_distribution(0.5)(rng)
            ? std::nullopt
            : std::optional<std::size_t>(std::uniform_int_distribution<std::size_t>(1, 300)(rng));

    std::vector<std::uint32_t> reference;
    for (QueueStrategy s : kStrategies) {
      Queue q(n, config(s, cap, tq, bq));
      for (std::size_t i = 0; i < ops.size(); ++i) {
        q.push(ops[i].first, ops[i].second);
        if (step_after[i]) q.step_done(ops[i].first);
      }
      const std::size_t size = q.end_round();
      CHECK(q.pushes() == pushes);
      CHECK(q.overflowed() == (cap.has_value() && pushes > *cap));
      if (!cap) {
        CHECK(size == pushes);
        auto contents = round_contents(q);
        std::sort(contents.begin(), contents.end());
        if (s == QueueStrategy::Naive) {
          reference = contents;
          std::vector<std::uint32_t> pushed;
          for (auto& op : ops) pushed.push_back(op.second);
          std::sort(pushed.begin(), pushed.end());
          CHECK(reference == pushed);
        } else {
          CHECK(contents == reference);
        }
      } else {
        CHECK(size == std::min(pushes, *cap));
        CHECK(q.dropped() == pushes - size);
      }
    }
  }
}

TEST_CASE("reservation counts reflect the strategy") {
  const std::size_t pushes = 100;
  std::map<QueueStrategy, std::size_t> reservations;
  for (QueueStrategy s : kStrategies) {
    Queue q(1, config(s, std::nullopt, 8, 64));
    for (std::uint32_t i = 0; i < pushes; ++i) {
      q.push(0, i);
      if (i % 4 == 3) q.step_done(0);
    }
    q.end_round();
    reservations[s] = q.reservations();
  }
  CHECK(reservations[QueueStrategy::Naive] == pushes);
  CHECK(reservations[QueueStrategy::PrefixSum] == 25);
  CHECK(reservations[QueueStrategy::PerWorker] < reservations[QueueStrategy::PrefixSum]);
}

TEST_CASE("concurrent pushes from distinct workers") {
  for (QueueStrategy s : kStrategies) {
    const std::size_t n = 4;
    const std::uint32_t per_worker = 5000;
    Queue q(n, config(s, std::nullopt, 16, 100));
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < n; ++w) {
        pool.emplace_back([&, w] {
          for (std::uint32_t i = 0; i < per_worker; ++i) {
            q.push(w, static_cast<std::uint32_t>(w) * per_worker + i);
            q.step_done(w);
          }
          q.flush(w);
        });
      }
    }
    REQUIRE(q.end_round() == n * per_worker);
    auto items = round_contents(q);
    std::sort(items.begin(), items.end());
    std::vector<std::uint32_t> expected(n * per_worker);
    std::iota(expected.begin(), expected.end(), 0u);
    CHECK(items == expected);
  }
}

TEST_CASE("invalid configurations") {
  CHECK_THROWS_AS(Queue(0, config(QueueStrategy::Naive)), UsageError);
  CHECK_THROWS_AS(Queue(1, config(QueueStrategy::Naive, 0)), UsageError);
  CHECK_THROWS_AS(Queue(1, config(QueueStrategy::Naive, std::nullopt, 0)), UsageError);
}
