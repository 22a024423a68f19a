#include <algorithm>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>

#include "cli_common.hpp"
#include "iwpp/distance_transform.hpp"
#include "iwpp/reconstruction.hpp"
#include "iwpp/synthetic.hpp"
#include "iwpp/wavefront_queue.hpp"

namespace iwpp::cli {

namespace {

struct VerifyFlags {
  std::string suite = "all";
  std::size_t cases = 20;
  std::uint64_t seed = 1;
  std::string size = "64x64";
};

/// pass/total per named check, printed in insertion order.
class Tally {
 public:
  void record(const std::string& check, bool ok) {
    auto it = std::find_if(rows_.begin(), rows_.end(), [&](const Row& r) { return r.name == check; });
    if (it == rows_.end()) it = rows_.insert(rows_.end(), Row{check, 0, 0});
    it->total += 1;
    it->passed += ok ? 1 : 0;
  }
  bool all_passed() const {
    return std::all_of(rows_.begin(), rows_.end(), [](const Row& r) { return r.passed == r.total; });
  }
  void print(std::ostream& out) const {
    for (const Row& r : rows_)
      out << std::left << std::setw(28) << r.name << r.passed << "/" << r.total << (r.passed == r.total ? "  ok" : "  FAIL")
          << '\n';
  }

 private:
  struct Row {
    std::string name;
    std::size_t passed;
    std::size_t total;
  };
  std::vector<Row> rows_;
};

Image8 dilation_fixed_point(const Image8& mask, const Image8& marker, const StructuringElement& g) {
  Image8 j = marker;
  const Rect whole = Rect::whole(mask.dims());
  for (bool changed = true; changed;) {
    changed = false;
    Image8 next = j;
    for (int y = 0; y < j.height(); ++y) {
      for (int x = 0; x < j.width(); ++x) {
        std::uint8_t v = j(x, y);
        for_each_neighbor(g.offsets(), x, y, whole, [&](int nx, int ny) { v = std::max(v, j(nx, ny)); });
        v = std::min(v, mask(x, y));
        changed = changed || v != next(x, y);
        next(x, y) = v;
      }
    }
    j = std::move(next);
  }
  return j;
}

bool sandwich_and_fixed_point(const Image8& mask, const Image8& marker, const Image8& out, const StructuringElement& g) {
  const Rect whole = Rect::whole(mask.dims());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (marker(x, y) > out(x, y) || out(x, y) > mask(x, y)) return false;
      std::uint8_t v = out(x, y);
      for_each_neighbor(g.offsets(), x, y, whole, [&](int nx, int ny) { v = std::max(v, out(nx, ny)); });
      if (std::min(v, mask(x, y)) != out(x, y)) return false;
    }
  }
  return true;
}

Image8 random_noise(std::mt19937_64& rng, Dims d) {
  Image8 img(d);
  std::uniform_int_distribution<int> v(0, 255);
  for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(v(rng));
  return img;
}

const QueueStrategy kStrategies[] = {QueueStrategy::Naive, QueueStrategy::PrefixSum, QueueStrategy::PerWorker};

void verify_recon(std::mt19937_64& rng, Dims d, Tally& t) {
  const int conn = std::bernoulli_distribution(0.5)(rng) ? 8 : 4;
  const auto g = StructuringElement::from_connectivity(conn);
  const int coverage = std::uniform_int_distribution<int>(1, 4)(rng) * 25;
  const Image8 mask = std::bernoulli_distribution(0.75)(rng) ? gen_gray_image(d.width, d.height, coverage, rng())
                                                             : random_noise(rng, d);
  const Image8 marker = gen_marker<std::uint8_t>(mask, 40);
  const auto fh = recon_fh(mask, marker, g);
  t.record("recon/oracle", fh == dilation_fixed_point(mask, marker, g));
  t.record("recon/sr=qb=fh", recon_sr(mask, marker, g) == fh && recon_qb(mask, marker, g) == fh);
  t.record("recon/properties", sandwich_and_fixed_point(mask, marker, fh, g) && recon_fh(mask, fh, g) == fh);
  EngineConfig cfg;
  cfg.n_workers = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
  cfg.queue.strategy = kStrategies[rng() % 3];
  t.record("recon/parallel", recon_parallel(mask, marker, g, cfg) == fh);
  cfg.queue.gbq_capacity = 16;
  PropagationStats stats;
  const bool same = recon_parallel(mask, marker, g, cfg, &stats) == fh;
  t.record("recon/overflow", same);
}

bool edt_bounds(const Image8& mask, const EdtResult& r, const Image<std::int64_t>& exact, const StructuringElement& g) {
  const auto sq = squared_distance_map(r.vr);
  const Rect whole = Rect::whole(mask.dims());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const Site s = r.vr(x, y);
      if (s.is_none() || is_foreground(mask(s.x, s.y)) || sq(x, y) < exact(x, y)) return false;
      if ((sq(x, y) == 0) != !is_foreground(mask(x, y))) return false;
      bool stable = true;
      for_each_neighbor(g.offsets(), x, y, whole,
                        [&](int nx, int ny) { stable = stable && squared_distance(nx, ny, s) >= sq(nx, ny); });
      if (!stable) return false;
    }
  }
  return true;
}

void verify_edt(std::mt19937_64& rng, Dims d, Tally& t) {
  const auto g = std::bernoulli_distribution(0.25)(rng) ? StructuringElement::four() : StructuringElement::eight();
  const int coverage = std::uniform_int_distribution<int>(1, 4)(rng) * 25;
  const Image8 mask = gen_edt_mask(d.width, d.height, coverage, rng(), 8);
  const auto exact = edt_exact_squared(mask);

  EdtOptions par;
  par.mode = EdtMode::Parallel;
  par.engine.n_workers = std::uniform_int_distribution<std::size_t>(2, 8)(rng);
  par.engine.queue.strategy = kStrategies[rng() % 3];
  EdtOptions tiled;
  tiled.mode = EdtMode::Tiled;
  const int tile = std::uniform_int_distribution<int>(8, 64)(rng);
  tiled.pipeline.tile = {tile, tile};
  tiled.pipeline.n_workers = 4;

  const auto a = edt(mask, g);
  const auto b = edt(mask, g, par);
  const auto c = edt(mask, g, tiled);
  t.record("edt/bounds", edt_bounds(mask, a, exact, g) && edt_bounds(mask, b, exact, g) && edt_bounds(mask, c, exact, g));
  const auto sa = squared_distance_map(a.vr);
  t.record("edt/mode-agreement", sa == squared_distance_map(b.vr) && sa == squared_distance_map(c.vr));

  Image8 single(d, kBinaryOn);
  single(std::uniform_int_distribution<int>(0, d.width - 1)(rng), std::uniform_int_distribution<int>(0, d.height - 1)(rng)) = 0;
  const auto want = edt_exact_bruteforce(single);
  t.record("edt/single-source", edt(single, g).distance == want && edt(single, g, par).distance == want &&
                                    edt(single, g, tiled).distance == want);
}

void verify_queue(std::mt19937_64& rng, Tally& t) {
  const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
  const std::size_t pushes = std::uniform_int_distribution<std::size_t>(0, 400)(rng);
  std::vector<std::pair<std::size_t, std::uint32_t>> ops;
  for (std::size_t i = 0; i < pushes; ++i) ops.push_back({rng() % n, static_cast<std::uint32_t>(rng() % 64)});
  const std::optional<std::size_t> cap =
      rng() % 2 == 0 ? std::nullopt : std::optional<std::size_t>(1 + rng() % 400);
  QueueConfig base;
  base.tq_capacity = 1 + rng() % 16;
  base.bq_capacity = 1 + rng() % 64;
  base.gbq_capacity = cap;

  std::vector<std::uint32_t> reference;
  bool equivalent = true;
  bool conserved = true;
  bool overflow_ok = true;
  bool partition_ok = true;
  for (QueueStrategy s : kStrategies) {
    QueueConfig cfg = base;
    cfg.strategy = s;
    WavefrontQueue<std::uint32_t> q(n, cfg);
    for (const auto& [w, v] : ops) {
      q.push(w, v);
      if (rng() % 3 == 0) q.step_done(w);
    }
    const std::size_t size = q.end_round();
    overflow_ok = overflow_ok && q.overflowed() == (cap && pushes > *cap);
    conserved = conserved && size == (cap ? std::min(pushes, *cap) : pushes);
    std::vector<std::size_t> hits(size, 0);
    std::vector<std::uint32_t> contents;
    for (std::size_t w = 0; w < n; ++w) {
      for (std::size_t iter = 0;; ++iter) {
        if (!q.dequeue(w, iter, n)) break;
        ++hits[w + iter * n];
        contents.push_back(*q.dequeue(w, iter, n));
      }
    }
    partition_ok = partition_ok && std::all_of(hits.begin(), hits.end(), [](std::size_t h) { return h == 1; });
    if (!cap) {
      std::sort(contents.begin(), contents.end());
      if (reference.empty() && s == QueueStrategy::Naive) reference = contents;
      equivalent = equivalent && contents == reference;
    }
  }
  t.record("queue/partition", partition_ok);
  t.record("queue/strategy-equivalence", equivalent);
  t.record("queue/conservation", conserved);
  t.record("queue/overflow-flag", overflow_ok);
}

void verify_tiling(std::mt19937_64& rng, Dims d, Tally& t) {
  const auto g = StructuringElement::eight();
  const Image8 mask = gen_gray_image(d.width, d.height, 75, rng());
  const Image8 marker = gen_marker<std::uint8_t>(mask, 40);
  const auto fh = recon_fh(mask, marker, g);
  PipelineConfig cfg;
  const int tw = std::uniform_int_distribution<int>(1, d.width)(rng);
  const int th = std::uniform_int_distribution<int>(1, d.height)(rng);
  cfg.tile = {tw, th};
  cfg.n_workers = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
  PipelineResult run;
  t.record("tiling/recon-exact", recon_tiled(mask, marker, g, cfg, &run) == fh);
  bool ordered = true;
  for (const auto& bp : run.events)
    for (const auto& tp : run.events)
      if (bp.kind == TaskKind::BorderProp && tp.kind == TaskKind::TileProp && tp.wave == bp.wave)
        ordered = ordered && tp.end_us <= bp.start_us;
  t.record("tiling/wave-barrier", ordered && run.bp_waves >= 1);
  cfg.micro = {2 + rng() % 3, 2};
  t.record("tiling/micro-tiles", recon_tiled(mask, marker, g, cfg) == fh);
}

int run_verify(const VerifyFlags& f) {
  const Dims d = parse_dims(f.size);
  const bool all = f.suite == "all";
  Tally tally;
  for (std::size_t c = 0; c < f.cases; ++c) {
    std::mt19937_64 rng(f.seed * 1000003u + c);
    if (all || f.suite == "recon") verify_recon(rng, d, tally);
    if (all || f.suite == "edt") verify_edt(rng, d, tally);
    if (all || f.suite == "queue") verify_queue(rng, tally);
    if (all || f.suite == "tiling") verify_tiling(rng, d, tally);
  }
  tally.print(std::cout);
  return tally.all_passed() ? 0 : 1;
}

}  // namespace

void register_verify(CLI::App& app, int& exit_code) {
  auto flags = std::make_shared<VerifyFlags>();
  auto* cmd = app.add_subcommand("verify", "Randomized equivalence checks against reference implementations");
  cmd->add_option("--suite", flags->suite, "Suite to run")
      ->check(CLI::IsMember({"recon", "edt", "queue", "tiling", "all"}))
      ->capture_default_str();
  cmd->add_option("--cases", flags->cases, "Random cases per suite")->capture_default_str();
  cmd->add_option("--seed", flags->seed, "Base seed")->capture_default_str();
  cmd->add_option("--size", flags->size, "Image size WxH")->capture_default_str();
  cmd->callback([flags, &exit_code] { exit_code = run_verify(*flags); });
}

}  // namespace iwpp::cli
