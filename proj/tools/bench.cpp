#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "cli_common.hpp"
#include "iwpp/distance_transform.hpp"
#include "iwpp/reconstruction.hpp"
#include "iwpp/synthetic.hpp"

namespace iwpp::cli {

namespace {

struct BenchFlags {
  std::string experiment = "scaling";
  std::string size = "1024x1024";
  std::uint64_t seed = 1;
  std::string workers = "1,2,4";
  std::string tile = "256x256";
  std::string coverage;
  std::size_t repeats = 3;
  int conn = 8;
  std::string format = "csv";
  std::string out;
};

struct Record {
  std::string experiment;
  std::string variant;
  std::size_t workers = 1;
  std::string tile_dims;
  std::string queue_strategy;
  int coverage_pct = 0;
  double wall_time_ms = 0;
  std::size_t rounds = 0;
  std::size_t bp_waves = 0;
  std::size_t queued_total = 0;
  std::size_t overflow_count = 0;
  std::optional<double> speedup_vs_1worker;
};

const char* const kColumns[] = {"experiment",   "variant",      "workers",  "tile_dims",
                                "queue_strategy", "coverage_pct", "wall_time_ms", "rounds",
                                "bp_waves",     "queued_total", "overflow_count", "speedup_vs_1worker"};

struct Measurement {
  double ms = 0;
  PropagationStats stats;
  std::size_t bp_waves = 0;
};

// Runs `body` `repeats` times and keeps the median wall time. `body` fills the counters.
template <typename Body>
Measurement measure(std::size_t repeats, Body&& body) {
  std::vector<double> times;
  Measurement m;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, repeats); ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    body(m);
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(times.begin(), times.end());
  m.ms = times[times.size() / 2];
  return m;
}

std::string dims_text(TileDims t) { return std::to_string(t.width) + "x" + std::to_string(t.height); }

std::vector<TileDims> parse_tiles(const std::string& text) {
  std::vector<TileDims> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    const Dims d = parse_dims(item);
    out.push_back({d.width, d.height});
  }
  if (out.empty()) throw UsageError("--tile needs at least one WxH");
  return out;
}

std::vector<int> parse_coverages(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v < 0 || v > 100) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw UsageError("coverage values must be integers in 0..100, got '" + text + "'");
    }
  }
  return out;
}

class Bench {
 public:
  explicit Bench(const BenchFlags& f)
      : f_(f),
        dims_(parse_dims(f.size)),
        workers_(parse_list(f.workers)),
        tiles_(parse_tiles(f.tile)),
        g_(StructuringElement::from_connectivity(f.conn)) {}

  std::vector<Record> run() {
    const std::string& e = f_.experiment;
    if (e == "queue") queue_experiment();
    if (e == "tilesize") tilesize_experiment();
    if (e == "coverage") coverage_experiment();
    if (e == "overflow") overflow_experiment();
    if (e == "scaling") scaling_experiment();
    fill_speedups();
    return records_;
  }

 private:
  std::vector<int> coverages(std::vector<int> fallback) const {
    return f_.coverage.empty() ? fallback : parse_coverages(f_.coverage);
  }

  Record base(const std::string& variant, std::size_t workers, int coverage) const {
    Record r;
    r.experiment = f_.experiment;
    r.variant = variant;
    r.workers = workers;
    r.coverage_pct = coverage;
    return r;
  }

  void add(Record r, const Measurement& m) {
    r.wall_time_ms = m.ms;
    r.rounds = m.stats.rounds;
    r.bp_waves = m.bp_waves;
    r.queued_total = m.stats.queued_total;
    r.overflow_count = m.stats.overflow_count;
    records_.push_back(std::move(r));
  }

  std::pair<Image8, Image8> recon_instance(int coverage) const {
    Image8 mask = gen_gray_image(dims_.width, dims_.height, coverage, f_.seed);
    Image8 marker = gen_marker<std::uint8_t>(mask, 40);
    return {std::move(mask), std::move(marker)};
  }

  void tiled_recon(const std::string& variant, int coverage, TileDims tile, std::size_t workers) {
    const auto [mask, marker] = recon_instance(coverage);
    PipelineConfig cfg;
    cfg.tile = tile;
    cfg.n_workers = workers;
    Record r = base(variant, workers, coverage);
    r.tile_dims = dims_text(tile);
    add(r, measure(f_.repeats, [&](Measurement& m) {
          PipelineResult run;
          recon_tiled(mask, marker, g_, cfg, &run);
          m.stats = run.stats;
          m.bp_waves = run.bp_waves;
        }));
  }

  void queue_experiment() {
    const int coverage = coverages({100}).front();
    const auto [mask, marker] = recon_instance(coverage);
    for (std::size_t w : workers_) {
      for (QueueStrategy s : {QueueStrategy::Naive, QueueStrategy::PrefixSum, QueueStrategy::PerWorker}) {
        EngineConfig cfg;
        cfg.n_workers = w;
        cfg.queue.strategy = s;
        Record r = base("recon_parallel", w, coverage);
        r.queue_strategy = std::string(to_string(s));
        add(r, measure(f_.repeats, [&](Measurement& m) { recon_parallel(mask, marker, g_, cfg, &m.stats); }));
      }
    }
  }

  void tilesize_experiment() {
    const int coverage = coverages({100}).front();
    for (TileDims t : tiles_)
      for (std::size_t w : workers_) tiled_recon("recon_tiled", coverage, t, w);
  }

  void coverage_experiment() {
    for (int c : coverages({0, 25, 50, 75, 100})) {
      const Image8 mask = gen_edt_mask(dims_.width, dims_.height, c, f_.seed, 64);
      for (std::size_t w : workers_) {
        EdtOptions opts;
        opts.mode = EdtMode::Tiled;
        opts.pipeline.tile = tiles_.front();
        opts.pipeline.n_workers = w;
        Record r = base("edt_tiled", w, c);
        r.tile_dims = dims_text(tiles_.front());
        add(r, measure(f_.repeats, [&](Measurement& m) {
              const auto result = edt(mask, g_, opts);
              m.stats = result.stats;
              m.bp_waves = result.bp_waves;
            }));
        tiled_recon("recon_tiled", c, tiles_.front(), w);
      }
    }
  }

  void overflow_experiment() {
    const int coverage = coverages({100}).front();
    const auto [mask, marker] = recon_instance(coverage);
    struct Bound {
      std::string name;
      std::optional<std::size_t> capacity;
      bool automatic;
    };
    const std::vector<Bound> bounds = {{"gbq=unbounded", std::nullopt, false},
                                       {"gbq=auto", std::nullopt, true},
                                       {"gbq=1024", 1024, false},
                                       {"gbq=64", 64, false}};
    for (const Bound& b : bounds) {
      for (std::size_t w : workers_) {
        EngineConfig cfg;
        cfg.n_workers = w;
        cfg.queue.gbq_capacity = b.capacity;
        cfg.auto_gbq_capacity = b.automatic;
        Record r = base(b.name, w, coverage);
        r.queue_strategy = std::string(to_string(cfg.queue.strategy));
        add(r, measure(f_.repeats, [&](Measurement& m) { recon_parallel(mask, marker, g_, cfg, &m.stats); }));
      }
    }
  }

  void scaling_experiment() {
    const int coverage = coverages({100}).front();
    for (std::size_t w : workers_) tiled_recon("recon_tiled", coverage, tiles_.front(), w);
  }

  // Speedup only against the 1-worker record of the same configuration.
  void fill_speedups() {
    for (Record& r : records_) {
      for (const Record& b : records_) {
        if (b.workers == 1 && b.variant == r.variant && b.tile_dims == r.tile_dims &&
            b.queue_strategy == r.queue_strategy && b.coverage_pct == r.coverage_pct && r.wall_time_ms > 0) {
          r.speedup_vs_1worker = b.wall_time_ms / r.wall_time_ms;
        }
      }
    }
  }

  const BenchFlags& f_;
  Dims dims_;
  std::vector<std::size_t> workers_;
  std::vector<TileDims> tiles_;
  StructuringElement g_;
  std::vector<Record> records_;
};

void write_csv(std::ostream& out, const std::vector<Record>& records) {
  for (std::size_t i = 0; i < std::size(kColumns); ++i) out << (i ? "," : "") << kColumns[i];
  out << '\n';
  for (const Record& r : records) {
    out << r.experiment << ',' << r.variant << ',' << r.workers << ',' << r.tile_dims << ',' << r.queue_strategy << ','
        << r.coverage_pct << ',' << r.wall_time_ms << ',' << r.rounds << ',' << r.bp_waves << ',' << r.queued_total
        << ',' << r.overflow_count << ',';
    if (r.speedup_vs_1worker) out << *r.speedup_vs_1worker;
    out << '\n';
  }
}

void write_json(std::ostream& out, const std::vector<Record>& records) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const Record& r : records) {
    nlohmann::ordered_json j;
    j["experiment"] = r.experiment;
    j["variant"] = r.variant;
    j["workers"] = r.workers;
    j["tile_dims"] = r.tile_dims;
    j["queue_strategy"] = r.queue_strategy;
    j["coverage_pct"] = r.coverage_pct;
    j["wall_time_ms"] = r.wall_time_ms;
    j["rounds"] = r.rounds;
    j["bp_waves"] = r.bp_waves;
    j["queued_total"] = r.queued_total;
    j["overflow_count"] = r.overflow_count;
    j["speedup_vs_1worker"] = r.speedup_vs_1worker ? nlohmann::ordered_json(*r.speedup_vs_1worker) : nullptr;
    arr.push_back(std::move(j));
  }
  out << arr.dump(2) << '\n';
}

int run_bench(const BenchFlags& f) {
  const auto records = Bench(f).run();
  std::ofstream file;
  if (!f.out.empty()) {
    file.open(f.out);
    if (!file) throw std::runtime_error("cannot write " + f.out);
  }
  std::ostream& out = f.out.empty() ? std::cout : file;
  if (f.format == "json") {
    write_json(out, records);
  } else {
    write_csv(out, records);
  }
  return 0;
}

}  // namespace

void register_bench(CLI::App& app, int& exit_code) {
  auto flags = std::make_shared<BenchFlags>();
  auto* cmd = app.add_subcommand("bench", "Timing experiments on synthetic instances");
  cmd->add_option("--experiment", flags->experiment, "Experiment")
      ->check(CLI::IsMember({"queue", "tilesize", "coverage", "overflow", "scaling"}))
      ->capture_default_str();
  cmd->add_option("--size", flags->size, "Image size WxH")->capture_default_str();
  cmd->add_option("--seed", flags->seed, "Instance seed")->capture_default_str();
  cmd->add_option("--workers", flags->workers, "Worker counts, comma separated")->capture_default_str();
  cmd->add_option("--tile", flags->tile, "Tile sizes WxH, comma separated; tilesize sweeps all")->capture_default_str();
  cmd->add_option("--coverage", flags->coverage, "Tissue coverage percentages, comma separated");
  cmd->add_option("--repeats", flags->repeats, "Runs per configuration; the median is reported")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--conn", flags->conn, "Connectivity")->check(CLI::IsMember({4, 8}))->capture_default_str();
  cmd->add_option("--format", flags->format, "Report format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  cmd->add_option("--out", flags->out, "Report file (default stdout)");
  cmd->callback([flags, &exit_code] { exit_code = run_bench(*flags); });
}

}  // namespace iwpp::cli
