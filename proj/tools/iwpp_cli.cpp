#include <filesystem>
#include <fstream>
#include <iostream>
#include <variant>

#include "cli_common.hpp"
#include "iwpp/distance_transform.hpp"
#include "iwpp/errors.hpp"
#include "iwpp/pgm.hpp"
#include "iwpp/reconstruction.hpp"
#include "iwpp/synthetic.hpp"

namespace iwpp::cli {

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kContract = 2;
constexpr int kNoBackground = 3;

struct ReconFlags {
  RunFlags run;
  std::string mask;
  std::string marker;
  std::optional<double> auto_marker;
  std::string out;
  std::string algo = "fh";
  std::string event_log;
};

struct EdtFlags {
  RunFlags run;
  std::string input;
  std::string out;
  std::string mode = "seq";
  std::string event_log;
};

void write_events(const std::string& path, const std::vector<TaskEvent>& events) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_event_log(out, events);
}

template <PixelType T>
Image<T> reconstruct(const Image<T>& mask, const Image<T>& marker, const ReconFlags& f) {
  const auto g = StructuringElement::from_connectivity(f.run.conn);
  if (f.algo == "sr") return recon_sr(mask, marker, g);
  if (f.algo == "qb") return recon_qb(mask, marker, g);
  if (f.algo == "fh") return recon_fh(mask, marker, g);
  if (f.algo == "parallel") return recon_parallel(mask, marker, g, engine_config(f.run));
  PipelineResult run;
  auto out = recon_tiled(mask, marker, g, pipeline_config(f.run), &run);
  write_events(f.event_log, run.events);
  return out;
}

template <PixelType T>
Image<T> h_marker(const Image<T>& mask, double h) {
  if (h < 0) throw UsageError("--auto-marker must be nonnegative");
  return gen_marker<T>(mask, static_cast<T>(std::min<double>(h, std::numeric_limits<T>::max())));
}

int run_recon(const ReconFlags& f) {
  const PixelImage mask = read_pgm(read_file(f.mask));
  std::optional<PixelImage> marker;
  if (!f.marker.empty()) marker = read_pgm(read_file(f.marker));

  const PixelImage out = std::visit(
      [&](const auto& m) -> PixelImage {
        using Img = std::decay_t<decltype(m)>;
        using T = typename Img::value_type;
        if constexpr (std::is_same_v<T, float>) {
          throw UsageError("float masks are not readable from PGM");
        } else {
          Img j;
          if (marker) {
            if (!std::holds_alternative<Img>(*marker))
              throw ContractViolation("mask and marker must have the same sample depth");
            j = std::get<Img>(*marker);
          } else {
            j = h_marker(m, *f.auto_marker);
          }
          Img result = reconstruct(m, j, f);
          if constexpr (std::is_same_v<T, std::uint8_t>) result.mark_binary(m.kind() == ElemKind::Binary);
          return result;
        }
      },
      mask);
  write_file(f.out, write_pgm(out));
  return kOk;
}

Image8 foreground_of(const PixelImage& img) {
  return std::visit(
      [](const auto& m) {
        Image8 out(m.dims());
        for (PixelIndex i = 0; i < m.size(); ++i) out[i] = m[i] != 0 ? kBinaryOn : 0;
        out.mark_binary();
        return out;
      },
      img);
}

int run_edt(const EdtFlags& f) {
  const Image8 mask = foreground_of(read_pgm(read_file(f.input)));
  EdtOptions opts;
  opts.mode = f.mode == "seq" ? EdtMode::Sequential : f.mode == "parallel" ? EdtMode::Parallel : EdtMode::Tiled;
  opts.engine = engine_config(f.run);
  opts.pipeline = pipeline_config(f.run);
  const auto result = edt(mask, StructuringElement::from_connectivity(f.run.conn), opts);
  write_events(f.event_log, result.events);
  const std::filesystem::path out(f.out);
  if (out.extension() == ".f32") {
    const auto raw = write_f32_raw(result.distance);
    write_file(out, raw.payload);
    const std::string header = raw.header + "\n";
    write_file(f32_header_path(out), Bytes(header.begin(), header.end()));
  } else {
    write_file(out, write_pgm(quantize_distance(result.distance)));
  }
  return kOk;
}

}  // namespace

void add_run_flags(CLI::App& cmd, RunFlags& flags) {
  cmd.add_option("--conn", flags.conn, "Connectivity")->check(CLI::IsMember({4, 8}))->capture_default_str();
  cmd.add_option("--workers", flags.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  cmd.add_option("--tile", flags.tile, "Tile size WxH for tiled runs")->capture_default_str();
  cmd.add_option("--queue", flags.queue, "Queue strategy")
      ->check(CLI::IsMember({"naive", "prefix", "perworker"}))
      ->capture_default_str();
  cmd.add_option("--gbq-capacity", flags.gbq_capacity, "Global queue bound per round: N, auto or unbounded")
      ->capture_default_str();
  cmd.add_option("--micro-bands", flags.micro_bands, "Split each tile into this many bands")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

Dims parse_dims(const std::string& text) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t used = 0;
    const int w = std::stoi(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(text);
    const int h = std::stoi(text.substr(x + 1), &used);
    if (used != text.size() - x - 1 || w <= 0 || h <= 0) throw std::invalid_argument(text);
    return {w, h};
  } catch (const std::logic_error&) {
    throw UsageError("expected positive WxH, got '" + text + "'");
  }
}

std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    try {
      std::size_t used = 0;
      const auto item = text.substr(start, end - start);
      const long v = std::stol(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw UsageError("expected a comma-separated list of positive integers, got '" + text + "'");
    }
    start = end + 1;
  }
  return out;
}

EngineConfig engine_config(const RunFlags& flags) {
  EngineConfig cfg;
  cfg.n_workers = flags.workers;
  cfg.queue.strategy = parse_queue_strategy(flags.queue);
  if (flags.gbq_capacity == "auto") {
    cfg.auto_gbq_capacity = true;
  } else if (flags.gbq_capacity != "unbounded") {
    const auto v = parse_list(flags.gbq_capacity);
    if (v.size() != 1) throw UsageError("--gbq-capacity takes one value");
    cfg.queue.gbq_capacity = v.front();
  }
  return cfg;
}

PipelineConfig pipeline_config(const RunFlags& flags) {
  PipelineConfig cfg;
  const Dims t = parse_dims(flags.tile);
  cfg.tile = {t.width, t.height};
  cfg.n_workers = flags.workers;
  cfg.micro = {flags.micro_bands, flags.micro_bands > 1 ? flags.workers : 1};
  return cfg;
}

void register_recon(CLI::App& app, int& exit_code) {
  auto flags = std::make_shared<ReconFlags>();
  auto* cmd = app.add_subcommand("recon", "Morphological reconstruction of a mask from a marker");
  cmd->add_option("--mask", flags->mask, "Mask PGM")->required()->check(CLI::ExistingFile);
  auto* marker = cmd->add_option("--marker", flags->marker, "Marker PGM")->check(CLI::ExistingFile);
  auto* h = cmd->add_option("--auto-marker", flags->auto_marker, "Use max(mask - H, 0) as the marker");
  marker->excludes(h);
  cmd->add_option("--out", flags->out, "Output PGM")->required();
  cmd->add_option("--algo", flags->algo, "Algorithm")
      ->check(CLI::IsMember({"sr", "qb", "fh", "parallel", "tiled"}))
      ->capture_default_str();
  cmd->add_option("--event-log", flags->event_log, "Write the tiled scheduler log (JSON lines)");
  add_run_flags(*cmd, flags->run);
  cmd->callback([flags, &exit_code] {
    if (flags->marker.empty() && !flags->auto_marker) throw CLI::RequiredError("--marker or --auto-marker");
    exit_code = run_recon(*flags);
  });
}

void register_edt(CLI::App& app, int& exit_code) {
  auto flags = std::make_shared<EdtFlags>();
  auto* cmd = app.add_subcommand("edt", "Euclidean distance transform of a binary mask");
  cmd->add_option("--input", flags->input, "Binary PGM; nonzero pixels are foreground")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", flags->out, "Output: .f32 for raw floats (plus .hdr sidecar), else quantized PGM")
      ->required();
  cmd->add_option("--mode", flags->mode, "Execution mode")
      ->check(CLI::IsMember({"seq", "parallel", "tiled"}))
      ->capture_default_str();
  cmd->add_option("--event-log", flags->event_log, "Write the tiled scheduler log (JSON lines)");
  add_run_flags(*cmd, flags->run);
  cmd->callback([flags, &exit_code] { exit_code = run_edt(*flags); });
}

}  // namespace iwpp::cli

int main(int argc, char** argv) {
  using namespace iwpp;
  CLI::App app{"Wavefront propagation image operators: reconstruction, distance transform, verification, benchmarks"};
  app.require_subcommand(1);
  int exit_code = cli::kOk;
  cli::register_recon(app, exit_code);
  cli::register_edt(app, exit_code);
  cli::register_verify(app, exit_code);
  cli::register_bench(app, exit_code);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kContract;
  } catch (const NoBackgroundError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kNoBackground;
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kContract;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kContract;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kContract;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kInternal;
  }
  return exit_code;
}
