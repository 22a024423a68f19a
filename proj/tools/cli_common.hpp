#pragma once

#include <CLI11.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iwpp/engine.hpp"
#include "iwpp/tiling.hpp"

namespace iwpp::cli {

/// Flags shared by every propagation-running subcommand.
struct RunFlags {
  int conn = 8;
  std::size_t workers = 1;
  std::string tile = "4096x4096";
  std::string queue = "perworker";
  std::string gbq_capacity = "auto";
  std::size_t micro_bands = 1;
};

void add_run_flags(CLI::App& cmd, RunFlags& flags);

/// Parses "WxH". Throws UsageError.
Dims parse_dims(const std::string& text);
/// Parses "1,2,4". Throws UsageError.
std::vector<std::size_t> parse_list(const std::string& text);

EngineConfig engine_config(const RunFlags& flags);
PipelineConfig pipeline_config(const RunFlags& flags);

// Each subcommand stores its process exit code in `exit_code` when it runs.
void register_recon(CLI::App& app, int& exit_code);
void register_edt(CLI::App& app, int& exit_code);
void register_verify(CLI::App& app, int& exit_code);
void register_bench(CLI::App& app, int& exit_code);

}  // namespace iwpp::cli
