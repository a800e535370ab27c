#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "ncc/graph.hpp"

namespace ncc::cli {

using Json = nlohmann::ordered_json;

struct RunFlags {
  std::string command;            // sf, msf, sort, multicast, k-edge-recovery, sketch-bench
  std::string graph_path;         // empty: generate from kind / n / m
  std::string kind = "gnm";
  std::uint32_t n = 64;
  std::uint64_t m = 0;            // gnm; 0 picks 4n
  std::uint64_t seed = 1;
  std::uint32_t seeds = 1;
  std::uint32_t c_msg = 4;
  std::uint32_t c_bits = 8;
  std::uint32_t k_ind = 0;        // msf; 0 keeps the module default
  std::uint32_t k = 0;            // k-edge-recovery and sketch-bench
  std::uint32_t trials = 200;     // sketch-bench
  std::uint32_t threads = 1;
  bool strict_recv = false;
  std::string trace_path;
};

/// Runs the command once per seed (seed, seed + 1, ...) and returns the
/// report. Throws ParseError / InvalidParams / InvalidConfig on bad input.
Json run_experiment(const RunFlags& flags);

/// 0 when every verdict is MATCH or SKIPPED and no budget was violated.
int exit_status(const Json& report);

/// Same document with every leaf replaced by its JSON type name.
Json schema_of(const Json& report);

}  // namespace ncc::cli
