#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "experiment.hpp"
#include "ncc/errors.hpp"

namespace {

constexpr int kUsage = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Node congested clique simulator and experiment harness"};
  app.require_subcommand(1);

  ncc::cli::RunFlags flags;
  std::string json_path;
  auto* run = app.add_subcommand("run", "Run a protocol and verify it against its oracle");
  run->add_option("command", flags.command, "sf, msf, sort, multicast, k-edge-recovery or sketch-bench")
      ->required()
      ->check(CLI::IsMember({"sf", "msf", "sort", "multicast", "k-edge-recovery", "sketch-bench"}));
  run->add_option("graph", flags.graph_path, "Graph file (n m header, then u v w lines)");
  run->add_option("--kind", flags.kind, "Generated graph kind when no file is given")
      ->check(CLI::IsMember({"gnm", "gnp", "path", "cycle", "star", "complete", "grid"}));
  run->add_option("--n", flags.n, "Number of nodes")->check(CLI::Range(2u, 1u << 20));
  run->add_option("--m", flags.m, "Edges of a generated gnm graph (default 4n)");
  run->add_option("--seed", flags.seed, "Base seed");
  run->add_option("--seeds", flags.seeds, "Repeat count; run i uses seed + i")->check(CLI::PositiveNumber);
  run->add_option("--c-msg", flags.c_msg, "Messages per node per round, in units of ceil(log2 n)")
      ->check(CLI::PositiveNumber);
  run->add_option("--c-bits", flags.c_bits, "Bits per message, in units of ceil(log2 n)")
      ->check(CLI::PositiveNumber);
  run->add_option("--k-ind", flags.k_ind, "Independence of the msf sampling hash (0 = 9 ceil(log2 n))");
  run->add_option("--k", flags.k, "Recovery target for k-edge-recovery and sketch-bench (0 = auto)");
  run->add_option("--trials", flags.trials, "Trials per seed for sketch-bench");
  run->add_option("--threads", flags.threads, "Seeds run concurrently")->check(CLI::PositiveNumber);
  run->add_option("--json", json_path, "Write the report here");
  run->add_option("--trace", flags.trace_path, "Write round,src,dst,bits lines here");
  run->add_flag("--strict-recv", flags.strict_recv, "Treat receive-budget overruns as violations");

  std::string gen_out;
  ncc::GenParams gp;
  auto* gen = app.add_subcommand("gen", "Generate a graph file");
  gen->add_option("kind", gp.kind, "gnm, gnp, path, cycle, star, complete or grid")
      ->required()
      ->check(CLI::IsMember({"gnm", "gnp", "path", "cycle", "star", "complete", "grid"}));
  gen->add_option("--n", gp.n, "Number of nodes");
  gen->add_option("--m", gp.m, "Edges (gnm)");
  gen->add_option("--p", gp.p, "Edge probability (gnp)");
  gen->add_option("--rows", gp.rows, "Grid rows");
  gen->add_option("--cols", gp.cols, "Grid columns");
  gen->add_option("--seed", gp.seed, "Seed");
  gen->add_option("--max-weight", gp.max_weight, "Weights are uniform in [1, max-weight]");
  gen->add_option("-o,--out", gen_out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*gen) {
      const auto g = ncc::gen_graph(gp);
      if (gen_out.empty()) ncc::write_graph(std::cout, g);
      else ncc::write_graph_file(gen_out, g);
      return 0;
    }
    const auto report = ncc::cli::run_experiment(flags);
    if (!json_path.empty()) {
      std::ofstream out(json_path, std::ios::binary);
      if (!out) {
        std::cerr << "cannot write " << json_path << '\n';
        return kUsage;
      }
      out << report.dump(2) << '\n';
    }
    for (const auto& r : report["runs"]) {
      std::cout << flags.command << " seed=" << r["seed"].get<std::uint64_t>()
                << " verdict=" << r["verdict"].get<std::string>()
                << " rounds=" << r["report"]["rounds"].get<std::uint64_t>()
                << " violations=" << r["report"]["violations"].get<std::uint64_t>();
      if (!r["error"].is_null()) std::cout << " error=\"" << r["error"].get<std::string>() << '"';
      std::cout << '\n';
    }
    return ncc::cli::exit_status(report);
  } catch (const ncc::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kUsage;
  } catch (const ncc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
