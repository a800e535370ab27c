#include "experiment.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <numeric>
#include <set>

#include "ncc/edge_recovery.hpp"
#include "ncc/errors.hpp"
#include "ncc/forest.hpp"
#include "ncc/group_comm.hpp"
#include "ncc/sketch.hpp"
#include "ncc/sort.hpp"

namespace ncc::cli {
namespace {

using Clock = std::chrono::steady_clock;

const std::set<std::string> kCommands = {"sf", "msf", "sort", "multicast", "k-edge-recovery", "sketch-bench"};

struct RunOutcome {
  Json digest = Json::object();
  Json levels = Json::array();
  std::string verdict = "SKIPPED";
  RoundReport report;
};

Json report_json(const RoundReport& r) {
  Json j;
  j["rounds"] = r.rounds;
  j["total_messages"] = r.total_messages;
  j["total_bits"] = r.total_bits;
  j["max_sent_per_node_round"] = r.max_sent_per_node_round;
  j["max_recv_per_node_round"] = r.max_recv_per_node_round;
  j["violations"] = r.violations;
  j["recv_overflows"] = r.recv_overflows;
  return j;
}

SimConfig sim_config(const RunFlags& f, std::uint32_t n, std::uint64_t seed) {
  SimConfig c;
  c.n = n;
  c.seed = seed;
  c.c_msg = f.c_msg;
  c.c_bits = f.c_bits;
  c.strict_recv = f.strict_recv;
  return c;
}

std::uint32_t count_components(const std::vector<NodeId>& label) {
  std::set<NodeId> s(label.begin() + 1, label.end());
  return static_cast<std::uint32_t>(s.size());
}

bool acyclic(std::uint32_t n, const std::vector<WeightedEdge>& edges) {
  std::vector<NodeId> parent(n + 1);
  std::iota(parent.begin(), parent.end(), NodeId{0});
  std::function<NodeId(NodeId)> find = [&](NodeId x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (const auto& e : edges) {
    const NodeId a = find(e.u);
    const NodeId b = find(e.v);
    if (a == b) return false;
    parent[a] = b;
  }
  return true;
}

bool same_partition(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
  if (a.size() != b.size()) return false;
  std::map<NodeId, NodeId> ab;
  std::map<NodeId, NodeId> ba;
  for (std::size_t v = 1; v < a.size(); ++v) {
    if (ab.emplace(a[v], b[v]).first->second != b[v]) return false;
    if (ba.emplace(b[v], a[v]).first->second != a[v]) return false;
  }
  return true;
}

std::uint64_t forest_weight(const std::vector<WeightedEdge>& edges) {
  std::uint64_t w = 0;
  for (const auto& e : edges) w += e.w;
  return w;
}

// Random partition of the real nodes into about n / 8 sets.
Partition random_partition(std::uint32_t n, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0xc1, 0));
  const std::uint32_t sets = std::max<std::uint32_t>(1, n / 8);
  std::vector<NodeId> ids(n);
  std::iota(ids.begin(), ids.end(), NodeId{1});
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<std::uint64_t> leaders(n);
  for (std::uint32_t i = 0; i < sets; ++i) leaders[ids[i] - 1] = ids[i];
  for (std::uint32_t i = sets; i < n; ++i) leaders[ids[i] - 1] = ids[rng() % sets];
  return Partition::from_leaders(n, leaders);
}

RunOutcome run_sf(Engine& eng, const Graph& g, std::uint64_t seed) {
  SfOptions opt;
  opt.seed = seed;
  const auto r = spanning_forest(eng, g, opt);
  const auto oracle = components_oracle(g);
  const std::uint32_t comps = count_components(oracle);
  bool ok = same_partition(r.label, oracle) && acyclic(g.n, r.forest) && r.forest.size() == g.n - comps;
  std::set<std::pair<NodeId, NodeId>> present;
  for (const auto& e : g.edges) present.emplace(e.u, e.v);
  for (const auto& e : r.forest) ok = ok && present.count({e.u, e.v}) != 0;
  RunOutcome out;
  out.digest["forest_weight"] = forest_weight(r.forest);
  out.digest["edge_count"] = r.forest.size();
  out.digest["component_count"] = count_components(r.label);
  out.digest["phases"] = r.phases;
  out.verdict = ok ? "MATCH" : "MISMATCH";
  return out;
}

RunOutcome run_msf(Engine& eng, const Graph& g, std::uint64_t seed, const RunFlags& f) {
  MsfOptions opt;
  opt.seed = seed;
  opt.k_ind = f.k_ind;
  const auto r = msf(eng, g, opt);
  const auto oracle = kruskal_oracle(g);
  RunOutcome out;
  out.digest["forest_weight"] = r.weight;
  out.digest["edge_count"] = r.forest.size();
  out.digest["component_count"] = g.n - r.forest.size();
  out.digest["depth"] = r.depth;
  out.digest["depth_bound"] = r.depth_bound;
  out.digest["oracle_weight"] = oracle.weight;
  for (const auto& lv : r.levels) {
    Json j;
    j["level"] = lv.level;
    j["edges"] = lv.edges;
    j["max_degree"] = lv.max_degree;
    j["light"] = lv.light;
    j["retries"] = lv.retries;
    j["boruvka_phases"] = lv.boruvka_phases;
    j["rounds"] = lv.rounds;
    out.levels.push_back(std::move(j));
  }
  const bool ok = r.weight == oracle.weight && canonical_edges(r.forest) == oracle.edges;
  out.verdict = ok ? "MATCH" : "MISMATCH";
  return out;
}

RunOutcome run_sort(Engine& eng, std::uint64_t seed) {
  const std::uint32_t n = eng.n();
  Rng rng(derive_seed(seed, 0x50, 0));
  std::vector<std::vector<std::uint64_t>> keys(n);
  std::vector<std::uint64_t> all;
  for (auto& list : keys) {
    list.resize(rng() % (eng.budget().max_msgs + 1));
    for (auto& k : list) k = rng() % (std::uint64_t{4} * n);
    all.insert(all.end(), list.begin(), list.end());
  }
  const auto r = sort_distributed(eng, keys, std::less<>{}, 64);
  std::vector<std::uint64_t> got;
  for (const auto& s : r.slices) got.insert(got.end(), s.begin(), s.end());
  std::sort(all.begin(), all.end());
  RunOutcome out;
  out.digest["keys"] = all.size();
  out.digest["cap"] = r.cap;
  out.digest["levels"] = r.levels;
  out.verdict = got == all ? "MATCH" : "MISMATCH";
  return out;
}

RunOutcome run_multicast(Engine& eng, std::uint64_t seed) {
  const std::uint32_t n = eng.n();
  const auto p = random_partition(n, seed);
  Rng rng(derive_seed(seed, 0x3c, 0));
  std::vector<std::uint64_t> at_leader(p.leader.size());
  std::uint64_t sets = 0;
  for (std::uint64_t v = 1; v < p.leader.size(); ++v) {
    if (p.leader[v] == v) {
      at_leader[v] = rng();
      ++sets;
    }
  }
  const auto trees = build_comm_trees(eng, p, max_tree_message_bits(n));
  const auto got = multicast(eng, trees, at_leader, 64);
  bool ok = true;
  for (std::uint64_t v = 1; v < p.leader.size(); ++v) {
    if (p.leader[v] != 0) ok = ok && got[v] == at_leader[p.leader[v]];
  }
  RunOutcome out;
  out.digest["sets"] = sets;
  out.digest["tree_depth"] = trees.max_depth;
  out.verdict = ok ? "MATCH" : "MISMATCH";
  return out;
}

RunOutcome run_k_edge(Engine& eng, const Graph& g, std::uint64_t seed, std::uint32_t k_flag) {
  const auto p = random_partition(g.n, seed);
  std::vector<std::vector<WeightedEdge>> cut(g.n + 1);
  for (const auto& e : g.edges) {
    if (p.leader[e.u] != p.leader[e.v]) {
      cut[p.leader[e.u]].push_back(e);
      cut[p.leader[e.v]].push_back(e);
    }
  }
  std::uint32_t k = k_flag;
  if (k == 0) {
    for (const auto& c : cut) k = std::max<std::uint32_t>(k, static_cast<std::uint32_t>(c.size()));
    k = std::max<std::uint32_t>(k, 1);
  }
  KEdgeOptions opt;
  opt.sub_seed = seed;
  opt.throw_on_dense = false;
  opt.carry_weights = true;
  const auto r = k_edge_recovery(eng, p, g.adjacency(), k, opt);
  bool ok = true;
  std::uint64_t recovered = 0;
  std::uint64_t dense = 0;
  for (NodeId v = 1; v <= g.n; ++v) {
    if (p.leader[v] != v) continue;
    if (r.dense[v]) {
      ++dense;
      ok = ok && cut[v].size() > k;
      continue;
    }
    recovered += r.edges[v].size();
    ok = ok && r.edges[v] == canonical_edges(cut[v]);
  }
  RunOutcome out;
  out.digest["k"] = k;
  out.digest["recovered_edges"] = recovered;
  out.digest["dense_sets"] = dense;
  out.digest["sketch_bits"] = r.sketch_bits;
  out.verdict = ok ? "MATCH" : "MISMATCH";
  return out;
}

std::vector<Update> random_vector(Rng& rng, std::uint64_t dim, std::uint32_t support) {
  std::set<std::uint64_t> idx;
  while (idx.size() < support) idx.insert(rng() % dim);
  std::vector<Update> u;
  for (auto i : idx) {
    auto d = static_cast<std::int64_t>(rng() % 1000) + 1;
    u.push_back({i, rng() % 2 == 0 ? d : -d});
  }
  return u;
}

RunOutcome run_sketch_bench(std::uint64_t seed, std::uint32_t k_flag, std::uint32_t trials) {
  const std::uint32_t k = k_flag == 0 ? 32 : k_flag;
  const std::uint64_t dim = std::uint64_t{1} << 16;
  Rng rng(derive_seed(seed, 0x5b, 0));
  std::uint32_t exact = 0;
  std::uint32_t dense = 0;
  std::uint64_t bits = 0;
  for (std::uint32_t t = 0; t < trials; ++t) {
    const auto p = ksparse_params(dim, k, derive_seed(seed, 0x5c, t));
    auto u = random_vector(rng, dim, k);
    const auto s = ksparse_encode(p, u);
    bits = s.bits();
    const auto d = ksparse_decode(s);
    bool same = !d.dense && d.coords.size() == u.size();
    for (std::size_t i = 0; same && i < u.size(); ++i) {
      same = d.coords[i].index == u[i].index && d.coords[i].value == u[i].delta;
    }
    exact += same ? 1 : 0;
    auto wide = random_vector(rng, dim, 4 * k);
    dense += ksparse_decode(ksparse_encode(p, wide)).dense ? 1 : 0;
  }
  RunOutcome out;
  const double exact_rate = trials == 0 ? 1.0 : double(exact) / trials;
  const double dense_rate = trials == 0 ? 1.0 : double(dense) / trials;
  out.digest["k"] = k;
  out.digest["dim"] = dim;
  out.digest["trials"] = trials;
  out.digest["sketch_bits"] = bits;
  out.digest["exact_rate"] = exact_rate;
  out.digest["dense_rate"] = dense_rate;
  out.verdict = exact_rate >= 0.99 && dense_rate >= 0.95 ? "MATCH" : "MISMATCH";
  return out;
}

Graph input_graph(const RunFlags& f) {
  if (!f.graph_path.empty()) return read_graph_file(f.graph_path);
  GenParams gp;
  gp.kind = f.kind;
  gp.n = f.n;
  gp.m = f.m == 0 ? std::min<std::uint64_t>(std::uint64_t{4} * f.n, std::uint64_t{f.n} * (f.n - 1) / 2) : f.m;
  gp.seed = f.seed;
  if (f.kind == "grid") {
    gp.rows = 1;
    while (std::uint64_t{gp.rows + 1} * (gp.rows + 1) <= f.n) ++gp.rows;
    gp.cols = f.n / gp.rows;
  }
  if (f.kind == "gnp") gp.p = 4.0 / std::max<std::uint32_t>(f.n, 1);
  return gen_graph(gp);
}

Json run_one(const RunFlags& f, const Graph& g, std::uint64_t seed, std::ostream* trace) {
  const auto start = Clock::now();
  RunOutcome out;
  std::string error;
  try {
    if (f.command == "sketch-bench") {
      out = run_sketch_bench(seed, f.k, f.trials);
    } else {
      const std::uint32_t n = f.command == "sort" || f.command == "multicast" ? f.n : g.n;
      Engine eng(sim_config(f, n, seed));
      eng.set_trace(trace);
      if (f.command == "sf") out = run_sf(eng, g, seed);
      else if (f.command == "msf") out = run_msf(eng, g, seed, f);
      else if (f.command == "sort") out = run_sort(eng, seed);
      else if (f.command == "multicast") out = run_multicast(eng, seed);
      else out = run_k_edge(eng, g, seed, f.k);
      out.report = eng.report();
    }
  } catch (const Error& e) {
    out.verdict = "MISMATCH";
    error = e.what();
  }
  Json run;
  run["seed"] = seed;
  run["verdict"] = out.verdict;
  run["error"] = error.empty() ? Json(nullptr) : Json(error);
  run["report"] = report_json(out.report);
  run["digest"] = std::move(out.digest);
  run["levels"] = std::move(out.levels);
  run["wall_time_s"] = std::chrono::duration<double>(Clock::now() - start).count();
  return run;
}

}  // namespace

Json run_experiment(const RunFlags& f) {
  if (kCommands.count(f.command) == 0) throw InvalidParams("unknown command: " + f.command);
  if (f.seeds == 0) throw InvalidParams("--seeds must be positive");
  const auto start = Clock::now();
  const bool needs_graph = f.command == "sf" || f.command == "msf" || f.command == "k-edge-recovery";
  Graph g;
  if (needs_graph) {
    g = input_graph(f);
    g.validate();
  } else if (f.command != "sketch-bench" && f.n < 2) {
    throw InvalidParams("--n must be at least 2");
  }

  std::ofstream trace_file;
  std::ostream* trace = nullptr;
  if (!f.trace_path.empty()) {
    trace_file.open(f.trace_path, std::ios::binary);
    if (!trace_file) throw InvalidParams("cannot open trace file " + f.trace_path);
    trace = &trace_file;
  }

  std::vector<Json> runs(f.seeds);
  // Tracing writes one stream, so traced batches run in order.
  const std::uint32_t threads = trace != nullptr ? 1 : std::max<std::uint32_t>(1, f.threads);
  for (std::uint32_t base = 0; base < f.seeds; base += threads) {
    std::vector<std::future<Json>> pending;
    for (std::uint32_t i = base; i < std::min(f.seeds, base + threads); ++i) {
      pending.push_back(std::async(threads == 1 ? std::launch::deferred : std::launch::async,
                                   [&, i] { return run_one(f, g, f.seed + i, trace); }));
    }
    for (std::uint32_t i = 0; i < pending.size(); ++i) runs[base + i] = pending[i].get();
  }

  Json report;
  report["command"] = f.command;
  Json cfg;
  cfg["graph"] = f.graph_path.empty() ? Json(nullptr) : Json(f.graph_path);
  cfg["kind"] = needs_graph && f.graph_path.empty() ? Json(f.kind) : Json(nullptr);
  cfg["n"] = needs_graph ? g.n : f.n;
  cfg["m"] = needs_graph ? g.edges.size() : 0;
  cfg["seed"] = f.seed;
  cfg["seeds"] = f.seeds;
  cfg["c_msg"] = f.c_msg;
  cfg["c_bits"] = f.c_bits;
  cfg["k_ind"] = f.k_ind;
  cfg["k"] = f.k;
  cfg["strict_recv"] = f.strict_recv;
  report["config"] = std::move(cfg);
  std::string verdict = "MATCH";
  bool all_skipped = true;
  for (const auto& r : runs) {
    if (r["verdict"] == "MISMATCH") verdict = "MISMATCH";
    if (r["verdict"] != "SKIPPED") all_skipped = false;
  }
  if (all_skipped) verdict = "SKIPPED";
  report["verdict"] = verdict;
  report["runs"] = std::move(runs);
  report["wall_time_s"] = std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

int exit_status(const Json& report) {
  for (const auto& r : report["runs"]) {
    if (r["verdict"] == "MISMATCH" || r["report"]["violations"].get<std::uint64_t>() > 0) return 1;
  }
  return 0;
}

Json schema_of(const Json& report) {
  if (report.is_object()) {
    Json out = Json::object();
    for (auto it = report.begin(); it != report.end(); ++it) out[it.key()] = schema_of(it.value());
    return out;
  }
  if (report.is_array()) {
    Json out = Json::array();
    if (!report.empty()) out.push_back(schema_of(report.front()));
    return out;
  }
  if (report.is_number()) return "number";
  return report.type_name();
}

}  // namespace ncc::cli
