#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "experiment.hpp"
#include "ncc/engine.hpp"
#include "ncc/errors.hpp"
#include "ncc/forest.hpp"
#include "ncc/graph.hpp"
#include "ncc/sketch.hpp"
#include "ncc/sort.hpp"

namespace py = pybind11;
using namespace ncc;

namespace {

using EdgeTuple = std::tuple<NodeId, NodeId, std::uint64_t>;

std::vector<EdgeTuple> tuples(const std::vector<WeightedEdge>& edges) {
  std::vector<EdgeTuple> out;
  out.reserve(edges.size());
  for (const auto& e : edges) out.emplace_back(e.u, e.v, e.w);
  return out;
}

Graph to_graph(std::uint32_t n, const std::vector<EdgeTuple>& edges) {
  Graph g{n, {}};
  for (const auto& [u, v, w] : edges) g.edges.push_back(normalized({u, v, w}));
  g.validate();
  return g;
}

py::dict report_dict(const RoundReport& r) {
  py::dict d;
  d["rounds"] = r.rounds;
  d["total_messages"] = r.total_messages;
  d["total_bits"] = r.total_bits;
  d["max_sent_per_node_round"] = r.max_sent_per_node_round;
  d["max_recv_per_node_round"] = r.max_recv_per_node_round;
  d["violations"] = r.violations;
  d["recv_overflows"] = r.recv_overflows;
  return d;
}

SimConfig config(std::uint32_t n, std::uint64_t seed, std::uint32_t c_msg, std::uint32_t c_bits) {
  SimConfig c;
  c.n = n;
  c.seed = seed;
  c.c_msg = c_msg;
  c.c_bits = c_bits;
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Node congested clique simulator";

  py::register_exception<Error>(m, "NccError");

  m.def("gen_graph",
        [](const std::string& kind, std::uint32_t n, std::uint64_t m_edges, double p, std::uint32_t rows,
           std::uint32_t cols, std::uint64_t seed, std::uint64_t max_weight) {
          GenParams gp{kind, n, m_edges, p, rows, cols, seed, max_weight};
          const auto g = gen_graph(gp);
          return py::make_tuple(g.n, tuples(g.edges));
        },
        py::arg("kind"), py::arg("n") = 0, py::arg("m") = 0, py::arg("p") = 0.0, py::arg("rows") = 0,
        py::arg("cols") = 0, py::arg("seed") = 1, py::arg("max_weight") = std::uint64_t{1} << 30,
        "Returns (n, [(u, v, w), ...]) with u < v.");

  m.def("kruskal",
        [](std::uint32_t n, const std::vector<EdgeTuple>& edges) {
          const auto r = kruskal_oracle(to_graph(n, edges));
          return py::make_tuple(r.weight, tuples(r.edges));
        },
        py::arg("n"), py::arg("edges"));

  m.def("components",
        [](std::uint32_t n, const std::vector<EdgeTuple>& edges) {
          auto c = components_oracle(to_graph(n, edges));
          return std::vector<NodeId>(c.begin() + 1, c.end());
        },
        py::arg("n"), py::arg("edges"), "Smallest id in the component of each node 1..n.");

  m.def("spanning_forest",
        [](std::uint32_t n, const std::vector<EdgeTuple>& edges, std::uint64_t seed, std::uint32_t c_msg,
           std::uint32_t c_bits) {
          const auto g = to_graph(n, edges);
          Engine eng(config(n, seed, c_msg, c_bits));
          SfOptions opt;
          opt.seed = seed;
          const auto r = spanning_forest(eng, g, opt);
          py::dict d;
          d["forest"] = tuples(r.forest);
          d["label"] = std::vector<NodeId>(r.label.begin() + 1, r.label.end());
          d["phases"] = r.phases;
          d["report"] = report_dict(eng.report());
          return d;
        },
        py::arg("n"), py::arg("edges"), py::arg("seed") = 1, py::arg("c_msg") = 4, py::arg("c_bits") = 8);

  m.def("msf",
        [](std::uint32_t n, const std::vector<EdgeTuple>& edges, std::uint64_t seed, std::uint32_t k_ind,
           std::uint32_t c_msg, std::uint32_t c_bits) {
          const auto g = to_graph(n, edges);
          Engine eng(config(n, seed, c_msg, c_bits));
          MsfOptions opt;
          opt.seed = seed;
          opt.k_ind = k_ind;
          const auto r = msf(eng, g, opt);
          py::dict d;
          d["forest"] = tuples(r.forest);
          d["weight"] = r.weight;
          d["depth"] = r.depth;
          d["depth_bound"] = r.depth_bound;
          d["report"] = report_dict(eng.report());
          return d;
        },
        py::arg("n"), py::arg("edges"), py::arg("seed") = 1, py::arg("k_ind") = 0, py::arg("c_msg") = 4,
        py::arg("c_bits") = 8);

  m.def("sort_distributed",
        [](const std::vector<std::vector<std::uint64_t>>& keys, std::uint64_t seed) {
          Engine eng(config(static_cast<std::uint32_t>(keys.size()), seed, 4, 8));
          auto r = sort_distributed(eng, keys, std::less<>{}, 64);
          return py::make_tuple(r.slices, report_dict(eng.report()));
        },
        py::arg("keys"), py::arg("seed") = 1, "keys[i] is held by node i + 1; returns (slices, report).");

  m.def("ksparse_roundtrip",
        [](const std::vector<std::pair<std::uint64_t, std::int64_t>>& coords, std::uint64_t dim, std::uint32_t k,
           std::uint64_t seed) {
          std::vector<Update> u;
          for (const auto& [i, d] : coords) u.push_back({i, d});
          const auto s = ksparse_encode(ksparse_params(dim, k, seed), u);
          const auto d = ksparse_decode(s);
          std::vector<std::pair<std::uint64_t, std::int64_t>> out;
          for (const auto& c : d.coords) out.emplace_back(c.index, c.value);
          return py::make_tuple(d.dense, out, s.bits());
        },
        py::arg("coords"), py::arg("dim"), py::arg("k"), py::arg("seed") = 1,
        "Encodes the vector, decodes it; returns (dense, coords, sketch_bits).");

  m.def("run_experiment",
        [](const std::string& command, const std::string& graph, const std::string& kind, std::uint32_t n,
           std::uint64_t seed, std::uint32_t seeds, std::uint32_t k_ind, std::uint32_t k) {
          cli::RunFlags f;
          f.command = command;
          f.graph_path = graph;
          f.kind = kind;
          f.n = n;
          f.seed = seed;
          f.seeds = seeds;
          f.k_ind = k_ind;
          f.k = k;
          return cli::run_experiment(f).dump();
        },
        py::arg("command"), py::arg("graph") = "", py::arg("kind") = "gnm", py::arg("n") = 64, py::arg("seed") = 1,
        py::arg("seeds") = 1, py::arg("k_ind") = 0, py::arg("k") = 0, "Returns the JSON report as a string.");
}
