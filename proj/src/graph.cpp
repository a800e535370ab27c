#include "ncc/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

#include "ncc/errors.hpp"
#include "ncc/rng.hpp"

namespace ncc {

namespace {

class Dsu {
 public:
  explicit Dsu(std::size_t n) : p_(n + 1) { std::iota(p_.begin(), p_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (p_[x] != x) x = p_[x] = p_[p_[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    p_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<std::size_t> p_;
};

std::uint64_t pair_count(std::uint32_t n) { return std::uint64_t{n} * (n - 1) / 2; }

// Pair index t in [0, n(n-1)/2) to (u, v), u < v, row-major.
std::pair<NodeId, NodeId> pair_at(std::uint64_t t, std::uint32_t n) {
  NodeId u = 1;
  std::uint64_t row = n - 1;
  while (t >= row) {
    t -= row;
    ++u;
    --row;
  }
  return {u, static_cast<NodeId>(u + 1 + t)};
}

}  // namespace

Adjacency Graph::adjacency() const {
  Adjacency adj(std::size_t{n} + 1);
  for (const auto& e : edges) {
    adj[e.u].push_back({e.v, e.w});
    adj[e.v].push_back({e.u, e.w});
  }
  return adj;
}

std::uint32_t Graph::max_degree() const {
  std::vector<std::uint32_t> deg(std::size_t{n} + 1, 0);
  for (const auto& e : edges) {
    ++deg[e.u];
    ++deg[e.v];
  }
  return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
}

void Graph::validate() const {
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const auto& e : edges) {
    if (e.u == e.v) throw InvalidParams("self-loop at " + std::to_string(e.u));
    if (e.u < 1 || e.v < 1 || e.u > n || e.v > n) {
      throw InvalidParams("edge " + std::to_string(e.u) + " " + std::to_string(e.v) + " outside [1, n]");
    }
    const auto k = std::minmax(e.u, e.v);
    if (!seen.insert(k).second) {
      throw InvalidParams("duplicate edge " + std::to_string(k.first) + " " + std::to_string(k.second));
    }
  }
}

Graph gen_graph(const GenParams& gp) {
  Graph g;
  g.n = gp.n;
  const std::string& k = gp.kind;
  if (k == "grid") {
    if (gp.rows == 0 || gp.cols == 0) throw InvalidParams("grid needs rows and cols");
    g.n = gp.rows * gp.cols;
  }
  if (g.n < 1) throw InvalidParams("n must be positive");
  if (gp.max_weight < 1) throw InvalidParams("max_weight must be positive");
  Rng rng(derive_seed(gp.seed, 0x67e4));
  auto weight = [&] { return 1 + rng() % gp.max_weight; };
  const std::uint32_t n = g.n;

  if (k == "path" || k == "cycle") {
    for (NodeId v = 1; v < n; ++v) g.edges.push_back({v, v + 1, 0});
    if (k == "cycle" && n >= 3) g.edges.push_back({1, n, 0});
  } else if (k == "star") {
    for (NodeId v = 2; v <= n; ++v) g.edges.push_back({1, v, 0});
  } else if (k == "complete") {
    for (NodeId u = 1; u <= n; ++u) {
      for (NodeId v = u + 1; v <= n; ++v) g.edges.push_back({u, v, 0});
    }
  } else if (k == "grid") {
    for (std::uint32_t r = 0; r < gp.rows; ++r) {
      for (std::uint32_t c = 0; c < gp.cols; ++c) {
        const NodeId v = r * gp.cols + c + 1;
        if (c + 1 < gp.cols) g.edges.push_back({v, v + 1, 0});
        if (r + 1 < gp.rows) g.edges.push_back({v, v + gp.cols, 0});
      }
    }
  } else if (k == "gnp") {
    if (gp.p < 0 || gp.p > 1) throw InvalidParams("gnp needs 0 <= p <= 1");
    const auto cut = static_cast<std::uint64_t>(gp.p * 18446744073709551615.0);
    for (NodeId u = 1; u <= n; ++u) {
      for (NodeId v = u + 1; v <= n; ++v) {
        const bool take = gp.p >= 1 || rng() < cut;
        if (take) g.edges.push_back({u, v, 0});
      }
    }
  } else if (k == "gnm") {
    const std::uint64_t all = pair_count(n);
    if (gp.m > all) throw InvalidParams("gnm: m exceeds n(n-1)/2");
    std::vector<std::uint64_t> picked;
    if (gp.m * 2 <= all) {
      std::set<std::uint64_t> s;
      while (s.size() < gp.m) s.insert(rng() % all);
      picked.assign(s.begin(), s.end());
    } else {
      // partial Fisher-Yates over all pairs
      std::vector<std::uint64_t> idx(all);
      std::iota(idx.begin(), idx.end(), 0);
      for (std::uint64_t i = 0; i < gp.m; ++i) std::swap(idx[i], idx[i + rng() % (all - i)]);
      picked.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(gp.m));
      std::sort(picked.begin(), picked.end());
    }
    for (auto t : picked) {
      auto [u, v] = pair_at(t, n);
      g.edges.push_back({u, v, 0});
    }
  } else {
    throw InvalidParams("unknown graph kind '" + k + "'");
  }
  for (auto& e : g.edges) e.w = weight();
  return g;
}

void write_graph(std::ostream& out, const Graph& g) {
  out << g.n << ' ' << g.edges.size() << '\n';
  for (const auto& e : g.edges) out << e.u << ' ' << e.v << ' ' << e.w << '\n';
}

Graph read_graph(std::istream& in) {
  Graph g;
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') throw ParseError("line " + std::to_string(lineno) + ": CR line ending");
      if (!line.empty()) return true;
    }
    return false;
  };
  if (!next_line()) throw ParseError("missing header");
  std::uint64_t m = 0;
  {
    std::istringstream hs(line);
    std::int64_t n = 0;
    std::int64_t mm = 0;
    std::string extra;
    if (!(hs >> n >> mm) || (hs >> extra) || n < 1 || mm < 0) throw ParseError("bad header '" + line + "'");
    g.n = static_cast<std::uint32_t>(n);
    m = static_cast<std::uint64_t>(mm);
  }
  g.edges.reserve(m);
  for (std::uint64_t i = 0; i < m; ++i) {
    if (!next_line()) throw ParseError("expected " + std::to_string(m) + " edges, got " + std::to_string(i));
    std::istringstream ls(line);
    std::int64_t u = 0;
    std::int64_t v = 0;
    std::uint64_t w = 0;
    std::string extra;
    if (!(ls >> u >> v >> w) || (ls >> extra)) throw ParseError("line " + std::to_string(lineno) + ": bad edge");
    if (u < 1 || v < 1 || u > g.n || v > g.n || u == v) {
      throw ParseError("line " + std::to_string(lineno) + ": invalid endpoints");
    }
    g.edges.push_back(normalized({static_cast<NodeId>(u), static_cast<NodeId>(v), w}));
  }
  if (next_line()) throw ParseError("line " + std::to_string(lineno) + ": trailing content");
  try {
    g.validate();
  } catch (const InvalidParams& e) {
    throw ParseError(e.what());
  }
  return g;
}

Graph read_graph_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  return read_graph(in);
}

void write_graph_file(const std::string& path, const Graph& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidParams("cannot write " + path);
  write_graph(out, g);
}

std::vector<WeightedEdge> canonical_edges(std::vector<WeightedEdge> edges) {
  for (auto& e : edges) e = normalized(e);
  std::sort(edges.begin(), edges.end(),
            [](const WeightedEdge& a, const WeightedEdge& b) { return key_of(a) < key_of(b); });
  return edges;
}

MsfOracle kruskal_oracle(const Graph& g) {
  MsfOracle r;
  Dsu dsu(g.n);
  for (const auto& e : canonical_edges(g.edges)) {
    if (!dsu.unite(e.u, e.v)) continue;
    r.weight += e.w;
    r.edges.push_back(e);
  }
  return r;
}

MsfOracle prim_oracle(const Graph& g) {
  MsfOracle r;
  const auto adj = g.adjacency();
  std::vector<char> in(std::size_t{g.n} + 1, 0);
  using Item = std::pair<EdgeKey, WeightedEdge>;
  auto cmp = [](const Item& a, const Item& b) { return a.first > b.first; };
  for (NodeId s = 1; s <= g.n; ++s) {
    if (in[s]) continue;
    std::priority_queue<Item, std::vector<Item>, decltype(cmp)> pq(cmp);
    auto visit = [&](NodeId v) {
      in[v] = 1;
      for (const auto& x : adj[v]) {
        if (!in[x.to]) pq.push({tie_break(x.w, v, x.to), normalized({v, x.to, x.w})});
      }
    };
    visit(s);
    while (!pq.empty()) {
      auto [key, e] = pq.top();
      pq.pop();
      const NodeId out = in[e.u] ? e.v : e.u;
      if (in[out]) continue;
      r.weight += e.w;
      r.edges.push_back(e);
      visit(out);
    }
  }
  r.edges = canonical_edges(std::move(r.edges));
  return r;
}

std::vector<NodeId> components_oracle(const Graph& g) {
  Dsu dsu(g.n);
  for (const auto& e : g.edges) dsu.unite(e.u, e.v);
  std::vector<NodeId> label(std::size_t{g.n} + 1, 0);
  for (NodeId v = 1; v <= g.n; ++v) label[v] = static_cast<NodeId>(dsu.find(v));
  return label;
}

}  // namespace ncc
