#include <cstdio>
#include <cstring>
#include <exception>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "common.hpp"

namespace {

struct Criterion {
  int id;
  const char* name;
  std::function<acc::Outcome()> run;
};

void print(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("criterion %2d %-28s %s  %s\n", id, name, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

acc::Outcome guarded(const std::function<acc::Outcome()>& run) {
  try {
    return run();
  } catch (const std::exception& e) {
    acc::Outcome o;
    o.detail = std::string("threw ") + e.what();
    return o;
  }
}

}  // namespace

int main(int argc, char** argv) {
  // Usage: ncc_acceptance [criterion ids...] [--no-replay]
  std::set<int> only;
  bool replay = true;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--no-replay") == 0) replay = false;
    else only.insert(std::atoi(argv[i]));
  }
  auto wanted = [&](int id) { return only.empty() || only.count(id) != 0; };

  const std::vector<Criterion> criteria = {
      {1, "msf exactness", acc::msf_exactness},
      {2, "sf correctness", acc::sf_correctness},
      {4, "sf round scaling", acc::sf_scaling},
      {5, "msf round scaling", acc::msf_scaling},
      {6, "kkt statistics", acc::kkt_statistics},
      {7, "sketch suite", acc::sketch_suite},
      {8, "agm cut oracle", acc::agm_cuts},
      {9, "primitive equivalence", acc::primitive_equivalence},
  };

  bool all = true;
  std::vector<std::pair<const Criterion*, acc::Outcome>> done;
  acc::Outcome c1;
  acc::Outcome c2;
  for (const auto& c : criteria) {
    const bool need = wanted(c.id) || (c.id <= 2 && (wanted(3) || wanted(5)));
    if (!need) continue;
    auto o = guarded(c.run);
    if (c.id == 1) {
      c1 = o;
      if (o.depth_failures > 0) {
        o.pass = false;
        o.detail += acc::fmt("; %llu depth-bound failures", static_cast<unsigned long long>(o.depth_failures));
      }
    }
    if (c.id == 2) c2 = o;
    if (c.id == 5 && c1.depth_failures > 0) {
      o.pass = false;
      o.detail += acc::fmt("; %llu depth-bound failures in criterion 1",
                           static_cast<unsigned long long>(c1.depth_failures));
    }
    if (wanted(c.id)) {
      print(c.id, c.name, o.pass, o.detail + acc::fmt(" [%.1f s]", o.seconds));
      all = all && o.pass;
    }
    done.emplace_back(&c, o);
    if (c.id == 2 && wanted(3)) {
      const auto v = c1.violations + c2.violations;
      print(3, "budget soundness", v == 0,
            acc::fmt("%llu violations across criteria 1 and 2", static_cast<unsigned long long>(v)));
      all = all && v == 0;
    }
  }

  if (wanted(10) && replay) {
    std::uint32_t same = 0;
    std::string differing;
    for (const auto& [c, o] : done) {
      const auto again = guarded(c->run);
      if (again.digest == o.digest) ++same;
      else differing += " " + std::to_string(c->id);
    }
    const bool ok = same == done.size();
    print(10, "determinism", ok,
          acc::fmt("%u/%zu criteria replayed byte-identically%s%s", same, done.size(),
                   differing.empty() ? "" : "; differing:", differing.c_str()));
    all = all && ok;
  }
  return all ? 0 : 1;
}
