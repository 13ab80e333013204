// Runs the eight acceptance criteria and prints one line per criterion.
//
// Usage: acceptance [--expect-fail K]...
// Exit status is 0 when the set of failing criteria equals the set given with
// --expect-fail, so a known-false criterion is still reported as FAIL but does
// not mask a regression elsewhere (or an unexpected pass).

#include "kisinlab/scenario.hpp"

#include "brute_force.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <set>
#include <string>

using namespace kl;

namespace {

struct Outcome {
  bool ok;
  std::string detail;
};

const Claim *find(const Report &r, const std::string &name) {
  for (const auto &c : r.claims)
    if (c.name == name)
      return &c;
  return nullptr;
}

std::string failing(const Report &r) {
  std::string s;
  for (const auto &c : r.claims)
    if (c.verdict != Verdict::Pass)
      s += (s.empty() ? "" : ", ") + c.name + " [" + to_string(c.verdict) + ": " + c.witness + "]";
  return s;
}

Outcome whole(const Report &r) {
  if (r.overall() == Verdict::Pass)
    return {true, std::to_string(r.claims.size()) + " claims pass"};
  return {false, failing(r)};
}

Outcome counterexample() { return whole(run_counterexample(3, 6, 54)); }

Outcome tor() { return whole(run_tor(3, 4, 54)); }

Outcome key_lemma() { return whole(run_key_lemma_suite(3, 3, 18, 200)); }

Outcome twists() { return whole(run_twist_suite(5, 6, 60, 3)); }

Outcome heights() {
  auto r = run_height_suite({3, 5}, {1, 2}, 100);
  std::string detail;
  bool ok = true;
  for (const char *name : {"counterexample-height-1", "counterexample-not-height-0", "extension-closure-arbitrary"}) {
    const Claim *c = find(r, name);
    bool pass = c && c->verdict == Verdict::Pass;
    ok = ok && pass;
    detail += std::string(detail.empty() ? "" : "; ") + name + " " + (c ? to_string(c->verdict) : "missing");
    if (c && !pass)
      detail += " (" + c->witness + ")";
  }
  if (const Claim *c = find(r, "extension-closure-admissible"))
    detail += "; for reference, extension-closure-admissible " + to_string(c->verdict) + " (" + c->witness + ")";
  return {ok, detail};
}

Outcome axioms() { return whole(run_axioms_suite(5, 4, 40, {1, 2}, 30)); }

Outcome exactness() {
  auto r1 = run_exactness_suite(5, 4, 40, 1, 30);
  auto r2 = run_exactness_suite(5, 4, 40, 2, 30);
  auto a = whole(r1), b = whole(r2);
  return {a.ok && b.ok, "r=1: " + a.detail + "; r=2: " + b.detail};
}

Outcome linalg_oracle() {
  std::size_t checked = 0, bad = 0;
  for (unsigned p : {2u, 3u}) {
    auto s = brute::sweep(p, 2);
    checked += s.checked;
    bad += s.mismatches;
  }
  return {bad == 0, std::to_string(checked) + " comparisons, " + std::to_string(bad) + " mismatches"};
}

struct Criterion {
  int id;
  const char *name;
  double limit;
  std::function<Outcome()> run;
};

} // namespace

int main(int argc, char **argv) {
  std::set<int> expected;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--expect-fail") == 0 && i + 1 < argc) {
      expected.insert(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: acceptance [--expect-fail K]...\n");
      return 2;
    }
  }

  const Criterion criteria[] = {
      {1, "counterexample reproduction", 30, counterexample},
      {2, "Tor obstruction", 30, tor},
      {3, "key lemma", 60, key_lemma},
      {4, "twist identities", 60, twists},
      {5, "height checks", 120, heights},
      {6, "strongly divisible axioms", 300, axioms},
      {7, "exactness transport", 600, exactness},
      {8, "linear algebra oracle", 60, linalg_oracle},
  };

  std::set<int> failed;
  for (const auto &c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.limit) {
      o.ok = false;
      o.detail += "; over the " + std::to_string(static_cast<int>(c.limit)) + " s budget";
    }
    if (!o.ok)
      failed.insert(c.id);
    const char *note = !o.ok && expected.count(c.id) ? " (expected)" : "";
    std::printf("criterion %d %-28s %s%s  %.2fs  %s\n", c.id, c.name, o.ok ? "PASS" : "FAIL", note, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }

  for (int id : expected)
    if (!failed.count(id))
      std::printf("criterion %d was expected to fail but passed\n", id);
  std::printf("%zu of 8 criteria pass\n", 8 - failed.size());
  return failed == expected ? 0 : 1;
}
