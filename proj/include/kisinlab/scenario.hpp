#pragma once

#include "kisinlab/breuil.hpp"
#include "kisinlab/report.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kl {

inline constexpr std::uint64_t kDefaultSeed = 20240611;

// E = u^{p-1} + p.
Ctx scenario_context(unsigned p, unsigned N, unsigned M);
std::string describe(const Ctx &ctx);

// The rank-2 module with Frobenius [[1, -u], [0, E]] and the maps
// alpha: S{-1} -> M, beta: M -> S with beta(e_2) = u^k (k = 1 normally).
struct Counterexample {
  Ctx ctx;
  KisinModule twist, middle, unit;
  KisinMorphism alpha, beta;
};
Counterexample counterexample_data(const Ctx &ctx, unsigned beta_degree = 1);

struct ExpectedClaim {
  std::string name, tag;
};
struct Scenario {
  std::string name;
  std::string parameters; // defaults, as CLI flags
  std::vector<std::string> steps;
  std::vector<ExpectedClaim> expected;
};
const std::vector<Scenario> &scenario_catalog();

Report run_counterexample(unsigned p, unsigned N, unsigned M, unsigned beta_degree = 1);
Report run_key_lemma_suite(unsigned p, unsigned N, unsigned M, unsigned trials, std::uint64_t seed = kDefaultSeed);
Report run_twist_suite(unsigned p, unsigned N, unsigned M, unsigned r_max);
Report run_exactness_suite(unsigned p, unsigned N, unsigned M, unsigned r, unsigned trials,
                           std::uint64_t seed = kDefaultSeed);
// Tor_1 of S against k[[u]]/(u^k) via the Koszul resolution of S/(p, u^k), k = p by default.
Report run_tor(unsigned p, unsigned N, unsigned M, unsigned k = 0);

// Suites behind the height and strongly-divisible acceptance criteria.
Report run_height_suite(const std::vector<unsigned> &primes, const std::vector<unsigned> &weights, unsigned trials,
                        std::uint64_t seed = kDefaultSeed);
Report run_axioms_suite(unsigned p, unsigned N, unsigned M, const std::vector<unsigned> &weights, unsigned trials,
                        std::uint64_t seed = kDefaultSeed);

} // namespace kl
