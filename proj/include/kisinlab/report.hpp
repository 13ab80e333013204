#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace kl {

enum class Verdict { Pass, Fail, Indeterminate };

std::string to_string(Verdict v);
Verdict verdict_of(bool ok);
// Fail dominates Indeterminate, which dominates Pass.
Verdict combine(Verdict a, Verdict b);

struct Claim {
  std::string name;
  std::string tag; // provenance of the expectation, e.g. "oracle: flattened span"
  Verdict verdict = Verdict::Indeterminate;
  std::string witness;
  double seconds = 0;
  unsigned prec_N = 0, prec_M = 0;
};

Verdict overall(const std::vector<Claim> &claims);

struct Report {
  std::string title;
  std::uint64_t seed = 0;
  std::string context;
  std::vector<Claim> claims;

  [[nodiscard]] Verdict overall() const { return kl::overall(claims); }
  // Claims sorted by name; wall times are omitted when `timings` is false so
  // that repeated runs render byte-identically.
  [[nodiscard]] std::string to_json(bool timings = true) const;
  [[nodiscard]] std::string to_text(bool timings = true) const;
};

// 0 pass, 1 fail, 2 indeterminate.
int exit_code(Verdict v);

extern const char *const kToolVersion;

} // namespace kl
