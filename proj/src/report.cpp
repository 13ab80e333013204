#include "kisinlab/report.hpp"

#include "json.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace kl {

const char *const kToolVersion = "0.1.0";

std::string to_string(Verdict v) {
  switch (v) {
  case Verdict::Pass:
    return "pass";
  case Verdict::Fail:
    return "fail";
  case Verdict::Indeterminate:
    return "indeterminate";
  }
  return "?";
}

Verdict verdict_of(bool ok) { return ok ? Verdict::Pass : Verdict::Fail; }

Verdict combine(Verdict a, Verdict b) {
  if (a == Verdict::Fail || b == Verdict::Fail)
    return Verdict::Fail;
  if (a == Verdict::Indeterminate || b == Verdict::Indeterminate)
    return Verdict::Indeterminate;
  return Verdict::Pass;
}

Verdict overall(const std::vector<Claim> &claims) {
  Verdict v = Verdict::Pass;
  for (const auto &c : claims)
    v = combine(v, c.verdict);
  return v;
}

namespace {

std::vector<Claim> sorted(std::vector<Claim> cs) {
  std::stable_sort(cs.begin(), cs.end(), [](const Claim &a, const Claim &b) { return a.name < b.name; });
  return cs;
}

} // namespace

std::string Report::to_json(bool timings) const {
  nlohmann::ordered_json j;
  j["tool"] = "kisinlab";
  j["version"] = kToolVersion;
  j["title"] = title;
  j["seed"] = seed;
  j["context"] = context;
  j["overall"] = to_string(overall());
  j["claims"] = nlohmann::ordered_json::array();
  for (const auto &c : sorted(claims)) {
    nlohmann::ordered_json e;
    e["claim"] = c.name;
    e["tag"] = c.tag;
    e["verdict"] = to_string(c.verdict);
    e["witness"] = c.witness;
    e["precision"] = {{"N", c.prec_N}, {"M", c.prec_M}};
    if (timings)
      e["seconds"] = c.seconds;
    j["claims"].push_back(e);
  }
  return j.dump(2) + "\n";
}

std::string Report::to_text(bool timings) const {
  std::ostringstream os;
  os << "kisinlab " << kToolVersion << "  " << title << "\n";
  os << "seed " << seed << "  context " << context << "\n";
  for (const auto &c : sorted(claims)) {
    os << std::left << std::setw(14) << ("[" + to_string(c.verdict) + "]") << c.name << "  (N=" << c.prec_N
       << ", M=" << c.prec_M << ")";
    if (timings)
      os << "  " << std::fixed << std::setprecision(3) << c.seconds << "s";
    os << "\n";
    if (!c.tag.empty())
      os << "    expected by: " << c.tag << "\n";
    if (!c.witness.empty())
      os << "    witness: " << c.witness << "\n";
  }
  os << "overall " << to_string(overall()) << "\n";
  return os.str();
}

int exit_code(Verdict v) {
  switch (v) {
  case Verdict::Pass:
    return 0;
  case Verdict::Fail:
    return 1;
  case Verdict::Indeterminate:
    return 2;
  }
  return 2;
}

} // namespace kl
