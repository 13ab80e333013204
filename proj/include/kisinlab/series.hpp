#pragma once

#include "kisinlab/linalg.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace kl {

// E(u) = u^e + a_{e-1} u^{e-1} + ... + a_0, coefficients little-endian.
struct EisensteinPoly {
  std::vector<Word> coeffs;
  [[nodiscard]] unsigned degree() const { return static_cast<unsigned>(coeffs.size()) - 1; }
  bool operator==(const EisensteinPoly &) const = default;
};

class RingContext;
using Ctx = std::shared_ptr<const RingContext>;

// Z_p[[u]] and S modulo (p^N, u^M). Holds the factorial tables every
// divided-power computation needs, plus memoized Fil^i S spans.
class RingContext {
public:
  // Throws std::invalid_argument on a non-prime p, a non-Eisenstein E or
  // a modulus that does not fit a machine word.
  static Ctx make(unsigned p, unsigned N, unsigned M, const std::vector<long long> &E);

  unsigned p, N, M, e;
  EisensteinPoly E;

  [[nodiscard]] ChainContext chain() const { return {p, N}; }
  [[nodiscard]] const Residues<Word> &R() const { return R_; }
  // floor(n/e)! mod p^N for n < M (may be zero)
  [[nodiscard]] Word dp_factorial(unsigned n) const { return dpfact_[n]; }
  // kappa(a,b) = floor((a+b)/e)! / (floor(a/e)! floor(b/e)!) mod p^N, a+b < M
  [[nodiscard]] Word kappa(unsigned a, unsigned b) const { return kappa_[a * M + b]; }
  // phi(b_n) = frob_weight(n) * b_{pn} for p n < M
  [[nodiscard]] Word frob_weight(unsigned n) const { return frobw_[n]; }
  [[nodiscard]] Word c0() const { return c0_; }
  [[nodiscard]] Word c0_inv() const { return c0inv_; }
  // Least degree whose Frobenius image leaves the truncation window.
  [[nodiscard]] unsigned frobenius_bound() const { return (M + p - 1) / p; }

  [[nodiscard]] bool same(const RingContext &o) const {
    return p == o.p && N == o.N && M == o.M && E == o.E;
  }

  // Flattened Z/p^n-span of Fil^i S inside S (basis b_0..b_{M-1}), n <= N.
  [[nodiscard]] const HowellForm &fil_span(unsigned i, unsigned n) const;

  RingContext(unsigned p, unsigned N, unsigned M, EisensteinPoly E, long long a0_lift);

private:
  Residues<Word> R_;
  std::vector<Word> dpfact_, kappa_, frobw_;
  Word c0_ = 0, c0inv_ = 0;
  mutable std::mutex mu_;
  mutable std::map<std::pair<unsigned, unsigned>, std::shared_ptr<const HowellForm>> fil_cache_;
};

void require_same(const Ctx &a, const Ctx &b, const char *what);

// Element of Z_p[[u]] / (p^prec, u^M); prec <= N is the precision actually known.
struct SigmaElem {
  Ctx ctx;
  std::vector<Word> c;
  unsigned prec = 0;

  bool operator==(const SigmaElem &o) const { return ctx->same(*o.ctx) && prec == o.prec && c == o.c; }
  [[nodiscard]] bool is_zero() const;
  // Highest index with a nonzero coefficient, or -1.
  [[nodiscard]] int degree() const;
};

// Element of S in the basis b_n = u^n / floor(n/e)!.
struct SElem {
  Ctx ctx;
  std::vector<Word> c;
  unsigned prec = 0;

  bool operator==(const SElem &o) const { return ctx->same(*o.ctx) && prec == o.prec && c == o.c; }
  [[nodiscard]] bool is_zero() const;
  [[nodiscard]] int degree() const;
};

SigmaElem sigma_zero(const Ctx &ctx);
SigmaElem sigma_const(const Ctx &ctx, long long x);
SigmaElem sigma_monomial(const Ctx &ctx, long long coeff, unsigned n);
SigmaElem sigma_from(const Ctx &ctx, const std::vector<long long> &coeffs);
SigmaElem sigma_E(const Ctx &ctx);
SigmaElem with_precision(SigmaElem a, unsigned prec);

SigmaElem operator+(const SigmaElem &a, const SigmaElem &b);
SigmaElem operator-(const SigmaElem &a, const SigmaElem &b);
SigmaElem operator-(const SigmaElem &a);
SigmaElem operator*(const SigmaElem &a, const SigmaElem &b);
SigmaElem scale(const SigmaElem &a, Word k);
SigmaElem sigma_mul(const SigmaElem &a, const SigmaElem &b);
SigmaElem sigma_pow(const SigmaElem &a, unsigned k);
bool is_unit(const SigmaElem &a);
SigmaElem sigma_inverse(const SigmaElem &a);

SElem s_zero(const Ctx &ctx);
SElem s_const(const Ctx &ctx, long long x);
SElem s_basis(const Ctx &ctx, unsigned n, long long coeff = 1);
SElem s_from(const Ctx &ctx, const std::vector<long long> &coeffs);
SElem with_precision(SElem a, unsigned prec);

SElem operator+(const SElem &a, const SElem &b);
SElem operator-(const SElem &a, const SElem &b);
SElem operator-(const SElem &a);
SElem operator*(const SElem &a, const SElem &b);
SElem scale(const SElem &a, Word k);
SElem s_mul(const SElem &a, const SElem &b);
bool is_unit(const SElem &a);
SElem s_inverse(const SElem &a);

SElem embed_sigma(const SigmaElem &a);

// u -> u^p. Throws InsufficientPrecision when the support reaches degree >= M/p.
SigmaElem frobenius_sigma(const SigmaElem &a);
SElem frobenius_s(const SElem &a);
// Same maps on the quotient ring, dropping terms pushed past u^M. The
// ideal (u^M) is carried into (u^{pM}), so this is well defined; callers
// that reason about untruncated inputs should use the guarded versions.
SigmaElem frobenius_sigma_truncated(const SigmaElem &a);
SElem frobenius_s_truncated(const SElem &a);

struct FilSGenerators {
  unsigned level = 0;
  unsigned j_max = 0;
  std::vector<SElem> gens; // gamma_level(E) .. gamma_jmax(E)
};

// gamma_j(E) = E^j / j!, computed exactly over the integers.
SElem divided_power_E(const Ctx &ctx, unsigned j);
FilSGenerators fil_s(const Ctx &ctx, unsigned i);
bool in_fil(const SElem &a, unsigned i);

// phi(a) / p^i for a in Fil^i S, i <= p-1; precision drops by i.
SElem phi_div(const SElem &a, unsigned i);
SElem phi_div_truncated(const SElem &a, unsigned i);

SElem derivation_n(const SElem &a);
SigmaElem derivation_n_sigma(const SigmaElem &a);

SElem c1(const Ctx &ctx);

// Rows are the coordinates of basis_n * a: multiplication as a right action
// on row vectors.
ChainMatrix mult_matrix(const SigmaElem &a);
ChainMatrix mult_matrix(const SElem &a);

std::vector<Word> coords(const SElem &a);
SElem s_from_coords(const Ctx &ctx, const std::vector<Word> &v, unsigned prec);

// E-adic tools on polynomials over Z/p^N (entries of degree < M).
struct EDivision {
  SigmaElem quotient;
  SigmaElem remainder;
};
EDivision divide_by_E_power(const SigmaElem &a, unsigned k);
// Largest k <= depth with E^k | a at the working precision; depth + 1 when
// even E^depth divides a (unresolved).
unsigned e_adic_valuation(const SigmaElem &a, unsigned depth);

std::string render(const SigmaElem &a);
std::string render(const SElem &a);

} // namespace kl
