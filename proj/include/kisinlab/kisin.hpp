#pragma once

#include "kisinlab/matrix.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace kl {

// Free Kisin module of rank d. The Frobenius of the i-th basis vector is
// E^{-denom} times column i of `frobenius`.
struct KisinModule {
  Ctx ctx;
  SigmaMatrix frobenius;
  unsigned denom = 0;

  [[nodiscard]] std::size_t rank() const { return frobenius.rows(); }
  [[nodiscard]] bool effective() const { return denom == 0; }
  bool operator==(const KisinModule &o) const {
    return ctx->same(*o.ctx) && denom == o.denom && frobenius == o.frobenius;
  }
};

// det = unit * E^h.
struct DetFactorization {
  unsigned h = 0;
  SigmaElem unit;
};

// Largest D with u^M = 0 in (Z/p^N)[u]/(E^D): E-adic data up to depth D is
// unaffected by the u-adic truncation.
unsigned visible_e_depth(const Ctx &ctx);

DetFactorization factor_det(const SigmaMatrix &phi);

KisinModule make_kisin(const Ctx &ctx, const SigmaMatrix &frobenius, unsigned denom = 0);
KisinModule unit_module(const Ctx &ctx, std::size_t rank = 1);
// S{r}: rank 1, Frobenius (c0^{-1} E)^{-r} for r <= 0, c0^r E^{-r} for r > 0.
KisinModule bk_twist(const Ctx &ctx, int r);

struct HeightResult {
  bool holds = false;
  int failing_basis = -1; // first i with E^r e_i outside the span
};
HeightResult check_height(const KisinModule &m, unsigned r);

KisinModule tensor(const KisinModule &a, const KisinModule &b);
KisinModule dual(const KisinModule &m);
KisinModule internal_hom(const KisinModule &a, const KisinModule &b);
KisinModule twist(const KisinModule &m, int s);
// Divides the Frobenius by E while every entry allows it and denom > 0.
KisinModule clear_denominators(const KisinModule &m);

// Ascending. The E-adic depth is r*d + 1 for a claimed height r, else h + 1.
std::vector<unsigned> hodge_tate_weights(const KisinModule &m, std::optional<unsigned> height = std::nullopt);

// F is target.rank x source.rank; column j is the image of e_j.
struct KisinMorphism {
  KisinModule source, target;
  SigmaMatrix matrix;
};

struct MorphismCheck {
  bool valid = false;
  int row = -1, col = -1; // first failing entry
};
MorphismCheck check_morphism(const KisinMorphism &f);
KisinMorphism identity_morphism(const KisinModule &m);
// g after f.
KisinMorphism compose(const KisinMorphism &g, const KisinMorphism &f);
KisinMorphism tensor(const KisinMorphism &f, const KisinMorphism &g);

struct KernelSpan {
  HowellForm span; // flattened, inside source
  bool phi_stable = false;
};
KernelSpan kernel_module(const KisinMorphism &f);
HowellForm image_span(const KisinMorphism &f);

struct Cokernel {
  FPModule module;
  ChainMatrix p_action, u_action; // on the flattened target
};
Cokernel cokernel_presentation(const KisinMorphism &f);

// Ideals of truncated S.
HowellForm ideal_span(const Ctx &ctx, const std::vector<SigmaElem> &gens);
HowellForm p_power_ideal(const Ctx &ctx, unsigned n);

enum class IdealVerdict { PrincipalPPower, FailsHypothesis, NotPPower, Indeterminate };
std::string to_string(IdealVerdict v);

struct IdealWitness {
  std::vector<SigmaElem> generators;
  IdealVerdict verdict = IdealVerdict::Indeterminate;
  unsigned n = 0;      // exponent for PrincipalPPower
  int failing = -1;    // generator outside S phi(I) for FailsHypothesis
  std::string note;
};

IdealWitness key_lemma_check(const Ctx &ctx, const std::vector<SigmaElem> &gens);
// Same test for an ideal given as a flattened span, using the truncated
// Frobenius on its rows.
IdealWitness key_lemma_check_span(const Ctx &ctx, const HowellForm &ideal);
// Largest J inside `ideal` with J contained in S phi(J).
HowellForm phi_closure(const Ctx &ctx, HowellForm ideal);

// Kernels and images are compared after projecting to (N, M) = margin.
struct Margin {
  unsigned N = 0, M = 0;
  static Margin defaults(const Ctx &ctx);
};

struct Junction {
  bool composite_zero = false;
  bool ker_eq_im = false;
};

struct ExactSequenceReport {
  std::vector<Junction> junctions;
  bool head_injective = false;
  bool tail_surjective = false;
  std::optional<IdealWitness> tail_ideal; // rank-1 tails
  Margin margin;
  std::vector<std::string> diagnostics;

  [[nodiscard]] bool junctions_exact() const;
  [[nodiscard]] bool left_exact() const { return head_injective && junctions_exact(); }
  [[nodiscard]] bool short_exact() const { return left_exact() && tail_surjective; }
};

void require_composable(const std::vector<KisinMorphism> &seq);
ExactSequenceReport check_exact_sequence(const std::vector<KisinMorphism> &seq, std::optional<Margin> margin = {});

std::vector<std::size_t> kept_columns(const Ctx &ctx, std::size_t rank, unsigned m);

// Random data for property tests.
SigmaMatrix random_unimodular(const Ctx &ctx, std::size_t d, std::mt19937_64 &rng, unsigned degree = 2);
SigmaMatrix random_sigma_matrix(const Ctx &ctx, std::size_t r, std::size_t c, std::mt19937_64 &rng, unsigned degree);
// U diag(E^{t_i}) V with t_i <= r.
KisinModule random_kisin(const Ctx &ctx, std::size_t d, unsigned r, std::mt19937_64 &rng);

struct ShortExact {
  KisinMorphism inclusion, projection;
};
// Block upper triangular extension [[A, B], [0, C]] with sub A and quotient C,
// optionally conjugated by a random unimodular change of basis.
ShortExact extension(const KisinModule &sub, const KisinModule &quot, const SigmaMatrix &off_block,
                     const std::optional<SigmaMatrix> &base_change = {});

} // namespace kl
