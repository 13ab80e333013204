#pragma once

#include "kisinlab/kisin.hpp"
#include "kisinlab/report.hpp"

#include <optional>
#include <vector>

namespace kl {

// Free S-module of rank d with Fil^r stored as a flattened span. phi_r is
// x -> phi_{r,S}(frob * x) entrywise; for modules coming from a Kisin module
// frob is the embedded Frobenius matrix.
struct BreuilModule {
  Ctx ctx;
  unsigned r = 0;
  SMatrix frob;
  HowellForm fil;
  std::vector<SMatrix> fil_generators; // modulo Fil^r S * M
  std::vector<SMatrix> phi_r_values;   // precision N - r
  std::optional<SMatrix> monodromy;    // N(e_i) = column i
  std::optional<KisinModule> provenance;

  [[nodiscard]] std::size_t rank() const { return frob.rows(); }
  // Same weight, Fil span and phi_r data.
  bool operator==(const BreuilModule &o) const;
};

struct BreuilMorphism {
  BreuilModule source, target;
  SMatrix matrix;
};

// (Fil^r S)^d as a flattened span.
HowellForm fil_s_times_module(const Ctx &ctx, std::size_t d, unsigned r);
// Flattened S-span of the given columns.
HowellForm s_span(const Ctx &ctx, const std::vector<SMatrix> &columns);

BreuilModule from_kisin(const KisinModule &m, unsigned r);
// 1(r) = (S, Fil^r S, phi_r).
BreuilModule unit_object(const Ctx &ctx, unsigned r);
BreuilMorphism from_kisin(const KisinMorphism &f, const BreuilModule &source, const BreuilModule &target);
std::vector<BreuilMorphism> from_kisin(const std::vector<KisinMorphism> &seq, unsigned r);

// phi_r of a flattened vector of Fil; throws MembershipFailure outside Fil.
SMatrix phi_r(const BreuilModule &b, const std::vector<Word> &x);
SMatrix apply_monodromy(const BreuilModule &b, const SMatrix &x);

std::vector<Claim> check_sdm_axioms(const BreuilModule &b);
std::vector<Claim> check_monodromy(const BreuilModule &b);

struct LevelVerdicts {
  bool head_injective = false;
  std::vector<bool> composite_zero, ker_eq_im;
  bool tail_surjective = false;
  [[nodiscard]] bool exact() const;
};

struct ExactnessReport {
  LevelVerdicts underlying, fil;
  Margin margin;
  std::vector<std::string> diagnostics;
  std::vector<std::size_t> z_log_sizes; // intermediate objects Z^i
  [[nodiscard]] bool pass() const { return underlying.exact() && fil.exact(); }
};

void require_composable(const std::vector<BreuilMorphism> &seq);
ExactnessReport check_exact_breuil(const std::vector<BreuilMorphism> &seq, std::optional<Margin> margin = {});

// Exactness through intermediate objects Z^i = im f_i = ker f_{i+1},
// verified at the underlying and Fil levels.
ExactnessReport check_exact_complex(const std::vector<BreuilMorphism> &complex, std::optional<Margin> margin = {});

// Yoneda splice of 0 -> A -> X -> C -> 0 (first) and 0 -> C -> Y -> B -> 0 (second).
std::vector<BreuilMorphism> splice(const std::vector<BreuilMorphism> &first, const std::vector<BreuilMorphism> &second);

struct TensorProbe {
  bool contains_products = false; // Fil1 (x) Fil2 and Fil^{r1+r2} S M inside Fil
  bool equals_sum = false;        // recorded, not asserted
};
BreuilModule tensor_breuil(const BreuilModule &a, const BreuilModule &b, TensorProbe *probe = nullptr);

// Koszul-type resolution over truncated S: d_1, d_2, ... with d_i from
// rank n_i to rank n_{i-1}; columns are images.
struct Tor1 {
  FPModule module;
  HowellForm cycles, boundaries; // projected to the margin
  Margin margin;
  [[nodiscard]] bool contains_class(const std::vector<Word> &cycle) const;
};
Tor1 tor1_with_s(const std::vector<SigmaMatrix> &resolution, std::optional<Margin> margin = {});

} // namespace kl
