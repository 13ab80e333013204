#include "doctest.h"

#include "kisinlab/kisin.hpp"

#include <random>

using namespace kl;

namespace {

Ctx ctx3() { return RingContext::make(3, 6, 54, {3, 0, 1}); }
Ctx ctx5() { return RingContext::make(5, 6, 60, {5, 0, 0, 0, 1}); }

SigmaElem poly(const Ctx &c, std::vector<long long> v) { return sigma_from(c, v); }

SigmaMatrix mat(const Ctx &c, std::size_t r, std::size_t k, const std::vector<SigmaElem> &xs) {
  SigmaMatrix m(c, r, k);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < k; ++j)
      m(i, j) = xs[i * k + j];
  return m;
}

KisinModule module_m(const Ctx &c) {
  return make_kisin(c, mat(c, 2, 2, {sigma_const(c, 1), poly(c, {0, -1}), sigma_zero(c), sigma_E(c)}));
}

KisinMorphism alpha(const Ctx &c) { return {bk_twist(c, -1), module_m(c), mat(c, 2, 1, {poly(c, {0, -1}), sigma_const(c, 3)})}; }
KisinMorphism beta(const Ctx &c) { return {module_m(c), unit_module(c), mat(c, 1, 2, {sigma_const(c, 3), poly(c, {0, 1})})}; }

std::vector<unsigned> minkowski(const std::vector<unsigned> &a, const std::vector<unsigned> &b) {
  std::vector<unsigned> out;
  for (auto x : a)
    for (auto y : b)
      out.push_back(x + y);
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

TEST_CASE("make_kisin validates the determinant") {
  auto c = ctx3();
  CHECK_NOTHROW(make_kisin(c, SigmaMatrix::identity(c, 1)));
  CHECK_THROWS_AS(make_kisin(c, mat(c, 1, 1, {poly(c, {0, 1})})), DegenerateFrobenius);
  auto one = sigma_const(c, 1);
  CHECK_THROWS_AS(make_kisin(c, mat(c, 2, 2, {one, one, one, one})), DegenerateFrobenius);
  CHECK_THROWS_AS(make_kisin(c, SigmaMatrix(c, 2, 3)), DimensionMismatch);
  auto f = factor_det(module_m(c).frobenius);
  CHECK(f.h == 1);
  CHECK(f.unit == sigma_const(c, 1));
}

TEST_CASE("visible E-adic depth") {
  // u^54 = (E - 3)^27 vanishes modulo (3^6, E^D) exactly for D <= 24
  CHECK(visible_e_depth(ctx3()) == 24);
  // u^60 = (E - 5)^15 modulo (5^6, E^D): D <= 10
  CHECK(visible_e_depth(ctx5()) == 10);
}

TEST_CASE("twists and their Frobenius") {
  auto c = ctx3();
  auto t1 = bk_twist(c, -1);
  CHECK(t1.frobenius(0, 0) == sigma_E(c)); // c0 = 1 here
  auto c5 = RingContext::make(5, 4, 40, {10, 0, 1});
  CHECK(c5->c0() == 2);
  auto s = bk_twist(c5, -2);
  auto ce = sigma_const(c5, static_cast<long long>(c5->c0_inv())) * sigma_E(c5);
  CHECK(s.frobenius(0, 0) == ce * ce);
  CHECK(twist(module_m(c), 0) == module_m(c));
  CHECK(tensor(bk_twist(c5, -1), bk_twist(c5, -1)) == bk_twist(c5, -2));
  auto back = clear_denominators(twist(twist(module_m(c), -1), 1));
  CHECK(back == module_m(c));
}

TEST_CASE("height") {
  auto c = ctx3();
  CHECK(check_height(unit_module(c), 0).holds);
  CHECK(check_height(bk_twist(c, -1), 1).holds);
  CHECK_FALSE(check_height(bk_twist(c, -1), 0).holds);
  auto m = module_m(c);
  auto x = mat(c, 2, 2, {sigma_E(c), poly(c, {0, 1}), sigma_zero(c), sigma_const(c, 1)});
  CHECK(m.frobenius * x == scalar_mul(sigma_E(c), SigmaMatrix::identity(c, 2)));
  CHECK(check_height(m, 1).holds);
  auto h0 = check_height(m, 0);
  CHECK_FALSE(h0.holds);
  CHECK(h0.failing_basis == 1);
  CHECK(check_height(tensor(m, bk_twist(c, -1)), 2).holds);
  CHECK_THROWS_AS(check_height(bk_twist(c, 1), 1), std::invalid_argument);
}

TEST_CASE("extensions of height <= r modules") {
  auto c = ctx3();
  auto e = bk_twist(c, -1);
  // arbitrary off-block: [[E, 1], [0, E]] is not of height <= 1
  auto bad = extension(e, e, mat(c, 1, 1, {sigma_const(c, 1)}));
  CHECK_FALSE(check_height(bad.inclusion.target, 1).holds);
  CHECK(check_height(bad.inclusion.target, 2).holds);
  // off-blocks of the form A Y + Z C keep the bound
  std::mt19937_64 rng(3);
  auto c5 = ctx5();
  for (int t = 0; t < 10; ++t) {
    unsigned r = 1 + t % 2;
    auto a = random_kisin(c5, 1 + t % 2, r, rng), q = random_kisin(c5, 1, r, rng);
    auto y = random_sigma_matrix(c5, a.rank(), q.rank(), rng, 2);
    auto z = random_sigma_matrix(c5, a.rank(), q.rank(), rng, 2);
    auto ext = extension(a, q, a.frobenius * y + z * q.frobenius);
    CHECK(check_height(ext.inclusion.target, r).holds);
  }
}

TEST_CASE("Hodge-Tate weights") {
  auto c = ctx3();
  CHECK(hodge_tate_weights(unit_module(c)) == std::vector<unsigned>{0});
  CHECK(hodge_tate_weights(module_m(c)) == std::vector<unsigned>{0, 1});
  CHECK(hodge_tate_weights(module_m(c), 1) == std::vector<unsigned>{0, 1});
  auto c5 = ctx5();
  for (int r = 1; r <= 3; ++r)
    CHECK(hodge_tate_weights(bk_twist(c5, -r)) == std::vector<unsigned>{static_cast<unsigned>(r)});
  CHECK_THROWS_AS(hodge_tate_weights(bk_twist(c5, -11)), InsufficientPrecision);

  std::mt19937_64 rng(17);
  for (int t = 0; t < 12; ++t) {
    auto a = random_kisin(c5, 1 + t % 2, 1, rng), b = random_kisin(c5, 1 + (t / 2) % 2, 1, rng);
    auto wa = hodge_tate_weights(a), wb = hodge_tate_weights(b);
    auto wt = hodge_tate_weights(tensor(a, b));
    CHECK(wt == minkowski(wa, wb));
    unsigned sum = 0;
    for (auto w : wt)
      sum += w;
    CHECK(sum == factor_det(tensor(a, b).frobenius).h);
  }
}

TEST_CASE("dual and internal hom") {
  auto c = ctx3();
  CHECK(dual(unit_module(c)) == unit_module(c));
  auto d = dual(bk_twist(c, -1));
  CHECK(d.denom == 1);
  CHECK(d.frobenius(0, 0) == sigma_const(c, static_cast<long long>(c->c0())));
  CHECK(d == bk_twist(c, 1));
  auto ih = internal_hom(bk_twist(c, -1), bk_twist(c, -1));
  CHECK(clear_denominators(ih) == unit_module(c));

  auto c5 = ctx5();
  std::mt19937_64 rng(23);
  for (int t = 0; t < 20; ++t) {
    auto m = random_kisin(c5, 2, 1, rng);
    CHECK(clear_denominators(dual(dual(m))) == m);
  }
  for (unsigned r = 1; r <= 3; ++r)
    CHECK(clear_denominators(tensor(dual(bk_twist(c5, -int(r))), bk_twist(c5, -int(r)))) == unit_module(c5));
}

TEST_CASE("morphisms of the counterexample") {
  auto c = ctx3();
  CHECK(check_morphism(identity_morphism(module_m(c))).valid);
  CHECK(check_morphism(alpha(c)).valid);
  CHECK(check_morphism(beta(c)).valid);
  auto bad = beta(c);
  bad.matrix(0, 1) = poly(c, {0, 0, 1});
  auto res = check_morphism(bad);
  CHECK_FALSE(res.valid);
  CHECK(res.col == 1);
  CHECK_THROWS_AS(compose(alpha(c), beta(c)), NotComposable);
  CHECK((compose(beta(c), alpha(c)).matrix.is_zero()));

  auto cok = cokernel_presentation(beta(c));
  CHECK(cok.module.cardinality() == 3);
  CHECK(nilpotency_degree(cok.u_action, cok.module) == 1u);
  CHECK(nilpotency_degree(cok.p_action, cok.module) == 1u);

  auto k = kernel_module(beta(c));
  CHECK(k.phi_stable);
}

TEST_CASE("exact sequence checker") {
  auto c = ctx3();
  auto id = check_exact_sequence({identity_morphism(module_m(c))});
  CHECK(id.short_exact());

  auto rep = check_exact_sequence({alpha(c), beta(c)});
  CHECK(rep.left_exact());
  CHECK_FALSE(rep.tail_surjective);
  REQUIRE(rep.tail_ideal);
  CHECK(rep.tail_ideal->verdict == IdealVerdict::FailsHypothesis);
  CHECK(ideal_span(c, rep.tail_ideal->generators) == ideal_span(c, {sigma_const(c, 3), poly(c, {0, 1})}));

  // without the margin the truncation leaves junk in ker(alpha)
  auto raw = check_exact_sequence({alpha(c), beta(c)}, Margin{c->N, c->M});
  CHECK_FALSE(raw.head_injective);

  auto e = bk_twist(c, -1);
  auto ext = extension(e, e, mat(c, 1, 1, {sigma_const(c, 1)}));
  CHECK(check_morphism(ext.inclusion).valid);
  CHECK(check_morphism(ext.projection).valid);
  CHECK(check_exact_sequence({ext.inclusion, ext.projection}).short_exact());

  auto broken = ext;
  broken.projection.matrix(0, 1) = sigma_const(c, 3);
  broken.projection.target = e;
  CHECK_FALSE(check_exact_sequence({broken.inclusion, broken.projection}).short_exact());

  CHECK_THROWS_AS(check_exact_sequence({beta(c), alpha(c)}), NotComposable);
}

TEST_CASE("random short exact sequences") {
  auto c5 = ctx5();
  std::mt19937_64 rng(41);
  for (int t = 0; t < 6; ++t) {
    auto a = random_kisin(c5, 1, 1, rng), q = random_kisin(c5, 1, 1, rng);
    auto b = a.frobenius * random_sigma_matrix(c5, 1, 1, rng, 1);
    auto ses = extension(a, q, b, random_unimodular(c5, 2, rng, 1));
    CHECK(check_morphism(ses.inclusion).valid);
    CHECK(check_morphism(ses.projection).valid);
    auto rep = check_exact_sequence({ses.inclusion, ses.projection});
    CHECK(rep.short_exact());
    CHECK(cokernel_presentation(ses.projection).module.cardinality() == 1);
    auto mg = rep.margin;
    auto keep = kept_columns(c5, 2, mg.M);
    CHECK(project(kernel_module(ses.projection).span, mg.N, keep) == project(image_span(ses.inclusion), mg.N, keep));
  }
}

TEST_CASE("key lemma directed cases") {
  auto c = ctx3();
  auto w = key_lemma_check(c, {sigma_const(c, 9)});
  CHECK(w.verdict == IdealVerdict::PrincipalPPower);
  CHECK(w.n == 2);
  CHECK(key_lemma_check(c, {sigma_const(c, 1)}).n == 0);
  CHECK(key_lemma_check(c, {sigma_const(c, 3)}).n == 1);
  auto wu = key_lemma_check(c, {poly(c, {0, 1})});
  CHECK(wu.verdict == IdealVerdict::FailsHypothesis);
  CHECK(wu.failing == 0);
  auto wpu = key_lemma_check(c, {sigma_const(c, 3), poly(c, {0, 1})});
  CHECK(wpu.verdict == IdealVerdict::FailsHypothesis);
  CHECK(wpu.failing == 1);
  CHECK(key_lemma_check(c, {sigma_E(c)}).verdict == IdealVerdict::FailsHypothesis);
  CHECK_THROWS_AS(key_lemma_check(c, {sigma_monomial(c, 1, 18)}), InsufficientPrecision);
  // (p^2, p u): contains p^2 only up to u-multiples, so fails
  CHECK(key_lemma_check(c, {sigma_const(c, 9), poly(c, {0, 3})}).verdict == IdealVerdict::FailsHypothesis);
}

TEST_CASE("key lemma on closed random ideals") {
  auto c = RingContext::make(3, 3, 18, {3, 0, 1});
  std::mt19937_64 rng(99);
  int principal = 0;
  for (int t = 0; t < 40; ++t) {
    std::vector<SigmaElem> gens;
    for (int g = 0; g < 2; ++g) {
      auto x = sigma_zero(c);
      for (unsigned n = 0; n < 4; ++n)
        x.c[n] = rng() % c->R().m;
      x.c[0] = c->R().mul(x.c[0], c->R().ppow[rng() % 3]);
      gens.push_back(x);
    }
    auto j = phi_closure(c, ideal_span(c, gens));
    auto w = key_lemma_check_span(c, j);
    CHECK(w.verdict != IdealVerdict::FailsHypothesis);
    CHECK(w.verdict != IdealVerdict::NotPPower);
    if (w.verdict == IdealVerdict::PrincipalPPower) {
      ++principal;
      auto pn = p_power_ideal(c, w.n);
      CHECK(contains(j, pn));
      CHECK(contains(pn, j));
    }
  }
  CHECK(principal > 0);
}
