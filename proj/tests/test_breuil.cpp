#include "doctest.h"

#include "kisinlab/breuil.hpp"

#include <random>

using namespace kl;

namespace {

Ctx ctx3() { return RingContext::make(3, 4, 18, {3, 0, 1}); }
Ctx ctx3b() { return RingContext::make(3, 4, 18, {6, 3, 1}); }
Ctx ctx5() { return RingContext::make(5, 4, 20, {5, 0, 1}); }

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

std::vector<KisinMorphism> counterexample_seq(const Ctx &c) {
  KisinMorphism a{bk_twist(c, -1), module_m(c), mat(c, 2, 1, {poly(c, {0, -1}), sigma_const(c, 3)})};
  KisinMorphism b{module_m(c), unit_module(c), mat(c, 1, 2, {sigma_const(c, 3), poly(c, {0, 1})})};
  return {a, b};
}

bool all_pass(const std::vector<Claim> &cs) { return overall(cs) == Verdict::Pass; }

Verdict verdict(const std::vector<Claim> &cs, const std::string &name) {
  for (const auto &c : cs)
    if (c.name == name)
      return c.verdict;
  FAIL("missing claim " << name);
  return Verdict::Indeterminate;
}

SElem at(const SElem &a, unsigned prec) { return with_precision(a, prec); }

std::vector<Word> pair_vector(const Ctx &, const SElem &x, const SElem &y) {
  std::vector<Word> v = coords(x);
  auto w = coords(y);
  v.insert(v.end(), w.begin(), w.end());
  return v;
}

} // namespace

TEST_CASE("unit objects") {
  auto c = ctx3();
  auto one = unit_object(c, 1);
  CHECK(one.rank() == 1);
  CHECK(one.fil == c->fil_span(1, c->N));
  CHECK(all_pass(check_sdm_axioms(one)));
  // phi_1(E) = c1
  auto e = embed_sigma(sigma_E(c));
  SMatrix col(c, 1, 1);
  col(0, 0) = e;
  CHECK(phi_r(one, flat(col))(0, 0) == at(c1(c), c->N - 1));
  CHECK_THROWS_AS(phi_r(one, flat(SMatrix::identity(c, 1))), MembershipFailure);

  auto zero = unit_object(c, 0);
  CHECK(zero.fil.log_size() == c->M * c->N);
  CHECK(all_pass(check_sdm_axioms(zero)));
}

TEST_CASE("twists as Breuil modules") {
  for (auto c : {ctx3(), ctx3b()}) {
    auto t = from_kisin(bk_twist(c, -1), 1);
    // Fil is everything and phi_1(1) = c0^{-1} c1
    CHECK(t.fil.log_size() == c->M * c->N);
    auto v = phi_r(t, flat(SMatrix::identity(c, 1)))(0, 0);
    CHECK(v == at(scale(c1(c), c->c0_inv()), c->N - 1));
    CHECK(all_pass(check_sdm_axioms(t)));

    auto s = from_kisin(unit_module(c), 1);
    CHECK(s.fil == fil_s_times_module(c, 1, 1));
  }
  CHECK_THROWS_AS(from_kisin(bk_twist(ctx3(), -1), 0), HeightViolation);
  CHECK_THROWS(from_kisin(bk_twist(ctx3(), -2), 2));
}

TEST_CASE("axioms on the counterexample module and a mutation") {
  auto c = ctx3();
  auto m = from_kisin(module_m(c), 1);
  auto claims = check_sdm_axioms(m);
  for (const auto &cl : claims)
    CHECK_MESSAGE(cl.verdict == Verdict::Pass, cl.name << ": " << cl.witness);
  CHECK(m.fil_generators.size() >= 1);
  CHECK(m.phi_r_values.size() == m.fil_generators.size());

  auto bad = m;
  bad.fil = scale(m.fil, Word{3});
  auto bc = check_sdm_axioms(bad);
  CHECK(verdict(bc, "p-saturated") == Verdict::Fail);
  CHECK(verdict(bc, "fil-contains-fil-s-module") == Verdict::Fail);
}

TEST_CASE("generation check agrees with the full span") {
  std::mt19937_64 rng(7);
  auto c = ctx3();
  for (int trial = 0; trial < 4; ++trial) {
    auto k = random_kisin(c, 2, 1, rng);
    auto b = from_kisin(k, 1);
    std::vector<SMatrix> imgs;
    for (std::size_t i = 0; i < b.fil.matrix.rows(); ++i)
      imgs.push_back(phi_r(b, b.fil.matrix.row(i)));
    std::vector<std::size_t> all(2 * c->M);
    for (std::size_t i = 0; i < all.size(); ++i)
      all[i] = i;
    const unsigned prec = c->N - 1;
    auto span = project(s_span(c, imgs), prec, all);
    auto full = project(full_span<Word>(c->chain(), 2 * c->M), prec, all);
    CHECK(span == full);
    CHECK(verdict(check_sdm_axioms(b), "phi-r-generates") == Verdict::Pass);
  }
  // a non-generating phi: scale the Frobenius by p
  auto b = unit_object(c, 1);
  b.frob = b.frob.map([](const SElem &a) { return scale(a, 3); });
  CHECK(verdict(check_sdm_axioms(b), "phi-r-generates") == Verdict::Fail);
}

TEST_CASE("monodromy") {
  auto c = ctx3();
  auto one = unit_object(c, 1);
  one.monodromy = SMatrix(c, 1, 1);
  CHECK(all_pass(check_monodromy(one)));

  // N(1) = 1 is not crystalline
  auto bad = one;
  bad.monodromy = SMatrix::identity(c, 1);
  CHECK(verdict(check_monodromy(bad), "monodromy-crystalline") == Verdict::Fail);

  SMatrix x(c, 1, 1);
  x(0, 0) = s_basis(c, 4);
  CHECK(apply_monodromy(one, x)(0, 0) == s_basis(c, 4, -4));

  auto m = from_kisin(module_m(c), 1);
  m.monodromy = SMatrix(c, 2, 2);
  auto claims = check_monodromy(m);
  CHECK(verdict(claims, "monodromy-leibniz") == Verdict::Pass);
  CHECK(verdict(claims, "monodromy-crystalline") == Verdict::Pass);
  CHECK_THROWS(check_monodromy(from_kisin(module_m(c), 1)));
}

TEST_CASE("the counterexample sequence is not exact after base change") {
  auto c = ctx3();
  auto seq = from_kisin(counterexample_seq(c), 1);
  auto rep = check_exact_breuil(seq);
  CHECK(rep.underlying.head_injective);
  CHECK(rep.underlying.composite_zero[0]);
  CHECK_FALSE(rep.underlying.ker_eq_im[0]);
  CHECK_FALSE(rep.underlying.tail_surjective);
  CHECK_FALSE(rep.pass());

  // middle cohomology: (-u^6/p, u^3) is a cycle but not a boundary
  auto cyc = pair_vector(c, s_basis(c, 6, -2), s_basis(c, 3));
  SMatrix col = s_column(c, cyc, c->N);
  CHECK((seq[1].matrix * col).is_zero());
  auto im = howell(flatten_map(seq[0].matrix));
  CHECK_FALSE(membership(cyc, im));
}

TEST_CASE("base change of a short exact sequence") {
  std::mt19937_64 rng(11);
  auto c = ctx3();
  auto u = unit_module(c);
  auto t = bk_twist(c, -1);
  for (int trial = 0; trial < 3; ++trial) {
    auto P = random_unimodular(c, 2, rng, 1);
    auto ses = extension(t, u, SigmaMatrix(c, 1, 1), P);
    auto seq = from_kisin(std::vector<KisinMorphism>{ses.inclusion, ses.projection}, 1);
    auto rep = check_exact_breuil(seq);
    CHECK(rep.underlying.exact());
    CHECK(rep.fil.exact());
    for (const auto &d : rep.diagnostics)
      MESSAGE(d);
  }
}

TEST_CASE("tensor products") {
  auto c = ctx3();
  TensorProbe probe;
  auto t = tensor_breuil(unit_object(c, 0), unit_object(c, 1), &probe);
  CHECK(t == unit_object(c, 1));
  CHECK(probe.contains_products);

  auto c5 = ctx5();
  auto a = from_kisin(bk_twist(c5, -1), 1);
  auto tt = tensor_breuil(a, a, &probe);
  CHECK(tt == from_kisin(bk_twist(c5, -2), 2));
  CHECK(probe.contains_products);

  auto m = from_kisin(module_m(c5), 1);
  auto mm = tensor_breuil(m, a, &probe);
  CHECK(mm.rank() == 2);
  CHECK(probe.contains_products);
  CHECK(all_pass(check_sdm_axioms(mm)));

  auto bare = a;
  bare.provenance.reset();
  CHECK_THROWS_AS(tensor_breuil(bare, a), MissingProvenance);
  CHECK_THROWS(tensor_breuil(from_kisin(bk_twist(c, -1), 1), from_kisin(bk_twist(c, -1), 1)));
}

TEST_CASE("splicing two short exact sequences") {
  auto c = ctx3();
  auto u = unit_module(c);
  auto t = bk_twist(c, -1);
  auto s1 = extension(t, u, SigmaMatrix(c, 1, 1));
  auto s2 = extension(u, t, SigmaMatrix(c, 1, 1));
  auto first = from_kisin(std::vector<KisinMorphism>{s1.inclusion, s1.projection}, 1);
  auto second = from_kisin(std::vector<KisinMorphism>{s2.inclusion, s2.projection}, 1);
  auto four = splice(first, second);
  REQUIRE(four.size() == 3);
  auto rep = check_exact_complex(four);
  CHECK(rep.pass());
  CHECK(rep.z_log_sizes.size() == 2);
  CHECK_THROWS_AS(splice(second, second), NotComposable);
}

TEST_CASE("Tor_1 against S") {
  auto c = ctx3();
  const long long p = 3;
  // Koszul resolution of S/(p, u^p): S --(-u^p, p)--> S^2 --(p, u^p)--> S
  auto up = sigma_monomial(c, 1, 3);
  auto d1 = mat(c, 1, 2, {sigma_const(c, p), up});
  auto d2 = mat(c, 2, 1, {-up, sigma_const(c, p)});
  auto tor = tor1_with_s({d1, d2});
  CHECK(tor.module.log_cardinality() > 0);
  CHECK(tor.contains_class(pair_vector(c, s_basis(c, 6, -2), s_basis(c, 3))));
  // boundaries are not classes
  auto bnd = pair_vector(c, embed_sigma(-up), s_const(c, 3));
  CHECK_FALSE(tor.contains_class(bnd));

  // S/(p, u): witness (-b_{ep}, b_{ep-1})
  auto u1 = sigma_monomial(c, 1, 1);
  auto tor2 = tor1_with_s({mat(c, 1, 2, {sigma_const(c, p), u1}), mat(c, 2, 1, {-u1, sigma_const(c, p)})});
  CHECK(tor2.contains_class(pair_vector(c, s_basis(c, 6, -1), s_basis(c, 5))));

  CHECK_THROWS(tor1_with_s({d1, mat(c, 2, 1, {up, sigma_const(c, p)})}));
}
