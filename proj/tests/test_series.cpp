#include "doctest.h"

#include "kisinlab/series.hpp"
#include "rational_oracle.hpp"

#include <random>

using namespace kl;

namespace {

Ctx ctx3() { return RingContext::make(3, 4, 30, {3, 0, 1}); }

SigmaElem random_sigma(std::mt19937_64 &rng, const Ctx &c, unsigned maxdeg) {
  auto a = sigma_zero(c);
  for (unsigned n = 0; n <= maxdeg && n < c->M; ++n)
    a.c[n] = rng() % c->R().m;
  return a;
}

SElem random_s(std::mt19937_64 &rng, const Ctx &c, unsigned maxdeg) {
  auto a = s_zero(c);
  for (unsigned n = 0; n <= maxdeg && n < c->M; ++n)
    a.c[n] = rng() % c->R().m;
  return a;
}

std::vector<Ctx> contexts() {
  return {RingContext::make(3, 4, 30, {3, 0, 1}), RingContext::make(5, 3, 40, {5, 0, 0, 0, 1}),
          RingContext::make(3, 3, 24, {6, 3, 1}), RingContext::make(5, 4, 30, {10, 1}),
          RingContext::make(7, 3, 28, {7, 0, 1})};
}

} // namespace

TEST_CASE("context validation") {
  CHECK_THROWS_AS(RingContext::make(4, 2, 10, {2, 1}), std::invalid_argument);
  CHECK_THROWS_AS(RingContext::make(3, 2, 10, {9, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(RingContext::make(3, 2, 10, {3, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(RingContext::make(3, 2, 10, {3, 0, 2}), std::invalid_argument);
  auto c = ctx3();
  CHECK(c->e == 2);
  CHECK(c->c0() == 1);
  auto c2 = RingContext::make(3, 4, 30, {-3, 0, 1});
  CHECK(c2->R().mul(c2->c0(), 3) == c2->E.coeffs[0]);
}

TEST_CASE("sigma_mul frozen cases") {
  auto c = RingContext::make(3, 2, 8, {3, 0, 1});
  auto a = sigma_from(c, {1, 3});
  CHECK(a * sigma_const(c, 1) == a);
  CHECK(sigma_monomial(c, 1, 1) * sigma_monomial(c, 1, 1) == sigma_monomial(c, 1, 2));
  CHECK(a * a == sigma_from(c, {1, 6}));
}

TEST_CASE("s_mul structure constants, e = 2") {
  auto c = ctx3();
  CHECK(s_basis(c, 2) * s_basis(c, 3) == s_basis(c, 5, 2));
  CHECK(s_basis(c, 2) * s_basis(c, 2) == s_basis(c, 4, 2));
  auto x = s_from(c, {4, 0, 7, 1});
  CHECK(x * s_const(c, 1) == x);
  CHECK(c->kappa(2, 3) == 2);
}

TEST_CASE("s_mul agrees with rational power series") {
  std::mt19937_64 rng(11);
  for (const auto &c : contexts()) {
    for (int t = 0; t < 20; ++t) {
      auto a = random_s(rng, c, c->M - 1), b = random_s(rng, c, c->M - 1);
      auto prod = oracle::mul(oracle::from_s(a), oracle::from_s(b));
      CHECK((a * b).c == oracle::to_s_coords(prod, *c, c->N));
    }
  }
}

TEST_CASE("embed_sigma") {
  auto c = ctx3();
  CHECK(embed_sigma(sigma_const(c, 1)) == s_const(c, 1));
  CHECK(embed_sigma(sigma_monomial(c, 1, 2)) == s_basis(c, 2, 1));
  CHECK(embed_sigma(sigma_monomial(c, 1, 4)) == s_basis(c, 4, 2));
  auto c1ctx = RingContext::make(3, 1, 10, {3, 0, 1});
  CHECK(embed_sigma(sigma_monomial(c1ctx, 1, 6)).is_zero());
  std::mt19937_64 rng(5);
  for (const auto &k : contexts())
    for (int t = 0; t < 20; ++t) {
      auto a = random_sigma(rng, k, k->M - 1), b = random_sigma(rng, k, k->M - 1);
      CHECK(embed_sigma(a * b) == embed_sigma(a) * embed_sigma(b));
    }
}

TEST_CASE("frobenius frozen cases and guard") {
  auto c = ctx3();
  CHECK(frobenius_sigma(sigma_const(c, 1)) == sigma_const(c, 1));
  CHECK(frobenius_sigma(sigma_from(c, {1, 1})) == sigma_from(c, {1, 0, 0, 1}));
  CHECK(frobenius_sigma(sigma_E(c)) == sigma_from(c, {3, 0, 0, 0, 0, 0, 1}));
  CHECK_THROWS_AS(frobenius_sigma(sigma_monomial(c, 1, 10)), InsufficientPrecision);
  CHECK_NOTHROW(frobenius_sigma(sigma_monomial(c, 1, 9)));
  CHECK_THROWS_AS(frobenius_s(s_basis(c, 10)), InsufficientPrecision);
}

TEST_CASE("frobenius_s agrees with the rational model") {
  std::mt19937_64 rng(8);
  for (const auto &c : contexts())
    for (int t = 0; t < 10; ++t) {
      auto a = random_s(rng, c, (c->M - 1) / c->p);
      auto img = oracle::frobenius(oracle::from_s(a), c->p);
      CHECK(frobenius_s(a).c == oracle::to_s_coords(img, *c, c->N));
    }
}

TEST_CASE("frobenius is a ring homomorphism within the guard") {
  std::mt19937_64 rng(21);
  for (const auto &c : contexts()) {
    unsigned half = (c->frobenius_bound() - 1) / 2;
    for (int t = 0; t < 20; ++t) {
      auto a = random_s(rng, c, half), b = random_s(rng, c, half);
      CHECK(frobenius_s(a * b) == frobenius_s(a) * frobenius_s(b));
      auto x = random_sigma(rng, c, half), y = random_sigma(rng, c, half);
      CHECK(frobenius_sigma(x * y) == frobenius_sigma(x) * frobenius_sigma(y));
    }
  }
}

TEST_CASE("gamma_j(E) matches the rational model") {
  for (const auto &c : contexts())
    for (unsigned j = 0; j < 12; ++j)
      CHECK(divided_power_E(c, j).c == oracle::to_s_coords(oracle::gamma(*c, j), *c, c->N));
}

TEST_CASE("Fil^i S generators") {
  auto c = ctx3();
  auto f0 = fil_s(c, 0);
  REQUIRE(f0.gens.size() == 1);
  CHECK(f0.gens[0] == s_const(c, 1));
  CHECK(in_fil(embed_sigma(sigma_E(c)), 1));
  auto big = RingContext::make(3, 3, 30, {3, 0, 1});
  CHECK_FALSE(in_fil(s_const(big, 3), 1));
  CHECK(in_fil(s_const(big, 3) * embed_sigma(sigma_E(big)), 1));
  auto f = fil_s(big, 1);
  CHECK(f.j_max >= 1);
  for (unsigned j = f.j_max + 1; j < f.j_max + 8; ++j)
    CHECK(divided_power_E(big, j).is_zero());
}

TEST_CASE("phi_div and c1") {
  auto c = RingContext::make(3, 4, 30, {3, 0, 1});
  auto e = embed_sigma(sigma_E(c));
  auto k1 = c1(c);
  CHECK(k1.prec == 3);
  CHECK(k1 == with_precision(s_from(c, {1, 0, 0, 0, 0, 0, 2}), 3));
  auto x = s_from(c, {2, 1, 0, 5});
  CHECK(phi_div(x, 0) == frobenius_s(x));
  CHECK_THROWS_AS(phi_div(s_const(c, 1), 1), MembershipFailure);
  // the unit c0 appears as the constant term of c1
  for (const auto &k : contexts())
    CHECK(c1(k).c[0] % k->p == k->c0() % k->p);
  // oracle: phi(E)/p from rationals
  auto img = oracle::frobenius(oracle::from_s(e), 3);
  for (auto &q : img)
    q /= 3;
  CHECK(k1.c == oracle::to_s_coords(img, *c, 3));
}

TEST_CASE("derivation N") {
  auto c = ctx3();
  CHECK(derivation_n(s_const(c, 1)).is_zero());
  CHECK(derivation_n(s_basis(c, 1)) == s_basis(c, 1, -1));
  CHECK(derivation_n_sigma(sigma_monomial(c, 1, 1)) == sigma_monomial(c, -1, 1));
  std::mt19937_64 rng(3);
  for (const auto &k : contexts())
    for (int t = 0; t < 20; ++t) {
      auto a = random_s(rng, k, k->M - 1), b = random_s(rng, k, k->M - 1);
      CHECK(derivation_n(a * b) == derivation_n(a) * b + a * derivation_n(b));
    }
}

TEST_CASE("N phi = p phi N") {
  std::mt19937_64 rng(13);
  for (const auto &c : contexts())
    for (int t = 0; t < 20; ++t) {
      auto f = random_sigma(rng, c, c->frobenius_bound() - 1);
      CHECK(derivation_n_sigma(frobenius_sigma(f)) == scale(frobenius_sigma(derivation_n_sigma(f)), c->p));
      auto s = random_s(rng, c, c->frobenius_bound() - 1);
      CHECK(derivation_n(frobenius_s(s)) == scale(frobenius_s(derivation_n(s)), c->p));
    }
}

TEST_CASE("N(Fil^i S) lies in Fil^{i-1} S") {
  for (const auto &c : contexts())
    for (unsigned i = 1; i <= c->p - 1 && i <= 3; ++i)
      for (const auto &g : fil_s(c, i).gens)
        CHECK(in_fil(derivation_n(g), i - 1));
}

TEST_CASE("ring axioms in S") {
  std::mt19937_64 rng(77);
  for (const auto &c : contexts())
    for (int t = 0; t < 20; ++t) {
      auto a = random_s(rng, c, c->M - 1), b = random_s(rng, c, c->M - 1), d = random_s(rng, c, c->M - 1);
      CHECK((a * b) * d == a * (b * d));
      CHECK(a * (b + d) == a * b + a * d);
      CHECK(a * b == b * a);
    }
}

TEST_CASE("inverses") {
  std::mt19937_64 rng(31);
  for (const auto &c : contexts()) {
    auto a = random_sigma(rng, c, c->M - 1);
    a.c[0] = 1;
    CHECK(a * sigma_inverse(a) == sigma_const(c, 1));
    auto s = random_s(rng, c, c->M - 1);
    s.c[0] = 2;
    CHECK(s * s_inverse(s) == s_const(c, 1));
  }
}

TEST_CASE("flattened multiplication matrices") {
  auto c = ctx3();
  auto shift = mult_matrix(sigma_monomial(c, 1, 1));
  for (unsigned n = 0; n < c->M; ++n)
    for (unsigned m = 0; m < c->M; ++m)
      CHECK(shift(n, m) == (m == n + 1 ? 1u : 0u));
  auto su = mult_matrix(embed_sigma(sigma_monomial(c, 1, 1)));
  // b_n * u = (floor((n+1)/2)! / floor(n/2)!) b_{n+1}
  for (unsigned n = 0; n + 1 < c->M; ++n)
    CHECK(su(n, n + 1) == (n % 2 == 1 ? (n + 1) / 2 : 1u));
  auto me = mult_matrix(sigma_E(c));
  for (unsigned n = 0; n < c->M; ++n)
    for (unsigned m = 0; m < c->M; ++m)
      CHECK(me(n, m) == (m == n + 2 ? 1u : (m == n ? 3u : 0u)));
}

TEST_CASE("E-adic division and valuation") {
  auto c = ctx3();
  auto E = sigma_E(c);
  auto x = sigma_from(c, {1, 2, 0, 1});
  auto d = divide_by_E_power(E * E * x, 2);
  CHECK(d.quotient == x);
  CHECK(d.remainder.is_zero());
  CHECK(e_adic_valuation(E * E * x, 5) == 2);
  CHECK(e_adic_valuation(sigma_const(c, 3), 5) == 0);
}

TEST_CASE("rendering") {
  auto c = ctx3();
  CHECK(render(sigma_from(c, {3, 0, 1})) == "3 + 1*u^2");
  CHECK(render(sigma_from(c, {0, 2})) == "2*u");
  CHECK(render(s_from(c, {1, 0, 0, 0, 0, 0, 2})) == "1*b0 + 2*b6");
  CHECK(render(sigma_zero(c)) == "0");
}
