#include "kisinlab/series.hpp"

#include <algorithm>
#include <sstream>

namespace kl {

namespace {

bool is_prime(unsigned p) {
  if (p < 2)
    return false;
  for (unsigned d = 2; d * d <= p; ++d)
    if (p % d == 0)
      return false;
  return true;
}

unsigned vp_factorial(unsigned q, unsigned p) {
  unsigned v = 0;
  for (unsigned long long pk = p; pk <= q; pk *= p)
    v += static_cast<unsigned>(q / pk);
  return v;
}

// q! with every factor of p removed, mod p^N.
std::vector<Word> unit_factorials(const Residues<Word> &R, unsigned upto) {
  std::vector<Word> u(upto + 1, 1);
  for (unsigned q = 1; q <= upto; ++q) {
    Word f = q;
    while (f % R.ctx.p == 0)
      f /= R.ctx.p;
    u[q] = R.mul(u[q - 1], f % R.m);
  }
  return u;
}

Word ratio(const Residues<Word> &R, const std::vector<Word> &uf, unsigned top, unsigned a, unsigned b) {
  // top! / (a! b!) with top >= a + b
  const unsigned p = R.ctx.p;
  if (top < a + b)
    throw std::logic_error("divided-power structure constant is not integral");
  unsigned v = vp_factorial(top, p) - vp_factorial(a, p) - vp_factorial(b, p);
  if (v >= R.ctx.N)
    return 0;
  Word x = R.mul(uf[top], R.mul(R.inv_unit(uf[a]), R.inv_unit(uf[b])));
  return R.mul(x, R.ppow[v]);
}

unsigned top_nonzero(const std::vector<Word> &c) {
  for (std::size_t i = c.size(); i-- > 0;)
    if (c[i] != 0)
      return static_cast<unsigned>(i) + 1;
  return 0;
}

template <class E> E make_elem(const Ctx &ctx, unsigned prec) { return E{ctx, std::vector<Word>(ctx->M, 0), prec}; }

template <class E> E reduced(E a) {
  const Word m = a.ctx->R().ppow[a.prec];
  for (auto &x : a.c)
    x %= m;
  return a;
}

template <class E> E add_impl(const E &a, const E &b, bool subtract) {
  require_same(a.ctx, b.ctx, "ring elements from different contexts");
  const auto &R = a.ctx->R();
  E out = make_elem<E>(a.ctx, std::min(a.prec, b.prec));
  for (std::size_t i = 0; i < out.c.size(); ++i)
    out.c[i] = subtract ? R.sub(a.c[i], b.c[i]) : R.add(a.c[i], b.c[i]);
  return reduced(out);
}

template <class E> E neg_impl(const E &a) {
  const auto &R = a.ctx->R();
  E out = a;
  for (auto &x : out.c)
    x = R.neg(x);
  return reduced(out);
}

template <class E> E scale_impl(const E &a, Word k) {
  const auto &R = a.ctx->R();
  E out = a;
  for (auto &x : out.c)
    x = R.mul(x, k % R.m);
  return reduced(out);
}

std::vector<Word> coeffs_from(const Ctx &ctx, const std::vector<long long> &v) {
  if (v.size() > ctx->M)
    throw DimensionMismatch("more coefficients than the truncation order");
  std::vector<Word> c(ctx->M, 0);
  for (std::size_t i = 0; i < v.size(); ++i)
    c[i] = ctx->R().from_int(v[i]);
  return c;
}

// Plain polynomial power E^k, no truncation.
std::vector<Word> e_power_poly(const RingContext &ctx, unsigned k) {
  const auto &R = ctx.R();
  std::vector<Word> acc{1};
  for (unsigned t = 0; t < k; ++t) {
    std::vector<Word> nxt(acc.size() + ctx.e, 0);
    for (std::size_t i = 0; i < acc.size(); ++i)
      for (std::size_t j = 0; j <= ctx.e; ++j)
        nxt[i + j] = R.add(nxt[i + j], R.mul(acc[i], ctx.E.coeffs[j]));
    acc = std::move(nxt);
  }
  return acc;
}

} // namespace

RingContext::RingContext(unsigned p_, unsigned N_, unsigned M_, EisensteinPoly E_, long long a0_lift)
    : p(p_), N(N_), M(M_), e(E_.degree()), E(std::move(E_)), R_(ChainContext{p_, N_}) {
  auto uf = unit_factorials(R_, (M - 1) / e + 1);
  dpfact_.resize(M);
  for (unsigned n = 0; n < M; ++n)
    dpfact_[n] = ratio(R_, uf, n / e, 0, 0);
  kappa_.assign(static_cast<std::size_t>(M) * M, 0);
  for (unsigned a = 0; a < M; ++a)
    for (unsigned b = 0; a + b < M; ++b)
      kappa_[a * M + b] = ratio(R_, uf, (a + b) / e, a / e, b / e);
  frobw_.assign(M, 0);
  for (unsigned n = 0; n * p < M; ++n)
    frobw_[n] = ratio(R_, uf, (n * p) / e, n / e, 0);
  // With N = 1 the residue of E(0) is zero, so c0 comes from the supplied lift.
  if (N >= 2)
    c0_ = (E.coeffs[0] / p) % R_.m;
  else
    c0_ = static_cast<Word>(((a0_lift / static_cast<long long>(p)) % static_cast<long long>(p) + p) % p);
  c0inv_ = R_.inv_unit(c0_);
}

Ctx RingContext::make(unsigned p, unsigned N, unsigned M, const std::vector<long long> &Ecoef) {
  if (!is_prime(p))
    throw std::invalid_argument("p must be prime");
  if (N < 1 || M < 1)
    throw std::invalid_argument("N and M must be positive");
  ChainContext cc{p, N};
  if (!cc.fits_word())
    throw std::invalid_argument("p^N must fit a machine word for ring arithmetic");
  if (Ecoef.size() < 2)
    throw std::invalid_argument("E must have degree at least 1");
  if (Ecoef.back() != 1)
    throw std::invalid_argument("E must be monic");
  auto mod = [p](long long x) { return ((x % static_cast<long long>(p)) + p) % p; };
  for (std::size_t i = 0; i + 1 < Ecoef.size(); ++i)
    if (mod(Ecoef[i]) != 0)
      throw std::invalid_argument("E is not Eisenstein: coefficient a_" + std::to_string(i) + " is not divisible by p");
  if (Ecoef[0] == 0 || mod(Ecoef[0] / static_cast<long long>(p)) == 0)
    throw std::invalid_argument("E is not Eisenstein: v_p(a_0) != 1");
  if (Ecoef.size() - 1 >= M)
    throw std::invalid_argument("truncation order M must exceed deg E");
  Residues<Word> R(cc);
  EisensteinPoly E;
  for (auto x : Ecoef)
    E.coeffs.push_back(R.from_int(x));
  if (N >= 2 && R.val(E.coeffs[0]) != 1)
    throw std::invalid_argument("E is not Eisenstein: v_p(a_0) != 1");
  return std::make_shared<RingContext>(p, N, M, E, Ecoef[0]);
}

void require_same(const Ctx &a, const Ctx &b, const char *what) {
  if (a.get() != b.get() && !a->same(*b))
    throw ContextMismatch(what);
}

bool SigmaElem::is_zero() const {
  return std::all_of(c.begin(), c.end(), [](Word x) { return x == 0; });
}
int SigmaElem::degree() const { return static_cast<int>(top_nonzero(c)) - 1; }
bool SElem::is_zero() const {
  return std::all_of(c.begin(), c.end(), [](Word x) { return x == 0; });
}
int SElem::degree() const { return static_cast<int>(top_nonzero(c)) - 1; }

SigmaElem sigma_zero(const Ctx &ctx) { return make_elem<SigmaElem>(ctx, ctx->N); }
SigmaElem sigma_const(const Ctx &ctx, long long x) { return sigma_from(ctx, {x}); }
SigmaElem sigma_monomial(const Ctx &ctx, long long coeff, unsigned n) {
  auto a = sigma_zero(ctx);
  if (n < ctx->M)
    a.c[n] = ctx->R().from_int(coeff);
  return a;
}
SigmaElem sigma_from(const Ctx &ctx, const std::vector<long long> &coeffs) {
  return SigmaElem{ctx, coeffs_from(ctx, coeffs), ctx->N};
}
SigmaElem sigma_E(const Ctx &ctx) {
  auto a = sigma_zero(ctx);
  for (unsigned i = 0; i <= ctx->e; ++i)
    a.c[i] = ctx->E.coeffs[i];
  return a;
}
SigmaElem with_precision(SigmaElem a, unsigned prec) {
  a.prec = std::min(a.prec, prec);
  return reduced(a);
}

SigmaElem operator+(const SigmaElem &a, const SigmaElem &b) { return add_impl(a, b, false); }
SigmaElem operator-(const SigmaElem &a, const SigmaElem &b) { return add_impl(a, b, true); }
SigmaElem operator-(const SigmaElem &a) { return neg_impl(a); }
SigmaElem operator*(const SigmaElem &a, const SigmaElem &b) { return sigma_mul(a, b); }
SigmaElem scale(const SigmaElem &a, Word k) { return scale_impl(a, k); }

SigmaElem sigma_mul(const SigmaElem &a, const SigmaElem &b) {
  require_same(a.ctx, b.ctx, "ring elements from different contexts");
  const auto &R = a.ctx->R();
  const unsigned M = a.ctx->M;
  SigmaElem out = make_elem<SigmaElem>(a.ctx, std::min(a.prec, b.prec));
  const unsigned ta = top_nonzero(a.c), tb = top_nonzero(b.c);
  for (unsigned i = 0; i < ta; ++i) {
    if (a.c[i] == 0)
      continue;
    for (unsigned j = 0; j < tb && i + j < M; ++j)
      if (b.c[j] != 0)
        out.c[i + j] = R.add(out.c[i + j], R.mul(a.c[i], b.c[j]));
  }
  return reduced(out);
}

SigmaElem sigma_pow(const SigmaElem &a, unsigned k) {
  SigmaElem acc = sigma_const(a.ctx, 1);
  acc.prec = a.prec;
  for (unsigned i = 0; i < k; ++i)
    acc = acc * a;
  return reduced(acc);
}

bool is_unit(const SigmaElem &a) { return a.c[0] % a.ctx->p != 0; }

SigmaElem sigma_inverse(const SigmaElem &a) {
  if (!is_unit(a))
    throw std::domain_error("sigma_inverse: not a unit");
  const auto &R = a.ctx->R();
  const unsigned M = a.ctx->M;
  SigmaElem b = make_elem<SigmaElem>(a.ctx, a.prec);
  const Word inv0 = R.inv_unit(a.c[0]);
  b.c[0] = inv0;
  for (unsigned n = 1; n < M; ++n) {
    Word s = 0;
    for (unsigned k = 1; k <= n; ++k)
      if (a.c[k] != 0)
        s = R.add(s, R.mul(a.c[k], b.c[n - k]));
    b.c[n] = R.neg(R.mul(inv0, s));
  }
  return reduced(b);
}

SElem s_zero(const Ctx &ctx) { return make_elem<SElem>(ctx, ctx->N); }
SElem s_const(const Ctx &ctx, long long x) { return s_from(ctx, {x}); }
SElem s_basis(const Ctx &ctx, unsigned n, long long coeff) {
  auto a = s_zero(ctx);
  if (n < ctx->M)
    a.c[n] = ctx->R().from_int(coeff);
  return a;
}
SElem s_from(const Ctx &ctx, const std::vector<long long> &coeffs) {
  return SElem{ctx, coeffs_from(ctx, coeffs), ctx->N};
}
SElem with_precision(SElem a, unsigned prec) {
  a.prec = std::min(a.prec, prec);
  return reduced(a);
}

SElem operator+(const SElem &a, const SElem &b) { return add_impl(a, b, false); }
SElem operator-(const SElem &a, const SElem &b) { return add_impl(a, b, true); }
SElem operator-(const SElem &a) { return neg_impl(a); }
SElem operator*(const SElem &a, const SElem &b) { return s_mul(a, b); }
SElem scale(const SElem &a, Word k) { return scale_impl(a, k); }

SElem s_mul(const SElem &a, const SElem &b) {
  require_same(a.ctx, b.ctx, "ring elements from different contexts");
  const auto &ctx = *a.ctx;
  const auto &R = ctx.R();
  SElem out = make_elem<SElem>(a.ctx, std::min(a.prec, b.prec));
  const unsigned ta = top_nonzero(a.c), tb = top_nonzero(b.c);
  for (unsigned i = 0; i < ta; ++i) {
    if (a.c[i] == 0)
      continue;
    for (unsigned j = 0; j < tb && i + j < ctx.M; ++j) {
      if (b.c[j] == 0)
        continue;
      Word k = ctx.kappa(i, j);
      if (k != 0)
        out.c[i + j] = R.add(out.c[i + j], R.mul(k, R.mul(a.c[i], b.c[j])));
    }
  }
  return reduced(out);
}

bool is_unit(const SElem &a) { return a.c[0] % a.ctx->p != 0; }

SElem s_inverse(const SElem &a) {
  if (!is_unit(a))
    throw std::domain_error("s_inverse: not a unit");
  // Newton iteration x <- x (2 - a x); the defect lies in a nilpotent ideal.
  const auto &R = a.ctx->R();
  SElem x = s_const(a.ctx, static_cast<long long>(R.inv_unit(a.c[0])));
  x.prec = a.prec;
  SElem two = s_const(a.ctx, 2);
  for (int it = 0; it < 64; ++it) {
    SElem nx = x * (two - a * x);
    if (nx == x)
      break;
    x = nx;
  }
  if (!(a * x == with_precision(s_const(a.ctx, 1), a.prec)))
    throw InexactDivision("s_inverse did not converge");
  return x;
}

SElem embed_sigma(const SigmaElem &a) {
  const auto &ctx = *a.ctx;
  const auto &R = ctx.R();
  SElem out = make_elem<SElem>(a.ctx, a.prec);
  for (unsigned n = 0; n < ctx.M; ++n)
    out.c[n] = R.mul(a.c[n], ctx.dp_factorial(n));
  return reduced(out);
}

namespace {
void guard(int degree, const RingContext &ctx, const char *what) {
  if (degree >= 0 && static_cast<unsigned>(degree) * ctx.p >= ctx.M)
    throw InsufficientPrecision(std::string(what) + ": support reaches degree " + std::to_string(degree) +
                                " >= M/p with M=" + std::to_string(ctx.M));
}
} // namespace

SigmaElem frobenius_sigma_truncated(const SigmaElem &a) {
  const auto &ctx = *a.ctx;
  SigmaElem out = make_elem<SigmaElem>(a.ctx, a.prec);
  for (unsigned n = 0; n * ctx.p < ctx.M; ++n)
    out.c[n * ctx.p] = a.c[n];
  return out;
}

SElem frobenius_s_truncated(const SElem &a) {
  const auto &ctx = *a.ctx;
  const auto &R = ctx.R();
  SElem out = make_elem<SElem>(a.ctx, a.prec);
  for (unsigned n = 0; n * ctx.p < ctx.M; ++n)
    out.c[n * ctx.p] = R.mul(a.c[n], ctx.frob_weight(n));
  return reduced(out);
}

SigmaElem frobenius_sigma(const SigmaElem &a) {
  guard(a.degree(), *a.ctx, "frobenius_sigma");
  return frobenius_sigma_truncated(a);
}

SElem frobenius_s(const SElem &a) {
  guard(a.degree(), *a.ctx, "frobenius_s");
  return frobenius_s_truncated(a);
}

SElem divided_power_E(const Ctx &ctxp, unsigned j) {
  const auto &ctx = *ctxp;
  const auto &R = ctx.R();
  std::vector<BigInt> Ez(ctx.e + 1);
  for (unsigned i = 0; i <= ctx.e; ++i)
    Ez[i] = BigInt(ctx.E.coeffs[i]);
  std::vector<BigInt> pw(ctx.M, BigInt(0));
  pw[0] = 1;
  for (unsigned t = 0; t < j; ++t) {
    std::vector<BigInt> nxt(ctx.M, BigInt(0));
    for (unsigned a = 0; a < ctx.M; ++a) {
      if (pw[a] == 0)
        continue;
      for (unsigned b = 0; b <= ctx.e && a + b < ctx.M; ++b)
        nxt[a + b] += pw[a] * Ez[b];
    }
    pw = std::move(nxt);
  }
  BigInt jf = 1;
  for (unsigned t = 2; t <= j; ++t)
    jf *= t;
  unsigned vj = 0;
  while (jf % ctx.p == 0) {
    jf /= ctx.p;
    ++vj;
  }
  BigInt pv = 1;
  for (unsigned t = 0; t < vj; ++t)
    pv *= ctx.p;
  const BigInt mod = BigInt(R.m);
  const Word junit_inv = R.inv_unit(static_cast<Word>(jf % mod));
  SElem out = make_elem<SElem>(ctxp, ctx.N);
  BigInt qf = 1;
  unsigned q = 0;
  for (unsigned n = 0; n < ctx.M; ++n) {
    while (q < n / ctx.e) {
      ++q;
      qf *= q;
    }
    if (pw[n] == 0)
      continue;
    BigInt x = pw[n] * qf;
    if (x % pv != 0)
      throw InexactDivision("gamma_j(E) is not integral in divided-power coordinates");
    x /= pv;
    out.c[n] = R.mul(static_cast<Word>(x % mod), junit_inv);
  }
  return out;
}

FilSGenerators fil_s(const Ctx &ctx, unsigned i) {
  FilSGenerators g;
  g.level = i;
  if (i == 0) {
    g.gens.push_back(s_const(ctx, 1));
    g.j_max = 0;
    return g;
  }
  if (ctx->p == 2)
    throw std::domain_error("Fil^i S for i >= 1 needs p >= 3");
  // Beyond this index every coefficient of gamma_j(E) below u^M has
  // valuation >= (j - M/e)(p-2)/(p-1) >= N.
  const unsigned bound =
      (ctx->M + ctx->e - 1) / ctx->e + (ctx->N * (ctx->p - 1) + ctx->p - 3) / (ctx->p - 2) + 1;
  for (unsigned j = i; j <= bound; ++j) {
    auto gj = divided_power_E(ctx, j);
    if (!gj.is_zero()) {
      g.gens.resize(j - i + 1, s_zero(ctx));
      g.gens[j - i] = gj;
      g.j_max = j;
    }
  }
  return g;
}

const HowellForm &RingContext::fil_span(unsigned i, unsigned n) const {
  const auto key = std::make_pair(i, n);
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (auto it = fil_cache_.find(key); it != fil_cache_.end())
      return *it->second;
  }
  HowellForm h;
  if (n == N) {
    // non-owning handle: the elements built here do not outlive this call
    Ctx self(std::shared_ptr<const RingContext>(), this);
    ChainMatrix rows(chain(), 0, M);
    for (const auto &g : fil_s(self, i).gens) {
      if (g.is_zero())
        continue;
      for (unsigned m = 0; m < M; ++m) {
        auto r = s_basis(self, m) * g;
        if (!r.is_zero())
          rows.append_row(r.c);
      }
    }
    h = howell(rows);
  } else {
    std::vector<std::size_t> keep(M);
    for (unsigned k = 0; k < M; ++k)
      keep[k] = k;
    h = project(fil_span(i, N), n, keep);
  }
  std::lock_guard<std::mutex> lock(mu_);
  auto [it, fresh] = fil_cache_.try_emplace(key, std::make_shared<const HowellForm>(std::move(h)));
  return *it->second;
}

bool in_fil(const SElem &a, unsigned i) { return membership(a.c, a.ctx->fil_span(i, a.prec)); }

SElem phi_div_truncated(const SElem &a, unsigned i) {
  const auto &ctx = *a.ctx;
  if (i > ctx.p - 1)
    throw std::invalid_argument("phi_i needs i <= p-1");
  if (i > a.prec)
    throw InsufficientPrecision("phi_div: precision exhausted");
  if (!in_fil(a, i))
    throw MembershipFailure("phi_div: argument is not in Fil^" + std::to_string(i) + " S");
  SElem f = frobenius_s_truncated(a);
  const Word pi = ctx.R().ppow[i];
  SElem out = make_elem<SElem>(a.ctx, a.prec - i);
  for (unsigned n = 0; n < ctx.M; ++n) {
    if (f.c[n] % pi != 0)
      throw InexactDivision("phi(Fil^i S) is not divisible by p^i");
    out.c[n] = f.c[n] / pi;
  }
  return reduced(out);
}

SElem phi_div(const SElem &a, unsigned i) {
  guard(a.degree(), *a.ctx, "phi_div");
  return phi_div_truncated(a, i);
}

SElem derivation_n(const SElem &a) {
  const auto &R = a.ctx->R();
  SElem out = a;
  for (unsigned n = 0; n < a.ctx->M; ++n)
    out.c[n] = R.neg(R.mul(out.c[n], n % R.m));
  return reduced(out);
}

SigmaElem derivation_n_sigma(const SigmaElem &a) {
  const auto &R = a.ctx->R();
  SigmaElem out = a;
  for (unsigned n = 0; n < a.ctx->M; ++n)
    out.c[n] = R.neg(R.mul(out.c[n], n % R.m));
  return reduced(out);
}

SElem c1(const Ctx &ctx) { return phi_div(embed_sigma(sigma_E(ctx)), 1); }

ChainMatrix mult_matrix(const SigmaElem &a) {
  const unsigned M = a.ctx->M;
  ChainMatrix out(a.ctx->chain(), M, M);
  for (unsigned n = 0; n < M; ++n)
    for (unsigned k = 0; n + k < M; ++k)
      out(n, n + k) = a.c[k];
  return out;
}

ChainMatrix mult_matrix(const SElem &a) {
  const auto &ctx = *a.ctx;
  const auto &R = ctx.R();
  ChainMatrix out(ctx.chain(), ctx.M, ctx.M);
  for (unsigned n = 0; n < ctx.M; ++n)
    for (unsigned k = 0; n + k < ctx.M; ++k)
      if (a.c[k] != 0)
        out(n, n + k) = R.mul(ctx.kappa(n, k), a.c[k]);
  return out;
}

std::vector<Word> coords(const SElem &a) { return a.c; }

SElem s_from_coords(const Ctx &ctx, const std::vector<Word> &v, unsigned prec) {
  if (v.size() != ctx->M)
    throw DimensionMismatch("coordinate vector length differs from M");
  return reduced(SElem{ctx, v, prec});
}

EDivision divide_by_E_power(const SigmaElem &a, unsigned k) {
  const auto &ctx = *a.ctx;
  const auto &R = ctx.R();
  auto ek = e_power_poly(ctx, k);
  const std::size_t dk = ek.size() - 1;
  std::vector<Word> r = a.c;
  SigmaElem q = make_elem<SigmaElem>(a.ctx, a.prec);
  for (std::size_t d = r.size(); d-- > dk;) {
    Word lead = r[d];
    if (lead == 0)
      continue;
    q.c[d - dk] = lead;
    for (std::size_t t = 0; t <= dk; ++t)
      r[d - dk + t] = R.sub(r[d - dk + t], R.mul(lead, ek[t]));
  }
  return {reduced(q), reduced(SigmaElem{a.ctx, r, a.prec})};
}

unsigned e_adic_valuation(const SigmaElem &a, unsigned depth) {
  for (unsigned k = 1; k <= depth; ++k)
    if (!divide_by_E_power(a, k).remainder.is_zero())
      return k - 1;
  return depth + 1;
}

std::string render(const SigmaElem &a) {
  std::ostringstream os;
  bool first = true;
  for (unsigned n = 0; n < a.c.size(); ++n) {
    if (a.c[n] == 0)
      continue;
    os << (first ? "" : " + ") << a.c[n];
    if (n == 1)
      os << "*u";
    else if (n > 1)
      os << "*u^" << n;
    first = false;
  }
  return first ? "0" : os.str();
}

std::string render(const SElem &a) {
  std::ostringstream os;
  bool first = true;
  for (unsigned n = 0; n < a.c.size(); ++n) {
    if (a.c[n] == 0)
      continue;
    os << (first ? "" : " + ") << a.c[n] << "*b" << n;
    first = false;
  }
  return first ? "0" : os.str();
}

} // namespace kl
