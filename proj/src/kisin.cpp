#include "kisinlab/kisin.hpp"

#include <algorithm>
#include <sstream>

namespace kl {

namespace {

SigmaElem sigma_word(const Ctx &ctx, Word w) {
  auto x = sigma_zero(ctx);
  x.c[0] = w;
  return x;
}

SigmaElem scaled_E(const Ctx &ctx, unsigned k) {
  auto base = sigma_word(ctx, ctx->c0_inv()) * sigma_E(ctx);
  return sigma_pow(base, k);
}

// Remainder of u^M modulo E^D over Z/p^N, as a dense polynomial.
bool u_power_vanishes(const Ctx &ctx, unsigned D) {
  const auto &R = ctx->R();
  std::vector<Word> ek{1};
  for (unsigned t = 0; t < D; ++t) {
    std::vector<Word> next(ek.size() + ctx->e, 0);
    for (std::size_t i = 0; i < ek.size(); ++i)
      for (unsigned j = 0; j <= ctx->e; ++j)
        next[i + j] = R.add(next[i + j], R.mul(ek[i], ctx->E.coeffs[j]));
    ek = std::move(next);
  }
  const std::size_t dk = ek.size() - 1;
  std::vector<Word> r(ctx->M + 1, 0);
  r[ctx->M] = 1;
  for (std::size_t d = r.size(); d-- > dk;) {
    Word lead = r[d];
    if (lead == 0)
      continue;
    for (std::size_t t = 0; t <= dk; ++t)
      r[d - dk + t] = R.sub(r[d - dk + t], R.mul(lead, ek[t]));
  }
  return std::all_of(r.begin(), r.end(), [](Word w) { return w == 0; });
}

std::vector<Word> flat_basis_multiple(const Ctx &ctx, std::size_t rank, std::size_t i, const SigmaElem &a) {
  std::vector<Word> v(rank * ctx->M, 0);
  std::copy(a.c.begin(), a.c.end(), v.begin() + static_cast<std::ptrdiff_t>(i * ctx->M));
  return v;
}

bool is_zero_span(const HowellForm &h) { return h.log_size() == 0; }

SigmaMatrix as_row(const Ctx &ctx, const std::vector<SigmaElem> &gens) {
  SigmaMatrix m(ctx, 1, gens.size());
  for (std::size_t j = 0; j < gens.size(); ++j)
    m(0, j) = gens[j];
  return m;
}

std::vector<SigmaElem> span_rows(const Ctx &ctx, const HowellForm &h) {
  std::vector<SigmaElem> out;
  for (std::size_t i = 0; i < h.matrix.rows(); ++i)
    out.push_back(sigma_column(ctx, h.matrix.row(i), ctx->N)(0, 0));
  return out;
}

HowellForm phi_ideal_of_rows(const Ctx &ctx, const std::vector<SigmaElem> &rows) {
  std::vector<SigmaElem> imgs;
  for (const auto &x : rows)
    if (!x.is_zero())
      imgs.push_back(frobenius_sigma_truncated(x));
  return ideal_span(ctx, imgs);
}

void classify(const Ctx &ctx, const HowellForm &ideal, IdealWitness &w) {
  if (is_zero_span(ideal)) {
    w.verdict = IdealVerdict::Indeterminate;
    w.note = "ideal vanishes at working precision";
    return;
  }
  for (unsigned n = 0; n < ctx->N; ++n)
    if (ideal == p_power_ideal(ctx, n)) {
      w.verdict = IdealVerdict::PrincipalPPower;
      w.n = n;
      return;
    }
  w.verdict = IdealVerdict::NotPPower;
  w.note = "hypothesis holds but the ideal is not a power of p";
}

void require_module(const KisinModule &m) {
  if (m.frobenius.rows() != m.frobenius.cols())
    throw DimensionMismatch("Frobenius matrix is not square");
  if (!m.frobenius.ctx()->same(*m.ctx))
    throw ContextMismatch("Frobenius matrix belongs to another context");
}

} // namespace

unsigned visible_e_depth(const Ctx &ctx) {
  unsigned D = 0;
  while (ctx->e * (D + 1) < ctx->M && u_power_vanishes(ctx, D + 1))
    ++D;
  return D;
}

DetFactorization factor_det(const SigmaMatrix &phi) {
  const auto &ctx = phi.ctx();
  SigmaElem d = det(phi);
  if (d.is_zero())
    throw DegenerateFrobenius("det of the Frobenius matrix vanishes at working precision");
  const unsigned depth = visible_e_depth(ctx);
  const unsigned h = e_adic_valuation(d, depth);
  if (h > depth)
    throw InsufficientPrecision("E-adic valuation of det exceeds the visible depth " + std::to_string(depth));
  auto q = divide_by_E_power(d, h).quotient;
  if (!is_unit(q))
    throw DegenerateFrobenius("det of the Frobenius matrix is not a unit times a power of E");
  return {h, q};
}

KisinModule make_kisin(const Ctx &ctx, const SigmaMatrix &frobenius, unsigned denom) {
  KisinModule m{ctx, frobenius, denom};
  require_module(m);
  factor_det(frobenius);
  return m;
}

KisinModule unit_module(const Ctx &ctx, std::size_t rank) { return {ctx, SigmaMatrix::identity(ctx, rank), 0}; }

KisinModule bk_twist(const Ctx &ctx, int r) { return twist(unit_module(ctx), r); }

HeightResult check_height(const KisinModule &m, unsigned r) {
  if (!m.effective())
    throw std::invalid_argument("height is defined for effective modules only");
  const auto span = flatten_span(m.frobenius);
  const auto er = sigma_pow(sigma_E(m.ctx), r);
  for (std::size_t i = 0; i < m.rank(); ++i)
    if (!membership(flat_basis_multiple(m.ctx, m.rank(), i, er), span))
      return {false, static_cast<int>(i)};
  return {true, -1};
}

KisinModule tensor(const KisinModule &a, const KisinModule &b) {
  require_same(a.ctx, b.ctx, "tensor");
  return {a.ctx, kron(a.frobenius, b.frobenius), a.denom + b.denom};
}

KisinModule dual(const KisinModule &m) {
  require_module(m);
  auto f = factor_det(m.frobenius);
  auto scale = sigma_pow(sigma_E(m.ctx), m.denom) * sigma_inverse(f.unit);
  return {m.ctx, scalar_mul(scale, adjugate(m.frobenius).transpose()), f.h};
}

KisinModule internal_hom(const KisinModule &a, const KisinModule &b) { return tensor(dual(a), b); }

KisinModule twist(const KisinModule &m, int s) {
  if (s == 0)
    return m;
  if (s < 0)
    return {m.ctx, scalar_mul(scaled_E(m.ctx, static_cast<unsigned>(-s)), m.frobenius), m.denom};
  const auto &R = m.ctx->R();
  Word c = 1;
  for (int i = 0; i < s; ++i)
    c = R.mul(c, m.ctx->c0());
  return {m.ctx, scalar_mul(sigma_word(m.ctx, c), m.frobenius), m.denom + static_cast<unsigned>(s)};
}

KisinModule clear_denominators(const KisinModule &m) {
  KisinModule out = m;
  while (out.denom > 0) {
    SigmaMatrix q = out.frobenius;
    for (std::size_t i = 0; i < q.rows(); ++i)
      for (std::size_t j = 0; j < q.cols(); ++j) {
        auto d = divide_by_E_power(out.frobenius(i, j), 1);
        if (!d.remainder.is_zero())
          return out;
        q(i, j) = d.quotient;
      }
    out.frobenius = q;
    --out.denom;
  }
  return out;
}

std::vector<unsigned> hodge_tate_weights(const KisinModule &m, std::optional<unsigned> height) {
  if (!m.effective())
    throw std::invalid_argument("Hodge-Tate weights are computed for effective modules only");
  const std::size_t d = m.rank();
  const auto f = factor_det(m.frobenius);
  const unsigned depth = height ? *height * static_cast<unsigned>(d) + 1 : f.h + 1;
  if (depth > visible_e_depth(m.ctx))
    throw InsufficientPrecision("E-adic depth " + std::to_string(depth) + " is not visible at this truncation");
  // determinantal divisors: min E-adic valuation over k x k minors
  std::vector<unsigned> delta(d + 1, 0);
  for (std::size_t k = 1; k <= d; ++k) {
    unsigned best = depth + 1;
    std::vector<std::size_t> rows(k), cols(k);
    std::vector<bool> rsel(d, false), csel(d, false);
    std::fill(rsel.begin(), rsel.begin() + static_cast<std::ptrdiff_t>(k), true);
    do {
      rows.clear();
      for (std::size_t i = 0; i < d; ++i)
        if (rsel[i])
          rows.push_back(i);
      std::fill(csel.begin(), csel.end(), false);
      std::fill(csel.begin(), csel.begin() + static_cast<std::ptrdiff_t>(k), true);
      do {
        cols.clear();
        for (std::size_t j = 0; j < d; ++j)
          if (csel[j])
            cols.push_back(j);
        auto minor = det(m.frobenius.submatrix(rows, cols));
        if (!minor.is_zero())
          best = std::min(best, e_adic_valuation(minor, depth));
      } while (std::prev_permutation(csel.begin(), csel.end()));
    } while (std::prev_permutation(rsel.begin(), rsel.end()));
    if (best > depth)
      throw InsufficientPrecision("invariant factor " + std::to_string(k) + " unresolved at depth " +
                                  std::to_string(depth));
    delta[k] = best;
  }
  std::vector<unsigned> w;
  for (std::size_t k = 1; k <= d; ++k)
    w.push_back(delta[k] - delta[k - 1]);
  std::sort(w.begin(), w.end());
  return w;
}

MorphismCheck check_morphism(const KisinMorphism &f) {
  require_same(f.source.ctx, f.target.ctx, "morphism");
  if (f.matrix.rows() != f.target.rank() || f.matrix.cols() != f.source.rank())
    throw DimensionMismatch("morphism matrix shape does not match source and target ranks");
  const auto &ctx = f.source.ctx;
  auto lhs = scalar_mul(sigma_pow(sigma_E(ctx), f.target.denom), f.matrix * f.source.frobenius);
  auto rhs = scalar_mul(sigma_pow(sigma_E(ctx), f.source.denom), f.target.frobenius * frobenius(f.matrix));
  for (std::size_t i = 0; i < lhs.rows(); ++i)
    for (std::size_t j = 0; j < lhs.cols(); ++j)
      if (!(lhs(i, j) == rhs(i, j)))
        return {false, static_cast<int>(i), static_cast<int>(j)};
  return {true, -1, -1};
}

KisinMorphism identity_morphism(const KisinModule &m) { return {m, m, SigmaMatrix::identity(m.ctx, m.rank())}; }

KisinMorphism compose(const KisinMorphism &g, const KisinMorphism &f) {
  if (!(f.target == g.source))
    throw NotComposable("compose: target of the first map is not the source of the second");
  return {f.source, g.target, g.matrix * f.matrix};
}

KisinMorphism tensor(const KisinMorphism &f, const KisinMorphism &g) {
  return {tensor(f.source, g.source), tensor(f.target, g.target), kron(f.matrix, g.matrix)};
}

KernelSpan kernel_module(const KisinMorphism &f) {
  const auto &ctx = f.source.ctx;
  KernelSpan out{kernel(flatten_map(f.matrix)), true};
  for (std::size_t i = 0; i < out.span.matrix.rows() && out.phi_stable; ++i) {
    auto x = sigma_column(ctx, out.span.matrix.row(i), ctx->N);
    auto y = f.source.frobenius * x.map([](const SigmaElem &a) { return frobenius_sigma_truncated(a); });
    out.phi_stable = membership(flat(y), out.span);
  }
  return out;
}

HowellForm image_span(const KisinMorphism &f) { return flatten_span(f.matrix); }

Cokernel cokernel_presentation(const KisinMorphism &f) {
  const auto &ctx = f.target.ctx;
  const std::size_t n = f.target.rank() * ctx->M;
  Cokernel out{quotient_presentation(image_span(f), n), ChainMatrix(ctx->chain(), n, n),
               ChainMatrix(ctx->chain(), n, n)};
  const auto u = mult_matrix(sigma_monomial(ctx, 1, 1));
  for (std::size_t b = 0; b < f.target.rank(); ++b)
    for (unsigned i = 0; i < ctx->M; ++i) {
      out.p_action(b * ctx->M + i, b * ctx->M + i) = ctx->p % ctx->R().m;
      for (unsigned j = 0; j < ctx->M; ++j)
        out.u_action(b * ctx->M + i, b * ctx->M + j) = u(i, j);
    }
  return out;
}

HowellForm ideal_span(const Ctx &ctx, const std::vector<SigmaElem> &gens) {
  if (gens.empty())
    return zero_span<Word>(ctx->chain(), ctx->M);
  return flatten_span(as_row(ctx, gens));
}

HowellForm p_power_ideal(const Ctx &ctx, unsigned n) {
  if (n >= ctx->N)
    return zero_span<Word>(ctx->chain(), ctx->M);
  return ideal_span(ctx, {sigma_word(ctx, ctx->R().ppow[n])});
}

std::string to_string(IdealVerdict v) {
  switch (v) {
  case IdealVerdict::PrincipalPPower:
    return "principal-p-power";
  case IdealVerdict::FailsHypothesis:
    return "fails-hypothesis";
  case IdealVerdict::NotPPower:
    return "not-p-power";
  case IdealVerdict::Indeterminate:
    return "indeterminate";
  }
  return "?";
}

IdealWitness key_lemma_check(const Ctx &ctx, const std::vector<SigmaElem> &gens) {
  IdealWitness w{gens, IdealVerdict::Indeterminate, 0, -1, {}};
  std::vector<SigmaElem> imgs;
  for (const auto &g : gens) {
    require_same(ctx, g.ctx, "key lemma");
    if (g.degree() >= static_cast<int>(ctx->frobenius_bound()))
      throw InsufficientPrecision("ideal generator exceeds the Frobenius degree guard");
    imgs.push_back(frobenius_sigma(g));
  }
  const auto phi_ideal = ideal_span(ctx, imgs);
  for (std::size_t k = 0; k < gens.size(); ++k)
    if (!membership(flat(as_row(ctx, {gens[k]}).transpose()), phi_ideal)) {
      w.verdict = IdealVerdict::FailsHypothesis;
      w.failing = static_cast<int>(k);
      w.note = render(gens[k]) + " is outside the ideal generated by Frobenius images";
      return w;
    }
  classify(ctx, ideal_span(ctx, gens), w);
  return w;
}

IdealWitness key_lemma_check_span(const Ctx &ctx, const HowellForm &ideal) {
  IdealWitness w{span_rows(ctx, ideal), IdealVerdict::Indeterminate, 0, -1, {}};
  const auto phi_ideal = phi_ideal_of_rows(ctx, w.generators);
  for (std::size_t k = 0; k < ideal.matrix.rows(); ++k)
    if (!membership(ideal.matrix.row(k), phi_ideal)) {
      w.verdict = IdealVerdict::FailsHypothesis;
      w.failing = static_cast<int>(k);
      w.note = render(w.generators[k]) + " is outside the ideal generated by Frobenius images";
      return w;
    }
  classify(ctx, ideal, w);
  return w;
}

HowellForm phi_closure(const Ctx &ctx, HowellForm ideal) {
  for (;;) {
    auto next = intersect(ideal, phi_ideal_of_rows(ctx, span_rows(ctx, ideal)));
    if (next == ideal)
      return ideal;
    ideal = std::move(next);
  }
}

Margin Margin::defaults(const Ctx &ctx) { return {(ctx->N + 1) / 2, (ctx->M + 1) / 2}; }

bool ExactSequenceReport::junctions_exact() const {
  return std::all_of(junctions.begin(), junctions.end(),
                     [](const Junction &j) { return j.composite_zero && j.ker_eq_im; });
}

std::vector<std::size_t> kept_columns(const Ctx &ctx, std::size_t rank, unsigned m) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < rank; ++i)
    for (unsigned k = 0; k < m && k < ctx->M; ++k)
      keep.push_back(i * ctx->M + k);
  return keep;
}

void require_composable(const std::vector<KisinMorphism> &seq) {
  if (seq.empty())
    throw NotComposable("empty sequence");
  for (std::size_t i = 0; i + 1 < seq.size(); ++i)
    if (!(seq[i].target == seq[i + 1].source))
      throw NotComposable("sequence is not composable at junction " + std::to_string(i));
}

ExactSequenceReport check_exact_sequence(const std::vector<KisinMorphism> &seq, std::optional<Margin> margin) {
  require_composable(seq);
  const auto &ctx = seq.front().source.ctx;
  ExactSequenceReport rep;
  rep.margin = margin.value_or(Margin::defaults(ctx));
  auto proj = [&](const HowellForm &h, std::size_t rank) {
    return project(h, rep.margin.N, kept_columns(ctx, rank, rep.margin.M));
  };

  const auto &head = seq.front();
  rep.head_injective = is_zero_span(proj(kernel_module(head).span, head.source.rank()));
  if (!rep.head_injective)
    rep.diagnostics.push_back("head map has a kernel above the margin");

  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    const auto &f = seq[i], &g = seq[i + 1];
    Junction j;
    j.composite_zero = (g.matrix * f.matrix).is_zero();
    auto ker = proj(kernel_module(g).span, g.source.rank());
    auto im = proj(image_span(f), f.target.rank());
    j.ker_eq_im = ker == im;
    if (!j.composite_zero)
      rep.diagnostics.push_back("junction " + std::to_string(i) + ": composite is nonzero");
    if (!j.ker_eq_im) {
      std::ostringstream os;
      os << "junction " << i << ": kernel and image differ (log sizes " << ker.log_size() << " vs "
         << im.log_size() << ")";
      rep.diagnostics.push_back(os.str());
    }
    rep.junctions.push_back(j);
  }

  const auto &tail = seq.back();
  const std::size_t n = tail.target.rank() * ctx->M;
  rep.tail_surjective = contains(image_span(tail), full_span<Word>(ctx->chain(), n));
  if (tail.target.rank() == 1) {
    std::vector<SigmaElem> gens;
    for (std::size_t j = 0; j < tail.matrix.cols(); ++j)
      gens.push_back(tail.matrix(0, j));
    try {
      rep.tail_ideal = key_lemma_check(ctx, gens);
    } catch (const InsufficientPrecision &e) {
      rep.tail_ideal = IdealWitness{gens, IdealVerdict::Indeterminate, 0, -1, e.what()};
    }
  }
  if (!rep.tail_surjective)
    rep.diagnostics.push_back("tail map is not surjective");
  return rep;
}

SigmaMatrix random_sigma_matrix(const Ctx &ctx, std::size_t r, std::size_t c, std::mt19937_64 &rng,
                                unsigned degree) {
  SigmaMatrix m(ctx, r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j)
      for (unsigned n = 0; n <= degree && n < ctx->M; ++n)
        m(i, j).c[n] = rng() % ctx->R().m;
  return m;
}

SigmaMatrix random_unimodular(const Ctx &ctx, std::size_t d, std::mt19937_64 &rng, unsigned degree) {
  const auto &R = ctx->R();
  SigmaMatrix u(ctx, d, d);
  for (std::size_t i = 0; i < d; ++i) {
    Word w;
    do
      w = rng() % R.m;
    while (w % ctx->p == 0);
    u(i, i) = sigma_word(ctx, w);
  }
  if (d < 2)
    return u;
  for (std::size_t t = 0; t < d; ++t) {
    std::size_t i = rng() % d, j = rng() % (d - 1);
    if (j >= i)
      ++j;
    auto el = SigmaMatrix::identity(ctx, d);
    el(i, j) = random_sigma_matrix(ctx, 1, 1, rng, degree)(0, 0);
    u = u * el;
  }
  return u;
}

KisinModule random_kisin(const Ctx &ctx, std::size_t d, unsigned r, std::mt19937_64 &rng) {
  std::vector<SigmaElem> diag;
  for (std::size_t i = 0; i < d; ++i)
    diag.push_back(sigma_pow(sigma_E(ctx), static_cast<unsigned>(rng() % (r + 1))));
  auto phi = random_unimodular(ctx, d, rng) * SigmaMatrix::diagonal(diag) * random_unimodular(ctx, d, rng);
  return make_kisin(ctx, phi);
}

ShortExact extension(const KisinModule &sub, const KisinModule &quot, const SigmaMatrix &off_block,
                     const std::optional<SigmaMatrix> &base_change) {
  require_same(sub.ctx, quot.ctx, "extension");
  if (sub.denom != quot.denom)
    throw std::invalid_argument("extension: sub and quotient carry different E-denominators");
  const auto &ctx = sub.ctx;
  const std::size_t a = sub.rank(), c = quot.rank();
  SigmaMatrix zero_ca(ctx, c, a);
  SigmaMatrix phi = blocks(sub.frobenius, off_block, zero_ca, quot.frobenius);
  SigmaMatrix inc = blocks(SigmaMatrix::identity(ctx, a), SigmaMatrix(ctx, a, 0), SigmaMatrix(ctx, c, a),
                           SigmaMatrix(ctx, c, 0));
  SigmaMatrix proj = blocks(SigmaMatrix(ctx, 0, a), SigmaMatrix(ctx, 0, c), SigmaMatrix(ctx, c, a),
                            SigmaMatrix::identity(ctx, c));
  if (base_change) {
    const auto &P = *base_change;
    auto pinv = scalar_mul(sigma_inverse(det(P)), adjugate(P));
    phi = pinv * phi * frobenius(P);
    inc = pinv * inc;
    proj = proj * P;
  }
  KisinModule mid{ctx, phi, sub.denom};
  return {{sub, mid, inc}, {mid, quot, proj}};
}

} // namespace kl
