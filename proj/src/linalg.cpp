#include "kisinlab/linalg.hpp"

#include <algorithm>
#include <limits>

namespace kl {

bool ChainContext::fits_word() const {
  unsigned __int128 m = 1;
  for (unsigned i = 0; i < N; ++i) {
    m *= p;
    if (m >= (static_cast<unsigned __int128>(1) << 62))
      return false;
  }
  return true;
}

Word ChainContext::modulus() const {
  if (!fits_word())
    throw std::overflow_error("p^N does not fit a machine word");
  Word m = 1;
  for (unsigned i = 0; i < N; ++i)
    m *= p;
  return m;
}

BigInt ChainContext::big_modulus() const {
  BigInt m = 1;
  for (unsigned i = 0; i < N; ++i)
    m *= p;
  return m;
}

Residues<Word>::Residues(const ChainContext &c) : ctx(c), m(c.modulus()) {
  ppow.resize(c.N + 1);
  ppow[0] = 1;
  for (unsigned i = 1; i <= c.N; ++i)
    ppow[i] = ppow[i - 1] * c.p;
}

unsigned Residues<Word>::val(Word a) const {
  if (a == 0)
    return ctx.N;
  unsigned v = 0;
  while (a % ctx.p == 0) {
    a /= ctx.p;
    ++v;
  }
  return v;
}

Word Residues<Word>::inv_unit(Word a) const {
  __int128 r0 = static_cast<__int128>(m), r1 = a % m;
  __int128 t0 = 0, t1 = 1;
  while (r1 != 0) {
    __int128 q = r0 / r1;
    __int128 r2 = r0 - q * r1;
    r0 = r1;
    r1 = r2;
    __int128 t2 = t0 - q * t1;
    t0 = t1;
    t1 = t2;
  }
  if (r0 != 1)
    throw std::domain_error("not a unit");
  if (t0 < 0)
    t0 += m;
  return static_cast<Word>(t0);
}

Word Residues<Word>::from_int(long long x) const {
  if (x >= 0)
    return static_cast<Word>(x) % m;
  Word r = static_cast<Word>(-(x + 1)) % m;
  return m - 1 - r;
}

Residues<BigInt>::Residues(const ChainContext &c) : ctx(c), m(c.big_modulus()) {
  ppow.resize(c.N + 1);
  ppow[0] = 1;
  for (unsigned i = 1; i <= c.N; ++i)
    ppow[i] = ppow[i - 1] * c.p;
}

unsigned Residues<BigInt>::val(const BigInt &a) const {
  if (a == 0)
    return ctx.N;
  BigInt x = a;
  unsigned v = 0;
  while (x % ctx.p == 0) {
    x /= ctx.p;
    ++v;
  }
  return v;
}

BigInt Residues<BigInt>::inv_unit(const BigInt &a) const {
  BigInt r0 = m, r1 = a % m, t0 = 0, t1 = 1;
  while (r1 != 0) {
    BigInt q = r0 / r1;
    BigInt r2 = r0 - q * r1;
    r0 = r1;
    r1 = r2;
    BigInt t2 = t0 - q * t1;
    t0 = t1;
    t1 = t2;
  }
  if (r0 != 1)
    throw std::domain_error("not a unit");
  if (t0 < 0)
    t0 += m;
  return t0;
}

BigInt Residues<BigInt>::from_int(long long x) const { return reduce(BigInt(x)); }

template <class T> BasicMatrix<T> BasicMatrix<T>::identity(ChainContext c, std::size_t n) {
  BasicMatrix out(c, n, n);
  for (std::size_t i = 0; i < n; ++i)
    out(i, i) = 1;
  return out;
}

template <class T>
BasicMatrix<T> BasicMatrix<T>::from_rows(ChainContext c, const std::vector<std::vector<long long>> &rows) {
  Residues<T> R(c);
  std::size_t k = rows.empty() ? 0 : rows.front().size();
  BasicMatrix out(c, rows.size(), k);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != k)
      throw DimensionMismatch("ragged row list");
    for (std::size_t j = 0; j < k; ++j)
      out(i, j) = R.from_int(rows[i][j]);
  }
  return out;
}

template <class T> void BasicMatrix<T>::append_row(const std::vector<T> &r) {
  if (rows_ == 0 && cols_ == 0)
    cols_ = r.size();
  if (r.size() != cols_)
    throw DimensionMismatch("row length differs from column count");
  data_.insert(data_.end(), r.begin(), r.end());
  ++rows_;
}

template <class T> bool BasicMatrix<T>::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](const T &x) { return x == 0; });
}

template <class T> std::size_t BasicHowell<T>::log_size() const {
  std::size_t s = 0;
  for (const auto &pv : pivots)
    s += matrix.ctx().N - pv.val;
  return s;
}

template <class T> std::size_t BasicFPModule<T>::log_cardinality() const {
  return relations.ctx().N * ambient_rank - relations.log_size();
}

template <class T> BigInt BasicFPModule<T>::cardinality() const {
  BigInt c = 1;
  for (std::size_t i = 0; i < log_cardinality(); ++i)
    c *= relations.ctx().p;
  return c;
}

namespace {

template <class T> bool zero_row(const std::vector<T> &r) {
  return std::all_of(r.begin(), r.end(), [](const T &x) { return x == 0; });
}

// row -= q * piv, from column `from` on.
template <class T>
void axpy_neg(const Residues<T> &R, std::vector<T> &row, const T &q, const std::vector<T> &piv, std::size_t from) {
  for (std::size_t j = from; j < row.size(); ++j)
    if (piv[j] != 0)
      row[j] = R.sub(row[j], R.mul(q, piv[j]));
}

template <class T> BasicHowell<T> howell_impl(const BasicMatrix<T> &m, bool parallel) {
  const ChainContext c = m.ctx();
  Residues<T> R(c);
  const std::size_t ncols = m.cols();
  std::vector<std::vector<T>> work;
  work.reserve(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    if (!zero_row(r))
      work.push_back(std::move(r));
  }
  std::vector<std::vector<T>> out;
  std::vector<Pivot> pivots;
  for (std::size_t col = 0; col < ncols && !work.empty(); ++col) {
    std::size_t best = work.size();
    unsigned bestv = c.N;
    for (std::size_t i = 0; i < work.size(); ++i) {
      if (work[i][col] == 0)
        continue;
      unsigned v = R.val(work[i][col]);
      if (v < bestv) {
        bestv = v;
        best = i;
        if (v == 0)
          break;
      }
    }
    if (best == work.size())
      continue;
    std::vector<T> piv = std::move(work[best]);
    work.erase(work.begin() + static_cast<std::ptrdiff_t>(best));
    const T &pv = R.ppow[bestv];
    T unit = T(piv[col] / pv);
    if (unit != 1) {
      T inv = R.inv_unit(unit);
      for (std::size_t j = col; j < ncols; ++j)
        piv[j] = R.mul(piv[j], inv);
    }
    const std::ptrdiff_t nw = static_cast<std::ptrdiff_t>(work.size());
#pragma omp parallel for schedule(static) if (parallel && nw > 64)
    for (std::ptrdiff_t i = 0; i < nw; ++i) {
      auto &w = work[static_cast<std::size_t>(i)];
      if (w[col] == 0)
        continue;
      T q = T(w[col] / pv);
      axpy_neg(R, w, q, piv, col);
    }
    std::erase_if(work, [](const std::vector<T> &r) { return zero_row(r); });
    if (bestv > 0) {
      std::vector<T> sat(piv.size(), T(0));
      const T &sc = R.ppow[c.N - bestv];
      for (std::size_t j = col; j < ncols; ++j)
        sat[j] = R.mul(piv[j], sc);
      if (!zero_row(sat))
        work.push_back(std::move(sat));
    }
    pivots.push_back({out.size(), col, bestv});
    out.push_back(std::move(piv));
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto &pi = pivots[i];
    const T &pv = R.ppow[pi.val];
    for (std::size_t j = 0; j < i; ++j) {
      T q = T(out[j][pi.col] / pv);
      if (q != 0)
        axpy_neg(R, out[j], q, out[i], pi.col);
    }
  }
  BasicHowell<T> h{BasicMatrix<T>(c, 0, ncols), std::move(pivots)};
  for (auto &r : out)
    h.matrix.append_row(r);
  return h;
}

template <class T> BasicMatrix<T> multiply_impl(const BasicMatrix<T> &a, const BasicMatrix<T> &b, bool parallel) {
  if (!(a.ctx() == b.ctx()))
    throw ContextMismatch("multiply: contexts differ");
  if (a.cols() != b.rows())
    throw DimensionMismatch("multiply: inner dimensions differ");
  Residues<T> R(a.ctx());
  BasicMatrix<T> out(a.ctx(), a.rows(), b.cols());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel for schedule(static) if (parallel && n > 32)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    auto i = static_cast<std::size_t>(ii);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T &x = a(i, k);
      if (x == 0)
        continue;
      for (std::size_t j = 0; j < b.cols(); ++j)
        if (b(k, j) != 0)
          out(i, j) = R.add(out(i, j), R.mul(x, b(k, j)));
    }
  }
  return out;
}

// Rows of the Howell form of `stacked` whose pivot lies at or beyond `split`,
// restricted to those trailing columns.
template <class T> BasicHowell<T> trailing_block(const BasicMatrix<T> &stacked, std::size_t split) {
  auto h = howell(stacked);
  const std::size_t width = stacked.cols() - split;
  BasicMatrix<T> tail(stacked.ctx(), 0, width);
  for (const auto &pv : h.pivots) {
    if (pv.col < split)
      continue;
    auto r = h.matrix.row(pv.row);
    tail.append_row(std::vector<T>(r.begin() + static_cast<std::ptrdiff_t>(split), r.end()));
  }
  return howell(tail);
}

template <class T> void check_same(const ChainContext &a, const ChainContext &b, const char *what) {
  if (!(a == b))
    throw ContextMismatch(what);
}

} // namespace

template <class T> BasicHowell<T> howell(const BasicMatrix<T> &m) { return howell_impl(m, true); }
template <class T> BasicHowell<T> howell_serial(const BasicMatrix<T> &m) { return howell_impl(m, false); }

template <class T> BasicMatrix<T> multiply(const BasicMatrix<T> &a, const BasicMatrix<T> &b) {
  return multiply_impl(a, b, true);
}
template <class T> BasicMatrix<T> multiply_serial(const BasicMatrix<T> &a, const BasicMatrix<T> &b) {
  return multiply_impl(a, b, false);
}

template <class T>
BasicHowell<T> span_of(const std::vector<std::vector<T>> &rows, ChainContext c, std::size_t cols) {
  BasicMatrix<T> m(c, 0, cols);
  for (const auto &r : rows)
    m.append_row(r);
  return howell(m);
}

template <class T> BasicHowell<T> zero_span(ChainContext c, std::size_t cols) {
  return {BasicMatrix<T>(c, 0, cols), {}};
}

template <class T> BasicHowell<T> full_span(ChainContext c, std::size_t cols) {
  return howell(BasicMatrix<T>::identity(c, cols));
}

template <class T> std::vector<T> reduce(std::vector<T> v, const BasicHowell<T> &span) {
  if (v.size() != span.ambient())
    throw DimensionMismatch("reduce: vector length differs from ambient rank");
  Residues<T> R(span.ctx());
  for (const auto &pv : span.pivots) {
    const T &x = v[pv.col];
    if (x == 0)
      continue;
    if (R.val(x) < pv.val)
      return v;
    T q = T(x / R.ppow[pv.val]);
    auto r = span.matrix.row(pv.row);
    axpy_neg(R, v, q, r, pv.col);
  }
  return v;
}

template <class T> bool membership(const std::vector<T> &v, const BasicHowell<T> &span) {
  return zero_row(reduce(v, span));
}

template <class T> bool contains(const BasicHowell<T> &big, const BasicHowell<T> &small) {
  for (std::size_t i = 0; i < small.matrix.rows(); ++i)
    if (!membership(small.matrix.row(i), big))
      return false;
  return true;
}

template <class T> BasicHowell<T> kernel(const BasicMatrix<T> &m) {
  const std::size_t r = m.rows(), k = m.cols();
  BasicMatrix<T> st(m.ctx(), r, k + r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < k; ++j)
      st(i, j) = m(i, j);
    st(i, k + i) = 1;
  }
  return trailing_block(st, k);
}

template <class T> BasicHowell<T> intersect(const BasicHowell<T> &a, const BasicHowell<T> &b) {
  check_same<T>(a.ctx(), b.ctx(), "intersect: contexts differ");
  if (a.ambient() != b.ambient())
    throw DimensionMismatch("intersect: ambient ranks differ");
  const std::size_t n = a.ambient();
  BasicMatrix<T> st(a.ctx(), a.matrix.rows() + b.matrix.rows(), 2 * n);
  for (std::size_t i = 0; i < a.matrix.rows(); ++i)
    for (std::size_t j = 0; j < n; ++j)
      st(i, j) = st(i, n + j) = a.matrix(i, j);
  for (std::size_t i = 0; i < b.matrix.rows(); ++i)
    for (std::size_t j = 0; j < n; ++j)
      st(a.matrix.rows() + i, j) = b.matrix(i, j);
  return trailing_block(st, n);
}

template <class T> BasicHowell<T> sum(const BasicHowell<T> &a, const BasicHowell<T> &b) {
  check_same<T>(a.ctx(), b.ctx(), "sum: contexts differ");
  if (a.ambient() != b.ambient())
    throw DimensionMismatch("sum: ambient ranks differ");
  BasicMatrix<T> st = a.matrix;
  for (std::size_t i = 0; i < b.matrix.rows(); ++i)
    st.append_row(b.matrix.row(i));
  return howell(st);
}

template <class T> BasicHowell<T> preimage(const BasicMatrix<T> &m, const BasicHowell<T> &target) {
  check_same<T>(m.ctx(), target.ctx(), "preimage: contexts differ");
  if (m.cols() != target.ambient())
    throw DimensionMismatch("preimage: map codomain differs from target ambient");
  const std::size_t r = m.rows(), k = m.cols();
  BasicMatrix<T> st(m.ctx(), r + target.matrix.rows(), k + r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < k; ++j)
      st(i, j) = m(i, j);
    st(i, k + i) = 1;
  }
  for (std::size_t i = 0; i < target.matrix.rows(); ++i)
    for (std::size_t j = 0; j < k; ++j)
      st(r + i, j) = target.matrix(i, j);
  return trailing_block(st, k);
}

template <class T> BasicHowell<T> image(const BasicHowell<T> &span, const BasicMatrix<T> &m) {
  return howell(multiply(span.matrix, m));
}

template <class T> BasicHowell<T> scale(const BasicHowell<T> &span, const T &c) {
  Residues<T> R(span.ctx());
  BasicMatrix<T> m = span.matrix;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      m(i, j) = R.mul(m(i, j), c);
  return howell(m);
}

template <class T> BasicFPModule<T> quotient_presentation(const BasicHowell<T> &sub, std::size_t ambient_rank) {
  if (sub.ambient() != ambient_rank)
    throw DimensionMismatch("quotient_presentation: ambient rank mismatch");
  return {ambient_rank, sub};
}

template <class T>
std::optional<unsigned> nilpotency_degree(const BasicMatrix<T> &action, const BasicFPModule<T> &module) {
  const std::size_t n = module.ambient_rank;
  if (action.rows() != n || action.cols() != n)
    throw DimensionMismatch("nilpotency_degree: action must be square of the ambient rank");
  const auto &rel = module.relations;
  auto moved = multiply(rel.matrix, action);
  for (std::size_t i = 0; i < moved.rows(); ++i)
    if (!membership(moved.row(i), rel))
      throw NotAnEndomorphism("action does not preserve the relations");
  const unsigned bound = rel.ctx().N * static_cast<unsigned>(n);
  BasicMatrix<T> power = action;
  for (unsigned k = 1; k <= std::max(bound, 1u); ++k) {
    bool dead = true;
    for (std::size_t i = 0; i < n && dead; ++i)
      dead = membership(power.row(i), rel);
    if (dead)
      return k;
    power = multiply(power, action);
  }
  return std::nullopt;
}

HowellForm project(const HowellForm &span, unsigned n, const std::vector<std::size_t> &keep) {
  const ChainContext c = span.ctx().with_precision(n);
  const Word m = c.modulus();
  ChainMatrix out(c, span.matrix.rows(), keep.size());
  for (std::size_t i = 0; i < span.matrix.rows(); ++i)
    for (std::size_t j = 0; j < keep.size(); ++j)
      out(i, j) = span.matrix(i, keep[j]) % m;
  return howell(out);
}

#define KL_INSTANTIATE(T)                                                                                    \
  template class BasicMatrix<T>;                                                                             \
  template struct BasicHowell<T>;                                                                            \
  template struct BasicFPModule<T>;                                                                          \
  template BasicHowell<T> howell(const BasicMatrix<T> &);                                                    \
  template BasicHowell<T> howell_serial(const BasicMatrix<T> &);                                             \
  template BasicMatrix<T> multiply(const BasicMatrix<T> &, const BasicMatrix<T> &);                          \
  template BasicMatrix<T> multiply_serial(const BasicMatrix<T> &, const BasicMatrix<T> &);                   \
  template BasicHowell<T> span_of(const std::vector<std::vector<T>> &, ChainContext, std::size_t);           \
  template BasicHowell<T> zero_span(ChainContext, std::size_t);                                              \
  template BasicHowell<T> full_span(ChainContext, std::size_t);                                              \
  template std::vector<T> reduce(std::vector<T>, const BasicHowell<T> &);                                    \
  template bool membership(const std::vector<T> &, const BasicHowell<T> &);                                  \
  template bool contains(const BasicHowell<T> &, const BasicHowell<T> &);                                    \
  template BasicHowell<T> kernel(const BasicMatrix<T> &);                                                    \
  template BasicHowell<T> intersect(const BasicHowell<T> &, const BasicHowell<T> &);                         \
  template BasicHowell<T> sum(const BasicHowell<T> &, const BasicHowell<T> &);                               \
  template BasicHowell<T> preimage(const BasicMatrix<T> &, const BasicHowell<T> &);                          \
  template BasicHowell<T> image(const BasicHowell<T> &, const BasicMatrix<T> &);                             \
  template BasicHowell<T> scale(const BasicHowell<T> &, const T &);                                          \
  template BasicFPModule<T> quotient_presentation(const BasicHowell<T> &, std::size_t);                      \
  template std::optional<unsigned> nilpotency_degree(const BasicMatrix<T> &, const BasicFPModule<T> &);

KL_INSTANTIATE(Word)
KL_INSTANTIATE(BigInt)

} // namespace kl
