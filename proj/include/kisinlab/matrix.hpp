#pragma once

#include "kisinlab/series.hpp"

#include <functional>
#include <vector>

namespace kl {

inline SigmaElem ring_zero(const Ctx &c, const SigmaElem *) { return sigma_zero(c); }
inline SigmaElem ring_one(const Ctx &c, const SigmaElem *) { return sigma_const(c, 1); }
inline SElem ring_zero(const Ctx &c, const SElem *) { return s_zero(c); }
inline SElem ring_one(const Ctx &c, const SElem *) { return s_const(c, 1); }

// Dense matrix over SigmaElem or SElem. Columns are images of basis vectors.
template <class E> class Mat {
public:
  Mat() = default;
  Mat(Ctx c, std::size_t r, std::size_t k) : ctx_(std::move(c)), rows_(r), cols_(k) {
    a_.assign(r * k, zero());
  }
  static Mat identity(const Ctx &c, std::size_t n) {
    Mat m(c, n, n);
    for (std::size_t i = 0; i < n; ++i)
      m(i, i) = m.one();
    return m;
  }
  static Mat diagonal(const std::vector<E> &d) {
    Mat m(d.front().ctx, d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
      m(i, i) = d[i];
    return m;
  }

  [[nodiscard]] const Ctx &ctx() const { return ctx_; }
  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  E &operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const E &operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  [[nodiscard]] E zero() const { return ring_zero(ctx_, static_cast<const E *>(nullptr)); }
  [[nodiscard]] E one() const { return ring_one(ctx_, static_cast<const E *>(nullptr)); }

  [[nodiscard]] Mat map(const std::function<E(const E &)> &f) const {
    Mat out = *this;
    for (auto &x : out.a_)
      x = f(x);
    return out;
  }
  [[nodiscard]] Mat transpose() const {
    Mat out(ctx_, cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        out(j, i) = (*this)(i, j);
    return out;
  }
  [[nodiscard]] Mat column(std::size_t j) const {
    Mat out(ctx_, rows_, 1);
    for (std::size_t i = 0; i < rows_; ++i)
      out(i, 0) = (*this)(i, j);
    return out;
  }
  [[nodiscard]] Mat submatrix(const std::vector<std::size_t> &rs, const std::vector<std::size_t> &cs) const {
    Mat out(ctx_, rs.size(), cs.size());
    for (std::size_t i = 0; i < rs.size(); ++i)
      for (std::size_t j = 0; j < cs.size(); ++j)
        out(i, j) = (*this)(rs[i], cs[j]);
    return out;
  }
  [[nodiscard]] bool is_zero() const {
    for (const auto &x : a_)
      if (!x.is_zero())
        return false;
    return true;
  }
  [[nodiscard]] unsigned min_prec() const {
    unsigned p = ctx_->N;
    for (const auto &x : a_)
      p = std::min(p, x.prec);
    return p;
  }
  [[nodiscard]] const std::vector<E> &entries() const { return a_; }

  bool operator==(const Mat &o) const { return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_; }

private:
  Ctx ctx_;
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<E> a_;
};

using SigmaMatrix = Mat<SigmaElem>;
using SMatrix = Mat<SElem>;

template <class E> Mat<E> operator*(const Mat<E> &a, const Mat<E> &b) {
  if (a.cols() != b.rows())
    throw DimensionMismatch("matrix product: inner dimensions differ");
  Mat<E> out(a.ctx(), a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      if (a(i, k).is_zero())
        continue;
      for (std::size_t j = 0; j < b.cols(); ++j)
        out(i, j) = out(i, j) + a(i, k) * b(k, j);
    }
  return out;
}

template <class E> Mat<E> operator+(const Mat<E> &a, const Mat<E> &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch("matrix sum: shapes differ");
  Mat<E> out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      out(i, j) = a(i, j) + b(i, j);
  return out;
}

template <class E> Mat<E> operator-(const Mat<E> &a, const Mat<E> &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch("matrix difference: shapes differ");
  Mat<E> out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      out(i, j) = a(i, j) - b(i, j);
  return out;
}

template <class E> Mat<E> scalar_mul(const E &s, const Mat<E> &a) {
  return a.map([&](const E &x) { return s * x; });
}

// (A kron B)((i,k),(j,l)) = A(i,j) B(k,l), index i*rows(B)+k.
template <class E> Mat<E> kron(const Mat<E> &a, const Mat<E> &b) {
  Mat<E> out(a.ctx(), a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (a(i, j).is_zero())
        continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    }
  return out;
}

// Block matrix [[a, b], [c, d]].
template <class E> Mat<E> blocks(const Mat<E> &a, const Mat<E> &b, const Mat<E> &c, const Mat<E> &d) {
  if (a.rows() != b.rows() || c.rows() != d.rows() || a.cols() != c.cols() || b.cols() != d.cols())
    throw DimensionMismatch("block matrix: incompatible shapes");
  Mat<E> out(a.ctx(), a.rows() + c.rows(), a.cols() + b.cols());
  auto put = [&](const Mat<E> &m, std::size_t r0, std::size_t c0) {
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j)
        out(r0 + i, c0 + j) = m(i, j);
  };
  put(a, 0, 0);
  put(b, 0, a.cols());
  put(c, a.rows(), 0);
  put(d, a.rows(), a.cols());
  return out;
}

// Division-free determinant by expansion over column subsets.
template <class E> E det(const Mat<E> &m) {
  const std::size_t n = m.rows();
  if (n != m.cols())
    throw DimensionMismatch("det: matrix is not square");
  if (n == 0)
    return m.one();
  if (n > 20)
    throw DimensionMismatch("det: rank too large for subset expansion");
  // f[S] = det of rows 0..|S|-1 against columns S
  std::vector<E> f(std::size_t(1) << n, m.zero());
  f[0] = m.one();
  for (std::size_t s = 1; s < f.size(); ++s) {
    const std::size_t row = static_cast<std::size_t>(__builtin_popcountll(s)) - 1;
    E acc = m.zero();
    for (std::size_t j = 0; j < n; ++j) {
      if (!(s & (std::size_t(1) << j)))
        continue;
      // sign: number of chosen columns after j
      const std::size_t rest = s & ~((std::size_t(2) << j) - 1);
      const bool neg = __builtin_popcountll(rest) % 2 == 1;
      const std::size_t without = s & ~(std::size_t(1) << j);
      if (!m(row, j).is_zero() && !f[without].is_zero()) {
        E t = m(row, j) * f[without];
        acc = neg ? acc - t : acc + t;
      }
    }
    f[s] = acc;
  }
  return f.back();
}

// adj(m) with m * adj(m) = det(m) I.
template <class E> Mat<E> adjugate(const Mat<E> &m) {
  const std::size_t n = m.rows();
  Mat<E> out(m.ctx(), n, n);
  if (n == 1) {
    out(0, 0) = m.one();
    return out;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<std::size_t> rs, cs;
      for (std::size_t k = 0; k < n; ++k) {
        if (k != j)
          rs.push_back(k);
        if (k != i)
          cs.push_back(k);
      }
      E minor = det(m.submatrix(rs, cs));
      out(i, j) = (i + j) % 2 ? -minor : minor;
    }
  return out;
}

// Flattening. A vector of R^d is stored as d blocks of M coordinates.
template <class E> std::vector<Word> flat(const Mat<E> &col) {
  const unsigned M = col.ctx()->M;
  std::vector<Word> v(col.rows() * M, 0);
  for (std::size_t i = 0; i < col.rows(); ++i)
    for (unsigned n = 0; n < M; ++n)
      v[i * M + n] = col(i, 0).c[n];
  return v;
}

SigmaMatrix sigma_column(const Ctx &ctx, const std::vector<Word> &flat, unsigned prec);
SMatrix s_column(const Ctx &ctx, const std::vector<Word> &flat, unsigned prec);

// Row (j, n) holds flat(F * basis_n e_j): the right action of F on row vectors.
ChainMatrix flatten_map(const SigmaMatrix &F);
ChainMatrix flatten_map(const SMatrix &F);

// Flattened R-span of the columns of G.
HowellForm flatten_span(const SigmaMatrix &G);
HowellForm flatten_span(const SMatrix &G);

SMatrix embed(const SigmaMatrix &m);
SigmaMatrix frobenius(const SigmaMatrix &m);

} // namespace kl
