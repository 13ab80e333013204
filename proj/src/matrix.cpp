#include "kisinlab/matrix.hpp"

namespace kl {

namespace {

template <class E> ChainMatrix flatten_map_impl(const Mat<E> &F) {
  const unsigned M = F.ctx()->M;
  ChainMatrix out(F.ctx()->chain(), F.cols() * M, F.rows() * M);
  for (std::size_t i = 0; i < F.rows(); ++i)
    for (std::size_t j = 0; j < F.cols(); ++j) {
      if (F(i, j).is_zero())
        continue;
      auto block = mult_matrix(F(i, j));
      for (unsigned n = 0; n < M; ++n)
        for (unsigned k = 0; k < M; ++k)
          out(j * M + n, i * M + k) = block(n, k);
    }
  return out;
}

} // namespace

SigmaMatrix sigma_column(const Ctx &ctx, const std::vector<Word> &v, unsigned prec) {
  const unsigned M = ctx->M;
  if (v.size() % M != 0)
    throw DimensionMismatch("flat vector length is not a multiple of M");
  SigmaMatrix out(ctx, v.size() / M, 1);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    SigmaElem x{ctx, std::vector<Word>(v.begin() + i * M, v.begin() + (i + 1) * M), ctx->N};
    out(i, 0) = with_precision(x, prec);
  }
  return out;
}

SMatrix s_column(const Ctx &ctx, const std::vector<Word> &v, unsigned prec) {
  const unsigned M = ctx->M;
  if (v.size() % M != 0)
    throw DimensionMismatch("flat vector length is not a multiple of M");
  SMatrix out(ctx, v.size() / M, 1);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    SElem x{ctx, std::vector<Word>(v.begin() + i * M, v.begin() + (i + 1) * M), ctx->N};
    out(i, 0) = with_precision(x, prec);
  }
  return out;
}

ChainMatrix flatten_map(const SigmaMatrix &F) { return flatten_map_impl(F); }
ChainMatrix flatten_map(const SMatrix &F) { return flatten_map_impl(F); }
HowellForm flatten_span(const SigmaMatrix &G) { return howell(flatten_map_impl(G)); }
HowellForm flatten_span(const SMatrix &G) { return howell(flatten_map_impl(G)); }

SMatrix embed(const SigmaMatrix &m) {
  SMatrix out(m.ctx(), m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      out(i, j) = embed_sigma(m(i, j));
  return out;
}

SigmaMatrix frobenius(const SigmaMatrix &m) { return m.map([](const SigmaElem &x) { return frobenius_sigma(x); }); }

} // namespace kl
