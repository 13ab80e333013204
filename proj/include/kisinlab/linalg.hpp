#pragma once

#include "kisinlab/errors.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace kl {

using Word = std::uint64_t;
using BigInt = boost::multiprecision::cpp_int;

// Z/p^N. Residues are machine words whenever p^N < 2^62.
struct ChainContext {
  unsigned p = 2;
  unsigned N = 1;

  bool operator==(const ChainContext &) const = default;
  [[nodiscard]] bool fits_word() const;
  [[nodiscard]] Word modulus() const;
  [[nodiscard]] BigInt big_modulus() const;
  [[nodiscard]] ChainContext with_precision(unsigned n) const { return {p, n}; }
};

template <class T> struct Residues;

template <> struct Residues<Word> {
  explicit Residues(const ChainContext &c);
  ChainContext ctx;
  Word m;
  std::vector<Word> ppow; // p^0 .. p^N

  [[nodiscard]] Word reduce(Word x) const { return x % m; }
  [[nodiscard]] Word add(Word a, Word b) const {
    Word s = a + b;
    return s >= m ? s - m : s;
  }
  [[nodiscard]] Word sub(Word a, Word b) const { return a >= b ? a - b : a + m - b; }
  [[nodiscard]] Word neg(Word a) const { return a == 0 ? 0 : m - a; }
  [[nodiscard]] Word mul(Word a, Word b) const {
    return static_cast<Word>((static_cast<unsigned __int128>(a) * b) % m);
  }
  [[nodiscard]] unsigned val(Word a) const;
  [[nodiscard]] Word inv_unit(Word a) const;
  [[nodiscard]] Word from_int(long long x) const;
};

template <> struct Residues<BigInt> {
  explicit Residues(const ChainContext &c);
  ChainContext ctx;
  BigInt m;
  std::vector<BigInt> ppow;

  [[nodiscard]] BigInt reduce(const BigInt &x) const {
    BigInt r = x % m;
    return r < 0 ? BigInt(r + m) : r;
  }
  [[nodiscard]] BigInt add(const BigInt &a, const BigInt &b) const {
    BigInt s = a + b;
    return s >= m ? BigInt(s - m) : s;
  }
  [[nodiscard]] BigInt sub(const BigInt &a, const BigInt &b) const {
    return a >= b ? BigInt(a - b) : BigInt(a + m - b);
  }
  [[nodiscard]] BigInt neg(const BigInt &a) const { return a == 0 ? a : BigInt(m - a); }
  [[nodiscard]] BigInt mul(const BigInt &a, const BigInt &b) const { return (a * b) % m; }
  [[nodiscard]] unsigned val(const BigInt &a) const;
  [[nodiscard]] BigInt inv_unit(const BigInt &a) const;
  [[nodiscard]] BigInt from_int(long long x) const;
};

template <class T> class BasicMatrix {
public:
  BasicMatrix() = default;
  BasicMatrix(ChainContext c, std::size_t r, std::size_t k)
      : ctx_(c), rows_(r), cols_(k), data_(r * k, T(0)) {}

  static BasicMatrix identity(ChainContext c, std::size_t n);
  // Reduces every entry modulo p^N.
  static BasicMatrix from_rows(ChainContext c, const std::vector<std::vector<long long>> &rows);

  [[nodiscard]] const ChainContext &ctx() const { return ctx_; }
  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  T &operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T &operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  [[nodiscard]] std::vector<T> row(std::size_t i) const {
    return {data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_};
  }
  void append_row(const std::vector<T> &r);
  [[nodiscard]] const std::vector<T> &data() const { return data_; }
  [[nodiscard]] bool is_zero() const;

  bool operator==(const BasicMatrix &) const = default;

private:
  ChainContext ctx_;
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<T> data_;
};

struct Pivot {
  std::size_t row;
  std::size_t col;
  unsigned val;
  bool operator==(const Pivot &) const = default;
};

template <class T> struct BasicHowell {
  BasicMatrix<T> matrix;
  std::vector<Pivot> pivots;

  [[nodiscard]] std::size_t ambient() const { return matrix.cols(); }
  [[nodiscard]] const ChainContext &ctx() const { return matrix.ctx(); }
  // log_p of the number of elements in the span.
  [[nodiscard]] std::size_t log_size() const;
  bool operator==(const BasicHowell &) const = default;
};

template <class T> struct BasicFPModule {
  std::size_t ambient_rank = 0;
  BasicHowell<T> relations;

  [[nodiscard]] std::size_t log_cardinality() const;
  [[nodiscard]] BigInt cardinality() const;
};

using ChainMatrix = BasicMatrix<Word>;
using HowellForm = BasicHowell<Word>;
using FPModule = BasicFPModule<Word>;
using BigChainMatrix = BasicMatrix<BigInt>;
using BigHowellForm = BasicHowell<BigInt>;

struct ChainScalar {
  Word value = 0;
  ChainContext ctx;
  [[nodiscard]] unsigned valuation() const { return Residues<Word>(ctx).val(value); }
};

// OpenMP row sweeps; results are identical to the serial routines.
template <class T> BasicHowell<T> howell(const BasicMatrix<T> &m);
template <class T> BasicHowell<T> howell_serial(const BasicMatrix<T> &m);
template <class T> BasicMatrix<T> multiply(const BasicMatrix<T> &a, const BasicMatrix<T> &b);
template <class T> BasicMatrix<T> multiply_serial(const BasicMatrix<T> &a, const BasicMatrix<T> &b);

template <class T> BasicHowell<T> span_of(const std::vector<std::vector<T>> &rows, ChainContext c, std::size_t cols);
template <class T> BasicHowell<T> zero_span(ChainContext c, std::size_t cols);
template <class T> BasicHowell<T> full_span(ChainContext c, std::size_t cols);

// Remainder of v after reduction against the pivots; zero iff v is in the span.
template <class T> std::vector<T> reduce(std::vector<T> v, const BasicHowell<T> &span);
template <class T> bool membership(const std::vector<T> &v, const BasicHowell<T> &span);
template <class T> bool contains(const BasicHowell<T> &big, const BasicHowell<T> &small);

template <class T> BasicHowell<T> kernel(const BasicMatrix<T> &m);
template <class T> BasicHowell<T> intersect(const BasicHowell<T> &a, const BasicHowell<T> &b);
template <class T> BasicHowell<T> sum(const BasicHowell<T> &a, const BasicHowell<T> &b);
template <class T> BasicHowell<T> preimage(const BasicMatrix<T> &m, const BasicHowell<T> &target);
template <class T> BasicHowell<T> image(const BasicHowell<T> &span, const BasicMatrix<T> &m);
template <class T> BasicHowell<T> scale(const BasicHowell<T> &span, const T &c);
template <class T> BasicFPModule<T> quotient_presentation(const BasicHowell<T> &sub, std::size_t ambient_rank);
// nullopt means no power up to N * ambient_rank kills the module.
template <class T>
std::optional<unsigned> nilpotency_degree(const BasicMatrix<T> &action, const BasicFPModule<T> &module);

// Reduces a span over Z/p^N to Z/p^n (n <= N), keeping only the listed columns.
HowellForm project(const HowellForm &span, unsigned n, const std::vector<std::size_t> &keep);

} // namespace kl
