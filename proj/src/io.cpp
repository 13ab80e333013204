#include "kisinlab/io.hpp"

#include <cctype>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace kl {

ParseError::ParseError(Kind k, std::size_t l, std::size_t c, const std::string &m)
    : std::runtime_error("line " + std::to_string(l) + (c ? ", column " + std::to_string(c) : std::string()) +
                         ": " + (k == Kind::Syntax ? "syntax error: " : "invalid record: ") + m),
      kind(k), line(l), column(c), message(m) {}

namespace {

struct Term {
  long long coeff = 0;
  char var = 0; // 0, 'u' or 'b'
  unsigned exp = 0;
};

class Cursor {
public:
  Cursor(std::string_view text, std::size_t line, std::size_t col0 = 0) : s_(text), line_(line), col0_(col0) {}

  [[noreturn]] void fail(const std::string &msg) const {
    throw ParseError(ParseError::Kind::Syntax, line_, col0_ + pos_ + 1, msg);
  }
  [[noreturn]] void fail_at(std::size_t pos, const std::string &msg) const {
    throw ParseError(ParseError::Kind::Syntax, line_, col0_ + pos + 1, msg);
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t'))
      ++pos_;
  }
  [[nodiscard]] bool done() {
    skip_ws();
    return pos_ >= s_.size();
  }
  [[nodiscard]] char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  // Start of the next token.
  [[nodiscard]] std::size_t pos() {
    skip_ws();
    return pos_;
  }
  bool accept(char c) {
    if (peek() != c)
      return false;
    ++pos_;
    return true;
  }

  std::string word() {
    skip_ws();
    const auto start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ' ' && s_[pos_] != '\t' && s_[pos_] != '=')
      ++pos_;
    if (start == pos_)
      fail("expected a word");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string name() {
    skip_ws();
    const auto start = pos_;
    if (pos_ >= s_.size() || !(std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      fail("expected a name");
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
                                s_[pos_] == '-' || s_[pos_] == '\''))
      ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  unsigned long long natural() {
    skip_ws();
    const auto start = pos_;
    unsigned long long v = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      const unsigned d = s_[pos_] - '0';
      if (v > (static_cast<unsigned long long>(std::numeric_limits<long long>::max()) - d) / 10)
        fail_at(start, "integer out of range");
      v = v * 10 + d;
      ++pos_;
    }
    if (start == pos_)
      fail("expected an integer");
    return v;
  }

  unsigned small(unsigned limit, const char *what) {
    const auto start = pos();
    auto v = natural();
    if (v > limit)
      fail_at(start, std::string(what) + " out of range");
    return static_cast<unsigned>(v);
  }

  // key=value; returns the key and leaves the cursor after '='.
  std::pair<std::string, std::size_t> key() {
    skip_ws();
    const auto start = pos_;
    std::string k = word();
    if (!accept('='))
      fail_at(start, "expected key=value, got '" + k + "'");
    return {k, start};
  }

  // term {(+|-) term}, stopping at ',' or end of line.
  std::vector<Term> poly() {
    std::vector<Term> out;
    bool neg = false;
    if (accept('-'))
      neg = true;
    for (;;) {
      out.push_back(term(neg));
      if (accept('+'))
        neg = false;
      else if (accept('-'))
        neg = true;
      else
        break;
    }
    return out;
  }

  void finish() {
    if (!done())
      fail("unexpected trailing text");
  }

private:
  Term term(bool neg) {
    Term t;
    const char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c))) {
      t.coeff = static_cast<long long>(natural());
      if (!accept('*')) {
        if (neg)
          t.coeff = -t.coeff;
        return t;
      }
    } else {
      t.coeff = 1;
    }
    const char v = peek();
    if (v == 'u') {
      ++pos_;
      t.var = 'u';
      t.exp = 1;
      if (accept('^'))
        t.exp = small(1u << 20, "exponent");
    } else if (v == 'b') {
      ++pos_;
      t.var = 'b';
      if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
        fail("expected an index after 'b'");
      t.exp = small(1u << 20, "index");
    } else {
      fail("expected a coefficient, u or b");
    }
    if (neg)
      t.coeff = -t.coeff;
    return t;
  }

  std::string_view s_;
  std::size_t line_, col0_, pos_ = 0;
};

Word reduce_mod(long long v, Word m) {
  const auto r = static_cast<long long>(static_cast<unsigned long long>(v < 0 ? -(v + 1) : v) % m);
  return v < 0 ? (m - 1 - static_cast<Word>(r)) : static_cast<Word>(r);
}

SigmaElem sigma_of(const Ctx &ctx, const std::vector<Term> &ts, const Cursor &cur, std::size_t at) {
  auto x = sigma_zero(ctx);
  const Word m = ctx->R().m;
  for (const auto &t : ts) {
    if (t.var == 'b')
      cur.fail_at(at, "b-terms are not allowed in a Frobenius entry");
    const unsigned n = t.var ? t.exp : 0;
    if (n >= ctx->M)
      cur.fail_at(at, "degree " + std::to_string(n) + " is not below M = " + std::to_string(ctx->M));
    x.c[n] = (x.c[n] + reduce_mod(t.coeff, m)) % m;
  }
  return x;
}

SElem s_of(const Ctx &ctx, const std::vector<Term> &ts, const Cursor &cur, std::size_t at) {
  auto x = s_zero(ctx);
  const Word m = ctx->R().m;
  for (const auto &t : ts) {
    if (t.var == 'u')
      cur.fail_at(at, "S entries are written in the basis b_n");
    const unsigned n = t.var ? t.exp : 0;
    if (n >= ctx->M)
      cur.fail_at(at, "index " + std::to_string(n) + " is not below M = " + std::to_string(ctx->M));
    x.c[n] = (x.c[n] + reduce_mod(t.coeff, m)) % m;
  }
  return x;
}

struct Line {
  std::size_t no;
  std::string text;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> out;
  std::size_t no = 0, start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos)
      end = text.size();
    ++no;
    std::string l(text.substr(start, end - start));
    if (!l.empty() && l.back() == '\r')
      l.pop_back();
    if (auto h = l.find('#'); h != std::string::npos)
      l.erase(h);
    if (l.find_first_not_of(" \t") != std::string::npos)
      out.push_back({no, l});
    start = end + 1;
  }
  return out;
}

[[noreturn]] void semantic(std::size_t line, const std::string &msg) {
  throw ParseError(ParseError::Kind::Semantic, line, 0, msg);
}

class Parser {
public:
  explicit Parser(std::string_view text) : lines_(split_lines(text)) {}

  ModuleFile run() {
    if (lines_.empty())
      throw ParseError(ParseError::Kind::Syntax, 1, 1, "empty file, expected 'kisinlab-module'");
    header();
    ctx_line();
    while (i_ < lines_.size()) {
      Cursor c(lines_[i_].text, lines_[i_].no);
      const auto start = c.pos();
      auto kw = c.word();
      if (kw == "kisin")
        kisin(c);
      else if (kw == "morphism")
        morphism(c);
      else if (kw == "breuil")
        breuil(c);
      else if (kw == "sequence")
        sequence(c);
      else
        c.fail_at(start, "unknown record '" + kw + "'");
    }
    return std::move(f_);
  }

private:
  void header() {
    const auto &l = lines_[i_++];
    Cursor c(l.text, l.no);
    if (c.word() != "kisinlab-module")
      c.fail_at(0, "expected 'kisinlab-module'");
    const auto at = c.pos();
    f_.version = c.small(1000, "version");
    if (f_.version != kFormatVersion)
      c.fail_at(at, "unsupported format version " + std::to_string(f_.version));
    c.finish();
  }

  void ctx_line() {
    if (i_ >= lines_.size())
      throw ParseError(ParseError::Kind::Syntax, lines_.back().no + 1, 1, "expected a ctx line");
    const auto &l = lines_[i_++];
    Cursor c(l.text, l.no);
    if (c.word() != "ctx")
      c.fail_at(0, "expected 'ctx'");
    std::optional<unsigned> p, N, M;
    std::optional<std::vector<long long>> E;
    while (!c.done()) {
      auto [k, at] = c.key();
      if (k == "p")
        p = c.small(1u << 16, "p");
      else if (k == "N")
        N = c.small(64, "N");
      else if (k == "M")
        M = c.small(1u << 16, "M");
      else if (k == "E") {
        std::vector<long long> coeffs;
        for (const auto &t : c.poly()) {
          if (t.var == 'b')
            c.fail_at(at, "E must be a polynomial in u");
          const unsigned n = t.var ? t.exp : 0;
          if (n > 64)
            c.fail_at(at, "E has degree above 64");
          if (coeffs.size() <= n)
            coeffs.resize(n + 1, 0);
          coeffs[n] += t.coeff;
        }
        E = coeffs;
      } else
        c.fail_at(at, "unknown field '" + k + "'");
    }
    if (!p || !N || !M || !E)
      c.fail("ctx needs p, N, M and E");
    try {
      f_.ctx = RingContext::make(*p, *N, *M, *E);
    } catch (const std::invalid_argument &e) {
      semantic(l.no, e.what());
    }
  }

  void unique(const std::string &name, std::size_t line) {
    if (!names_.insert(name).second)
      semantic(line, "duplicate name '" + name + "'");
  }

  // Reads "row" lines up to "end"; each must have `cols` entries.
  template <class Fn>
  void rows(const char *kw, std::size_t nrows, std::size_t cols, std::size_t head_line, Fn &&store) {
    std::size_t r = 0;
    for (;;) {
      if (i_ >= lines_.size())
        throw ParseError(ParseError::Kind::Syntax, lines_.back().no + 1, 1,
                         "record opened on line " + std::to_string(head_line) + " has no 'end'");
      const auto &l = lines_[i_++];
      Cursor c(l.text, l.no);
      const auto start = c.pos();
      auto w = c.word();
      if (w == "end") {
        c.finish();
        break;
      }
      if (w != kw)
        c.fail_at(start, "expected '" + std::string(kw) + "' or 'end'");
      if (r >= nrows)
        c.fail_at(start, "more than " + std::to_string(nrows) + " rows");
      std::size_t j = 0;
      for (;;) {
        const auto at = c.pos();
        if (j >= cols)
          c.fail_at(at, "more than " + std::to_string(cols) + " entries");
        store(r, j, c.poly(), c, at);
        ++j;
        if (!c.accept(','))
          break;
      }
      c.finish();
      if (j != cols)
        c.fail("expected " + std::to_string(cols) + " entries, got " + std::to_string(j));
      ++r;
    }
    rows_read_ = r;
  }

  void kisin(Cursor &c) {
    const auto line = lines_[i_].no;
    ++i_;
    auto name = c.name();
    unique(name, line);
    std::optional<unsigned> rank;
    unsigned denom = 0;
    while (!c.done()) {
      auto [k, at] = c.key();
      if (k == "rank")
        rank = c.small(64, "rank");
      else if (k == "denom")
        denom = c.small(1024, "denom");
      else
        c.fail_at(at, "unknown field '" + k + "'");
    }
    if (!rank || *rank == 0)
      c.fail("kisin record needs rank >= 1");
    SigmaMatrix F(f_.ctx, *rank, *rank);
    rows("row", *rank, *rank, line, [&](std::size_t i, std::size_t j, const std::vector<Term> &ts, const Cursor &cur,
                                        std::size_t at) { F(i, j) = sigma_of(f_.ctx, ts, cur, at); });
    if (rows_read_ != *rank)
      semantic(line, "expected " + std::to_string(*rank) + " rows, got " + std::to_string(rows_read_));
    try {
      f_.kisin.push_back({name, make_kisin(f_.ctx, F, denom)});
    } catch (const std::exception &e) {
      semantic(line, "Kisin module '" + name + "': " + e.what());
    }
  }

  const KisinModule &lookup(const std::string &name, std::size_t line) {
    for (const auto &k : f_.kisin)
      if (k.name == name)
        return k.module;
    semantic(line, "unknown Kisin module '" + name + "'");
  }

  void morphism(Cursor &c) {
    const auto line = lines_[i_].no;
    ++i_;
    auto name = c.name();
    unique(name, line);
    auto kw_at = c.pos();
    if (c.word() != "from")
      c.fail_at(kw_at, "expected 'from'");
    auto src = c.name();
    kw_at = c.pos();
    if (c.word() != "to")
      c.fail_at(kw_at, "expected 'to'");
    auto tgt = c.name();
    c.finish();
    const auto &s = lookup(src, line);
    const auto &t = lookup(tgt, line);
    SigmaMatrix F(f_.ctx, t.rank(), s.rank());
    rows("row", t.rank(), s.rank(), line,
         [&](std::size_t i, std::size_t j, const std::vector<Term> &ts, const Cursor &cur, std::size_t at) {
           F(i, j) = sigma_of(f_.ctx, ts, cur, at);
         });
    if (rows_read_ != t.rank())
      semantic(line, "expected " + std::to_string(t.rank()) + " rows, got " + std::to_string(rows_read_));
    KisinMorphism m{s, t, F};
    try {
      auto chk = check_morphism(m);
      if (!chk.valid)
        semantic(line, "morphism '" + name + "' does not commute with Frobenius at entry (" +
                           std::to_string(chk.row) + ", " + std::to_string(chk.col) + ")");
    } catch (const InsufficientPrecision &e) {
      semantic(line, "morphism '" + name + "': " + e.what());
    }
    f_.morphisms.push_back({name, src, tgt, m});
  }

  void breuil(Cursor &c) {
    const auto line = lines_[i_].no;
    ++i_;
    auto name = c.name();
    unique(name, line);
    const auto kw_at = c.pos();
    if (c.word() != "from")
      c.fail_at(kw_at, "expected 'from'");
    auto src = c.name();
    std::optional<unsigned> r;
    while (!c.done()) {
      auto [k, at] = c.key();
      if (k == "r")
        r = c.small(1024, "r");
      else
        c.fail_at(at, "unknown field '" + k + "'");
    }
    if (!r)
      c.fail("breuil record needs r");
    const auto &k = lookup(src, line);
    SMatrix N(f_.ctx, k.rank(), k.rank());
    rows("monodromy", k.rank(), k.rank(), line,
         [&](std::size_t i, std::size_t j, const std::vector<Term> &ts, const Cursor &cur, std::size_t at) {
           N(i, j) = s_of(f_.ctx, ts, cur, at);
         });
    if (rows_read_ != 0 && rows_read_ != k.rank())
      semantic(line, "expected 0 or " + std::to_string(k.rank()) + " monodromy rows, got " +
                         std::to_string(rows_read_));
    try {
      auto b = from_kisin(k, *r);
      if (rows_read_ == k.rank())
        b.monodromy = N;
      f_.breuil.push_back({name, src, *r, std::move(b)});
    } catch (const std::exception &e) {
      semantic(line, "Breuil module '" + name + "': " + e.what());
    }
  }

  void sequence(Cursor &c) {
    const auto line = lines_[i_].no;
    ++i_;
    auto name = c.name();
    unique(name, line);
    NamedSequence s{name, {}};
    while (!c.done()) {
      const auto at = c.pos();
      auto m = c.name();
      bool found = false;
      for (const auto &x : f_.morphisms)
        found = found || x.name == m;
      if (!found)
        c.fail_at(at, "unknown morphism '" + m + "'");
      s.maps.push_back(m);
    }
    if (s.maps.empty())
      c.fail("sequence needs at least one morphism");
    f_.sequences.push_back(std::move(s));
  }

  std::vector<Line> lines_;
  std::size_t i_ = 0, rows_read_ = 0;
  ModuleFile f_;
  std::set<std::string> names_;
};

template <class M> void render_rows(std::ostream &os, const char *kw, const M &m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << kw;
    for (std::size_t j = 0; j < m.cols(); ++j)
      os << (j ? ", " : " ") << render(m(i, j));
    os << "\n";
  }
}

} // namespace

bool ModuleFile::operator==(const ModuleFile &o) const {
  return version == o.version && ctx->same(*o.ctx) && kisin == o.kisin && morphisms == o.morphisms &&
         breuil == o.breuil && sequences == o.sequences;
}

const KisinModule &ModuleFile::kisin_module(const std::string &name) const {
  for (const auto &k : kisin)
    if (k.name == name)
      return k.module;
  throw std::out_of_range("no Kisin module named '" + name + "'");
}

const KisinMorphism &ModuleFile::morphism(const std::string &name) const {
  for (const auto &m : morphisms)
    if (m.name == name)
      return m.morphism;
  throw std::out_of_range("no morphism named '" + name + "'");
}

const BreuilModule &ModuleFile::breuil_module(const std::string &name) const {
  for (const auto &b : breuil)
    if (b.name == name)
      return b.module;
  throw std::out_of_range("no Breuil module named '" + name + "'");
}

std::vector<KisinMorphism> ModuleFile::sequence(const std::string &name) const {
  for (const auto &s : sequences)
    if (s.name == name) {
      std::vector<KisinMorphism> out;
      for (const auto &m : s.maps)
        out.push_back(morphism(m));
      require_composable(out);
      return out;
    }
  throw std::out_of_range("no sequence named '" + name + "'");
}

ModuleFile parse_module_file(std::string_view text) { return Parser(text).run(); }

std::string render_ctx(const Ctx &ctx) {
  std::ostringstream os;
  os << "ctx p=" << ctx->p << " N=" << ctx->N << " M=" << ctx->M << " E=";
  bool first = true;
  for (std::size_t n = 0; n < ctx->E.coeffs.size(); ++n) {
    const auto a = ctx->E.coeffs[n];
    if (a == 0)
      continue;
    os << (first ? "" : " + ") << a;
    if (n == 1)
      os << "*u";
    else if (n > 1)
      os << "*u^" << n;
    first = false;
  }
  return os.str();
}

std::string render_module_file(const ModuleFile &f) {
  std::ostringstream os;
  os << "kisinlab-module " << f.version << "\n" << render_ctx(f.ctx) << "\n";
  for (const auto &k : f.kisin) {
    os << "\nkisin " << k.name << " rank=" << k.module.rank() << " denom=" << k.module.denom << "\n";
    render_rows(os, "row", k.module.frobenius);
    os << "end\n";
  }
  for (const auto &m : f.morphisms) {
    os << "\nmorphism " << m.name << " from " << m.source << " to " << m.target << "\n";
    render_rows(os, "row", m.morphism.matrix);
    os << "end\n";
  }
  for (const auto &b : f.breuil) {
    os << "\nbreuil " << b.name << " from " << b.source << " r=" << b.r << "\n";
    if (b.module.monodromy)
      render_rows(os, "monodromy", *b.module.monodromy);
    os << "end\n";
  }
  if (!f.sequences.empty())
    os << "\n";
  for (const auto &s : f.sequences) {
    os << "sequence " << s.name;
    for (const auto &m : s.maps)
      os << " " << m;
    os << "\n";
  }
  return os.str();
}

ModuleFile read_module_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_module_file(ss.str());
}

SigmaElem parse_sigma(const Ctx &ctx, std::string_view text) {
  Cursor c(text, 1);
  const auto at = c.pos();
  auto ts = c.poly();
  c.finish();
  return sigma_of(ctx, ts, c, at);
}

SElem parse_s(const Ctx &ctx, std::string_view text) {
  Cursor c(text, 1);
  const auto at = c.pos();
  auto ts = c.poly();
  c.finish();
  return s_of(ctx, ts, c, at);
}

} // namespace kl
