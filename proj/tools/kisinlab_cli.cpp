#include "kisinlab/io.hpp"
#include "kisinlab/scenario.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <functional>
#include <iostream>

using namespace kl;

namespace {

constexpr int kInputError = 3;

struct Options {
  std::string format = "text";
  bool no_timings = false;
  std::optional<std::uint64_t> seed;
  std::string file, name, a, b, seq, first, second, out_name;
  unsigned p = 3, N = 6, M = 54, r = 1, r_max = 3, trials = 30, k = 0, beta_degree = 1;
  int s = 0;
  std::optional<unsigned> height;
  std::string E;
};

std::uint64_t seed_of(const Options &o) {
  if (o.seed)
    return *o.seed;
  if (const char *env = std::getenv("KISINLAB_SEED")) {
    char *end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && end != env)
      return v;
    throw std::invalid_argument("KISINLAB_SEED is not an unsigned integer");
  }
  return kDefaultSeed;
}

int emit(const Options &o, const Report &rep) {
  std::cout << (o.format == "json" ? rep.to_json(!o.no_timings) : rep.to_text(!o.no_timings));
  return exit_code(rep.overall());
}

Claim make_claim(std::string name, std::string tag, Verdict v, std::string witness, const Ctx &ctx) {
  Claim c;
  c.name = std::move(name);
  c.tag = std::move(tag);
  c.verdict = v;
  c.witness = std::move(witness);
  c.prec_N = ctx->N;
  c.prec_M = ctx->M;
  return c;
}

Report file_report(const std::string &title, const ModuleFile &f) {
  Report r;
  r.title = title;
  r.context = describe(f.ctx);
  return r;
}

// Writes a module file holding the ctx and the given records.
int emit_modules(const ModuleFile &src, const std::vector<NamedKisin> &ks, const std::vector<NamedBreuil> &bs = {}) {
  ModuleFile out;
  out.ctx = src.ctx;
  out.kisin = ks;
  out.breuil = bs;
  std::cout << render_module_file(out);
  return 0;
}

std::string join(const std::vector<unsigned> &v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? ", " : "") + std::to_string(v[i]);
  return s + "}";
}

std::string first_sequence(const ModuleFile &f, const std::string &name) {
  if (!name.empty())
    return name;
  if (f.sequences.empty())
    throw std::invalid_argument("file has no sequence records");
  return f.sequences.front().name;
}

Report exactness_report(const std::string &title, const ModuleFile &f, const ExactnessReport &e) {
  auto rep = file_report(title, f);
  auto diag = [&](const std::string &fallback) {
    std::string s;
    for (const auto &d : e.diagnostics)
      s += (s.empty() ? "" : "; ") + d;
    return s.empty() ? fallback : s;
  };
  auto c1 = make_claim("underlying-exact", "check", verdict_of(e.underlying.exact()), diag("exact"), f.ctx);
  auto c2 = make_claim("fil-exact", "check", verdict_of(e.fil.exact()), e.fil.exact() ? "exact" : diag("not exact"),
                       f.ctx);
  for (auto *c : {&c1, &c2}) {
    c->prec_N = e.margin.N;
    c->prec_M = e.margin.M;
  }
  rep.claims = {c1, c2};
  return rep;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"kisinlab: Kisin and Breuil modules over truncated coefficient rings"};
  app.require_subcommand(1);
  Options o;
  std::function<int()> action;

  auto report_opts = [&](CLI::App *c) {
    c->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"text", "json"}));
    c->add_flag("--no-timings", o.no_timings, "Omit wall times so output is byte-identical across runs");
  };
  auto file_opt = [&](CLI::App *c) { c->add_option("--file", o.file, "Module file")->required(); };
  auto leaf = [&](CLI::App *parent, const std::string &name, const std::string &desc, std::function<int()> fn) {
    auto *c = parent->add_subcommand(name, desc);
    c->callback([&action, fn] { action = fn; });
    return c;
  };

  // ctx
  auto *ctx = app.add_subcommand("ctx", "Coefficient contexts");
  ctx->require_subcommand(1);
  auto *ctx_new = leaf(ctx, "new", "Print a module file header for a new context", [&] {
    Ctx c;
    if (o.E.empty())
      c = scenario_context(o.p, o.N, o.M);
    else
      c = parse_module_file("kisinlab-module 1\nctx p=" + std::to_string(o.p) + " N=" + std::to_string(o.N) +
                            " M=" + std::to_string(o.M) + " E=" + o.E + "\n")
              .ctx;
    std::cout << "kisinlab-module " << kFormatVersion << "\n" << render_ctx(c) << "\n";
    return 0;
  });
  ctx_new->add_option("--p", o.p)->required();
  ctx_new->add_option("--N", o.N)->required();
  ctx_new->add_option("--M", o.M)->required();
  ctx_new->add_option("--E", o.E, "Eisenstein polynomial, default u^(p-1) + p");

  // kisin
  auto *kisin = app.add_subcommand("kisin", "Kisin module operations");
  kisin->require_subcommand(1);
  auto *k_height = leaf(kisin, "height", "Check height <= r", [&] {
    auto f = read_module_file(o.file);
    const auto &m = f.kisin_module(o.name);
    auto h = check_height(m, o.r);
    auto rep = file_report("height of " + o.name, f);
    rep.claims.push_back(make_claim("height-at-most-" + std::to_string(o.r), "check", verdict_of(h.holds),
                                    h.holds ? "E^r M lies in the Frobenius span"
                                            : "E^" + std::to_string(o.r) + " e_" + std::to_string(h.failing_basis) +
                                                  " is not in the Frobenius span",
                                    f.ctx));
    return emit(o, rep);
  });
  auto *k_tensor = leaf(kisin, "tensor", "Tensor product of two modules", [&] {
    auto f = read_module_file(o.file);
    auto t = tensor(f.kisin_module(o.a), f.kisin_module(o.b));
    return emit_modules(f, {{o.out_name.empty() ? o.a + "_x_" + o.b : o.out_name, t}});
  });
  auto *k_twist = leaf(kisin, "twist", "Twist by S{s}", [&] {
    auto f = read_module_file(o.file);
    auto t = twist(f.kisin_module(o.name), o.s);
    return emit_modules(f, {{o.out_name.empty() ? o.name + "_tw" : o.out_name, t}});
  });
  auto *k_weights = leaf(kisin, "weights", "Hodge-Tate weights", [&] {
    auto f = read_module_file(o.file);
    auto rep = file_report("Hodge-Tate weights of " + o.name, f);
    try {
      auto w = hodge_tate_weights(f.kisin_module(o.name), o.height);
      rep.claims.push_back(make_claim("hodge-tate-weights", "computed", Verdict::Pass, join(w), f.ctx));
    } catch (const InsufficientPrecision &e) {
      rep.claims.push_back(make_claim("hodge-tate-weights", "computed", Verdict::Indeterminate, e.what(), f.ctx));
    }
    return emit(o, rep);
  });
  auto *k_dual = leaf(kisin, "dual", "Dual module", [&] {
    auto f = read_module_file(o.file);
    return emit_modules(f, {{o.out_name.empty() ? o.name + "_dual" : o.out_name, dual(f.kisin_module(o.name))}});
  });
  for (auto *c : {k_height, k_weights, k_twist, k_dual}) {
    file_opt(c);
    c->add_option("--name", o.name, "Kisin module record")->required();
  }
  k_height->add_option("--r", o.r)->required();
  k_weights->add_option("--r", o.height, "Claimed height bound");
  k_twist->add_option("--s", o.s)->required();
  file_opt(k_tensor);
  k_tensor->add_option("--a", o.a)->required();
  k_tensor->add_option("--b", o.b)->required();
  for (auto *c : {k_tensor, k_twist, k_dual})
    c->add_option("--out-name", o.out_name, "Name of the result record");
  for (auto *c : {k_height, k_weights})
    report_opts(c);

  // seq
  auto *seq = app.add_subcommand("seq", "Sequences of Kisin modules");
  seq->require_subcommand(1);
  auto *s_check = leaf(seq, "check", "Check exactness of a sequence", [&] {
    auto f = read_module_file(o.file);
    auto name = first_sequence(f, o.seq);
    auto maps = f.sequence(name);
    auto e = check_exact_sequence(maps);
    auto rep = file_report("sequence " + name, f);
    std::string diag;
    for (const auto &d : e.diagnostics)
      diag += (diag.empty() ? "" : "; ") + d;
    auto add = [&](const std::string &n, bool ok, const std::string &w) {
      auto c = make_claim(n, "check", verdict_of(ok), w, f.ctx);
      c.prec_N = e.margin.N;
      c.prec_M = e.margin.M;
      rep.claims.push_back(c);
    };
    add("head-injective", e.head_injective, e.head_injective ? "trivial kernel" : diag);
    add("junctions-exact", e.junctions_exact(), e.junctions_exact() ? "ker = im" : diag);
    std::string tw = e.tail_surjective ? "surjective" : "not surjective";
    if (e.tail_ideal)
      tw += "; image ideal classified " + to_string(e.tail_ideal->verdict);
    add("tail-surjective", e.tail_surjective, tw);
    return emit(o, rep);
  });
  file_opt(s_check);
  s_check->add_option("--name", o.seq, "Sequence record, default the first");
  report_opts(s_check);

  // breuil
  auto *breuil = app.add_subcommand("breuil", "Breuil modules");
  breuil->require_subcommand(1);
  auto *b_from = leaf(breuil, "from-kisin", "Breuil module of a Kisin module", [&] {
    auto f = read_module_file(o.file);
    const auto &k = f.kisin_module(o.name);
    auto b = from_kisin(k, o.r);
    return emit_modules(f, {{o.name, k}},
                        {{o.out_name.empty() ? o.name + "_S" : o.out_name, o.name, o.r, std::move(b)}});
  });
  auto *b_axioms = leaf(breuil, "axioms", "Check the strongly divisible axioms", [&] {
    auto f = read_module_file(o.file);
    auto rep = file_report("axioms of " + o.name, f);
    rep.claims = check_sdm_axioms(f.breuil_module(o.name));
    for (auto &c : rep.claims) {
      c.tag = "check";
      c.prec_N = f.ctx->N;
      c.prec_M = f.ctx->M;
    }
    return emit(o, rep);
  });
  auto *b_mono = leaf(breuil, "monodromy", "Check a monodromy operator", [&] {
    auto f = read_module_file(o.file);
    auto b = f.breuil_module(o.name);
    std::string title = "monodromy of " + o.name;
    if (!b.monodromy) {
      b.monodromy = SMatrix(f.ctx, b.rank(), b.rank());
      title += " (zero matrix candidate)";
    }
    auto rep = file_report(title, f);
    rep.claims = check_monodromy(b);
    for (auto &c : rep.claims) {
      c.tag = "check";
      c.prec_N = f.ctx->N;
      c.prec_M = f.ctx->M;
    }
    return emit(o, rep);
  });
  auto *b_exact = leaf(breuil, "exact", "Exactness of the Breuil image of a sequence", [&] {
    auto f = read_module_file(o.file);
    auto name = first_sequence(f, o.seq);
    auto e = check_exact_breuil(from_kisin(f.sequence(name), o.r));
    return emit(o, exactness_report("Breuil image of " + name, f, e));
  });
  auto *b_tensor = leaf(breuil, "tensor", "Tensor product of two Breuil modules", [&] {
    auto f = read_module_file(o.file);
    TensorProbe probe;
    auto t = tensor_breuil(f.breuil_module(o.a), f.breuil_module(o.b), &probe);
    auto rep = file_report("tensor " + o.a + " x " + o.b, f);
    rep.claims.push_back(make_claim("fil-contains-products", "check", verdict_of(probe.contains_products),
                                    probe.contains_products ? "Fil_a (x) Fil_b and Fil^r S M lie in Fil"
                                                            : "a product lies outside Fil",
                                    f.ctx));
    rep.claims.push_back(make_claim("fil-sum-probe", "recorded", Verdict::Pass,
                                    probe.equals_sum ? "Fil equals the sum span" : "Fil is larger than the sum span",
                                    f.ctx));
    rep.claims.push_back(make_claim("tensor-axioms", "check", overall(check_sdm_axioms(t)),
                                    "rank " + std::to_string(t.rank()) + ", r = " + std::to_string(t.r), f.ctx));
    return emit(o, rep);
  });
  auto *b_splice = leaf(breuil, "splice", "Splice two short exact sequences and check the complex", [&] {
    auto f = read_module_file(o.file);
    auto s1 = from_kisin(f.sequence(o.first), o.r);
    auto s2 = from_kisin(f.sequence(o.second), o.r);
    auto e = check_exact_complex(splice(s1, s2));
    return emit(o, exactness_report("splice of " + o.first + " and " + o.second, f, e));
  });
  for (auto *c : {b_from, b_axioms, b_mono, b_exact, b_tensor, b_splice})
    file_opt(c);
  for (auto *c : {b_from, b_axioms, b_mono})
    c->add_option("--name", o.name)->required();
  for (auto *c : {b_from, b_exact, b_splice})
    c->add_option("--r", o.r)->required();
  b_from->add_option("--out-name", o.out_name, "Name of the Breuil record");
  b_exact->add_option("--name", o.seq, "Sequence record, default the first");
  b_tensor->add_option("--a", o.a)->required();
  b_tensor->add_option("--b", o.b)->required();
  b_splice->add_option("--first", o.first)->required();
  b_splice->add_option("--second", o.second)->required();
  for (auto *c : {b_axioms, b_mono, b_exact, b_tensor, b_splice})
    report_opts(c);

  // paper
  struct Prec {
    unsigned p, N, M;
  };
  Prec cx{3, 6, 54}, kl{3, 3, 18}, tw{5, 6, 60}, ex{5, 4, 40}, tor{3, 4, 54};
  auto *paper = app.add_subcommand("paper", "Reproduce the explicit computations");
  paper->require_subcommand(1);
  auto *p_cx = leaf(paper, "counterexample", "Non-exactness example",
                    [&] { return emit(o, run_counterexample(cx.p, cx.N, cx.M, o.beta_degree)); });
  auto *p_kl = leaf(paper, "key-lemma", "Ideals with I inside S phi(I)",
                    [&] { return emit(o, run_key_lemma_suite(kl.p, kl.N, kl.M, o.trials, seed_of(o))); });
  auto *p_tw = leaf(paper, "twists", "Breuil-Kisin twists",
                    [&] { return emit(o, run_twist_suite(tw.p, tw.N, tw.M, o.r_max)); });
  auto *p_ex = leaf(paper, "exactness", "Exactness transport",
                    [&] { return emit(o, run_exactness_suite(ex.p, ex.N, ex.M, o.r, o.trials, seed_of(o))); });
  auto *p_tor = leaf(paper, "tor", "Tor_1 against S", [&] { return emit(o, run_tor(tor.p, tor.N, tor.M, o.k)); });

  for (auto [c, pr] : {std::pair{p_cx, &cx}, {p_kl, &kl}, {p_tw, &tw}, {p_ex, &ex}, {p_tor, &tor}}) {
    c->add_option("--p", pr->p)->capture_default_str();
    c->add_option("--N", pr->N)->capture_default_str();
    c->add_option("--M", pr->M)->capture_default_str();
    report_opts(c);
  }
  p_cx->add_option("--beta-degree", o.beta_degree, "Degree k of beta(e_2) = u^k")->capture_default_str();
  p_kl->add_option("--trials", o.trials)->default_val(200);
  p_ex->add_option("--trials", o.trials)->default_val(30);
  p_ex->add_option("--r", o.r)->default_val(2);
  p_tw->add_option("--r-max", o.r_max)->default_val(3);
  p_tor->add_option("--k", o.k, "Koszul exponent, default p");
  for (auto *c : {p_kl, p_ex})
    c->add_option("--seed", o.seed, "Random seed, default $KISINLAB_SEED or a fixed value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kInputError;
  }

  try {
    return action();
  } catch (const ParseError &e) {
    std::cerr << "kisinlab: " << (o.file.empty() ? "" : o.file + ": ") << e.what() << "\n";
  } catch (const InsufficientPrecision &e) {
    std::cerr << "kisinlab: indeterminate at this precision: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "kisinlab: " << e.what() << "\n";
  }
  return kInputError;
}
