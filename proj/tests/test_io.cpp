#include "doctest.h"

#include "kisinlab/io.hpp"
#include "kisinlab/scenario.hpp"

#include "json.hpp"

#include <random>

using namespace kl;

namespace {

std::string fixture(const std::string &name) { return std::string(KL_FIXTURES) + "/" + name; }

ParseError parse_error(std::string_view text) {
  try {
    parse_module_file(text);
  } catch (const ParseError &e) {
    return e;
  }
  FAIL("expected a parse error");
  return ParseError(ParseError::Kind::Syntax, 0, 0, "");
}

const char *kHead = "kisinlab-module 1\nctx p=3 N=4 M=18 E=3 + u^2\n";

} // namespace

TEST_CASE("minimal file") {
  auto f = read_module_file(fixture("minimal.kmod"));
  CHECK(f.ctx->p == 5);
  CHECK(f.ctx->e == 4);
  CHECK(f.kisin.empty());
  CHECK(f.morphisms.empty());
  CHECK(parse_module_file(render_module_file(f)) == f);
}

TEST_CASE("counterexample fixture") {
  auto f = read_module_file(fixture("counterexample.kmod"));
  auto ctx = scenario_context(3, 6, 54);
  auto cx = counterexample_data(ctx);
  CHECK(f.kisin_module("M") == cx.middle);
  CHECK(f.kisin_module("T") == cx.twist);
  CHECK(f.morphism("alpha").matrix == cx.alpha.matrix);
  CHECK(f.morphism("beta").matrix == cx.beta.matrix);
  CHECK(f.breuil_module("BM") == from_kisin(cx.middle, 1));
  auto seq = f.sequence("cx");
  REQUIRE(seq.size() == 2);
  auto rep = check_exact_sequence(seq);
  CHECK(rep.left_exact());
  CHECK_FALSE(rep.tail_surjective);
  CHECK_THROWS_AS((void)f.kisin_module("nope"), std::out_of_range);

  auto text = render_module_file(f);
  auto again = parse_module_file(text);
  CHECK(again == f);
  CHECK(render_module_file(again) == text);
}

TEST_CASE("round trip with monodromy, denominators and sequences") {
  auto f = read_module_file(fixture("twist.kmod"));
  REQUIRE(f.breuil.size() == 1);
  CHECK(f.breuil[0].module.monodromy);
  CHECK(parse_module_file(render_module_file(f)) == f);

  auto g = read_module_file(fixture("counterexample.kmod"));
  g.kisin.push_back({"D", dual(g.kisin_module("M"))});
  g.kisin.push_back({"T2", twist(g.kisin_module("M"), 2)});
  CHECK(g.kisin.back().module.denom > 0);
  CHECK(parse_module_file(render_module_file(g)) == g);

  std::mt19937_64 rng(5);
  auto c = RingContext::make(5, 4, 40, {5, 0, 0, 0, 1});
  for (int t = 0; t < 10; ++t) {
    ModuleFile h;
    h.ctx = c;
    h.kisin.push_back({"A", random_kisin(c, 1 + t % 3, 2, rng)});
    CHECK(parse_module_file(render_module_file(h)) == h);
  }
}

TEST_CASE("element syntax is closed under render") {
  std::mt19937_64 rng(3);
  auto c = RingContext::make(3, 4, 18, {3, 0, 1});
  for (int t = 0; t < 50; ++t) {
    auto a = sigma_zero(c);
    auto b = s_zero(c);
    for (unsigned n = 0; n < c->M; ++n)
      if (rng() % 3 == 0) {
        a.c[n] = rng() % c->R().m;
        b.c[n] = rng() % c->R().m;
      }
    CHECK(parse_sigma(c, render(a)) == a);
    CHECK(parse_s(c, render(b)) == b);
  }
  CHECK(parse_sigma(c, "-1") == sigma_const(c, -1));
  CHECK(parse_sigma(c, "u - u + 2*u^3") == sigma_monomial(c, 2, 3));
  CHECK(parse_s(c, "-3*b4") == s_basis(c, 4, -3));
  CHECK_THROWS_AS(parse_sigma(c, "u^18"), ParseError);
  CHECK_THROWS_AS(parse_sigma(c, "2*b3"), ParseError);
  CHECK_THROWS_AS(parse_s(c, "u"), ParseError);
}

TEST_CASE("syntax errors carry positions") {
  auto e = parse_error("kisinlab-module 1\nctx p=3 N=4 M=18 E=3 + u^2 colour=red\n");
  CHECK(e.kind == ParseError::Kind::Syntax);
  CHECK(e.line == 2);
  CHECK(e.column == 28);
  CHECK(e.message.find("colour") != std::string::npos);

  e = parse_error(std::string(kHead) + "kisin A rank=1 shade=2\nrow 1\nend\n");
  CHECK(e.line == 3);
  CHECK(e.column == 16);

  e = parse_error(std::string(kHead) + "kisin A rank=1\nrow 1 + * u\nend\n");
  CHECK(e.line == 4);
  CHECK(e.column == 9);

  e = parse_error(std::string(kHead) + "kisin A rank=2\nrow 1, 0, 0\n");
  CHECK(e.line == 4);
  CHECK(e.column == 11);

  e = parse_error(std::string(kHead) + "\n\n# comment\nmodule A\n");
  CHECK(e.line == 6);
  CHECK(e.column == 1);

  e = parse_error(std::string(kHead) + "kisin A rank=1\nrow 1\n");
  CHECK(e.message.find("no 'end'") != std::string::npos);

  e = parse_error("kisinlab-module 7\n");
  CHECK(e.column == 17);
  CHECK(parse_error("").line == 1);
}

TEST_CASE("semantic errors name the invariant") {
  auto e = parse_error("kisinlab-module 1\nctx p=3 N=6 M=54 E=1 + u^2\n");
  CHECK(e.kind == ParseError::Kind::Semantic);
  CHECK(e.line == 2);
  CHECK(std::string(e.what()).find("Eisenstein") != std::string::npos);
  CHECK_THROWS_AS(read_module_file(fixture("non_eisenstein.kmod")), ParseError);

  e = parse_error(std::string(kHead) + "kisin A rank=1\nrow u\nend\n");
  CHECK(e.kind == ParseError::Kind::Semantic);
  CHECK(e.line == 3);

  e = parse_error(std::string(kHead) + "kisin A rank=1\nrow 1\nend\nkisin A rank=1\nrow 1\nend\n");
  CHECK(e.message.find("duplicate") != std::string::npos);

  e = parse_error(std::string(kHead) + "kisin A rank=1\nrow 1\nend\nmorphism f from A to B\nrow 1\nend\n");
  CHECK(e.message.find("unknown Kisin module 'B'") != std::string::npos);

  // 3 + u^2 into the unit module is not Frobenius compatible
  e = parse_error(std::string(kHead) + "kisin A rank=1\nrow 1\nend\nmorphism f from A to A\nrow 3 + u^2\nend\n");
  CHECK(e.kind == ParseError::Kind::Semantic);
  CHECK(e.line == 6);

  // S{-1} is not of height 0
  e = parse_error(std::string(kHead) + "kisin T rank=1\nrow 3 + u^2\nend\nbreuil B from T r=0\nend\n");
  CHECK(e.message.find("height") != std::string::npos);
}

TEST_CASE("non-composable sequences") {
  auto f = read_module_file(fixture("bad_sequence.kmod"));
  CHECK_THROWS_AS((void)f.sequence("bad"), NotComposable);
}

TEST_CASE("report renderings agree") {
  auto rep = run_counterexample(3, 6, 54);
  auto j = nlohmann::json::parse(rep.to_json());
  auto text = rep.to_text();
  CHECK(j["claims"].size() == rep.claims.size());
  for (const auto &c : j["claims"]) {
    auto line = "[" + c["verdict"].get<std::string>() + "]";
    auto pos = text.find(c["claim"].get<std::string>());
    REQUIRE(pos != std::string::npos);
    CHECK(text.rfind(line, pos) != std::string::npos);
    CHECK(c["precision"]["N"].get<unsigned>() > 0);
  }
  CHECK(j["overall"] == "pass");
  CHECK(run_counterexample(3, 6, 54).to_json(false) == rep.to_json(false));
}
