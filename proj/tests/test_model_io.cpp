#include "doctest.h"
#include "planlearn/model_io.hpp"
#include "test_util.hpp"

using namespace planlearn;

TEST_CASE("formula parsing and printing") {
  SUBCASE("precedence and sugar") {
    const Formula f = parse_formula_text("loaded = 1 -> loc_r = loc_p");
    // implication desugars: !(loaded = 1) | loc_r = loc_p
    REQUIRE(f.kind() == Formula::Kind::disj);
    CHECK(f.children()[0].kind() == Formula::Kind::neg);
    CHECK(f.children()[1].kind() == Formula::Kind::var_atom);
    CHECK(f.to_string() == "!(loaded = 1) | loc_r = loc_p");

    const Formula g = parse_formula_text("a = 1 & b = 2 | !(c = 0)");
    REQUIRE(g.kind() == Formula::Kind::disj);
    CHECK(g.children()[0].kind() == Formula::Kind::conj);
  }

  SUBCASE("parse of print is identity") {
    Rng rng(31337);
    DomainModel m = testutil::random_model(rng, 0);
    for (int i = 0; i < 300; ++i) {
      const Formula f = testutil::random_formula(rng, m, 3);
      const Formula again = parse_formula_text(f.to_string());
      REQUIRE(f.to_string() == again.to_string());
      REQUIRE(Formula::structurally_equal(f.canonical(), again.canonical()));
      for (const auto& s : m.all_assignments()) {
        REQUIRE(f.eval(s) == again.eval(s));
      }
    }
  }

  SUBCASE("errors carry line positions") {
    CHECK_THROWS_WITH_AS(parse_formula_text("a = "), doctest::Contains("line 1"), parse_error);
    CHECK_THROWS_AS(parse_formula_text("a = 1 &"), parse_error);
    CHECK_THROWS_AS(parse_formula_text("(a = 1"), parse_error);
  }
}

TEST_CASE("model file validation") {
  SUBCASE("values must be 0..k-1") {
    CHECK_THROWS_WITH_AS(parse_model_text("domain d = {0, 2}\n"),
                         doctest::Contains("0..k-1"), parse_error);
  }
  SUBCASE("constraints must reference declared variables") {
    CHECK_THROWS_AS(parse_model_text("domain d = {0, 1}\n"
                                     "var v : d\n"
                                     "constraint w = 1\n"),
                    validation_error);
  }
  SUBCASE("out-of-domain atom values are rejected") {
    CHECK_THROWS_AS(parse_model_text("domain d = {0, 1}\n"
                                     "var v : d\n"
                                     "constraint v = 5\n"),
                    validation_error);
  }
  SUBCASE("variable equality needs one shared domain") {
    CHECK_THROWS_AS(parse_model_text("domain d = {0, 1}\n"
                                     "domain e = {0, 1}\n"
                                     "var v : d\n"
                                     "var w : e\n"
                                     "constraint v = w\n"),
                    validation_error);
  }
  SUBCASE("perception tables must be total") {
    CHECK_THROWS_WITH_AS(parse_model_text("domain d = {0, 1}\n"
                                          "var v : d\n"
                                          "perception P : gaussian depends (v) "
                                          "init gaussian(0.25) {\n  (0) -> (0.5, 0.25)\n}\n"),
                         doctest::Contains("every dependency assignment"), validation_error);
  }
  SUBCASE("duplicate table keys are rejected") {
    CHECK_THROWS_AS(parse_model_text("domain d = {0, 1}\n"
                                     "var v : d\n"
                                     "perception P : gaussian depends (v) "
                                     "init gaussian(0.25) {\n  (0) -> (0.5, 0.25)\n"
                                     "  (0) -> (0.6, 0.25)\n  (1) -> (1.5, 0.25)\n}\n"),
                    parse_error);
  }
}

TEST_CASE("round trips preserve full precision") {
  auto em = testutil::rpc_prior();
  // poke in irrational-looking parameters
  em.perception.variables[0].table[DependencyKey{2}] = Pdf::gaussian(0.1 + 0.2, 1.0 / 3.0);
  const std::string once = print_model(em);
  auto back = parse_model_text(once);
  CHECK(back.perception.variables[0].table[DependencyKey{2}] ==
        em.perception.variables[0].table[DependencyKey{2}]);
  CHECK(print_model(back) == once);
}
