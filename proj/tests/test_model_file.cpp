#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "omegarm/envs.hpp"
#include "omegarm/errors.hpp"
#include "omegarm/model_file.hpp"
#include "test_util.hpp"

using namespace omegarm;

namespace {

std::size_t error_line(const std::string& text) {
  try {
    parse_model(text);
  } catch (const ParseError& e) {
    return e.line();
  } catch (const ModelError& e) {
    const std::string w = e.what();
    if (w.rfind("line ", 0) == 0) return std::stoul(w.substr(5));
    return 0;
  }
  return static_cast<std::size_t>(-1);
}

}  // namespace

TEST_CASE("minimal model") {
  const auto b = parse_model(
      "mdp\n"
      "ap: a\n"
      "states: 1\n"
      "init: 0\n"
      "action 0 loop: 0 1\n"
      "orm\n"
      "states: 1\n"
      "init: 0\n"
      "edge 0 \"true\" 0 reward 0 accepting\n");
  CHECK(b.mdp.num_states() == 1);
  CHECK(b.machine.num_states() == 1);
  REQUIRE(b.machine.edges().size() == 1);
  CHECK(b.machine.edges()[0].accepting);
  CHECK(b.defaults.empty());
}

TEST_CASE("documented example with comments and labels") {
  const auto b = parse_model(R"(# patrol fragment
mdp
ap: A B C D
states: 5
init: 0
label 0: A
label 3: A B
action 0 east: 1 0.8, 2 0.2      # state, action name, list of "target prob"
action 1 back: 0 1
action 2 back: 0 1
action 3 stay: 3 1
action 4 stay: 4 1
orm
states: 2
init: 0
edge 0 "!A" 0 reward 0
edge 0 "A"  1 reward 1 accepting
edge 1 "true" 0 reward 0
)");
  CHECK(b.mdp.label(3) == 3u);
  CHECK(b.mdp.label(1) == 0u);
  CHECK(b.mdp.action(0, 0).branches.size() == 2);
  CHECK(b.mdp.action(0, 0).branches[1].prob == 0.2);
  CHECK(b.machine.edges()[1].reward == 1.0);
}

TEST_CASE("lemma1 golden file") {
  const auto b = load_model_file(std::string(OMEGARM_ENVS_DIR) + "/lemma1.orm");
  CHECK(b == lemma1_env());
  CHECK(b.machine.num_states() == 1);
  bool accepting_b = false;
  for (const auto& e : b.machine.edges()) {
    if (e.accepting) accepting_b = e.guard.eval(2) && !e.guard.eval(1);
  }
  CHECK(accepting_b);
}

TEST_CASE("golden files equal the generators") {
  for (const auto& name : env_names()) {
    CAPTURE(name);
    const auto path = std::string(OMEGARM_ENVS_DIR) + "/" + name + ".orm";
    CHECK(load_model_file(path) == make_env(name));
    std::ifstream f(path);
    const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    CHECK(text == serialize_model(make_env(name)));
  }
}

TEST_CASE("probability mass error names the action") {
  const std::string text =
      "mdp\nap: a\nstates: 2\ninit: 0\n"
      "action 0 go: 0 0.5, 1 0.4\n"
      "action 1 stay: 1 1\n"
      "orm\nstates: 1\ninit: 0\nedge 0 \"true\" 0\n";
  CHECK_THROWS_AS(parse_model(text), ModelError);
  try {
    parse_model(text);
  } catch (const ModelError& e) {
    CHECK(std::string(e.what()).find("go") != std::string::npos);
    CHECK(std::string(e.what()).find("0.9") != std::string::npos);
  }
  CHECK(error_line(text) == 5);
}

TEST_CASE("errors carry line numbers") {
  const std::string head = "mdp\nap: a\nstates: 2\ninit: 0\n";
  const std::string tail = "orm\nstates: 1\ninit: 0\nedge 0 \"true\" 0\n";
  // dangling target
  CHECK(error_line(head + "action 0 go: 5 1\naction 1 s: 1 1\n" + tail) == 5);
  // unknown AP in a label
  CHECK(error_line(head + "label 1: b\naction 0 go: 1 1\naction 1 s: 1 1\n" + tail) == 5);
  // unknown AP in a guard
  CHECK(error_line(head + "action 0 go: 1 1\naction 1 s: 1 1\norm\nstates: 1\ninit: 0\nedge 0 \"b\" 0\n") == 10);
  // syntax
  CHECK(error_line(head + "action 0 go 1 1\n" + tail) == 5);
  // machine AP list differs
  CHECK(error_line(head + "action 0 go: 1 1\naction 1 s: 1 1\norm\nap: b\nstates: 1\ninit: 0\nedge 0 \"true\" 0\n") == 8);
  // state without actions
  CHECK_THROWS_AS(parse_model(head + "action 0 go: 1 1\n" + tail), ModelError);
  // missing orm
  CHECK_THROWS_AS(parse_model(head + "action 0 go: 1 1\naction 1 s: 1 1\n"), ParseError);
  // bad defaults key
  CHECK_THROWS(parse_model(head + "action 0 go: 1 1\naction 1 s: 1 1\n" + tail + "defaults\nbogus: 1\n"));
}

TEST_CASE("duplicate edges are kept") {
  const auto b = parse_model(
      "mdp\nap: a\nstates: 1\ninit: 0\naction 0 l: 0 1\n"
      "orm\nstates: 1\ninit: 0\nedge 0 \"true\" 0 reward 1\nedge 0 \"true\" 0 reward 1\n");
  CHECK(b.machine.edges().size() == 2);
}

TEST_CASE("missing file names the path") {
  try {
    load_model_file("/nonexistent/model.orm");
    FAIL("expected ModelError");
  } catch (const ModelError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/model.orm") != std::string::npos);
  }
}

TEST_CASE("round trip on random bundles") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> coin(0, 1);
  const std::vector<std::string> ap{"x", "y", "z"};
  const char* guards[] = {"true", "x", "!x", "x & y | z", "!(y | z)", "x & (y | !z)"};
  for (int trial = 0; trial < 100; ++trial) {
    ModelBundle b;
    ProductMdp p = testing::random_product(rng);
    b.mdp = Mdp(ap, p.num_states(), 0);
    for (StateId s = 0; s < p.num_states(); ++s) {
      b.mdp.set_label(s, static_cast<Label>(rng() % 8));
      for (const Action& a : p.mdp.actions(s)) b.mdp.add_action(s, a.name, a.branches);
    }
    b.machine = OmegaRewardMachine(ap, 3, 1);
    for (MachineState u = 0; u < 3; ++u) {
      b.machine.add_edge(u, "true", (u + 1) % 3, std::uniform_real_distribution<double>(-2, 2)(rng), coin(rng));
      b.machine.add_edge(u, guards[rng() % 6], rng() % 3, 0.1 * double(rng() % 7), coin(rng));
    }
    if (coin(rng)) b.defaults = {{"zeta", 0.5}, {"ep-n", 1000}};
    const std::string text = serialize_model(b);
    CAPTURE(text);
    const ModelBundle back = parse_model(text);
    CHECK(back == b);
    CHECK(serialize_model(back) == text);
  }
}

TEST_CASE("shipped environment guards agree with truth tables") {
  for (const auto& name : env_names()) {
    const auto b = make_env(name);
    const auto& ap = b.mdp.ap();
    for (const auto& e : b.machine.edges()) {
      const Guard g = Guard::parse(e.guard.to_string(ap), ap);
      for (Label l = 0; l < (Label{1} << ap.size()); ++l) CHECK(g.eval(l) == e.guard.eval(l));
    }
  }
}

TEST_CASE("format_number is shortest round-trip") {
  CHECK(format_number(0.2) == "0.2");
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(-2.5) == "-2.5");
  const double third = 1.0 / 3.0;
  CHECK(std::stod(format_number(third)) == third);
}
