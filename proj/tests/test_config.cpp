#include <doctest.h>

#include "hlm/config.hpp"

#include <sstream>

using namespace hlm;
using nlohmann::json;

namespace {

json inline_config() {
  return json::parse(R"({
    "hierarchy": {"attributes": [{"name": "A", "levels": 2}, {"name": "B", "levels": 1}],
                  "prerequisites": [["A", "B"]]},
    "materials": [{"name": "a1", "attribute": "A", "level": 1},
                  {"name": "a2", "attribute": "A", "level": 2},
                  {"name": "b1", "attribute": "B", "level": 1}],
    "transitions": [{"from": "0:0", "material": 0, "to": "1:0", "probability": 0.7},
                    {"from": "1:0", "material": 1, "to": "2:0", "probability": 0.6},
                    {"from": "1:0", "material": 2, "to": "1:1", "probability": 0.5},
                    {"from": "2:0", "material": 2, "to": "2:1", "probability": 0.5},
                    {"from": "1:1", "material": 1, "to": "2:1", "probability": 0.6}],
    "experiment": {"seed": 5, "initial_state": "uniform"}
  })");
}

}  // namespace

TEST_CASE("bundled config loads") {
  const Experiment exp = load_experiment(HLM_BUNDLED_CONFIG);
  CHECK(exp.env.states.size() == 10);
  CHECK(exp.env.material_count() == 6);
  CHECK(exp.config.seed == 20190417);
  CHECK(exp.config.error_rates.size() == 11);
  CHECK(exp.config.item_bank.size() == 9);
}

TEST_CASE("inline config and resolved snapshot") {
  const ConfigParts parts = parse_config(inline_config(), ".");
  const Experiment exp = build_experiment(parts);
  CHECK(exp.env.states.size() == 5);
  CHECK(exp.config.initial_mode == InitialStateMode::Uniform);
  // The snapshot rebuilds the same experiment without the base directory.
  const Experiment again = build_experiment(parse_config(parts.resolved, "/nonexistent"));
  for (int a = 0; a < 3; ++a) CHECK(again.env.model.matrix(a) == exp.env.model.matrix(a));
  CHECK(again.config.seed == 5);
}

TEST_CASE("config errors") {
  json doc = inline_config();
  SUBCASE("missing transition file names the path") {
    doc["transitions"] = "no_such_file.txt";
    try {
      parse_config(doc, "/tmp");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("no_such_file.txt") != std::string::npos);
    }
  }
  SUBCASE("unknown attribute") {
    doc["materials"][0]["attribute"] = "Z";
    CHECK_THROWS_AS(parse_config(doc, "."), ConfigError);
  }
  SUBCASE("retrogressive record") {
    doc["transitions"].push_back({{"from", "2:0"}, {"material", 0}, {"to", "1:0"}, {"probability", 0.1}});
    try {
      build_experiment(parse_config(doc, "."));
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("retrogress") != std::string::npos);
    }
  }
  SUBCASE("state cap") {
    doc["hierarchy"]["max_states"] = 3;
    CHECK_THROWS_AS(build_experiment(parse_config(doc, ".")), ConfigError);
  }
}

TEST_CASE("transition text format") {
  std::istringstream in("# comment\n0:0 0 1:0 0.9\n\n1:0 1 2:0 0.55  # trailing\n");
  const auto recs = parse_transitions(in, "t.txt");
  REQUIRE(recs.size() == 2);
  CHECK(recs[1].from == Levels{1, 0});
  CHECK(recs[1].probability == 0.55);

  std::ostringstream out;
  write_transitions(out, recs);
  std::istringstream back(out.str());
  const auto again = parse_transitions(back, "again");
  CHECK(again[1].probability == recs[1].probability);

  std::istringstream bad("0:0 0 1:0\n");
  try {
    parse_transitions(bad, "t.txt");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("t.txt:1") != std::string::npos);
  }
}

TEST_CASE("item bank text format") {
  std::istringstream in("1100 0.1 0.2\n");
  const ItemBank bank = parse_item_bank(in, "items", 4);
  REQUIRE(bank.size() == 1);
  CHECK(bank[0].q_row[1] == 1);
  CHECK(bank[0].guess == 0.2);
  std::istringstream wrong("110 0.1 0.2\n");
  CHECK_THROWS_AS(parse_item_bank(wrong, "items", 4), ConfigError);
}

TEST_CASE("Q-table files round-trip exactly") {
  const Experiment exp = load_experiment(HLM_BUNDLED_CONFIG);
  Rng rng(12);
  QTable q = init_qtable(10, 6, 9, rng);
  q(3, 2) = 1.0 / 3.0;
  q(0, 0) = -123.456789012345678;
  std::stringstream io;
  write_qtable(io, q, exp.env.states);
  CHECK(read_qtable(io, exp.env.states, 6, "q") == q);

  std::stringstream narrow;
  write_qtable(narrow, q.leftCols(5), exp.env.states);
  CHECK_THROWS_AS(read_qtable(narrow, exp.env.states, 6, "q"), ConfigError);
}
