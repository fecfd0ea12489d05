#include <filesystem>
#include <random>
#include <string>

#include "doctest.h"
#include "mdpode/errors.hpp"
#include "mdpode/model_io.hpp"
#include "support.hpp"

using namespace mdpode;
using namespace testing_support;

namespace {

const std::string kSymmetric = R"({
  "xu_labels": ["a", "b"],
  "xn_labels": ["0"],
  "Q0": [[1.0], [1.0]],
  "R0": [[0.5, 0.5], [0.5, 0.5]],
  "utility": [1.0, 0.0],
  "reference_state": "b,0"
})";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, from.size(), to);
  return text;
}

std::string parse_error(const std::string& text) {
  try {
    parse_model_json(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  FAIL("expected ParseError");
  return {};
}

std::filesystem::path fixture(const char* name) {
  return std::filesystem::path(MDPODE_FIXTURE_DIR) / name;
}

}  // namespace

TEST_CASE("parse the symmetric model") {
  const KLModel m = parse_model_json(kSymmetric);
  CHECK(m.size() == 2);
  CHECK(m.reference_state() == 1);
  CHECK(m.utility()(0) == 1.0);
  CHECK(m.space().label(0) == "a,0");
  const KLModel builtin = symmetric_two_state_model();
  CHECK(builtin.space() == m.space());
  CHECK(builtin.r0().entries() == m.r0().entries());
  CHECK(builtin.reference_state() == m.reference_state());

  const KLModel by_index = parse_model_json(replace(kSymmetric, "\"b,0\"", "1"));
  CHECK(by_index.reference_state() == 1);
}

TEST_CASE("field-level diagnostics") {
  CHECK(parse_error(replace(kSymmetric, "[0.5, 0.5]]", "[0.49, 0.49]]")).find("R0[1]") !=
        std::string::npos);
  CHECK(parse_error(replace(kSymmetric, "[[1.0], [1.0]]", "[[1.0], [-1.0]]")).find("Q0[1][0]") !=
        std::string::npos);
  CHECK(parse_error(replace(kSymmetric, "[1.0, 0.0]", "[1.0, 1e400]")).find("1e400") !=
        std::string::npos);
  CHECK(parse_error(replace(kSymmetric, "[1.0, 0.0]", "[1.0, \"x\"]")).find("utility[1]") !=
        std::string::npos);
  CHECK(parse_error(replace(kSymmetric, "[1.0, 0.0]", "[1.0]")).find("utility") !=
        std::string::npos);
  CHECK(parse_error(replace(kSymmetric, "\"b,0\"", "\"c,0\"")).find("reference_state") !=
        std::string::npos);
  CHECK(parse_error(replace(kSymmetric, "\"b,0\"", "7")).find("reference_state") !=
        std::string::npos);
  CHECK(parse_error(replace(kSymmetric, "\"xn_labels\": [\"0\"],", "")).find("xn_labels") !=
        std::string::npos);
  // Syntax errors carry a line number.
  CHECK(parse_error(replace(kSymmetric, "[1.0, 0.0]", "[1.0, NaN]")).find("line 6") !=
        std::string::npos);
}

TEST_CASE("file tolerance admits small row-sum drift") {
  CHECK_NOTHROW(parse_model_json(replace(kSymmetric, "[0.5, 0.5]]", "[0.5, 0.5000000001]]")));
  CHECK_THROWS_AS(parse_model_json(replace(kSymmetric, "[0.5, 0.5]]", "[0.5, 0.500000002]]")),
                  ParseError);
}

TEST_CASE("reducible model files are rejected") {
  const std::string text = replace(kSymmetric, "\"R0\": [[0.5, 0.5], [0.5, 0.5]]",
                                   "\"R0\": [[0.0, 1.0], [1.0, 0.0]]");
  CHECK_THROWS_AS(parse_model_json(text), ValidationError);
}

TEST_CASE("round trip through JSON is exact") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 10; ++trial) {
    const KLModel m = random_model(rng, 2 + static_cast<std::size_t>(trial % 2), 3,
                                   static_cast<std::size_t>(trial % 4));
    const KLModel back = parse_model_json(model_to_json(m));
    CHECK(back.space() == m.space());
    CHECK(back.q0().entries() == m.q0().entries());
    CHECK(back.r0().entries() == m.r0().entries());
    CHECK(back.utility() == m.utility());
    CHECK(back.reference_state() == m.reference_state());
  }
}

TEST_CASE("loading fixtures from disk") {
  const KLModel sym = load_model_json(fixture("symmetric.json"));
  CHECK(sym.reference_state() == 1);
  const KLModel queue = load_model_json(fixture("queue.json"));
  CHECK(queue.space().size_u() == 2);
  CHECK(queue.space().size_n() == 3);
  CHECK(queue.reference_state() == 0);
  CHECK_THROWS_AS(load_model_json(fixture("bad_row_sum.json")), ParseError);
  CHECK_THROWS_AS(load_model_json(fixture("does_not_exist.json")), IoError);
}
