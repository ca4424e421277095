#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "test_support.hpp"
#include "zsmg/instances.hpp"
#include "zsmg/io.hpp"

using namespace zsmg;
using namespace zsmg::testing;

TEST_CASE("game JSON round trip is exact") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TabularMG mg = gen_random_tabular(Dims{3, 3, 2, 4}, 0.2, seed, 1);
    const Json j = game_to_json(mg);
    const TabularMG back = game_from_json(Json::parse(canonical_dump(j)));
    CHECK(back.dims() == mg.dims());
    CHECK(back.initial_state() == 1);
    CHECK(back.rewards() == mg.rewards());
    CHECK(back.transition() == mg.transition());
    CHECK(canonical_dump(game_to_json(back)) == canonical_dump(j));
  }
}

TEST_CASE("class JSON round trip is exact") {
  const Benchmark bm = make_benchmark();
  const Json j = class_to_json(bm.fc);
  const FunctionClass back = class_from_json(Json::parse(canonical_dump(j)));
  CHECK(back.dims == bm.fc.dims);
  CHECK(back.beta == bm.fc.beta);
  CHECK(back.layers == bm.fc.layers);
  CHECK(back.prior == bm.fc.prior);
}

TEST_CASE("malformed JSON is rejected") {
  const TabularMG mg = gen_random_tabular(Dims{2, 2, 2, 2}, 0.0, 1);
  Json j = game_to_json(mg);
  SUBCASE("missing key") {
    j.erase("transition");
    CHECK_THROWS_AS(game_from_json(j), ValidationError);
  }
  SUBCASE("ragged reward") {
    j["reward"][0][1][0].push_back(0.5);
    CHECK_THROWS_AS(game_from_json(j), ValidationError);
  }
  SUBCASE("non-distribution transition") {
    j["transition"][1][0][0][0] = Json::array({0.7, 0.7});
    CHECK_THROWS_AS(game_from_json(j), ValidationError);
  }
  SUBCASE("non-numeric entry") {
    j["reward"][0][0][0][0] = "x";
    CHECK_THROWS_AS(game_from_json(j), ValidationError);
  }
  SUBCASE("non-integer size") {
    j["H"] = 2.5;
    CHECK_THROWS_AS(game_from_json(j), ValidationError);
  }
  SUBCASE("class prior mismatch") {
    Json c = class_to_json(make_benchmark().fc);
    c["prior"][0].erase(0);
    CHECK_THROWS_AS(class_from_json(c), ValidationError);
  }
  SUBCASE("class member out of range") {
    Json c = class_to_json(make_benchmark().fc);
    c["layers"][1][0][0][0][0] = 7.0;
    CHECK_THROWS_AS(class_from_json(c), ValidationError);
  }
}

TEST_CASE("canonical dump sorts keys") {
  Json j;
  j["zeta"] = 1;
  j["alpha"] = 0.1;
  CHECK(canonical_dump(j) == "{\n  \"alpha\": 0.1,\n  \"zeta\": 1\n}\n");
}

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("file helpers") {
  const auto dir = std::filesystem::temp_directory_path() / "zsmg_test_io" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  const auto path = dir / "g.json";
  const TabularMG mg = gen_random_tabular(Dims{1, 2, 2, 2}, 0.0, 3);
  write_text_file(path, canonical_dump(game_to_json(mg)));
  CHECK(game_from_json(read_json_file(path)).rewards() == mg.rewards());
  write_text_file(dir / "bad.json", "{not json");
  CHECK_THROWS_AS(read_json_file(dir / "bad.json"), ValidationError);
  CHECK_THROWS_AS(read_json_file(dir / "missing.json"), std::runtime_error);
  std::filesystem::remove_all(dir.parent_path());
}

TEST_CASE("Nash JSON carries the value and policies") {
  const TabularMG mg = matrix_game({{1, 0}, {0, 1}});
  const Json j = nash_to_json(solve_nash(mg));
  CHECK(std::abs(j["value"].get<double>() - 0.5) <= 1e-9);
  CHECK(j["mu_star"].size() == 1);
  CHECK(j["v_star"].size() == 2);
  CHECK(j["q_star"][0][0][1][1].get<double>() == 1.0);
}
