#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "capalloc/instance.hpp"
#include "capalloc/util.hpp"

using namespace capalloc;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
  fs::path dir = fs::temp_directory_path() / "capalloc_test_instance";
  fs::create_directories(dir);
  return dir / name;
}

bool mentions(const std::vector<std::string>& report, const std::string& needle) {
  for (const auto& line : report) {
    if (line.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("validate flags out-of-range probability with the offending round") {
  BernoulliInstance inst = gen_lp_gap();
  inst.rounds[1].p = 1.2;
  auto report = validate(inst);
  REQUIRE(report.size() == 1);
  CHECK(mentions(report, "rounds[1].p"));
}

TEST_CASE("validate accepts the lp-gap instance") {
  CHECK(validate(gen_lp_gap()).empty());
}

TEST_CASE("validate flags a values vector of the wrong length") {
  BernoulliInstance inst = gen_lp_gap();
  inst.rounds[0].values.push_back(3.0);
  auto report = validate(inst);
  REQUIRE(!report.empty());
  CHECK(mentions(report, "length 3 does not match n = 2"));
}

TEST_CASE("validate flags negative values, bad q, bad capacity") {
  BernoulliInstance inst = gen_lp_gap();
  inst.rounds[0].values[1] = -0.5;
  inst.rounds[1].q[0] = 1.5;
  inst.rounds[1].c = -1;
  auto report = validate(inst);
  CHECK(mentions(report, "values[1]"));
  CHECK(mentions(report, "q[0]"));
  CHECK(mentions(report, "rounds[1].c"));
}

TEST_CASE("gen_lp_gap matches the appendix instance field for field") {
  BernoulliInstance inst = gen_lp_gap();
  REQUIRE(inst.n == 2);
  REQUIRE(inst.num_rounds() == 2);
  CHECK(inst.rounds[0].p == 0.5);
  CHECK(inst.rounds[0].c == 2);
  CHECK(inst.rounds[0].values == std::vector<double>{1.0, 1.0});
  CHECK(inst.rounds[0].q == std::vector<double>{1.0, 1.0});
  CHECK(inst.rounds[1].p == 1.0);
  CHECK(inst.rounds[1].c == 1);
}

TEST_CASE("gen_bdm_counterexample at n=4") {
  BernoulliInstance inst = gen_bdm_counterexample(4);
  REQUIRE(inst.n == 4);
  CHECK(inst.rounds[0].p == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(inst.rounds[0].c == 4);
  CHECK(inst.rounds[0].values == std::vector<double>(4, 1.0));
  CHECK(inst.rounds[1].p == 1.0);
  CHECK(inst.rounds[1].c == 1);
  CHECK(inst.rounds[1].values == std::vector<double>(4, 16.0));
  CHECK(validate(inst).empty());
  CHECK_THROWS_AS(gen_bdm_counterexample(1), std::invalid_argument);
}

TEST_CASE("gen_positive_correlation gadget") {
  BernoulliInstance inst = gen_positive_correlation(0.1);
  REQUIRE(inst.n == 2);
  REQUIRE(inst.num_rounds() == 2);
  CHECK(inst.rounds[0].p == 0.1);
  CHECK(inst.rounds[0].c == 2);
  CHECK(inst.rounds[0].values == std::vector<double>{1.0, 1.0});
  CHECK(inst.rounds[1].values == std::vector<double>{0.0, 0.0});
  CHECK(validate(inst).empty());
  CHECK_THROWS_AS(gen_positive_correlation(0.0), std::invalid_argument);
  CHECK_THROWS_AS(gen_positive_correlation(1.0), std::invalid_argument);
}

TEST_CASE("gen_random is deterministic and sound") {
  RandomInstanceParams params;
  params.n = 3;
  params.T = 3;
  params.c_min = 1;
  params.c_max = 3;
  params.v_min = 0.0;
  params.v_max = 5.0;
  params.q_min = 0.2;
  params.q_max = 1.0;
  params.p_min = 0.1;
  params.p_max = 1.0;
  BernoulliInstance a = gen_random(params, 7);
  BernoulliInstance b = gen_random(params, 7);
  REQUIRE(a.num_rounds() == 3);
  for (int t = 0; t < 3; ++t) {
    CHECK(a.rounds[t].p == b.rounds[t].p);
    CHECK(a.rounds[t].c == b.rounds[t].c);
    CHECK(a.rounds[t].values == b.rounds[t].values);
    CHECK(a.rounds[t].q == b.rounds[t].q);
  }
  CHECK(validate(a).empty());
  BernoulliInstance c = gen_random(params, 8);
  bool differs = false;
  for (int t = 0; t < 3; ++t) differs = differs || a.rounds[t].p != c.rounds[t].p;
  CHECK(differs);
}

TEST_CASE("gen_random degenerate ranges give the single-edge instance") {
  RandomInstanceParams params;
  params.n = 1;
  params.T = 1;
  params.c_min = params.c_max = 1;
  params.v_min = params.v_max = 1.0;
  params.q_min = params.q_max = 1.0;
  params.p_min = params.p_max = 1.0;
  BernoulliInstance inst = gen_random(params, 0);
  CHECK(inst.rounds[0].p == 1.0);
  CHECK(inst.rounds[0].c == 1);
  CHECK(inst.rounds[0].values[0] == 1.0);
  CHECK(inst.rounds[0].q[0] == 1.0);
}

TEST_CASE("gen_random rejects empty ranges") {
  RandomInstanceParams params;
  params.c_min = 3;
  params.c_max = 1;
  CHECK_THROWS_AS(gen_random(params, 0), std::invalid_argument);
  RandomInstanceParams params2;
  params2.p_min = 0.9;
  params2.p_max = 0.5;
  CHECK_THROWS_AS(gen_random(params2, 0), std::invalid_argument);
}

TEST_CASE("to_general splits rounds into active plus null realization") {
  BernoulliInstance inst = gen_lp_gap();
  GeneralInstance gen = to_general(inst);
  REQUIRE(gen.num_rounds() == 2);
  REQUIRE(gen.rounds[0].realizations.size() == 2);
  CHECK(gen.rounds[0].realizations[0].p == 0.5);
  CHECK(gen.rounds[0].realizations[0].c == 2);
  CHECK(gen.rounds[0].realizations[1].p == 0.5);
  CHECK(gen.rounds[0].realizations[1].c == 0);
  CHECK(gen.rounds[0].realizations[1].values == std::vector<double>{0.0, 0.0});
  // p = 1 rounds drop the vacuous null branch.
  REQUIRE(gen.rounds[1].realizations.size() == 1);
  CHECK(gen.rounds[1].realizations[0].p == 1.0);
  CHECK(validate(gen).empty());
}

TEST_CASE("instance io round trip") {
  fs::path path = temp_file("lp_gap.json");
  write_instance(gen_lp_gap(), path);
  InstanceFile loaded = read_instance(path);
  REQUIRE(!loaded.is_general());
  const BernoulliInstance& inst = loaded.bernoulli();
  BernoulliInstance expect = gen_lp_gap();
  REQUIRE(inst.n == expect.n);
  REQUIRE(inst.num_rounds() == expect.num_rounds());
  for (int t = 0; t < inst.num_rounds(); ++t) {
    CHECK(inst.rounds[t].p == expect.rounds[t].p);
    CHECK(inst.rounds[t].c == expect.rounds[t].c);
    CHECK(inst.rounds[t].values == expect.rounds[t].values);
    CHECK(inst.rounds[t].q == expect.rounds[t].q);
  }
  CHECK(loaded.warnings.empty());
}

TEST_CASE("general instance io round trip preserves exact probabilities") {
  fs::path path = temp_file("general.json");
  GeneralInstance gen = to_general(gen_bdm_counterexample(3));
  write_instance(gen, path);
  InstanceFile loaded = read_instance(path);
  REQUIRE(loaded.is_general());
  const GeneralInstance& got = loaded.general();
  REQUIRE(got.num_rounds() == gen.num_rounds());
  for (int t = 0; t < got.num_rounds(); ++t) {
    REQUIRE(got.rounds[t].realizations.size() == gen.rounds[t].realizations.size());
    for (std::size_t j = 0; j < got.rounds[t].realizations.size(); ++j) {
      CHECK(got.rounds[t].realizations[j].p == gen.rounds[t].realizations[j].p);
      CHECK(got.rounds[t].realizations[j].values == gen.rounds[t].realizations[j].values);
    }
  }
}

TEST_CASE("missing rounds key is a schema error") {
  fs::path path = temp_file("missing_rounds.json");
  write_file_atomic(path, "{\"schema\": \"capalloc-bernoulli/1\", \"n\": 2}\n");
  CHECK_THROWS_AS(read_instance(path), SchemaError);
}

TEST_CASE("schema version mismatch is rejected") {
  fs::path path = temp_file("bad_schema.json");
  write_file_atomic(path, "{\"schema\": \"capalloc-bernoulli/9\", \"n\": 1, \"rounds\": []}\n");
  CHECK_THROWS_AS(read_instance(path), SchemaError);
}

TEST_CASE("unknown trailing fields are accepted with a warning") {
  fs::path path = temp_file("extra_fields.json");
  write_file_atomic(path,
                    "{\"schema\": \"capalloc-bernoulli/1\", \"n\": 1, \"comment\": \"hi\",\n"
                    " \"rounds\": [{\"p\": 1, \"c\": 1, \"values\": [1], \"q\": [1], \"extra\": 3}]}\n");
  InstanceFile loaded = read_instance(path);
  REQUIRE(loaded.warnings.size() == 2);
  CHECK(loaded.warnings[0].find("comment") != std::string::npos);
  CHECK(loaded.warnings[1].find("extra") != std::string::npos);
}

TEST_CASE("malformed json is rejected") {
  fs::path path = temp_file("garbage.json");
  write_file_atomic(path, "{not json");
  CHECK_THROWS_AS(read_instance(path), SchemaError);
}
