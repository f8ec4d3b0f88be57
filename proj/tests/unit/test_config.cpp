#include <cstdlib>
#include <string>

#include <gtest/gtest.h>

#include "dopt/config.hpp"
#include "dopt/error.hpp"

using namespace dopt;
using namespace dopt::config;

namespace {

const char* kMinimal = R"({
  "problem": {"kind": "quadratic", "dim": 3},
  "topology": {"kind": "ring", "m": 3},
  "sigmas": {"explicit": [1, 2, 3]},
  "eps": 0.5,
  "seeds": [1, 2]
})";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Parse, MinimalConfigUsesDefaults) {
  const auto cfg = parse(kMinimal);
  const auto& q = std::get<QuadraticProblem>(cfg.problem);
  EXPECT_EQ(q.dim, 3u);
  EXPECT_EQ(q.smoothness, 1.0);
  EXPECT_EQ(cfg.topology.spec.kind, topology::GraphKind::ring);
  EXPECT_EQ(cfg.topology.weighting, topology::Weighting::metropolis);
  EXPECT_EQ(cfg.sigmas.resolve(3), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(cfg.algorithm.name, "dnss");
  EXPECT_EQ(cfg.algorithm.schedule, ScheduleSource::theorem);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{1, 2}));
  EXPECT_FALSE(cfg.max_samples);
  EXPECT_EQ(cfg.output, "out");
}

TEST(Parse, CommentsAndWholeNumberFloats) {
  const auto cfg = parse(replace(kMinimal, "\"seeds\": [1, 2]", "// budget\n\"max_samples\": 1e7, \"seeds\": [1, 2]"));
  ASSERT_TRUE(cfg.max_samples);
  EXPECT_EQ(*cfg.max_samples, 10000000u);
  EXPECT_NE(error_of(replace(kMinimal, "\"dim\": 3", "\"dim\": 3.5")), "");
}

TEST(Parse, UnknownKeysAreAllListed) {
  const auto text = replace(replace(kMinimal, "\"dim\": 3", "\"dim\": 3, \"smoothnes\": 2"), "\"eps\": 0.5",
                            "\"eps\": 0.5, \"colour\": \"red\"");
  try {
    parse(text);
    FAIL() << "expected failure";
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("smoothnes"), std::string::npos) << msg;
    EXPECT_NE(msg.find("colour"), std::string::npos) << msg;
  }
}

TEST(Parse, MisspelledRequiredKeyNamesBoth) {
  const auto msg = error_of(replace(kMinimal, "\"eps\"", "\"epsilon\""));
  EXPECT_NE(msg.find("epsilon"), std::string::npos) << msg;
  EXPECT_NE(msg.find("eps"), std::string::npos) << msg;
}

TEST(Parse, MissingAndInvalidValues) {
  EXPECT_THROW(parse(replace(kMinimal, "\"seeds\": [1, 2]", "\"seeds\": []")), InvalidArgument);
  EXPECT_THROW(parse(replace(kMinimal, "[1, 2, 3]", "[1, 2]")), InvalidArgument);
  EXPECT_THROW(parse(replace(kMinimal, "\"eps\": 0.5", "\"eps\": -1")), InvalidArgument);
  EXPECT_THROW(parse(replace(kMinimal, "quadratic", "cubic")), Error);
  EXPECT_THROW(parse(replace(kMinimal, "\"ring\"", "\"torus\"")), InvalidArgument);
  EXPECT_THROW(parse("{ not json"), ParseError);
  EXPECT_THROW(parse(replace(kMinimal, "\"eps\": 0.5", "\"eps\": 0.5, \"algorithm\": {\"name\": \"adam\"}")),
               InvalidArgument);
}

TEST(Sigmas, GeneratedSchedules) {
  auto cfg = parse(replace(kMinimal, "{\"explicit\": [1, 2, 3]}", "{\"geometric\": {\"base\": 2, \"ratio\": 3}}"));
  EXPECT_EQ(cfg.sigmas.resolve(3), (std::vector<double>{2, 6, 18}));
  cfg = parse(replace(kMinimal, "{\"explicit\": [1, 2, 3]}", "{\"linear\": {\"first\": 1, \"last\": 2}}"));
  EXPECT_EQ(cfg.sigmas.resolve(3), (std::vector<double>{1, 1.5, 2}));
  cfg = parse(replace(kMinimal, "[1, 2, 3]}", "[1, 2, 3], \"estimate\": {\"n_pilot\": 50}}"));
  EXPECT_EQ(cfg.sigmas.estimate_pilot, 50);
  EXPECT_THROW(parse(replace(kMinimal, "[1, 2, 3]}", "[1, 2, 3], \"estimate\": {\"n_pilot\": 1}}")), InvalidArgument);
}

TEST(Fingerprint, StableAndSensitive) {
  const auto a = parse(kMinimal);
  EXPECT_EQ(fingerprint(a), fingerprint(parse(kMinimal)));
  EXPECT_EQ(fingerprint(a).size(), 16u);
  // Seeds and output only choose which runs happen and where they land.
  EXPECT_EQ(fingerprint(a), fingerprint(parse(replace(kMinimal, "[1, 2]", "[7]"))));
  EXPECT_EQ(fingerprint(a), fingerprint(parse(replace(kMinimal, "\"eps\": 0.5", "\"eps\": 0.5, \"output\": \"x\""))));
  EXPECT_NE(fingerprint(a), fingerprint(parse(replace(kMinimal, "\"eps\": 0.5", "\"eps\": 0.25"))));
  EXPECT_NE(fingerprint(a), fingerprint(parse(replace(kMinimal, "[1, 2, 3]", "[1, 2, 4]"))));
  // Key order and whitespace do not matter.
  const auto reordered = parse(R"({"seeds": [1, 2], "eps": 0.5, "sigmas": {"explicit": [1, 2, 3]},
    "topology": {"m": 3, "kind": "ring"}, "problem": {"dim": 3, "kind": "quadratic"}})");
  EXPECT_EQ(fingerprint(a), fingerprint(reordered));
}

TEST(WithAlgorithm, ResetsToTheoremSchedule) {
  const auto cfg = parse(replace(kMinimal, "\"eps\": 0.5",
                                 "\"eps\": 0.5, \"algorithm\": {\"name\": \"dnss\", \"schedule\": \"manual\", "
                                 "\"overrides\": {\"eta\": 0.1, \"iterations\": 5, \"batch\": 2, \"rounds\": 1, "
                                 "\"initial_rounds\": 1}}"));
  EXPECT_EQ(cfg.algorithm.schedule, ScheduleSource::manual);
  const auto other = with_algorithm(cfg, "dsgt");
  EXPECT_EQ(other.algorithm.name, "dsgt");
  EXPECT_EQ(other.algorithm.schedule, ScheduleSource::theorem);
  EXPECT_FALSE(other.algorithm.overrides.eta);
  EXPECT_NE(fingerprint(other), fingerprint(cfg));
}

TEST(Load, ShippedConfigsParse) {
  const char* dir = std::getenv("DOPT_TEST_CONFIG_DIR");
  if (dir == nullptr) GTEST_SKIP() << "DOPT_TEST_CONFIG_DIR not set";
  for (const char* name : {"quadratic_smoke.json", "paper_setup.json"}) {
    const auto cfg = load(std::string(dir) + "/" + name);
    EXPECT_FALSE(cfg.seeds.empty()) << name;
    EXPECT_EQ(cfg.base_dir, dir);
  }
  EXPECT_THROW(load(std::string(dir) + "/does_not_exist.json"), ParseError);
}
