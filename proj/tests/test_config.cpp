#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qpake/config.hpp"

using namespace qpake;

namespace {

const char* kMinimal =
    "[protocol]\n"
    "lambda = 8\n"
    "k = 32\n"
    "alpha = 0.25\n"
    "tau = 0.25\n"
    "gamma = 0.25\n"
    "dict_size = 4\n"
    "syndrome_len = 4\n"
    "\n"
    "[run]\n"
    "trials = 10\n"
    "seed = 1\n";

}  // namespace

TEST_CASE("minimal file parses with defaults filled") {
  const Config cfg = parse_config(kMinimal);
  CHECK(cfg.protocol.lambda == 8);
  CHECK(cfg.protocol.k == 32);
  CHECK(cfg.protocol.commit_group == "experiment");  // default
  CHECK(cfg.run.trials == 10);
  CHECK(cfg.run.jobs == 1);
  CHECK(cfg.run.password_mode == PasswordMode::Equal);
  CHECK(cfg.adversary.quantum.kind == ChannelModel::Kind::Ideal);
  CHECK_FALSE(cfg.adversary.password_guess.has_value());
  const ParamsPtr params = cfg.build_params();
  CHECK(params->ell == 8);
}

TEST_CASE("unknown keys are rejected with a line number") {
  const std::string bad =
      "[protocol]\n"
      "lambda = 8\n"
      "bogus = 1\n";
  try {
    parse_config(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line == 3);
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }
}

TEST_CASE("type errors carry the offending value") {
  const std::string bad =
      "[run]\n"
      "trials = soon\n";
  try {
    parse_config(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line == 2);
    CHECK(std::string(e.what()).find("soon") != std::string::npos);
  }
}

TEST_CASE("invariant violations name the invariant") {
  std::string bad = kMinimal;
  const auto pos = bad.find("k = 32");
  bad.replace(pos, 6, "k = 30");  // alpha*k = 7.5
  try {
    parse_config(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("alpha*k") != std::string::npos);
  }
}

TEST_CASE("section and structure errors") {
  CHECK_THROWS_AS(parse_config("[nope]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[protocol\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[protocol]\njust text\n"), ConfigError);
}

TEST_CASE("adversary settings parse") {
  const std::string text = std::string(kMinimal) +
                           "\n[adversary]\n"
                           "channel = intercept_random\n"
                           "password_guess = 2\n"
                           "mutate = four:flip:a0, five:drop\n";
  const Config cfg = parse_config(text);
  CHECK(cfg.adversary.quantum.kind == ChannelModel::Kind::InterceptResend);
  REQUIRE(cfg.adversary.password_guess.has_value());
  CHECK(*cfg.adversary.password_guess == 2);
  REQUIRE(cfg.adversary.classical.size() == 2);
  CHECK(cfg.adversary.classical[0].tag == FlowTag::Four);
  CHECK(cfg.adversary.classical[0].kind == MutationRule::Kind::FlipBits);
  CHECK(cfg.adversary.classical[0].mask == std::vector<std::uint8_t>{0xa0});
  CHECK(cfg.adversary.classical[1].kind == MutationRule::Kind::Drop);
}

TEST_CASE("guess outside the dictionary is rejected") {
  const std::string text = std::string(kMinimal) +
                           "\n[adversary]\n"
                           "password_guess = 4\n";
  CHECK_THROWS_AS(parse_config(text), ConfigError);
}

TEST_CASE("zero flow cannot be mutated classically") {
  const std::string text = std::string(kMinimal) +
                           "\n[adversary]\n"
                           "mutate = zero:drop\n";
  CHECK_THROWS_AS(parse_config(text), ConfigError);
}

TEST_CASE("round trip: serialize(parse(x)) is canonical") {
  const Config cfg = parse_config(kMinimal);
  const std::string canonical = serialize_config(cfg);
  const Config again = parse_config(canonical);
  CHECK(serialize_config(again) == canonical);

  // canonical form is stable for richer configs too
  const std::string rich = std::string(kMinimal) +
                           "\n[adversary]\n"
                           "channel = bitflip\n"
                           "flip_prob = 0.125\n"
                           "mutate = three1:replace:7b7d\n";
  const Config rich_cfg = parse_config(rich);
  const std::string rich_canonical = serialize_config(rich_cfg);
  CHECK(serialize_config(parse_config(rich_canonical)) == rich_canonical);
}

TEST_CASE("comments and blank lines are ignored") {
  const std::string text = std::string("# header comment\n\n") + kMinimal +
                           "# trailing comment\n";
  const Config cfg = parse_config(text);
  CHECK(cfg.protocol.lambda == 8);
}
