#include <doctest.h>

#include <cstdlib>

#include "dpu/config.hpp"

using namespace dpu;

TEST_CASE("parses key = value with comments and blanks") {
  const auto cfg = Config::parse_text(
      "# pipeline settings\n"
      "seed = 42\n"
      "\n"
      "train.learning_rate = 0.01  # paper default\n"
      "train.model = freespace\n"
      "synth.active_channels = 3, 5\n");
  CHECK(cfg.get_int("seed", 0) == 42);
  CHECK(cfg.get_num("train.learning_rate", 0) == doctest::Approx(0.01));
  CHECK(cfg.get_str("train.model", "") == "freespace");
  const auto list = cfg.get_list("synth.active_channels");
  REQUIRE(list.size() == 2);
  CHECK(list[0] == 3);
  CHECK(list[1] == 5);
}

TEST_CASE("missing equals sign is an error") {
  CHECK_THROWS(Config::parse_text("just a line\n"));
}

TEST_CASE("non-numeric value surfaces as an error, not a fallback") {
  const auto cfg = Config::parse_text("train.epochs = soon\n");
  CHECK_THROWS(cfg.get_int("train.epochs", 1));
}

TEST_CASE("environment overrides map DPU_SECTION_KEY to section.key") {
  setenv("DPU_TRAIN_LEARNING_RATE", "0.5", 1);
  auto cfg = Config::parse_text("train.learning_rate = 0.01\n");
  cfg.apply_env("DPU_");
  CHECK(cfg.get_num("train.learning_rate", 0) == doctest::Approx(0.5));
  unsetenv("DPU_TRAIN_LEARNING_RATE");
}

TEST_CASE("hash is order-insensitive and value-sensitive") {
  const auto a = Config::parse_text("a.x = 1\nb.y = 2\n");
  const auto b = Config::parse_text("b.y = 2\na.x = 1\n");
  const auto c = Config::parse_text("a.x = 1\nb.y = 3\n");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
}

TEST_CASE("booleans accept the documented spellings") {
  const auto cfg = Config::parse_text("a.b = true\nc.d = off\n");
  CHECK(cfg.get_bool("a.b", false));
  CHECK_FALSE(cfg.get_bool("c.d", true));
  CHECK(cfg.get_bool("missing.key", true));
}
