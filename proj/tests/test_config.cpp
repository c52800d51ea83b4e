#include <doctest.h>

#include <fstream>

#include "voxcue/config.hpp"
#include "voxcue/error.hpp"

using namespace voxcue;

TEST_SUITE("config") {

TEST_CASE("defaults follow the stated analysis values") {
  const RunConfig c;
  CHECK(c.sample_rate == 11025.0);
  CHECK(c.pause_threshold == 0.4);
  CHECK(c.alpha_levels == std::vector<double>{0.01, 0.05});
  CHECK(c.stability_fraction == 0.75);
  CHECK(c.stability_ratio == 0.75);
  CHECK(c.stepwise_enter_p == 0.05);
  CHECK(c.stepwise_remove_p == 0.10);
  CHECK_NOTHROW(c.validate());
  const auto a = c.analysis();
  CHECK(a.segmentation.min_pause == 0.4);
  CHECK(a.pitch.floor == 75.0);
  CHECK(a.pitch.ceiling == 500.0);
  CHECK(c.stability().min_identical_fraction == 0.75);
  CHECK(c.stepwise().max_absent_fraction == 0.10);
}

TEST_CASE("text round trip and overrides") {
  RunConfig c;
  c.apply_override("seed=7");
  c.set("alpha_levels", "0.05, 0.10");
  c.set("f0_floor", "60");
  const auto back = parse_config(c.to_text());
  CHECK(back.to_text() == c.to_text());
  CHECK(back.seed == 7);
  CHECK(back.alpha_levels == std::vector<double>{0.05, 0.10});
  CHECK(back.f0_floor == 60.0);
  for (const auto& k : RunConfig::keys()) CHECK(c.to_text().find(k + " = ") != std::string::npos);

  const auto parsed = parse_config("# comment\n\n  pause_threshold = 0.5  # trailing\nworkers=2\n");
  CHECK(parsed.pause_threshold == 0.5);
  CHECK(parsed.workers == 2);
}

TEST_CASE("range checks") {
  RunConfig c;
  CHECK_THROWS_AS(c.set("no_such_key", "1"), Error);
  CHECK_THROWS_AS(c.set("sample_rate", "-5"), Error);
  CHECK_THROWS_AS(c.set("voicing_threshold", "1.5"), Error);
  CHECK_THROWS_AS(c.set("stepwise_enter_p", "abc"), Error);
  CHECK_THROWS_AS(c.set("alpha_levels", ""), Error);
  CHECK_THROWS_AS(c.apply_override("seed"), Error);
  CHECK_THROWS_AS(parse_config("f0_floor = 600\nf0_ceiling = 500\n"), Error);
  CHECK_THROWS_AS(parse_config("stepwise_enter_p = 0.2\nstepwise_remove_p = 0.1\n"), Error);
  CHECK_THROWS_AS(parse_config("f0_ceiling = 6000\n"), Error);
  CHECK_THROWS_AS(parse_config("just words\n"), Error);
  CHECK_THROWS_AS(load_config("/nonexistent/voxcue.cfg"), Error);
}

TEST_CASE("loading from a file") {
  const auto path = std::filesystem::temp_directory_path() / "voxcue_config_test.cfg";
  {
    std::ofstream out(path);
    out << "seed = 99\nalpha_levels = 0.01\n";
  }
  const auto c = load_config(path);
  CHECK(c.seed == 99);
  CHECK(c.alpha_levels == std::vector<double>{0.01});
  std::filesystem::remove(path);
}

}  // TEST_SUITE
