#include "gamevo/config.hpp"
#include "gamevo/error.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace gamevo;

TEST(ConfigText, ParsesValues) {
  const auto j = parse_config_text(R"(# search settings
[search]
population = 30
p_bivar = 0.25   # trailing comment
splines = ["cr", "lin"]
offset_lists = [[1], [1, 7]]
log_wall_time = true
data = "data/load.csv"
)");
  EXPECT_EQ(j["population"], 30);
  EXPECT_DOUBLE_EQ(j["p_bivar"].get<double>(), 0.25);
  EXPECT_EQ(j["splines"], nlohmann::json({"cr", "lin"}));
  EXPECT_EQ(j["offset_lists"], nlohmann::json::parse("[[1],[1,7]]"));
  EXPECT_EQ(j["log_wall_time"], true);
  EXPECT_EQ(j["data"], "data/load.csv");
}

TEST(ConfigText, ErrorsNameTheLine) {
  try {
    parse_config_text("population = 3\nbudget 10\n");
    FAIL();
  } catch (const ParseError &e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_config_text("a = 1\na = 2\n"), ParseError);
  EXPECT_THROW(parse_config_text("a = [1, 2\n"), ParseError);
  EXPECT_THROW(parse_config_text("a = \"open\n"), ParseError);
}

TEST(ConfigApply, MapsKeysOntoTheRun) {
  RunConfig rc;
  apply_config(parse_config_text(R"(
population = 12
budget = 60
tournament = 3
max_effects = 5
splines = ["cubic", "cc"]
tensors = ["cr"]
variables = ["Temp", "Day"]
day_lists = [[1, 2], [6, 7]]
qigs_multipliers = [0.1, 10]
seed = 99
jobs = 2
hours = "0,6,12-14"
exclude = [["2020-03-01T00:00:00Z", "2020-05-31T23:00:00Z"]]
algo = "ea-f-qigs"
seed_preset = "sota"
)"),
               rc);
  EXPECT_EQ(rc.search.population, 12u);
  EXPECT_EQ(rc.search.budget, 60u);
  EXPECT_EQ(rc.search.tournament, 3u);
  EXPECT_EQ(rc.search.k_max_effects, 5u);
  EXPECT_EQ(rc.search.splines, (std::vector<BasisFamily>{BasisFamily::CubicSpline, BasisFamily::CyclicSpline}));
  EXPECT_EQ(rc.search.tensors, (std::vector<BasisFamily>{BasisFamily::CubicSpline}));
  EXPECT_EQ(rc.search.variables, (std::vector<std::string>{"Temp", "Day"}));
  EXPECT_EQ(rc.search.day_lists, (std::vector<std::vector<int>>{{1, 2}, {6, 7}}));
  EXPECT_EQ(rc.search.qigs.multipliers, (std::vector<double>{0.1, 10}));
  EXPECT_EQ(rc.search.seed, 99u);
  EXPECT_TRUE(rc.seed_set);
  EXPECT_EQ(rc.search.jobs, 2u);
  EXPECT_EQ(rc.hours, (std::vector<int>{0, 6, 12, 13, 14}));
  ASSERT_EQ(rc.exclude.size(), 1u);
  EXPECT_EQ(rc.exclude[0].second, "2020-05-31T23:00:00Z");
  EXPECT_EQ(rc.algo, "ea-f-qigs");
  EXPECT_EQ(rc.seed_preset, "sota");
}

TEST(ConfigApply, RejectsUnknownKeysAndTypes) {
  RunConfig rc;
  EXPECT_THROW(apply_config(parse_config_text("populaton = 3\n"), rc), DataError);
  EXPECT_THROW(apply_config(parse_config_text("population = \"many\"\n"), rc), DataError);
  EXPECT_THROW(apply_config(parse_config_text("splines = [\"bspline\"]\n"), rc), DataError);
  EXPECT_THROW(apply_config(parse_config_text("population = -4\n"), rc), DataError);
}

TEST(ConfigFile, LoadsFromDisk) {
  const auto dir = std::filesystem::temp_directory_path() / "gamevo_config_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "run.toml").string();
  std::ofstream(path) << "budget = 42\nconsume_history = true\n";
  const RunConfig rc = load_config(path);
  EXPECT_EQ(rc.search.budget, 42u);
  EXPECT_TRUE(rc.consume_history);
  EXPECT_FALSE(rc.seed_set);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(load_config(path), DataError);
}

TEST(Hours, Ranges) {
  EXPECT_EQ(parse_hours("5"), (std::vector<int>{5}));
  EXPECT_EQ(parse_hours("0-23").size(), 24u);
  EXPECT_EQ(parse_hours("3,1,2-3"), (std::vector<int>{1, 2, 3}));
  EXPECT_THROW(parse_hours("24"), DataError);
  EXPECT_THROW(parse_hours("5-2"), DataError);
  EXPECT_THROW(parse_hours("x"), DataError);
}
