#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <string>

#include "normsim/experiments.hpp"

using namespace normsim;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("normsim-unit-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const SweepAxis* axis_of(const ExperimentSpec& s, const std::string& name) {
  for (const auto& a : s.axes) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

#ifdef NORMSIM_CLI_PATH
int cli(const std::string& args) {
  const int status = std::system((std::string(NORMSIM_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
#endif

}  // namespace

TEST_CASE("expand_cells is the cartesian product in axis order") {
  ExperimentSpec s;
  s.name = "x";
  s.axes = {{"game", {"CG", "CGHP"}}, {"population", {"20", "30", "40"}}};
  const auto cells = expand_cells(s);
  REQUIRE(cells.size() == 6);
  CHECK(cells[0].label == "game=CG,population=20");
  CHECK(cells[1].label == "game=CG,population=30");
  CHECK(cells[5].label == "game=CGHP,population=40");
  CHECK(cells[5].config.game.kind == GameKind::CGHP);
  CHECK(cells[5].config.topology.n == 40);

  ExperimentSpec one;
  one.name = "y";
  CHECK(expand_cells(one).front().label == "base");
}

TEST_CASE("axis values are parsed and checked") {
  SimConfig c;
  apply_axis(c, "variant", "no_fmq");
  CHECK(c.learner.fmq_weight == 0.0);
  apply_axis(c, "variant", "no_supervision");
  CHECK(c.disabled_supervisor_fraction == 1.0);
  apply_axis(c, "fixed_fraction", "0.2");
  CHECK(c.fixed.count == 20);
  apply_axis(c, "placement", "EC");
  CHECK(c.fixed.placement == PlacementMetric::Eigenvector);
  apply_axis(c, "game", "CGHP3");
  CHECK(c.game.n_actions == 3);
  CHECK_THROWS_AS(apply_axis(c, "population", "many"), ConfigError);
  CHECK_THROWS_AS(apply_axis(c, "colour", "red"), ConfigError);
  CHECK_THROWS_AS(apply_axis(c, "variant", "other"), ConfigError);
}

TEST_CASE("replica seeds") {
  CHECK(replica_seed(1, "a=1", 0, true) == replica_seed(1, "a=2", 0, true));
  CHECK(replica_seed(1, "a=1", 0, false) != replica_seed(1, "a=2", 0, false));
  CHECK(replica_seed(1, "a=1", 0, false) != replica_seed(1, "a=1", 1, false));
}

TEST_CASE("presets") {
  const auto catalog = presets();
  CHECK(catalog.size() >= 14);
  std::set<std::string> names;
  for (const auto& p : catalog) {
    CHECK(names.insert(p.name).second);
    CHECK_NOTHROW(p.validate());
    CHECK_FALSE(p.description.empty());
  }

  const auto* t9 = find_preset(catalog, "table9");
  REQUIRE(t9 != nullptr);
  CHECK(expand_cells(*t9).size() == 20);

  const auto* f10 = find_preset(catalog, "fig10");
  REQUIRE(f10 != nullptr);
  CHECK(f10->base.game.kind == GameKind::CGHP);
  CHECK(f10->base.grouping.kind == GroupingKind::Random);
  REQUIRE(axis_of(*f10, "cluster_size") != nullptr);
  CHECK(axis_of(*f10, "cluster_size")->values ==
        std::vector<std::string>{"1", "2", "5", "10", "15", "20", "25", "50", "100"});

  const auto* f21 = find_preset(catalog, "fig21");
  REQUIRE(f21 != nullptr);
  REQUIRE(axis_of(*f21, "variant") != nullptr);
  const auto& v = axis_of(*f21, "variant")->values;
  CHECK(std::set<std::string>(v.begin(), v.end()) == std::set<std::string>{"full", "no_fmq", "no_supervision"});

  CHECK(find_preset(catalog, "fig99") == nullptr);
}

TEST_CASE("config JSON round trip") {
  const auto catalog = presets();
  const auto* f23 = find_preset(catalog, "fig23");
  REQUIRE(f23 != nullptr);
  const auto text = sim_config_to_json(f23->base);
  CHECK(sim_config_to_json(parse_sim_config(text)) == text);

  const auto exp = experiment_to_json(*f23);
  CHECK(experiment_to_json(parse_experiment(exp)) == exp);
}

TEST_CASE("config parser rejects unknown keys and bad values") {
  CHECK_NOTHROW(parse_sim_config(R"({"game": {"kind": "CG", "n_actions": 2}, "rounds": 10})"));
  CHECK_THROWS_AS(parse_sim_config(R"({"gmae": {}})"), ConfigError);
  CHECK_THROWS_AS(parse_sim_config(R"({"rounds": -3})"), ConfigError);
  CHECK_THROWS_AS(parse_sim_config(R"({"game": {"kind": "PD"}})"), ConfigError);
  CHECK_THROWS_AS(parse_sim_config(R"({"fixed": {"placement": "PR"}})"), ConfigError);
  CHECK_THROWS_AS(parse_sim_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_experiment(R"({"name": "x", "base": {}, "sweep": [{"axis": "nope", "values": [1]}]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment(R"({"name": "x", "base": {}, "replicas": 0})"), ConfigError);
}

TEST_CASE("plain config document becomes a one-cell experiment") {
  const auto s = parse_experiment(R"({"rounds": 5})", "plain");
  CHECK(s.name == "plain");
  CHECK(s.axes.empty());
  CHECK(s.base.rounds == 5);
}

TEST_CASE("output is identical for any worker count") {
  const auto root = scratch("workers");
  ExperimentSpec s;
  s.name = "det";
  s.base.rounds = 60;
  s.base.topology.n = 30;
  s.base.topology.params.mean_degree = 4;
  s.axes = {{"game", {"CG", "FSCGHP"}}};
  s.replicas = 5;
  std::vector<std::string> dumps;
  for (std::size_t w : {1, 2, 4}) {
    s.output_dir = root / std::to_string(w);
    RunOptions o;
    o.workers = w;
    run_experiment(s, o);
    std::string all;
    for (const auto& e : std::filesystem::recursive_directory_iterator(s.output_dir)) {
      if (e.is_regular_file()) all += std::filesystem::relative(e.path(), s.output_dir).string() + slurp(e.path());
    }
    dumps.push_back(all);
  }
  CHECK(dumps[0] == dumps[1]);
  CHECK(dumps[0] == dumps[2]);
  CHECK(std::filesystem::exists(root / "1" / "det" / "comparison.csv"));
  CHECK(std::filesystem::exists(root / "1" / "det" / "experiment.json"));
}

TEST_CASE("run_replicas matches single runs with derived seeds") {
  SimConfig c;
  c.topology.n = 20;
  c.topology.params.mean_degree = 4;
  c.rounds = 30;
  const auto runs = run_replicas(c, 3, 2);
  for (std::size_t i = 0; i < 3; ++i) {
    auto one = c;
    one.seed = replica_seed(c.seed, "base", i, true);
    CHECK(run_simulation(one).summary.payoff_series == runs[i].payoff_series);
  }
}

TEST_CASE("cell slugs are file-system safe") {
  const auto s = cell_slug("game=CG,placement=EC");
  CHECK(s.find('/') == std::string::npos);
  CHECK(s.find(',') == std::string::npos);
  CHECK(s.find('=') == std::string::npos);
  CHECK(cell_slug("a=1") != cell_slug("a=2"));
}

#ifdef NORMSIM_CLI_PATH
TEST_CASE("CLI exit codes") {
  const auto dir = scratch("cli");
  CHECK(cli("list-presets") == 0);
  CHECK(cli("run nonexistent") == 1);
  CHECK(cli("bogus-subcommand") == 1);
  {
    std::ofstream(dir / "bad.json") << R"({"rounds": "many"})";
    std::ofstream(dir / "good.json") << R"({"name": "g", "base": {"rounds": 3, "topology": {"n": 10, "mean_degree": 4}},
                                           "sweep": [{"axis": "game", "values": ["CG", "ACG"]}], "replicas": 2})";
  }
  CHECK(cli("validate " + (dir / "bad.json").string()) == 1);
  CHECK(cli("validate " + (dir / "good.json").string()) == 0);
  CHECK(cli("run " + (dir / "good.json").string() + " -q --workers 1 --out " + (dir / "out").string()) == 0);
  CHECK(std::filesystem::exists(dir / "out" / "g" / "comparison.csv"));
}
#endif
