#include <catch2/catch_amalgamated.hpp>

#include "mocp/csv.hpp"
#include "mocp/datagen.hpp"
#include "mocp/harness.hpp"
#include "mocp/stats.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace mocp;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

RunConfig small_config(const std::string& process)
{
  RunConfig cfg;
  cfg.dataset.builtin = process;
  cfg.dataset.n = 1200;
  cfg.split.cal_size = 300;
  cfg.L = 30;
  cfg.K = 30;
  cfg.K_volume = 30;
  cfg.metrics.wsc_cfg.n_directions = 50;
  cfg.methods = { "dr_cp", "c_hdr", "l_cp" };
  cfg.seeds = { 0, 1 };
  return cfg;
}

fs::path scratch(const std::string& name)
{
  const auto dir = fs::temp_directory_path() / ("mocp_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

nlohmann::json without_timings(const RunRecord& r)
{
  auto j = to_json(r);
  j["metrics"].erase("cal_time_s");
  j["metrics"].erase("test_time_s");
  return j;
}

} // namespace

TEST_CASE("records for every seed and method")
{
  const auto recs = run_experiment(small_config("unimodal"));
  REQUIRE(recs.size() == 6);
  for (const auto& r : recs) {
    CHECK(r.status == "ok");
    CHECK(r.mc.has_value());
    CHECK(r.mean_size.has_value());
    CHECK(r.median_size.has_value());
    CHECK(r.wsc.has_value());
    CHECK(r.cec_x.has_value());
    CHECK(r.cec_v.has_value());
    CHECK(r.n_cal == 300);
    CHECK(r.n_test == 1200 - 300 - 495 - 135);
    CHECK(r.cal_time_s >= 0.0);
    CHECK(r.test_time_s >= 0.0);
    CHECK(*r.mc > 0.6);
    CHECK(*r.mc < 0.95);
  }
  CHECK(recs[0].seed == 0);
  CHECK(recs[5].seed == 1);
  CHECK(recs[1].method == "c_hdr");
}

TEST_CASE("methods needing a sampler are skipped for density-only models")
{
  auto cfg = small_config("unimodal");
  cfg.methods = { "pcp", "dr_cp" };
  cfg.seeds = { 0 };
  cfg.model.hide = { "sampler" };
  const auto recs = run_experiment(cfg);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].status == "skipped");
  CHECK(recs[0].reason == "sampler required");
  CHECK_FALSE(recs[0].mc.has_value());
  CHECK(recs[1].status == "ok");
  CHECK_FALSE(recs[1].mean_size.has_value());
  CHECK_FALSE(recs[1].cec_v.has_value());
}

TEST_CASE("identical configs give identical records")
{
  auto cfg = small_config("bimodal");
  cfg.methods = { "pcp", "m_cp", "copula_cpts", "stdqr" };
  cfg.model.type = "knn_kde";
  cfg.model.k = 20;
  cfg.model.sigma_grid = { 0.1, 0.3 };
  cfg.seeds = { 3 };
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(without_timings(a[i]) == without_timings(b[i]));
  CHECK(a[3].status == "skipped");
  CHECK(a[3].reason == "invertible map required");
  CHECK(a[1].status == "ok");
  CHECK(a[1].timing_excludes_sampling);
  CHECK_FALSE(a[0].timing_excludes_sampling);
}

TEST_CASE("csv datasets and fit failures")
{
  const auto dir = scratch("csv");
  const Dataset d = gen_unimodal(600, RngStream(4));
  write_dataset_csv((dir / "data.csv").string(), d);

  RunConfig cfg;
  cfg.dataset.csv = (dir / "data.csv").string();
  cfg.split.cal_size = 200;
  cfg.methods = { "l_cp" };
  cfg.metrics.size = false;
  cfg.metrics.wsc_cfg.n_directions = 20;
  const auto recs = run_experiment(cfg);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].status == "ok");
  CHECK(recs[0].dataset == cfg.dataset.label());

  // more features than training rows: the model cannot be fitted
  Dataset wide(Matrix::Random(40, 30), Matrix::Random(40, 2));
  RunConfig w;
  w.dataset.csv = "unused";
  w.split.cal_size = 10;
  w.methods = { "dr_cp", "l_cp" };
  const auto failed = run_seed(w, wide, 0);
  REQUIRE(failed.size() == 2);
  for (const auto& r : failed)
    CHECK(r.status == "error");
}

TEST_CASE("config parsing")
{
  const auto cfg = run_config_from_json(nlohmann::json::parse(R"({
    "dataset": {"builtin": "bimodal", "n": 3000},
    "model": {"type": "knn_kde", "k": 30},
    "methods": ["pcp", "c_pcp"],
    "alpha": 0.1,
    "metrics": {"wsc_delta": 0.1, "J": 4},
    "seeds": [5, 6]
  })"));
  CHECK(cfg.dataset.builtin == "bimodal");
  CHECK(cfg.model.k == 30);
  CHECK(cfg.alpha == 0.1);
  CHECK(cfg.metrics.wsc_cfg.delta == 0.1);
  CHECK(cfg.metrics.J == 4);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{ 5, 6 });

  const auto round = run_config_from_json(to_json(cfg));
  CHECK(config_hash(round) == config_hash(cfg));
  auto other = cfg;
  other.seeds = { 9 };
  other.output_dir = "/elsewhere";
  CHECK(config_hash(other) == config_hash(cfg));
  other.alpha = 0.2;
  CHECK(config_hash(other) != config_hash(cfg));

  using nlohmann::json;
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"dataset": {"builtin": "unimodal"}, "bogus": 1})")), InvalidConfig);
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"dataset": {"builtin": "unimodal"}, "methods": ["nope"]})")), InvalidConfig);
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"dataset": {"builtin": "unimodal"}, "alpha": 1.5})")), InvalidConfig);
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"dataset": {"builtin": "unimodal"}, "model": {"hide": ["wings"]}})")), InvalidConfig);
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"dataset": {"csv": "x.csv"}, "model": "oracle"})")), InvalidConfig);
}

TEST_CASE("records persist and reload")
{
  const auto dir = scratch("persist");
  auto cfg = small_config("unimodal");
  cfg.methods = { "l_cp", "dr_cp" };
  cfg.output_dir = dir.string();
  const auto recs = run_experiment(cfg);
  const auto back = load_records(dir.string());
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i)
    CHECK(to_json(back[i]) == to_json(recs[i]));
  CHECK(fs::exists(dir / "index.csv"));
  CHECK(fs::exists(dir / "records" / (config_hash(cfg) + "_0.json")));
  CHECK_THROWS_AS(load_records((dir / "missing").string()), InvalidConfig);
}

TEST_CASE("report orientation and ranks")
{
  auto uni = small_config("unimodal");
  auto bi = small_config("bimodal");
  for (auto* c : { &uni, &bi }) {
    c->methods = { "dr_cp", "l_cp", "pcp" };
    c->metrics.cec_v = false;
  }
  auto recs = run_experiment(uni);
  const auto more = run_experiment(bi);
  recs.insert(recs.end(), more.begin(), more.end());

  const auto om = oriented_metrics(recs[0]);
  std::map<std::string, double> m(om.begin(), om.end());
  CHECK(m.at("abs_mc_error") == Approx(std::abs(*recs[0].mc - 0.8)));
  CHECK(m.at("abs_wsc_error") == Approx(std::abs(*recs[0].wsc - 0.8)));
  CHECK(m.count("cec_v") == 0);

  const auto dir = scratch("report");
  const auto files = write_report(recs, dir.string());
  std::ifstream ranks(files.ranks_csv);
  std::string line;
  std::getline(ranks, line);
  CHECK(line == "metric,method,mean_rank");
  std::map<std::pair<std::string, std::string>, double> read;
  while (std::getline(ranks, line)) {
    std::stringstream ss(line);
    std::string metric, method, value;
    std::getline(ss, metric, ',');
    std::getline(ss, method, ',');
    std::getline(ss, value);
    read[{ metric, method }] = std::stod(value);
  }
  const auto tables = metric_tables(recs);
  REQUIRE_FALSE(tables.empty());
  for (const auto& t : tables) {
    CHECK(t.datasets.size() == 2);
    const auto cd = cd_summary(t.values, t.methods);
    for (std::size_t i = 0; i < t.methods.size(); ++i)
      CHECK(read.at({ t.metric, t.methods[i] }) == Approx(cd.mean_ranks[i]));
  }

  // per-dataset mean over seeds
  const auto& mc = *std::find_if(tables.begin(), tables.end(), [](const auto& t) { return t.metric == "abs_mc_error"; });
  double expect = 0;
  for (const auto& r : recs)
    if (r.dataset == mc.datasets[0] && r.method == mc.methods[0])
      expect += std::abs(*r.mc - 0.8) / 2;
  CHECK(mc.values(0, 0) == Approx(expect));

  // a single record still yields one row per metric
  const auto one = write_report({ recs[0] }, (dir / "one").string());
  std::ifstream lng(one.long_csv);
  int rows = -1;
  while (std::getline(lng, line))
    ++rows;
  CHECK(rows == static_cast<int>(om.size()));
  CHECK_THROWS_AS(write_report({}, dir.string()), InvalidData);
}
