#pragma once

#include "mocp/methods.hpp"
#include "mocp/metrics.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace mocp {

struct DatasetSource
{
  std::string builtin;   // "unimodal" or "bimodal", empty when csv is set
  std::string csv;       // path to a dataset CSV
  Index n = 10000;       // rows generated for builtin sources

  std::string label() const;
};

struct SplitConfig
{
  std::size_t cal_size = 2048;
  double train_frac = 0.55;
  double val_frac = 0.15;
};

struct ModelConfig
{
  std::string type = "conditional_gaussian"; // or knn_kde, oracle
  Index k = 50;
  std::vector<double> sigma_grid;            // empty: KnnKde::default_sigma_grid()
  double ridge = 1e-8;
  //! Capabilities to withhold from the methods: any of density, sampler,
  //! marginal_quantiles, invertible_map.
  std::vector<std::string> hide;
};

struct MetricsConfig
{
  bool size = true;
  bool wsc = true;
  bool cec_x = true;
  bool cec_v = true;
  WscConfig wsc_cfg;
  Index J = 0;   // 0: default_cluster_count(n_test)
  Index cec_v_m = 20;
};

struct RunConfig
{
  DatasetSource dataset;
  SplitConfig split;
  ModelConfig model;
  std::vector<std::string> methods = method_names();
  double alpha = 0.2;
  Index L = 100;
  Index K = 100;
  Index K_volume = 100;
  CopulaConfig copula;
  MetricsConfig metrics;
  std::vector<std::uint64_t> seeds{ 0 };
  std::string output_dir;  // empty: do not persist
  bool standardize = true;

  MethodParams method_params() const;
  void validate() const;
};

RunConfig run_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const RunConfig& cfg);

//! FNV-1a over the canonical JSON of everything except seeds and output_dir.
std::string config_hash(const RunConfig& cfg);

struct RunRecord
{
  std::string config_hash;
  std::string dataset;
  std::string model;
  std::string method;
  std::uint64_t seed = 0;
  std::string status = "ok"; // ok | skipped | error
  std::string reason;
  double alpha = 0.2;
  std::size_t n_cal = 0;
  std::size_t n_test = 0;
  std::optional<double> mc;
  std::optional<double> mean_size;
  std::optional<double> median_size;
  std::optional<double> wsc;
  std::optional<double> cec_x;
  std::optional<double> cec_v;
  double cal_time_s = 0.0;
  double test_time_s = 0.0;
  //! Set for methods whose timings leave out base-model sampling used only
  //! to estimate marginal quantiles.
  bool timing_excludes_sampling = false;
};

nlohmann::json to_json(const RunRecord& r);
RunRecord run_record_from_json(const nlohmann::json& j);

//! Runs every (seed, method) pair. Records are persisted when
//! cfg.output_dir is set.
std::vector<RunRecord> run_experiment(const RunConfig& cfg);

//! Runs one seed on an already loaded dataset.
std::vector<RunRecord> run_seed(const RunConfig& cfg, const Dataset& data, std::uint64_t seed);

//! Loads the data described by cfg.dataset (builtin data use rng seed 0 of
//! the data phase unless `seed` is given).
Dataset load_dataset(const RunConfig& cfg, std::uint64_t seed = 0);

void save_records(const std::string& output_dir, const std::vector<RunRecord>& records);
std::vector<RunRecord> load_records(const std::string& output_dir);

//! Metric values oriented so that lower is better.
std::vector<std::pair<std::string, double>> oriented_metrics(const RunRecord& r);

struct ReportFiles
{
  std::string long_csv;
  std::string ranks_csv;
  std::string groups_json;
};

//! Writes metrics_long.csv, ranks.csv and groups.json into `dir`.
ReportFiles write_report(const std::vector<RunRecord>& records, const std::string& dir);

//! Mean over seeds per (dataset, method) of an oriented metric, as a
//! datasets x methods table restricted to methods present for every dataset.
struct MetricTable
{
  std::string metric;
  std::vector<std::string> datasets;
  std::vector<std::string> methods;
  Matrix values;
};
std::vector<MetricTable> metric_tables(const std::vector<RunRecord>& records);

} // namespace mocp
