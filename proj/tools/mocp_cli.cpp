#include "mocp/acceptance.hpp"
#include "mocp/conditional_gaussian.hpp"
#include "mocp/csv.hpp"
#include "mocp/datagen.hpp"
#include "mocp/harness.hpp"
#include "mocp/knn_kde.hpp"
#include "mocp/model_io.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>

using namespace mocp;

namespace {

int cmd_generate(const std::string& process, Index n, std::uint64_t seed, const std::string& out, bool raw)
{
  ToyProcessSpec spec;
  spec.id = parse_toy_process(process);
  spec.standardize = !raw;
  const Dataset data = generate_toy(spec, n, RngStream(seed).derive(Phase::data));
  if (out.empty() || out == "-")
    write_dataset_csv(std::cout, data);
  else
    write_dataset_csv(out, data);
  return 0;
}

int cmd_fit(const std::string& data_path,
            const std::string& type,
            const std::string& val_path,
            Index k,
            const std::vector<double>& grid,
            const std::string& process,
            const std::string& out)
{
  if (type == "oracle") {
    ToyProcessSpec spec;
    spec.id = parse_toy_process(process);
    save_model(OracleToyModel(spec), out);
    return 0;
  }
  if (data_path.empty())
    throw InvalidConfig("fit: --data is required for model type " + type);
  const Dataset train = read_dataset_csv(data_path);
  if (type == "conditional_gaussian") {
    save_model(ConditionalGaussian::fit(train), out);
  } else if (type == "knn_kde") {
    const Dataset val = val_path.empty() ? train : read_dataset_csv(val_path);
    const auto g = grid.empty() ? KnnKde::default_sigma_grid() : grid;
    const auto model = KnnKde::fit(train, k, g, val);
    spdlog::info("knn_kde: selected sigma {}", model.sigma());
    save_model(model, out);
  } else {
    throw InvalidConfig("fit: unknown model type '" + type + "'");
  }
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& output_override)
{
  std::ifstream in(config_path);
  if (!in)
    throw InvalidConfig("cannot read config " + config_path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("config is not valid JSON: ") + e.what());
  }
  if (!output_override.empty())
    doc["output_dir"] = output_override;
  const RunConfig cfg = run_config_from_json(doc);
  const auto records = run_experiment(cfg);
  int errors = 0;
  for (const auto& r : records) {
    std::cout << r.dataset << ' ' << r.method << " seed=" << r.seed << ' ' << r.status;
    if (r.mc)
      std::cout << " mc=" << *r.mc;
    if (r.median_size)
      std::cout << " median_size=" << *r.median_size;
    if (!r.reason.empty())
      std::cout << " (" << r.reason << ')';
    std::cout << '\n';
    errors += r.status == "error" ? 1 : 0;
  }
  return errors > 0 ? 3 : 0;
}

int cmd_report(const std::string& records_dir, const std::string& out_dir)
{
  const auto records = load_records(records_dir);
  const auto files = write_report(records, out_dir.empty() ? records_dir : out_dir);
  std::cout << files.long_csv << '\n' << files.ranks_csv << '\n' << files.groups_json << '\n';
  return 0;
}

int cmd_selftest(const std::vector<int>& only)
{
  bool all = true;
  run_acceptance(only, [&](const CriterionResult& r) {
    std::cout << format_result(r) << std::endl;
    all = all && r.passed;
  });
  return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{ "Multi-output conformal prediction toolkit" };
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  auto* gen = app.add_subcommand("generate", "Write a synthetic toy dataset as CSV");
  std::string g_process = "unimodal", g_out;
  Index g_n = 10000;
  std::uint64_t g_seed = 0;
  bool g_raw = false;
  gen->add_option("--process", g_process, "unimodal or bimodal")->check(CLI::IsMember({ "unimodal", "bimodal" }));
  gen->add_option("-n,--n", g_n, "number of rows")->check(CLI::PositiveNumber);
  gen->add_option("--seed", g_seed, "random seed");
  gen->add_option("-o,--out", g_out, "output CSV (stdout when omitted)");
  gen->add_flag("--raw", g_raw, "skip the scaling to zero mean and unit variance");

  auto* fit = app.add_subcommand("fit", "Fit a base predictor and save it as JSON");
  std::string f_data, f_type = "conditional_gaussian", f_val, f_process = "unimodal", f_out;
  Index f_k = 50;
  std::vector<double> f_grid;
  fit->add_option("--data", f_data, "training CSV");
  fit->add_option("--model", f_type, "conditional_gaussian, knn_kde or oracle");
  fit->add_option("--val", f_val, "validation CSV for the KDE bandwidth");
  fit->add_option("--k", f_k, "neighbours for knn_kde");
  fit->add_option("--sigma-grid", f_grid, "bandwidth grid for knn_kde");
  fit->add_option("--process", f_process, "toy process of the oracle model");
  fit->add_option("-o,--out", f_out, "model JSON")->required();

  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  std::string r_config, r_out;
  run->add_option("config", r_config, "config JSON")->required();
  run->add_option("-o,--output-dir", r_out, "override output_dir of the config");

  auto* rep = app.add_subcommand("report", "Summarize stored run records");
  std::string p_dir, p_out;
  rep->add_option("records_dir", p_dir, "output_dir of a previous run")->required();
  rep->add_option("-o,--out", p_out, "directory for the report files");

  auto* self = app.add_subcommand("selftest", "Run the acceptance suite");
  std::vector<int> s_only;
  self->add_option("--only", s_only, "criterion ids to run")->check(CLI::Range(1, kCriterionCount));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*gen)
      return cmd_generate(g_process, g_n, g_seed, g_out, g_raw);
    if (*fit)
      return cmd_fit(f_data, f_type, f_val, f_k, f_grid, f_process, f_out);
    if (*run)
      return cmd_run(r_config, r_out);
    if (*rep)
      return cmd_report(p_dir, p_out);
    if (*self)
      return cmd_selftest(s_only);
  } catch (const InvalidConfig& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const CapabilityError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidData& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
