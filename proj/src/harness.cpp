#include "mocp/harness.hpp"

#include "mocp/conditional_gaussian.hpp"
#include "mocp/csv.hpp"
#include "mocp/datagen.hpp"
#include "mocp/knn_kde.hpp"
#include "mocp/stats.hpp"
#include "mocp/toy_process.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

namespace mocp {

using nlohmann::json;
namespace fs = std::filesystem;

std::string DatasetSource::label() const
{
  if (!csv.empty())
    return fs::path(csv).stem().string();
  return builtin;
}

MethodParams RunConfig::method_params() const
{
  MethodParams p;
  p.alpha = alpha;
  p.mc.L = L;
  p.mc.K = K;
  p.copula = copula;
  p.quantile_fallback = L;
  return p;
}

void RunConfig::validate() const
{
  check_alpha(alpha);
  if (dataset.builtin.empty() == dataset.csv.empty())
    throw InvalidConfig("dataset: set exactly one of 'builtin' and 'csv'");
  if (!dataset.builtin.empty())
    parse_toy_process(dataset.builtin);
  if (!dataset.builtin.empty() && dataset.n < 2)
    throw InvalidConfig("dataset: n must be at least 2");
  if (model.type != "conditional_gaussian" && model.type != "knn_kde" && model.type != "oracle")
    throw InvalidConfig("model: unknown type '" + model.type + "'");
  if (model.type == "oracle" && dataset.builtin.empty())
    throw InvalidConfig("model: the oracle model needs a builtin dataset");
  if (model.type == "knn_kde" && model.k < 1)
    throw InvalidConfig("model: k must be positive");
  for (double s : model.sigma_grid)
    if (!(s > 0.0))
      throw InvalidConfig("model: bandwidths must be positive");
  for (const auto& h : model.hide)
    if (h != "density" && h != "sampler" && h != "marginal_quantiles" && h != "invertible_map")
      throw InvalidConfig("model: unknown capability '" + h + "' in hide");
  if (methods.empty())
    throw InvalidConfig("methods: list is empty");
  for (const auto& m : methods)
    if (!is_method(m))
      throw InvalidConfig("methods: unknown method '" + m + "'");
  if (L < 1 || K < 1 || K_volume < 1)
    throw InvalidConfig("L, K and K_volume must be positive");
  if (seeds.empty())
    throw InvalidConfig("seeds: list is empty");
  if (!(split.train_frac > 0.0) || split.val_frac < 0.0 || !(split.train_frac + split.val_frac < 1.0))
    throw InvalidConfig("split: need train_frac > 0, val_frac >= 0 and train_frac + val_frac < 1");
  if (!(copula.cal1_fraction > 0.0 && copula.cal1_fraction < 1.0))
    throw InvalidConfig("copula: cal1_fraction must lie in (0, 1)");
  if (!(metrics.wsc_cfg.delta > 0.0 && metrics.wsc_cfg.delta <= 1.0))
    throw InvalidConfig("metrics: wsc delta must lie in (0, 1]");
  if (metrics.wsc_cfg.n_directions < 1 || metrics.J < 0 || metrics.cec_v_m < 1)
    throw InvalidConfig("metrics: invalid wsc_directions, J or cec_v_m");
}

namespace {

template <class T>
void read_opt(const json& j, const char* key, T& out)
{
  if (j.contains(key) && !j.at(key).is_null())
    out = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where)
{
  if (!j.is_object())
    throw InvalidConfig(where + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : keys)
      known = known || item.key() == k;
    if (!known)
      throw InvalidConfig(where + ": unknown key '" + item.key() + "'");
  }
}

} // namespace

RunConfig run_config_from_json(const json& doc)
{
  RunConfig cfg;
  try {
    reject_unknown(doc,
                   { "dataset", "split", "model", "methods", "alpha", "L", "K", "K_volume", "copula",
                     "metrics", "seeds", "output_dir", "standardize" },
                   "config");
    if (doc.contains("dataset")) {
      const json& d = doc.at("dataset");
      reject_unknown(d, { "builtin", "csv", "n" }, "dataset");
      read_opt(d, "builtin", cfg.dataset.builtin);
      read_opt(d, "csv", cfg.dataset.csv);
      read_opt(d, "n", cfg.dataset.n);
    } else {
      cfg.dataset.builtin = "unimodal";
    }
    if (doc.contains("split")) {
      const json& s = doc.at("split");
      reject_unknown(s, { "cal_size", "train_frac", "val_frac" }, "split");
      read_opt(s, "cal_size", cfg.split.cal_size);
      read_opt(s, "train_frac", cfg.split.train_frac);
      read_opt(s, "val_frac", cfg.split.val_frac);
    }
    if (doc.contains("model")) {
      const json& m = doc.at("model");
      if (m.is_string()) {
        cfg.model.type = m.get<std::string>();
      } else {
        reject_unknown(m, { "type", "k", "sigma_grid", "ridge", "hide" }, "model");
        read_opt(m, "type", cfg.model.type);
        read_opt(m, "k", cfg.model.k);
        read_opt(m, "sigma_grid", cfg.model.sigma_grid);
        read_opt(m, "ridge", cfg.model.ridge);
        read_opt(m, "hide", cfg.model.hide);
      }
    }
    read_opt(doc, "methods", cfg.methods);
    read_opt(doc, "alpha", cfg.alpha);
    read_opt(doc, "L", cfg.L);
    read_opt(doc, "K", cfg.K);
    read_opt(doc, "K_volume", cfg.K_volume);
    if (doc.contains("copula")) {
      const json& c = doc.at("copula");
      reject_unknown(c, { "cal1_fraction" }, "copula");
      read_opt(c, "cal1_fraction", cfg.copula.cal1_fraction);
    }
    if (doc.contains("metrics")) {
      const json& m = doc.at("metrics");
      reject_unknown(m, { "size", "wsc", "cec_x", "cec_v", "wsc_delta", "wsc_directions", "wsc_split", "J", "cec_v_m" }, "metrics");
      read_opt(m, "size", cfg.metrics.size);
      read_opt(m, "wsc", cfg.metrics.wsc);
      read_opt(m, "cec_x", cfg.metrics.cec_x);
      read_opt(m, "cec_v", cfg.metrics.cec_v);
      read_opt(m, "wsc_delta", cfg.metrics.wsc_cfg.delta);
      read_opt(m, "wsc_directions", cfg.metrics.wsc_cfg.n_directions);
      read_opt(m, "wsc_split", cfg.metrics.wsc_cfg.test_split_fraction);
      read_opt(m, "J", cfg.metrics.J);
      read_opt(m, "cec_v_m", cfg.metrics.cec_v_m);
    }
    read_opt(doc, "seeds", cfg.seeds);
    read_opt(doc, "output_dir", cfg.output_dir);
    read_opt(doc, "standardize", cfg.standardize);
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json to_json(const RunConfig& c)
{
  json d;
  if (!c.dataset.csv.empty())
    d["csv"] = c.dataset.csv;
  else
    d = { { "builtin", c.dataset.builtin }, { "n", c.dataset.n } };
  json model = { { "type", c.model.type }, { "ridge", c.model.ridge } };
  if (c.model.type == "knn_kde") {
    model["k"] = c.model.k;
    model["sigma_grid"] = c.model.sigma_grid.empty() ? KnnKde::default_sigma_grid() : c.model.sigma_grid;
  }
  if (!c.model.hide.empty())
    model["hide"] = c.model.hide;
  return { { "dataset", d },
           { "split", { { "cal_size", c.split.cal_size }, { "train_frac", c.split.train_frac }, { "val_frac", c.split.val_frac } } },
           { "model", model },
           { "methods", c.methods },
           { "alpha", c.alpha },
           { "L", c.L },
           { "K", c.K },
           { "K_volume", c.K_volume },
           { "copula", { { "cal1_fraction", c.copula.cal1_fraction } } },
           { "metrics",
             { { "size", c.metrics.size },
               { "wsc", c.metrics.wsc },
               { "cec_x", c.metrics.cec_x },
               { "cec_v", c.metrics.cec_v },
               { "wsc_delta", c.metrics.wsc_cfg.delta },
               { "wsc_directions", c.metrics.wsc_cfg.n_directions },
               { "wsc_split", c.metrics.wsc_cfg.test_split_fraction },
               { "J", c.metrics.J },
               { "cec_v_m", c.metrics.cec_v_m } } },
           { "seeds", c.seeds },
           { "output_dir", c.output_dir },
           { "standardize", c.standardize } };
}

std::string config_hash(const RunConfig& cfg)
{
  json j = to_json(cfg);
  j.erase("seeds");
  j.erase("output_dir");
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

json opt(const std::optional<double>& v)
{
  return v ? json(*v) : json(nullptr);
}

std::optional<double> opt_from(const json& j, const char* key)
{
  if (!j.contains(key) || j.at(key).is_null())
    return std::nullopt;
  return j.at(key).get<double>();
}

} // namespace

json to_json(const RunRecord& r)
{
  return { { "config_hash", r.config_hash },
           { "dataset", r.dataset },
           { "model", r.model },
           { "method", r.method },
           { "seed", r.seed },
           { "status", r.status },
           { "reason", r.reason },
           { "alpha", r.alpha },
           { "n_cal", r.n_cal },
           { "n_test", r.n_test },
           { "metrics",
             { { "mc", opt(r.mc) },
               { "mean_size", opt(r.mean_size) },
               { "median_size", opt(r.median_size) },
               { "wsc", opt(r.wsc) },
               { "cec_x", opt(r.cec_x) },
               { "cec_v", opt(r.cec_v) },
               { "cal_time_s", r.cal_time_s },
               { "test_time_s", r.test_time_s } } },
           { "timing_excludes_sampling", r.timing_excludes_sampling } };
}

RunRecord run_record_from_json(const json& j)
{
  try {
    RunRecord r;
    r.config_hash = j.value("config_hash", "");
    r.dataset = j.at("dataset").get<std::string>();
    r.model = j.value("model", "");
    r.method = j.at("method").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.status = j.at("status").get<std::string>();
    r.reason = j.value("reason", "");
    r.alpha = j.value("alpha", 0.2);
    r.n_cal = j.value("n_cal", std::size_t{ 0 });
    r.n_test = j.value("n_test", std::size_t{ 0 });
    const json& m = j.at("metrics");
    r.mc = opt_from(m, "mc");
    r.mean_size = opt_from(m, "mean_size");
    r.median_size = opt_from(m, "median_size");
    r.wsc = opt_from(m, "wsc");
    r.cec_x = opt_from(m, "cec_x");
    r.cec_v = opt_from(m, "cec_v");
    r.cal_time_s = m.value("cal_time_s", 0.0);
    r.test_time_s = m.value("test_time_s", 0.0);
    r.timing_excludes_sampling = j.value("timing_excludes_sampling", false);
    return r;
  } catch (const json::exception& e) {
    throw InvalidData(std::string("run record: ") + e.what());
  }
}

Dataset load_dataset(const RunConfig& cfg, std::uint64_t seed)
{
  if (!cfg.dataset.csv.empty())
    return read_dataset_csv(cfg.dataset.csv);
  ToyProcessSpec spec;
  spec.id = parse_toy_process(cfg.dataset.builtin);
  return generate_toy(spec, cfg.dataset.n, RngStream(seed).derive(Phase::data));
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct SeedContext
{
  Dataset train, val, cal, test;
  ModelPtr model;
  std::vector<Index> cells_x;
  std::vector<Index> cells_v;
};

ModelPtr fit_base_model(const RunConfig& cfg, const SeedContext& ctx)
{
  if (cfg.model.type == "oracle") {
    ToyProcessSpec spec;
    spec.id = parse_toy_process(cfg.dataset.builtin);
    return std::make_shared<OracleToyModel>(spec);
  }
  if (cfg.model.type == "conditional_gaussian")
    return std::make_shared<ConditionalGaussian>(ConditionalGaussian::fit(ctx.train, cfg.model.ridge));
  const auto grid = cfg.model.sigma_grid.empty() ? KnnKde::default_sigma_grid() : cfg.model.sigma_grid;
  const Dataset& val = ctx.val.n() > 0 ? ctx.val : ctx.train;
  const Index k = std::min<Index>(cfg.model.k, ctx.train.n());
  return std::make_shared<KnnKde>(KnnKde::fit(ctx.train, k, grid, val));
}

ModelPtr fit_model(const RunConfig& cfg, const SeedContext& ctx)
{
  ModelPtr model = fit_base_model(cfg, ctx);
  if (cfg.model.hide.empty())
    return model;
  Capabilities caps = model->capabilities();
  for (const auto& h : cfg.model.hide) {
    if (h == "density")
      caps.density = false;
    else if (h == "sampler")
      caps.sampler = false;
    else if (h == "marginal_quantiles")
      caps.marginal_quantiles = false;
    else
      caps.invertible_map = false;
  }
  return std::make_shared<MaskedPredictor>(std::move(model), caps);
}

bool is_quantile_method(const std::string& m)
{
  return m == "m_cp" || m == "copula_cpts";
}

} // namespace

std::vector<RunRecord> run_seed(const RunConfig& cfg, const Dataset& data, std::uint64_t seed)
{
  const RngStream root(seed);
  const std::string hash = config_hash(cfg);
  std::vector<RunRecord> records;
  for (const auto& m : cfg.methods) {
    RunRecord r;
    r.config_hash = hash;
    r.dataset = cfg.dataset.label();
    r.model = cfg.model.type;
    r.method = m;
    r.seed = seed;
    r.alpha = cfg.alpha;
    r.timing_excludes_sampling = is_quantile_method(m);
    records.push_back(r);
  }
  const auto fail_all = [&](const std::string& why) {
    for (auto& r : records) {
      r.status = "error";
      r.reason = why;
    }
    return records;
  };

  SeedContext ctx;
  try {
    data.validate();
    const auto idx = split_dataset(data, cfg.split.cal_size, cfg.split.train_frac, cfg.split.val_frac, root.derive(Phase::split));
    ctx.train = data.subset(idx.train);
    ctx.val = data.subset(idx.val);
    ctx.cal = data.subset(idx.cal);
    ctx.test = data.subset(idx.test);
    if (ctx.test.n() < 1 || ctx.train.n() < 1)
      throw InvalidConfig("split leaves no training or test rows");
    if (cfg.standardize && cfg.model.type != "oracle") {
      const auto sx = Standardizer::fit(ctx.train.x);
      const auto sy = Standardizer::fit(ctx.train.y);
      for (Dataset* d : { &ctx.train, &ctx.val, &ctx.cal, &ctx.test }) {
        if (d->n() == 0)
          continue;
        if (d->p() > 0)
          d->x = sx.apply(d->x);
        d->y = sy.apply(d->y);
      }
    }
    ctx.model = fit_model(cfg, ctx);
  } catch (const InvalidConfig&) {
    throw;
  } catch (const Error& e) {
    spdlog::error("seed {}: {}", seed, e.what());
    return fail_all(e.what());
  }

  const Index n_test = ctx.test.n();
  const Matrix& part_x = ctx.val.n() > 0 ? ctx.val.x : ctx.train.x;
  const auto caps = ctx.model->capabilities();
  const bool can_size = cfg.metrics.size && caps.density && caps.sampler;
  const bool can_cec_v = cfg.metrics.cec_v && caps.density && caps.sampler;
  try {
    const Index J = cfg.metrics.J > 0 ? cfg.metrics.J : default_cluster_count(n_test);
    if (cfg.metrics.cec_x && data.p() > 0) {
      const auto part = kmeans_pp(part_x, std::min(J, part_x.rows()), root.derive(Phase::cec).derive(0));
      ctx.cells_x = part.cells(ctx.test.x);
    }
    if (can_cec_v) {
      const RngStream r = root.derive(Phase::cec).derive(1);
      const Matrix val_f = log_density_features(*ctx.model, part_x, cfg.metrics.cec_v_m, r.derive(0));
      const Matrix test_f = log_density_features(*ctx.model, ctx.test.x, cfg.metrics.cec_v_m, r.derive(1));
      const auto part = kmeans_pp(val_f, std::min(J, val_f.rows()), r.derive(2));
      ctx.cells_v = part.cells(test_f);
    }
  } catch (const Error& e) {
    spdlog::error("seed {}: conditional coverage setup failed: {}", seed, e.what());
    return fail_all(e.what());
  }

  const MethodParams params = cfg.method_params();
  for (auto& r : records) {
    r.n_cal = static_cast<std::size_t>(ctx.cal.n());
    r.n_test = static_cast<std::size_t>(n_test);
    if (const auto why = incompatibility(r.method, *ctx.model); !why.empty()) {
      r.status = "skipped";
      r.reason = why;
      spdlog::info("seed {}: skipping {} ({})", seed, r.method, why);
      continue;
    }
    try {
      const auto method = make_method(r.method, ctx.model, params);

      reset_quantile_sampling_seconds();
      auto t0 = Clock::now();
      const auto fitted = method->calibrate(ctx.cal, root.derive(Phase::calibration));
      r.cal_time_s = seconds_since(t0);
      if (r.timing_excludes_sampling)
        r.cal_time_s = std::max(0.0, r.cal_time_s - quantile_sampling_seconds());

      const RngStream test_rng = root.derive(Phase::test);
      const RngStream vol_rng = root.derive(Phase::volume);
      std::vector<bool> inside(static_cast<std::size_t>(n_test));
      std::vector<double> sizes;
      double test_time = 0.0;
      for (Index i = 0; i < n_test; ++i) {
        const Vector x = ctx.test.input(i);
        reset_quantile_sampling_seconds();
        t0 = Clock::now();
        const auto region = fitted->region(x, test_rng.derive(static_cast<std::uint64_t>(i)));
        inside[static_cast<std::size_t>(i)] = region->contains(ctx.test.output(i));
        double dt = seconds_since(t0);
        if (r.timing_excludes_sampling)
          dt = std::max(0.0, dt - quantile_sampling_seconds());
        test_time += dt;
        if (can_size) {
          sizes.push_back(estimate_region_size(
            *ctx.model, [&](const Vector& y) { return region->contains(y); }, x, cfg.K_volume,
            vol_rng.derive(static_cast<std::uint64_t>(i))));
        }
      }
      r.test_time_s = test_time;
      r.mc = marginal_coverage(inside);
      if (can_size) {
        const auto s = summarize_sizes(std::move(sizes), cfg.K_volume);
        r.mean_size = s.mean_size;
        r.median_size = s.median_size;
      }
      if (cfg.metrics.wsc && data.p() > 0)
        r.wsc = wsc(ctx.test.x, inside, cfg.metrics.wsc_cfg, root.derive(Phase::wsc)).value;
      if (!ctx.cells_x.empty())
        r.cec_x = cec(ctx.cells_x, inside, cfg.alpha);
      if (!ctx.cells_v.empty())
        r.cec_v = cec(ctx.cells_v, inside, cfg.alpha);
    } catch (const Error& e) {
      r.status = "error";
      r.reason = e.what();
      spdlog::error("seed {} method {}: {}", seed, r.method, e.what());
    }
  }
  return records;
}

std::vector<RunRecord> run_experiment(const RunConfig& cfg)
{
  cfg.validate();
  std::vector<RunRecord> all;
  std::optional<Dataset> shared;
  if (!cfg.dataset.csv.empty())
    shared = load_dataset(cfg);
  for (std::uint64_t seed : cfg.seeds) {
    spdlog::info("seed {}: running {} methods", seed, cfg.methods.size());
    const Dataset data = shared ? *shared : load_dataset(cfg, seed);
    auto recs = run_seed(cfg, data, seed);
    if (!cfg.output_dir.empty())
      save_records(cfg.output_dir, recs);
    all.insert(all.end(), recs.begin(), recs.end());
  }
  return all;
}

void save_records(const std::string& output_dir, const std::vector<RunRecord>& records)
{
  if (records.empty())
    return;
  const fs::path dir = fs::path(output_dir) / "records";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw InvalidConfig("cannot create output directory " + dir.string());

  std::map<std::pair<std::string, std::uint64_t>, std::vector<const RunRecord*>> groups;
  for (const auto& r : records)
    groups[{ r.config_hash, r.seed }].push_back(&r);

  const fs::path index = fs::path(output_dir) / "index.csv";
  const bool fresh = !fs::exists(index);
  std::ofstream idx(index, std::ios::app);
  if (!idx)
    throw InvalidConfig("cannot write " + index.string());
  if (fresh)
    idx << "config_hash,seed,dataset,method,status,file\n";
  for (const auto& [key, recs] : groups) {
    const std::string name = key.first + "_" + std::to_string(key.second) + ".json";
    json arr = json::array();
    for (const auto* r : recs)
      arr.push_back(to_json(*r));
    std::ofstream out(dir / name);
    if (!out)
      throw InvalidConfig("cannot write " + (dir / name).string());
    out << arr.dump(1) << '\n';
    for (const auto* r : recs)
      idx << r->config_hash << ',' << r->seed << ',' << r->dataset << ',' << r->method << ',' << r->status << ",records/" << name << '\n';
  }
}

std::vector<RunRecord> load_records(const std::string& output_dir)
{
  const fs::path dir = fs::path(output_dir) / "records";
  if (!fs::is_directory(dir))
    throw InvalidConfig("no records directory under " + output_dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json")
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<RunRecord> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    json arr;
    try {
      in >> arr;
    } catch (const json::exception& e) {
      throw InvalidData(f.string() + ": " + e.what());
    }
    for (const auto& j : arr)
      out.push_back(run_record_from_json(j));
  }
  return out;
}

std::vector<std::pair<std::string, double>> oriented_metrics(const RunRecord& r)
{
  std::vector<std::pair<std::string, double>> out;
  if (r.status != "ok")
    return out;
  const double target = 1.0 - r.alpha;
  if (r.mc)
    out.emplace_back("abs_mc_error", std::abs(*r.mc - target));
  if (r.wsc)
    out.emplace_back("abs_wsc_error", std::abs(*r.wsc - target));
  if (r.mean_size)
    out.emplace_back("mean_size", *r.mean_size);
  if (r.median_size)
    out.emplace_back("median_size", *r.median_size);
  if (r.cec_x)
    out.emplace_back("cec_x", *r.cec_x);
  if (r.cec_v)
    out.emplace_back("cec_v", *r.cec_v);
  out.emplace_back("cal_time_s", r.cal_time_s);
  out.emplace_back("test_time_s", r.test_time_s);
  return out;
}

std::vector<MetricTable> metric_tables(const std::vector<RunRecord>& records)
{
  // metric -> dataset -> method -> (sum, count)
  std::map<std::string, std::map<std::string, std::map<std::string, std::pair<double, int>>>> acc;
  for (const auto& r : records)
    for (const auto& [name, v] : oriented_metrics(r)) {
      auto& cell = acc[name][r.dataset][r.method];
      cell.first += v;
      cell.second += 1;
    }

  std::vector<MetricTable> out;
  for (const auto& [metric, by_dataset] : acc) {
    std::vector<std::string> common;
    bool first = true;
    for (const auto& [ds, by_method] : by_dataset) {
      std::vector<std::string> here;
      for (const auto& [m, cell] : by_method)
        here.push_back(m);
      if (first) {
        common = here;
        first = false;
      } else {
        std::vector<std::string> keep;
        std::set_intersection(common.begin(), common.end(), here.begin(), here.end(), std::back_inserter(keep));
        common = keep;
      }
    }
    // keep registry order for readability
    std::vector<std::string> ordered;
    for (const auto& m : method_names())
      if (std::find(common.begin(), common.end(), m) != common.end())
        ordered.push_back(m);
    if (ordered.empty())
      continue;
    MetricTable t;
    t.metric = metric;
    t.methods = ordered;
    t.values.resize(static_cast<Index>(by_dataset.size()), static_cast<Index>(ordered.size()));
    Index row = 0;
    for (const auto& [ds, by_method] : by_dataset) {
      t.datasets.push_back(ds);
      for (std::size_t c = 0; c < ordered.size(); ++c) {
        const auto& cell = by_method.at(ordered[c]);
        t.values(row, static_cast<Index>(c)) = cell.first / cell.second;
      }
      ++row;
    }
    out.push_back(std::move(t));
  }
  return out;
}

ReportFiles write_report(const std::vector<RunRecord>& records, const std::string& dir)
{
  if (records.empty())
    throw InvalidData("report: no records");
  std::error_code ec;
  fs::create_directories(dir, ec);
  ReportFiles files{ (fs::path(dir) / "metrics_long.csv").string(),
                     (fs::path(dir) / "ranks.csv").string(),
                     (fs::path(dir) / "groups.json").string() };

  std::ofstream lng(files.long_csv);
  if (!lng)
    throw InvalidConfig("cannot write " + files.long_csv);
  lng.precision(17);
  lng << "dataset,method,seed,metric,value\n";
  for (const auto& r : records)
    for (const auto& [name, v] : oriented_metrics(r))
      lng << r.dataset << ',' << r.method << ',' << r.seed << ',' << name << ',' << v << '\n';

  std::ofstream ranks(files.ranks_csv);
  ranks.precision(17);
  ranks << "metric,method,mean_rank\n";
  json groups = json::object();
  for (const auto& t : metric_tables(records)) {
    const auto cd = cd_summary(t.values, t.methods);
    for (std::size_t i = 0; i < t.methods.size(); ++i)
      ranks << t.metric << ',' << t.methods[i] << ',' << cd.mean_ranks[i] << '\n';
    json pairs = json::array();
    for (const auto& p : cd.pairs)
      pairs.push_back({ { "a", t.methods[p.i] }, { "b", t.methods[p.j] }, { "p", p.p }, { "p_holm", p.p_adjusted }, { "different", p.different } });
    json mr = json::object();
    for (std::size_t i = 0; i < t.methods.size(); ++i)
      mr[t.methods[i]] = cd.mean_ranks[i];
    groups[t.metric] = { { "datasets", t.datasets },
                         { "mean_ranks", mr },
                         { "friedman", { { "statistic", cd.friedman.statistic }, { "p_value", cd.friedman.p_value } } },
                         { "pairs", pairs },
                         { "groups", cd.groups } };
  }
  std::ofstream gj(files.groups_json);
  gj << groups.dump(1) << '\n';
  return files;
}

} // namespace mocp
