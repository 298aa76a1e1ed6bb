// gamevo command-line interface: search, evaluate, forecast, synth.

#include "gamevo/config.hpp"
#include "gamevo/dataset.hpp"
#include "gamevo/dsl.hpp"
#include "gamevo/error.hpp"
#include "gamevo/metrics.hpp"
#include "gamevo/persist.hpp"
#include "gamevo/presets.hpp"
#include "gamevo/replay.hpp"
#include "gamevo/search.hpp"
#include "gamevo/synth.hpp"
#include "gamevo/text.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

using namespace gamevo;
namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataOptions {
  std::string config;
  std::string data;
  std::string schema;
  std::string train_end;
  std::string valid_end;
  std::string hours;
  std::string output;
};

void add_data_options(CLI::App *cmd, DataOptions &o) {
  cmd->add_option("--config", o.config, "run configuration file");
  cmd->add_option("--data", o.data, "CSV data file");
  cmd->add_option("--schema", o.schema, "schema JSON describing the CSV");
  cmd->add_option("--train-end", o.train_end, "last training timestamp (ISO-8601, inclusive)");
  cmd->add_option("--valid-end", o.valid_end, "last validation timestamp (ISO-8601, inclusive)");
  cmd->add_option("--hours", o.hours, "hours to model separately, e.g. 0-23");
  cmd->add_option("--output,-o", o.output, "output directory");
}

RunConfig base_config(const DataOptions &o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (!o.config.empty()) {
    const fs::path dir = fs::path(o.config).parent_path();
    for (auto *p : {&c.data, &c.schema}) {
      if (!p->empty() && fs::path(*p).is_relative()) *p = (dir / *p).string();
    }
  }
  if (!o.data.empty()) c.data = o.data;
  if (!o.schema.empty()) c.schema = o.schema;
  if (!o.train_end.empty()) c.train_end = o.train_end;
  if (!o.valid_end.empty()) c.valid_end = o.valid_end;
  if (!o.hours.empty()) c.hours = parse_hours(o.hours);
  if (!o.output.empty()) c.output = o.output;
  return c;
}

DatasetPtr load_data(const RunConfig &c) {
  if (c.data.empty()) throw UsageError("no data file given (--data or config 'data')");
  if (c.schema.empty()) throw UsageError("no schema given (--schema or config 'schema')");
  const Schema schema = load_schema(c.schema);
  return std::make_shared<const TimeDataset>(load_csv(c.data, schema));
}

// Defaults to the first 60% for training and the next 20% for validation.
SplitSpec split_spec(const RunConfig &c, const TimeDataset &data) {
  SplitSpec s;
  const auto &ts = data.timestamps();
  const std::size_t n = ts.size();
  if (n < 3) throw DataError("dataset too small to split");
  s.train_end = c.train_end ? parse_iso8601(*c.train_end).utc_seconds : ts[std::max<std::size_t>(1, n * 6 / 10) - 1];
  s.valid_end = c.valid_end ? parse_iso8601(*c.valid_end).utc_seconds : ts[std::max<std::size_t>(2, n * 8 / 10) - 1];
  for (const auto &[a, b] : c.exclude) {
    s.exclusions.push_back({parse_iso8601(a).utc_seconds, parse_iso8601(b).utc_seconds});
  }
  return s;
}

struct Task {
  std::optional<int> hour;
  Split parts;
};

std::vector<Task> tasks_for(const RunConfig &c, DatasetPtr data) {
  const SplitSpec spec = split_spec(c, *data);
  const Slice all = all_rows(data);
  std::vector<Task> out;
  if (c.hours.empty()) {
    out.push_back({std::nullopt, split(all, spec)});
  } else {
    for (int h : c.hours) {
      const Slice rows = filter_hour(all, h);
      if (rows.empty()) throw DataError("no rows at hour " + std::to_string(h));
      out.push_back({h, split(rows, spec)});
    }
  }
  return out;
}

std::string suffix(std::optional<int> hour) {
  if (!hour) return "";
  char buf[8];
  std::snprintf(buf, sizeof buf, "_h%02d", *hour);
  return buf;
}

bool constant_on(const Slice &rows, const Column &col) {
  const auto v = rows.gather(col.values);
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

// Search variables: the configured list, or every registry covariate that is
// not constant on the training rows.
std::vector<std::string> search_variables(const RunConfig &c, const Slice &train, std::vector<std::string> &notices) {
  if (!c.search.variables.empty()) return c.search.variables;
  std::vector<std::string> out;
  for (const auto &col : train.data->columns()) {
    if (constant_on(train, col)) {
      notices.push_back("covariate " + col.covariate.name + " is constant on the training rows and is skipped");
      continue;
    }
    out.push_back(col.covariate.name);
  }
  return out;
}

std::optional<AdaptiveModel> preset_model(const RunConfig &c, const CovariateRegistry &registry, int hour,
                                          std::vector<std::string> &notices) {
  if (!c.seed_preset) return std::nullopt;
  SotaOptions opts;
  opts.alpha = c.sota_alpha;
  if (const Covariate *b = registry.find("Break"); b && b->kind == CovariateKind::Categorical) {
    opts.break_modalities = b->modalities;
  }
  const Formula full = find_preset(*c.seed_preset, opts).formula(hour);
  AdaptiveModel m;
  for (const auto &e : full.effects) {
    const bool ok = std::all_of(e.covariates.begin(), e.covariates.end(),
                                [&](const std::string &n) { return registry.find(n) != nullptr; });
    if (ok) {
      m.formula.effects.push_back(e);
    } else {
      notices.push_back("preset effect " + serialize(e) + " dropped: covariate missing from the data");
    }
  }
  if (m.formula.effects.empty()) throw DataError("preset has no effect usable on this data");
  const auto issues = validate(m, &registry);
  if (!issues.empty()) throw DataError("preset does not fit the data: " + to_string(issues.front()));
  return m;
}

template <class Fn> void run_pool(std::size_t n, unsigned jobs, Fn &&fn) {
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  const unsigned count = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  for (unsigned w = 1; w < count; ++w) threads.emplace_back(worker);
  worker();
  for (auto &t : threads) t.join();
  for (auto &e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string fmt(double v) { return std::isfinite(v) ? format_double(v) : std::string("inf"); }

// ---------------------------------------------------------------- search

struct SearchFlags {
  DataOptions data;
  std::string algo;
  std::optional<std::size_t> budget, population, tournament;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  std::optional<double> eta;
  std::optional<int> qigs_in_loop;
  std::string seed_preset;
  bool wall_time = false;
};

int cmd_search(const SearchFlags &f) {
  RunConfig c = base_config(f.data);
  if (!f.algo.empty()) c.algo = f.algo;
  if (f.budget) c.search.budget = *f.budget;
  if (f.population) c.search.population = *f.population;
  if (f.tournament) c.search.tournament = *f.tournament;
  if (f.jobs) c.search.jobs = *f.jobs;
  if (f.eta) c.search.eta = *f.eta;
  if (f.qigs_in_loop) c.search.qigs_in_loop = *f.qigs_in_loop;
  if (!f.seed_preset.empty()) c.seed_preset = f.seed_preset;
  if (f.wall_time) c.search.log_wall_time = true;
  if (f.seed) {
    c.search.seed = *f.seed;
  } else if (!c.seed_set) {
    if (const char *env = std::getenv("GAMEVO_SEED")) {
      const auto v = parse_int(env);
      if (!v || *v < 0) throw UsageError("GAMEVO_SEED must be a non-negative integer");
      c.search.seed = static_cast<std::uint64_t>(*v);
    }
  }
  if (c.algo != "ea-fq" && c.algo != "ea-f-qigs" && c.algo != "random") {
    throw UsageError("unknown algorithm '" + c.algo + "' (expected ea-fq, ea-f-qigs or random)");
  }

  const DatasetPtr data = load_data(c);
  const auto tasks = tasks_for(c, data);
  const CovariateRegistry registry = data->registry();
  const unsigned jobs = std::max(1u, c.search.jobs);
  const unsigned inner_jobs = tasks.size() > 1 ? 1u : jobs;
  const unsigned outer_jobs = tasks.size() > 1 ? jobs : 1u;

  std::vector<std::string> summary(tasks.size());
  std::vector<std::vector<std::string>> notices(tasks.size());
  run_pool(tasks.size(), outer_jobs, [&](std::size_t i) {
    const Task &t = tasks[i];
    SearchConfig sc = c.search;
    sc.registry = registry;
    sc.jobs = inner_jobs;
    sc.variables = search_variables(c, t.parts.train, notices[i]);
    if (t.hour) sc.seed = derive_seed(c.search.seed, {static_cast<std::uint64_t>(*t.hour)});
    sc.kalman = c.algo == "ea-fq";
    sc.preset = preset_model(c, registry, t.hour.value_or(0), notices[i]);
    SearchResult r;
    if (c.algo == "random") {
      r = random_search(sc, t.parts.train, t.parts.valid);
    } else {
      r = evolve(c.algo == "ea-fq" ? EaVariant::FQ : EaVariant::FThenQigs, sc, t.parts.train, t.parts.valid);
    }
    std::ostringstream audit;
    write_audit_log(r.audit, audit);
    write_file_atomic((fs::path(c.output) / ("audit" + suffix(t.hour) + ".ndjson")).string(), audit.str());
    ModelFile mf;
    mf.model = r.best.model;
    mf.registry = registry;
    mf.fitted = r.best.fitted;
    mf.hour = t.hour;
    if (!r.best.failed) {
      mf.loss = r.best.loss;
      mf.rmse_valid = r.best.rmse_valid;
    }
    mf.eta = r.eta;
    save_model(mf, (fs::path(c.output) / ("model" + suffix(t.hour) + ".json")).string());
    std::ostringstream row;
    row << (t.hour ? std::to_string(*t.hour) : std::string("all")) << ',' << c.algo << ',' << fmt(r.best.loss) << ','
        << fmt(r.best.rmse_valid) << ',' << fmt(r.best.edf) << ',' << r.best.model.formula.size() << ",\""
        << serialize(r.best.model) << "\"\n";
    summary[i] = row.str();
  });
  std::string table = "hour,algo,loss,rmse_valid,edf,effects,model\n";
  for (const auto &s : summary) table += s;
  write_file_atomic((fs::path(c.output) / "summary.csv").string(), table);
  for (const auto &list : notices) {
    for (const auto &n : list) std::cerr << "notice: " << n << '\n';
  }
  std::cout << table;
  return 0;
}

// -------------------------------------------------------------- evaluate

struct Scored {
  std::vector<int> hours;
  std::vector<double> y, fixed, adaptive;
};

std::shared_ptr<const FittedGam> fitted_for(const ModelFile &m, const Slice &train, const FitOptions &options) {
  if (m.fitted) return m.fitted;
  return std::make_shared<const FittedGam>(fit(m.model.formula, train, options));
}

Slice concat(const Split &s) {
  Slice out{s.train.data, {}};
  for (const Slice *p : {&s.train, &s.valid, &s.test}) out.rows.insert(out.rows.end(), p->rows.begin(), p->rows.end());
  std::sort(out.rows.begin(), out.rows.end());
  return out;
}

std::vector<ModelFile> load_models(const std::vector<std::string> &paths) {
  if (paths.empty()) throw UsageError("no model file given (--model)");
  std::vector<ModelFile> out;
  for (const auto &p : paths) out.push_back(load_model(p));
  return out;
}

void check_compatible(const ModelFile &m, const TimeDataset &data) {
  for (const auto &e : m.model.formula.effects) {
    for (const auto &name : e.covariates) {
      const Column *col = data.find(name);
      if (!col) throw DataError("model uses covariate " + name + " missing from the data");
      const Covariate &want = m.registry.at(name);
      if (col->covariate.kind != want.kind || col->covariate.modalities != want.modalities) {
        throw DataError("covariate " + name + " in the data does not match the model");
      }
    }
  }
}

std::string svg_chart(const std::vector<HourMetrics> &fixed, const std::vector<HourMetrics> &adaptive, bool has_adaptive) {
  double top = 0.0;
  for (std::size_t h = 0; h < 24; ++h) {
    top = std::max(top, fixed[h].metrics.rmse);
    if (has_adaptive) top = std::max(top, adaptive[h].metrics.rmse);
  }
  if (!(top > 0.0)) top = 1.0;
  const int width = 760, height = 320, left = 50, base = 280, bar = 12;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  s << "<text x=\"" << left << "\" y=\"20\" font-size=\"14\">test RMSE by hour</text>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << base << "\" x2=\"" << width - 10 << "\" y2=\"" << base
    << "\" stroke=\"black\"/>\n";
  s << "<text x=\"5\" y=\"45\" font-size=\"10\">" << fmt(top) << "</text>\n";
  for (int h = 0; h < 24; ++h) {
    const int x = left + h * 29;
    const double hf = 240.0 * fixed[h].metrics.rmse / top;
    s << "<rect x=\"" << x << "\" y=\"" << base - hf << "\" width=\"" << bar << "\" height=\"" << hf
      << "\" fill=\"#888888\"/>\n";
    if (has_adaptive) {
      const double ha = 240.0 * adaptive[h].metrics.rmse / top;
      s << "<rect x=\"" << x + bar << "\" y=\"" << base - ha << "\" width=\"" << bar << "\" height=\"" << ha
        << "\" fill=\"#3366cc\"/>\n";
    }
    s << "<text x=\"" << x + 4 << "\" y=\"" << base + 14 << "\" font-size=\"9\">" << h << "</text>\n";
  }
  s << "<text x=\"" << width - 200 << "\" y=\"20\" font-size=\"11\" fill=\"#888888\">fixed</text>\n";
  if (has_adaptive) s << "<text x=\"" << width - 150 << "\" y=\"20\" font-size=\"11\" fill=\"#3366cc\">adaptive</text>\n";
  s << "</svg>\n";
  return s.str();
}

int cmd_evaluate(const DataOptions &o, const std::vector<std::string> &model_paths) {
  const RunConfig c = base_config(o);
  const auto models = load_models(model_paths);
  const DatasetPtr data = load_data(c);
  const SplitSpec spec = split_spec(c, *data);
  const Slice all = all_rows(data);
  bool has_adaptive = false;
  for (const auto &m : models) has_adaptive = has_adaptive || m.model.adaptive();

  Scored parts[3];
  for (const auto &m : models) {
    check_compatible(m, *data);
    const Slice rows = m.hour ? filter_hour(all, *m.hour) : all;
    const Split s = split(rows, spec);
    const auto fitted = fitted_for(m, s.train, c.search.fit);
    const Slice joined = concat(s);
    const auto forecast = kalman_forecast(*fitted, m.model.q_diag, joined);
    const auto y = joined.target();
    std::set<std::size_t> in_valid(s.valid.rows.begin(), s.valid.rows.end());
    std::set<std::size_t> in_test(s.test.rows.begin(), s.test.rows.end());
    for (std::size_t i = 0; i < joined.size(); ++i) {
      const std::size_t r = joined.rows[i];
      Scored &dst = parts[in_test.count(r) ? 2 : in_valid.count(r) ? 1 : 0];
      dst.hours.push_back(to_civil(data->timestamps()[r], data->offset_seconds()).hour);
      dst.y.push_back(y[i]);
      dst.fixed.push_back(forecast.fixed.values[i]);
      dst.adaptive.push_back(forecast.forecast[i]);
    }
  }
  static const char *names[3] = {"train", "valid", "test"};
  std::ostringstream table;
  table << "split,mode,rmse,mape,n\n";
  for (int p = 0; p < 3; ++p) {
    if (parts[p].y.empty()) continue;
    const Metrics fx = metrics(parts[p].y, parts[p].fixed);
    table << names[p] << ",fixed," << fmt(fx.rmse) << ',' << fmt(fx.mape) << ',' << fx.n << '\n';
    if (has_adaptive) {
      const Metrics ad = metrics(parts[p].y, parts[p].adaptive);
      table << names[p] << ",adaptive," << fmt(ad.rmse) << ',' << fmt(ad.mape) << ',' << ad.n << '\n';
    }
  }
  const Scored &test = parts[2].y.empty() ? parts[1] : parts[2];
  const auto hf = per_hour(test.hours, test.y, test.fixed);
  const auto ha = per_hour(test.hours, test.y, test.adaptive);
  std::ostringstream hourly;
  hourly << "hour,n,rmse_fixed,mape_fixed" << (has_adaptive ? ",rmse_adaptive,mape_adaptive" : "") << '\n';
  for (int h = 0; h < 24; ++h) {
    hourly << h << ',' << hf[h].metrics.n << ',' << fmt(hf[h].metrics.rmse) << ',' << fmt(hf[h].metrics.mape);
    if (has_adaptive) hourly << ',' << fmt(ha[h].metrics.rmse) << ',' << fmt(ha[h].metrics.mape);
    hourly << '\n';
  }
  write_file_atomic((fs::path(c.output) / "metrics.csv").string(), table.str());
  write_file_atomic((fs::path(c.output) / "per_hour.csv").string(), hourly.str());
  write_file_atomic((fs::path(c.output) / "per_hour.svg").string(), svg_chart(hf, ha, has_adaptive));
  std::cout << table.str();
  return 0;
}

// -------------------------------------------------------------- forecast

int cmd_forecast(const DataOptions &o, const std::vector<std::string> &model_paths, const std::string &start,
                 bool consume_history) {
  RunConfig c = base_config(o);
  const auto models = load_models(model_paths);
  const DatasetPtr data = load_data(c);
  const SplitSpec spec = split_spec(c, *data);
  const Slice all = all_rows(data);
  ReplaySpec rs;
  rs.consume_history = consume_history || c.consume_history;
  if (!start.empty()) rs.forecast_start = parse_iso8601(start).utc_seconds;
  for (const auto &m : models) {
    check_compatible(m, *data);
    const Slice rows = m.hour ? filter_hour(all, *m.hour) : all;
    const auto fitted = fitted_for(m, split(rows, spec).train, c.search.fit);
    const ReplayResult r = weekly_replay(*fitted, m.model.q_diag, rows, rs);
    std::ostringstream out;
    write_forecast_csv(r, data->offset_seconds(), out);
    write_file_atomic((fs::path(c.output) / ("forecast" + suffix(m.hour) + ".csv")).string(), out.str());
    for (const auto &n : r.notices) std::cerr << "notice: " << n << '\n';
    if (r.overall) {
      std::cout << (m.hour ? "hour " + std::to_string(*m.hour) : std::string("all")) << ": rmse "
                << fmt(r.overall->rmse) << " mape " << fmt(r.overall->mape) << " over " << r.overall->n << " rows\n";
    }
  }
  return 0;
}

// ----------------------------------------------------------------- synth

struct SynthFlags {
  std::size_t n = 2000;
  std::int64_t step = 86400;
  std::string start;
  double noise = 1.0;
  std::optional<std::uint64_t> seed;
  std::string drift;
  std::string output = "synth";
};

int cmd_synth(const SynthFlags &f) {
  SynthSpec spec;
  spec.n = f.n;
  spec.step = f.step;
  spec.noise_sigma = f.noise;
  if (!f.start.empty()) {
    const auto p = parse_iso8601(f.start);
    spec.start = p.utc_seconds;
    spec.offset_seconds = p.offset_seconds;
  }
  if (!f.drift.empty()) {
    Drift d;
    std::vector<std::string> parts;
    std::stringstream ss(f.drift);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    if (parts.size() != 5) throw UsageError("--drift expects effect:start:end:from:to");
    const auto e = parse_int(parts[0]), a = parse_int(parts[1]), b = parse_int(parts[2]);
    const auto from = parse_double(parts[3]), to = parse_double(parts[4]);
    if (!e || !a || !b || !from || !to || *e < 0 || *a < 0 || *b < 0) throw UsageError("malformed --drift");
    d.effect = static_cast<std::size_t>(*e);
    d.start = static_cast<std::size_t>(*a);
    d.end = static_cast<std::size_t>(*b);
    d.from = *from;
    d.to = *to;
    spec.drift = d;
  }
  std::uint64_t seed = 0;
  if (f.seed) {
    seed = *f.seed;
  } else if (const char *env = std::getenv("GAMEVO_SEED")) {
    const auto v = parse_int(env);
    if (!v || *v < 0) throw UsageError("GAMEVO_SEED must be a non-negative integer");
    seed = static_cast<std::uint64_t>(*v);
  }
  const SynthResult r = synth_generate(spec, seed);
  std::ostringstream csv;
  write_csv(*r.data, csv);
  Schema schema;
  schema.timestamp_column = "timestamp";
  schema.target_column = "load";
  for (const auto &col : r.data->columns()) schema.covariates.push_back(col.covariate);
  const fs::path dir(f.output);
  write_file_atomic((dir / "data.csv").string(), csv.str());
  write_file_atomic((dir / "schema.json").string(), to_json(schema).dump(2) + "\n");
  nlohmann::json gen;
  gen["formula"] = serialize(r.generating);
  gen["level"] = spec.level;
  gen["noise_sigma"] = spec.noise_sigma;
  gen["seed"] = seed;
  write_file_atomic((dir / "generating.json").string(), gen.dump(2) + "\n");
  std::cout << "wrote " << r.data->rows() << " rows to " << (dir / "data.csv").string() << '\n';
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Formula search for additive models with adaptive weights"};
  app.require_subcommand(1);

  SearchFlags sf;
  auto *search = app.add_subcommand("search", "search for a model formula");
  add_data_options(search, sf.data);
  search->add_option("--algo", sf.algo, "ea-fq, ea-f-qigs or random");
  search->add_option("--budget", sf.budget, "total number of fits");
  search->add_option("--population", sf.population, "population size");
  search->add_option("--tournament", sf.tournament, "tournament size");
  search->add_option("--seed", sf.seed, "random seed (GAMEVO_SEED when absent)");
  search->add_option("--jobs,-j", sf.jobs, "worker threads");
  search->add_option("--eta", sf.eta, "complexity weight of the loss");
  search->add_option("--qigs-in-loop", sf.qigs_in_loop, "Q_IGS iterations per child (ea-fq)");
  search->add_option("--seed-preset", sf.seed_preset, "seed the initial population with a preset (sota)");
  search->add_flag("--log-wall-time", sf.wall_time, "record fit wall time in the audit log");

  DataOptions eo;
  std::vector<std::string> eval_models;
  auto *evaluate = app.add_subcommand("evaluate", "score model files on train, valid and test");
  add_data_options(evaluate, eo);
  evaluate->add_option("--model,-m", eval_models, "model file(s)")->required();

  DataOptions fo;
  std::vector<std::string> fc_models;
  std::string fc_start;
  bool fc_history = false;
  auto *forecast = app.add_subcommand("forecast", "weekly operational replay");
  add_data_options(forecast, fo);
  forecast->add_option("--model,-m", fc_models, "model file(s)")->required();
  forecast->add_option("--start", fc_start, "earliest update instant (ISO-8601)");
  forecast->add_flag("--consume-history", fc_history, "feed all rows before the first update to the filter");

  SynthFlags yf;
  auto *synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--rows,-n", yf.n, "number of rows");
  synth->add_option("--step", yf.step, "time step in seconds");
  synth->add_option("--start", yf.start, "first timestamp (ISO-8601)");
  synth->add_option("--noise", yf.noise, "noise standard deviation");
  synth->add_option("--seed", yf.seed, "random seed (GAMEVO_SEED when absent)");
  synth->add_option("--drift", yf.drift, "weight drift effect:start:end:from:to");
  synth->add_option("--output,-o", yf.output, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    if (*search) return cmd_search(sf);
    if (*evaluate) return cmd_evaluate(eo, eval_models);
    if (*forecast) return cmd_forecast(fo, fc_models, fc_start, fc_history);
    if (*synth) return cmd_synth(yf);
  } catch (const UsageError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericError &e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const ParseError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DataError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
