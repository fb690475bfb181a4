// seqids: simulate -> preprocess -> train -> evaluate / online -> report.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <seqids.hpp>

namespace fs = std::filesystem;
using namespace seqids;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("seqids");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("SEQIDS_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off")
      spdlog::warn("ignoring unknown SEQIDS_LOG level '{}'", env);
    else
      spdlog::set_level(level);
  }
}

std::vector<std::uint64_t> seed_range(std::size_t n) {
  if (n == 0) throw ConfigError("--seeds must be at least 1");
  std::vector<std::uint64_t> seeds(n);
  for (std::size_t i = 0; i < n; ++i) seeds[i] = i;
  return seeds;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  if (path.empty()) return {};
  return experiment_config_from_json(read_json(path));
}

std::vector<Method> parse_methods(const std::string& list) {
  std::vector<Method> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const auto comma = list.find(',', pos);
    const auto id = list.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!id.empty()) out.push_back(parse_method(id));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw ConfigError("--methods lists no method");
  return out;
}

struct SimulateArgs {
  std::string config, out;
};

void cmd_simulate(const SimulateArgs& a) {
  const SimConfig config = a.config.empty() ? SimConfig{} : sim_config_from_json(read_json(a.config));
  config.validate();
  spdlog::info("simulating {} episodes per attack type (seed {})", config.episodes_per_type, config.seed);
  const Dataset ds = generate_dataset(config);
  write_dataset(a.out, ds);
  record_artifact(a.out, "simulate", to_json(config), {config.seed});
  spdlog::info("wrote {} windows to {}", ds.windows.size(), a.out);
}

struct PreprocessArgs {
  std::string in, out;
  std::size_t top_k = 1, symbols = 6;
  std::uint64_t seed = 0;
};

void cmd_preprocess(const PreprocessArgs& a) {
  const Dataset ds = read_dataset(a.in);
  if (const auto field = missing_label_field(ds); !field.empty())
    throw DataError("attribute ranking needs labeled windows: dataset is missing the '" + field +
                    "' field");
  ForestConfig ranking;
  ranking.seed = a.seed;
  const AttributeReport report = reduce_attributes(ds, ranking);
  spdlog::info("{} attributes after constant removal, {} after correlation pruning",
               report.kept.size() + report.dropped_correlated.size(), report.kept.size());
  Rng rng = make_stream(a.seed, StreamTag::Symbolizer, a.top_k);
  const Symbolizer sym = fit_symbolizer(ds, report.top(a.top_k), a.symbols, rng);
  const fs::path dir(a.out);
  const Json config{{"in", a.in}, {"top_k", a.top_k}, {"symbols", a.symbols}, {"seed", a.seed}};
  write_json(dir / "attribute_report.json", to_json(report));
  write_json(dir / "symbolizer.json", to_json(sym));
  write_symbolized(dir / "symbolized.jsonl", symbolize_dataset(sym, ds));
  for (const char* f : {"attribute_report.json", "symbolizer.json", "symbolized.jsonl"})
    record_artifact(dir / f, "preprocess", config, {a.seed});
  spdlog::info("top attribute: {}", report.ranking.front().attribute);
}

struct TrainArgs {
  std::string method, in, out, preprocessed, config;
  std::size_t top_k = 1;
  std::uint64_t seed = 0;
};

void cmd_train(const TrainArgs& a) {
  const Method method = parse_method(a.method);
  const Dataset ds = read_dataset(a.in);
  if (method != Method::HmmUnsupervised)
    if (const auto field = missing_label_field(ds); !field.empty())
      throw DataError(std::string(to_string(method)) + " needs labeled windows: dataset is missing the '" +
                      field + "' field");
  ExperimentConfig config = load_experiment_config(a.config);
  AttributeReport report;
  std::optional<Symbolizer> sym;
  if (!a.preprocessed.empty()) {
    const fs::path dir(a.preprocessed);
    report = attribute_report_from_json(read_json(dir / "attribute_report.json"));
    if (method == Method::HmmSupervised || method == Method::HmmUnsupervised)
      sym = symbolizer_from_json(read_json(dir / "symbolizer.json"));
  } else {
    if (const auto field = missing_label_field(ds); !field.empty())
      throw DataError("attribute ranking needs labeled windows (dataset is missing the '" + field +
                      "' field); pass --preprocessed");
    ForestConfig ranking = config.ranking_forest;
    ranking.seed = a.seed;
    report = reduce_attributes(ds, ranking);
  }
  const TrainedModel tm = train_model(ds, method, a.top_k, report, config, a.seed, sym);
  if (tm.hmm && !tm.hmm->mapped())
    spdlog::warn("no labeled windows: HMM states are left unmapped");
  write_json(a.out, to_json(tm));
  Json cfg = to_json(config);
  cfg["method"] = a.method;
  cfg["top_k"] = a.top_k;
  cfg["in"] = a.in;
  record_artifact(a.out, "train", cfg, {a.seed});
  spdlog::info("trained {} on {} windows, wrote {}", a.method, ds.windows.size(), a.out);
}

struct PredictArgs {
  std::string model, in, out;
  bool online = false;
};

void cmd_predict(const PredictArgs& a) {
  const TrainedModel tm = trained_model_from_json(read_json(a.model));
  const Dataset ds = read_dataset(a.in);
  const MethodOutput out = predict_model(tm, ds, a.online);
  std::string text;
  for (std::size_t i = 0; i < ds.windows.size(); ++i) {
    Json j{{"episode_id", ds.windows[i].episode_id}, {"attack_type", to_string(out.types[i])}};
    Json acts = Json::array();
    for (AttackAction x : out.actions[i]) acts.push_back(to_string(x));
    j["actions"] = std::move(acts);
    if (const auto s = predict_start_time(out.actions[i])) j["t_start_local"] = *s;
    if (!out.online.empty()) {
      Json cur = Json::array();
      for (AttackAction x : out.online[i]) cur.push_back(to_string(x));
      j["online"] = std::move(cur);
    }
    text += j.dump() + "\n";
  }
  write_text(a.out, text);
  spdlog::info("wrote {} predictions to {}", ds.windows.size(), a.out);
}

struct EvaluateArgs {
  std::string dataset, methods = "hmm-sup,hmm-unsup,lstm,rfc", out, config;
  std::size_t top_k = 1, seeds = 10, symbols = 6;
  bool no_online = false;
};

void cmd_evaluate(const EvaluateArgs& a) {
  const Dataset ds = read_dataset(a.dataset);
  ExperimentConfig config = load_experiment_config(a.config);
  config.seeds = seed_range(a.seeds);
  config.num_symbols = a.symbols;
  const auto methods = parse_methods(a.methods);
  const std::vector<std::size_t> ks{a.top_k};
  spdlog::info("evaluating {} on {} seeds, attribute set top-{}", a.methods, a.seeds, a.top_k);
  const StudyReport study = run_study(ds, methods, ks, config, !a.no_online);
  const fs::path dir(a.out);
  Json cfg = to_json(config);
  cfg["methods"] = a.methods;
  cfg["top_k"] = a.top_k;
  cfg["dataset"] = a.dataset;
  for (const auto& p : emit_report(study, dir)) record_artifact(p, "evaluate", cfg, config.seeds);
  for (const auto& r : study.offline) {
    const auto s = r.summary(AttackType::Type1).mean;
    spdlog::info("{:9} start {:.3f} type {:.3f} action {:.3f} sequence {:.3f}", to_string(r.method),
                 s.acc_start, s.acc_type, s.acc_action, s.acc_sequence);
  }
}

struct OnlineArgs {
  std::string dataset, out, config;
  std::size_t top_k = 1, seeds = 10, symbols = 6;
};

void cmd_online(const OnlineArgs& a) {
  const Dataset ds = read_dataset(a.dataset);
  ExperimentConfig config = load_experiment_config(a.config);
  config.seeds = seed_range(a.seeds);
  config.num_symbols = a.symbols;
  StudyReport study;
  study.online = run_online_experiment(ds, config, a.top_k);
  const fs::path dir(a.out);
  Json cfg = to_json(config);
  cfg["top_k"] = a.top_k;
  cfg["dataset"] = a.dataset;
  write_text(dir / "online_curve.csv", online_curve_csv(study.online));
  write_json(dir / "online_report.json", to_json(study));
  for (const char* f : {"online_curve.csv", "online_report.json"})
    record_artifact(dir / f, "online", cfg, config.seeds);
  spdlog::info("wrote {}", (dir / "online_curve.csv").string());
}

struct ReportArgs {
  std::string in, out;
};

void cmd_report(const ReportArgs& a) {
  const StudyReport study = study_report_from_json(read_json(a.in));
  const fs::path dir(a.out);
  if (!study.offline.empty()) {
    write_text(dir / "report.csv", report_csv(study, AttackType::Type1));
    write_text(dir / "report_attack2.csv", report_csv(study, AttackType::Type2));
  }
  if (!study.online.empty()) write_text(dir / "online_curve.csv", online_curve_csv(study.online));
  spdlog::info("rendered {} into {}", a.in, a.out);
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Multi-step attack prediction with HMM, LSTM and random-forest baselines"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Generate a labeled dataset of sample windows");
  s->add_option("--config", sim.config, "Simulator config (JSON)")->check(CLI::ExistingFile);
  s->add_option("--out", sim.out, "Output dataset (JSON-Lines)")->required();

  PreprocessArgs pre;
  auto* p = app.add_subcommand("preprocess", "Reduce attributes and fit the symbolizer");
  p->add_option("--in", pre.in, "Input dataset")->required()->check(CLI::ExistingFile);
  p->add_option("--top-k", pre.top_k, "Number of top-ranked attributes")->check(CLI::IsMember({1, 4}));
  p->add_option("--symbols", pre.symbols, "Number of observation symbols")->check(CLI::PositiveNumber);
  p->add_option("--seed", pre.seed, "Random seed");
  p->add_option("--out", pre.out, "Output model directory")->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train one prediction method");
  t->add_option("--method", tr.method, "hmm-sup, hmm-unsup, lstm or rfc")->required();
  t->add_option("--in", tr.in, "Training dataset")->required()->check(CLI::ExistingFile);
  t->add_option("--out", tr.out, "Output model (JSON)")->required();
  t->add_option("--top-k", tr.top_k, "Number of top-ranked attributes")->check(CLI::IsMember({1, 4}));
  t->add_option("--preprocessed", tr.preprocessed, "Directory written by preprocess")
      ->check(CLI::ExistingDirectory);
  t->add_option("--config", tr.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
  t->add_option("--seed", tr.seed, "Random seed");

  PredictArgs pr;
  auto* d = app.add_subcommand("predict", "Predict actions and attack types with a trained model");
  d->add_option("--model", pr.model, "Trained model")->required()->check(CLI::ExistingFile);
  d->add_option("--in", pr.in, "Dataset")->required()->check(CLI::ExistingFile);
  d->add_option("--out", pr.out, "Output predictions (JSON-Lines)")->required();
  d->add_flag("--online", pr.online, "Also emit per-prefix current-action predictions");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Run the offline experiment over several seeds");
  e->add_option("--dataset", ev.dataset, "Labeled dataset")->required()->check(CLI::ExistingFile);
  e->add_option("--methods", ev.methods, "Comma-separated method ids");
  e->add_option("--top-k", ev.top_k, "Number of top-ranked attributes")->check(CLI::IsMember({1, 4}));
  e->add_option("--seeds", ev.seeds, "Number of seeds (0..n-1)");
  e->add_option("--symbols", ev.symbols, "Number of observation symbols")->check(CLI::PositiveNumber);
  e->add_option("--config", ev.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
  e->add_flag("--no-online", ev.no_online, "Skip the online prediction curves");
  e->add_option("--out", ev.out, "Report directory")->required();

  OnlineArgs on;
  auto* o = app.add_subcommand("online", "Online prediction curves for supervised HMM and RFC");
  o->add_option("--dataset", on.dataset, "Labeled dataset")->required()->check(CLI::ExistingFile);
  o->add_option("--top-k", on.top_k, "Number of top-ranked attributes")->check(CLI::IsMember({1, 4}));
  o->add_option("--seeds", on.seeds, "Number of seeds (0..n-1)");
  o->add_option("--symbols", on.symbols, "Number of observation symbols")->check(CLI::PositiveNumber);
  o->add_option("--config", on.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
  o->add_option("--out", on.out, "Report directory")->required();

  ReportArgs re;
  auto* r = app.add_subcommand("report", "Render CSV tables from a report.json");
  r->add_option("--in", re.in, "report.json")->required()->check(CLI::ExistingFile);
  r->add_option("--out", re.out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (s->parsed()) cmd_simulate(sim);
    else if (p->parsed()) cmd_preprocess(pre);
    else if (t->parsed()) cmd_train(tr);
    else if (d->parsed()) cmd_predict(pr);
    else if (e->parsed()) cmd_evaluate(ev);
    else if (o->parsed()) cmd_online(on);
    else if (r->parsed()) cmd_report(re);
  } catch (const std::exception& ex) {
    spdlog::error("{}", ex.what());
    return 1;
  }
  return 0;
}
