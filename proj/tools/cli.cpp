#include "cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <sstream>

#include "aosr/csv.hpp"
#include "aosr/dataset.hpp"
#include "aosr/metrics.hpp"
#include "aosr/pipeline.hpp"
#include "aosr/risk.hpp"
#include "aosr/svg.hpp"
#include "aosr/sweep.hpp"
#include "aosr/theorylab.hpp"

namespace aosr::cli {
namespace {

namespace fs = std::filesystem;

struct Param {
  std::string key;
  std::string fallback;  ///< empty means required unless `optional`
  std::string help;
  bool optional = false;
};

/// Effective settings of one command: defaults, then config file, then flags.
class Settings {
 public:
  explicit Settings(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  bool has(const std::string& key) const { return values_.count(key) && !values_.at(key).empty(); }

  const std::string& str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end() || it->second.empty()) {
      throw Error(ErrorKind::invalid_argument, "missing required setting '" + key + "' (pass --" + flag(key) + ")");
    }
    return it->second;
  }

  double real(const std::string& key) const {
    const std::string& s = str(key);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) bad(key, "a finite number");
    return v;
  }

  long integer(const std::string& key) const {
    const std::string& s = str(key);
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) bad(key, "an integer");
    return v;
  }

  std::uint64_t u64(const std::string& key) const {
    const std::string& s = str(key);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) bad(key, "an unsigned 64-bit integer");
    return v;
  }

  bool boolean(const std::string& key) const {
    const std::string& s = str(key);
    if (s == "true" || s == "1" || s == "on") return true;
    if (s == "false" || s == "0" || s == "off") return false;
    bad(key, "true or false");
  }

  std::vector<long> list(const std::string& key) const {
    std::vector<long> out;
    std::stringstream in(str(key));
    std::string item;
    while (std::getline(in, item, ',')) {
      long v = 0;
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) bad(key, "a comma-separated integer list");
      out.push_back(v);
    }
    if (out.empty()) bad(key, "a nonempty list");
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

  static std::string flag(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
  }

 private:
  [[noreturn]] void bad(const std::string& key, const std::string& expected) const {
    throw Error(ErrorKind::invalid_argument,
                "--" + flag(key) + ": expected " + expected + ", got '" + values_.at(key) + "'");
  }

  std::map<std::string, std::string> values_;
};

struct Command {
  Command(std::string n, std::string h, std::vector<Param> p, std::function<void(const Settings&)> b)
      : name(std::move(n)), help(std::move(h)), params(std::move(p)), body(std::move(b)) {}

  std::string name;
  std::string help;
  std::vector<Param> params;
  std::function<void(const Settings&)> body;

  std::map<std::string, std::string> flag_values;
  std::string config_path;
  CLI::App* app = nullptr;
};

fs::path sibling(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p.replace_extension(suffix);
  return p;
}

void write_config(const Settings& settings, const fs::path& out) {
  write_file_atomic(sibling(out, ".config"), format_flat_config(settings.values()));
}

std::vector<Param> with_shared(std::vector<Param> params) {
  params.insert(params.begin(), {{"seed", "0", "Seed for all randomness"}, {"out", "", "Output path"}});
  return params;
}

TrainConfig train_config(const Settings& s, const std::string& epochs_key) {
  TrainConfig tc;
  tc.epochs = static_cast<int>(s.integer(epochs_key));
  tc.batch_size = static_cast<int>(s.integer("batch_size"));
  tc.learning_rate = s.real("learning_rate");
  tc.validate();
  return tc;
}

AosrConfig aosr_config(const Settings& s) {
  AosrConfig cfg;
  cfg.closed_train = train_config(s, "epochs");
  cfg.open_train = train_config(s, "epochs");
  cfg.aux_multiple = static_cast<int>(s.integer("aux_multiple"));
  cfg.box_margin = s.real("box_margin");
  cfg.weight_method = weight_method_from_string(s.str("method"));
  cfg.beta = s.real("beta");
  cfg.t = s.real("t");
  cfg.recompute_mu_each_epoch = s.boolean("recompute_mu");
  cfg.kulsif_lambda = s.real("lambda");
  cfg.seed = s.u64("seed");
  cfg.validate();
  return cfg;
}

const std::vector<Param> kTrainingParams = {
    {"method", "iforest", "Weight estimator: iforest or kulsif"},
    {"beta", "0.05", "Unknown-region mass parameter"},
    {"t", "0.1", "Fraction of auxiliary samples treated as unknown"},
    {"aux_multiple", "3", "Auxiliary samples per training sample"},
    {"box_margin", "0.2", "Relative margin of the auxiliary sampling box"},
    {"lambda", "0.01", "KuLSIF regularization"},
    {"epochs", "200", "Training epochs for both networks"},
    {"batch_size", "64", "Mini-batch size"},
    {"learning_rate", "0.001", "Adam step size"},
    {"recompute_mu", "true", "Recompute mu at every epoch"},
};

std::vector<Param> concat(std::vector<Param> a, const std::vector<Param>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// gen ------------------------------------------------------------------------

void cmd_gen(const Settings& s) {
  const fs::path out = s.str("out");
  const std::string kind = s.str("kind");
  const long n = s.integer("n");
  require(n >= 1, "--n must be positive");
  Rng rng(s.u64("seed"));
  if (kind == "moon") {
    save_dataset(gen_double_moon(n, s.real("noise"), rng), out);
  } else if (kind == "blob") {
    const long dim = s.integer("dim");
    require(dim >= 1, "--dim must be positive");
    save_features(gen_gaussian_blob(n, Eigen::VectorXd::Zero(dim), s.real("stddev"), rng), out);
  } else if (kind == "unknown") {
    save_features(gen_unknown_uniform(n, default_unknown_box(), s.real("margin"), rng), out);
  } else {
    throw Error(ErrorKind::invalid_argument, "--kind must be moon, blob or unknown (got '" + kind + "')");
  }
  write_config(s, out);
  std::cout << "wrote " << n << " " << kind << " samples to " << out.string() << '\n';
}

// ratio ----------------------------------------------------------------------

Eigen::MatrixXd load_any_features(const fs::path& path) {
  const std::string text = read_file(path);
  const std::string first_line = text.substr(0, text.find('\n'));
  if (first_line.size() >= 6 && first_line.compare(first_line.size() - 6, 6, ",label") == 0) {
    return parse_dataset(text, std::nullopt, LabelPolicy::evaluation).features();
  }
  return parse_features(text).values();
}

void cmd_ratio(const Settings& s) {
  const fs::path out = s.str("out");
  const Eigen::MatrixXd source = load_any_features(s.str("source"));
  Rng rng(s.u64("seed"));
  Rng aux_rng = rng.fork(1);
  Rng fit_rng = rng.fork(2);
  Eigen::MatrixXd aux;
  if (s.has("aux")) {
    aux = load_any_features(s.str("aux"));
  } else {
    const long multiple = s.integer("aux_multiple");
    require(multiple >= 1, "--aux-multiple must be at least 1");
    aux = sample_uniform_box(multiple * source.rows(), bounding_box(source, s.real("box_margin")), aux_rng).values();
  }
  require(aux.cols() == source.cols(), "--aux has " + std::to_string(aux.cols()) + " columns but --source has " +
                                           std::to_string(source.cols()));
  const WeightMethod method = weight_method_from_string(s.str("method"));
  WeightOptions options;
  options.kulsif_lambda = s.real("lambda");
  options.kulsif_sigma = s.real("sigma");
  const Eigen::VectorXd weights = estimate_weights(method, source, aux, fit_rng, options);

  WeightParams params;
  params.beta = s.real("beta");
  params.t = s.real("t");
  params.tau = select_tau(weights, params.t);
  params.u_zero_mass = estimate_u_zero_mass(weights, params.tau);
  params.validate();

  write_file_atomic(out, format_weighted_features(FeatureMatrix(aux), weights));
  nlohmann::json summary{{"method", to_string(method)}, {"tau", params.tau},         {"beta", params.beta},
                         {"t", params.t},                {"u_zero_mass", params.u_zero_mass},
                         {"n_source", source.rows()},    {"n_aux", aux.rows()},       {"mean_weight", weights.mean()}};
  write_file_atomic(sibling(out, ".summary.json"), summary.dump(1) + "\n");
  write_config(s, out);
  std::cout << "wrote " << aux.rows() << " weights to " << out.string() << " (tau " << format_double(params.tau)
            << ")\n";
}

// train / eval ---------------------------------------------------------------

std::string metrics_json(const AosrModel& model, const Dataset& data) {
  const auto predicted = aosr_predict(model, data.features());
  return evaluation_report_json(confusion(data.labels(), predicted, model.num_known_classes() + 1));
}

void cmd_train(const Settings& s) {
  const fs::path out = s.str("out");
  const Dataset data = load_dataset(s.str("data"), std::nullopt, LabelPolicy::training);
  const AosrConfig cfg = aosr_config(s);
  const AosrResult result = run_aosr(cfg, data);
  const auto& diag = result.diagnostics;

  save_aosr_model(result.model, out);

  std::ostringstream trace;
  trace << "epoch,mu,n_unknown,objective\n";
  for (std::size_t e = 0; e < diag.open.objective_trace.size(); ++e) {
    trace << e << ',' << format_double(diag.open.mu_trace[e]) << ',' << diag.open.unknown_trace[e] << ','
          << format_double(diag.open.objective_trace[e]) << '\n';
  }
  write_file_atomic(sibling(out, ".trace.csv"), trace.str());

  const double mu = diag.open.mu_trace.empty() ? 0.0 : diag.open.mu_trace.back();
  const RiskReport risks =
      risk_report(as_hypothesis(result.model.open_model), diag.encoded, diag.aux_samples, diag.aux_weights,
                  result.model.params, mu);
  nlohmann::json report;
  report["closed_train_accuracy"] = diag.closed_train_accuracy;
  report["tau"] = result.model.params.tau;
  report["u_zero_mass"] = result.model.params.u_zero_mass;
  report["risks"] = nlohmann::json::parse(risks.to_json());
  report["train_metrics"] = nlohmann::json::parse(metrics_json(result.model, data));
  write_file_atomic(sibling(out, ".report.json"), report.dump(1) + "\n");
  write_config(s, out);
  std::cout << "trained on " << data.size() << " samples; model written to " << out.string() << '\n';
}

void cmd_eval(const Settings& s) {
  const fs::path report = s.has("report") ? fs::path(s.str("report")) : fs::path(s.str("out"));
  const AosrModel model = load_aosr_model(s.str("model"));
  const int c = model.num_known_classes();
  const Dataset known = load_dataset(s.str("known"), c, LabelPolicy::evaluation);
  require(known.dim() == model.closed_model.input_dim(),
          "--known has " + std::to_string(known.dim()) + " features but the model expects " +
              std::to_string(model.closed_model.input_dim()));

  Eigen::MatrixXd x = known.features();
  std::vector<int> truth = known.labels();
  if (s.has("unknown")) {
    const FeatureMatrix unknown = load_features(s.str("unknown"));
    require(unknown.dim() == known.dim(), "--unknown and --known differ in feature count");
    Eigen::MatrixXd joined(x.rows() + unknown.size(), x.cols());
    joined << x, unknown.values();
    x = std::move(joined);
    truth.insert(truth.end(), static_cast<std::size_t>(unknown.size()), c);
  }
  const ConfusionMatrix cm = confusion(truth, aosr_predict(model, x), c + 1);
  write_file_atomic(report, evaluation_report_json(cm) + "\n");
  write_config(s, report);
  std::cout << "accuracy " << format_double(accuracy(cm)) << ", macro-F1 " << format_double(macro_f1(cm)) << '\n';
}

// sweep / verify -------------------------------------------------------------

void cmd_sweep(const Settings& s) {
  const fs::path out = s.str("out");
  SweepOptions options;
  options.sizes = s.list("sizes");
  options.trials = static_cast<int>(s.integer("trials"));
  options.noise = s.real("noise");
  options.seed = s.u64("seed");
  const SweepResult result = sweep_error_curve(options, aosr_config(s));

  write_file_atomic(out, result.rows_csv());
  write_file_atomic(sibling(out, ".summary.csv"), result.summary_csv());
  PlotSeries mean{"mean error", {}, PlotStyle::line};
  PlotSeries low{"0.5/sqrt(n)", {}, PlotStyle::line};
  PlotSeries high{"8/sqrt(n)", {}, PlotStyle::line};
  bool positive = true;
  for (const auto& row : result.summary()) {
    mean.points.emplace_back(static_cast<double>(row.n), row.mean_error);
    low.points.emplace_back(static_cast<double>(row.n), 0.5 / std::sqrt(static_cast<double>(row.n)));
    high.points.emplace_back(static_cast<double>(row.n), 8.0 / std::sqrt(static_cast<double>(row.n)));
    positive = positive && row.mean_error > 0.0;
  }
  emit_svg_lines({mean, low, high}, "n", "error", sibling(out, ".svg"), positive);
  write_config(s, out);
  std::cout << "wrote " << result.rows.size() << " sweep rows to " << out.string() << '\n';
}

void cmd_verify(const Settings& s) {
  const fs::path out = s.str("out");
  require(s.str("experiment") == "theorem3", "--experiment must be theorem3");
  GapExperimentConfig cfg;
  cfg.n_grid = s.list("sizes");
  cfg.trials = static_cast<int>(s.integer("trials"));
  cfg.beta = s.real("beta");
  cfg.tau = s.real("tau");
  cfg.ratio_source = ratio_source_from_string(s.str("ratio_source"));
  cfg.n_mc = s.integer("n_mc");
  cfg.rate_delta = s.real("rate_delta");
  cfg.lambda_scale = s.real("lambda_scale");
  cfg.seed = s.u64("seed");
  const GapExperimentResult result = theorem3_gap_experiment(default_task_hypothesis(), default_task(), cfg);

  write_file_atomic(out, result.rows_csv());
  write_file_atomic(sibling(out, ".summary.csv"), result.summary_csv());
  write_file_atomic(sibling(out, ".summary.json"), result.summary_json() + "\n");
  PlotSeries gaps{"median gap", {}, PlotStyle::line};
  PlotSeries reference{"n^-1/2 reference", {}, PlotStyle::line};
  for (std::size_t i = 0; i < result.n_grid.size(); ++i) {
    const double n = static_cast<double>(result.n_grid[i]);
    gaps.points.emplace_back(n, result.median_gap[i]);
    reference.points.emplace_back(
        n, result.median_gap.front() * std::sqrt(static_cast<double>(result.n_grid.front()) / n));
  }
  bool positive = true;
  for (double g : result.median_gap) positive = positive && g > 0.0;
  emit_svg_lines({gaps, reference}, "n", "median gap", sibling(out, ".svg"), positive);
  write_config(s, out);
  std::cout << "slope " << format_double(result.slope) << (result.medians_strictly_decreasing() ? "" : " (not monotone)")
            << '\n';
}

std::vector<Command> make_commands() {
  std::vector<Command> cmds;
  cmds.emplace_back("gen", "Generate double-moon, blob or unknown-region samples",
                  with_shared({{"kind", "moon", "moon, blob or unknown"},
                               {"n", "200", "Number of samples"},
                               {"noise", "0.1", "Moon noise standard deviation"},
                               {"dim", "2", "Blob dimension"},
                               {"stddev", "1.0", "Blob standard deviation"},
                               {"margin", "0.2", "Exclusion distance from the moons for unknown samples"}}),
                  cmd_gen);
  cmds.emplace_back("ratio", "Estimate auxiliary-sample weights",
                  with_shared({{"method", "iforest", "iforest or kulsif"},
                               {"source", "", "Training samples (CSV)"},
                               {"aux", "", "Auxiliary samples (CSV); generated when absent", true},
                               {"aux_multiple", "3", "Generated auxiliary samples per source sample"},
                               {"box_margin", "0.2", "Relative margin of the generation box"},
                               {"lambda", "0.01", "KuLSIF regularization"},
                               {"sigma", "0", "KuLSIF bandwidth; 0 selects the median heuristic"},
                               {"t", "0.1", "Fraction treated as unknown"},
                               {"beta", "0.05", "Unknown-region mass parameter"}}),
                  cmd_ratio);
  cmds.emplace_back("train", "Fit an open-set model",
                  with_shared(concat({{"data", "", "Labelled training CSV"}}, kTrainingParams)), cmd_train);
  cmds.emplace_back("eval", "Evaluate a model on known and unknown samples",
                  with_shared({{"model", "", "Model file"},
                               {"known", "", "Labelled known-class CSV"},
                               {"unknown", "", "Unknown-class features CSV", true},
                               {"report", "", "Report path (defaults to --out)", true}}),
                  cmd_eval);
  {
    std::vector<Param> p = with_shared(concat({{"sizes", "100,500", "Comma-separated training sizes"},
                                               {"trials", "1", "Trials per size"},
                                               {"noise", "0.1", "Moon noise standard deviation"}},
                                              kTrainingParams));
    cmds.emplace_back("sweep", "Double-moon error versus sample size", p, cmd_sweep);
  }
  cmds.emplace_back("verify", "Convergence experiment for the auxiliary risk",
                  with_shared({{"experiment", "theorem3", "Experiment name"},
                               {"beta", "0.05", "Unknown-region mass parameter"},
                               {"tau", "0.1", "Weight threshold"},
                               {"sizes", "100,400,1600,6400", "Comma-separated sample sizes"},
                               {"trials", "10", "Trials per size"},
                               {"ratio_source", "true", "true or kulsif"},
                               {"n_mc", "1000000", "Monte Carlo draws for the reference risk"},
                               {"rate_delta", "0.1", "KuLSIF lambda exponent offset"},
                               {"lambda_scale", "1.0", "KuLSIF lambda scale"}}),
                  cmd_verify);
  for (auto& c : cmds) {
    for (auto& p : c.params) {
      if (p.key == "out" && c.name == "eval") p.optional = true;
    }
  }
  return cmds;
}

Settings resolve(const Command& cmd) {
  std::map<std::string, std::string> values;
  std::vector<std::string> allowed;
  for (const auto& p : cmd.params) {
    values[p.key] = p.fallback;
    allowed.push_back(p.key);
  }
  if (!cmd.config_path.empty()) {
    for (auto& [k, v] : parse_flat_config(read_file(cmd.config_path), allowed)) values[k] = v;
  }
  for (const auto& p : cmd.params) {
    const auto* opt = cmd.app->get_option("--" + Settings::flag(p.key));
    if (opt->count() > 0) values[p.key] = cmd.flag_values.at(p.key);
  }
  for (const auto& p : cmd.params) {
    if (!p.optional && values[p.key].empty()) {
      throw Error(ErrorKind::invalid_argument, cmd.name + ": --" + Settings::flag(p.key) + " is required");
    }
  }
  return Settings(std::move(values));
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::numerical:
    case ErrorKind::divergence:
    case ErrorKind::undefined_normalizer:
      return 2;
    default:
      return 1;
  }
}

std::map<std::string, std::string> parse_flat_config(std::string_view text, const std::vector<std::string>& allowed) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw Error(ErrorKind::parse, where + "expected 'key = value'");
    std::string key = trim(std::string_view(content).substr(0, eq));
    std::replace(key.begin(), key.end(), '-', '_');
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorKind::parse, where + "unknown key '" + key + "'");
    }
    if (out.count(key)) throw Error(ErrorKind::parse, where + "duplicate key '" + key + "'");
    out[key] = value;
  }
  return out;
}

std::string format_flat_config(const std::map<std::string, std::string>& values) {
  std::string out;
  for (const auto& [k, v] : values) out += k + " = " + v + "\n";
  return out;
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Open-set recognition with generated auxiliary samples"};
  app.require_subcommand(1);
  auto commands = make_commands();
  for (auto& cmd : commands) {
    cmd.app = app.add_subcommand(cmd.name, cmd.help);
    cmd.app->add_option("--config", cmd.config_path, "Flat key = value settings file");
    for (const auto& p : cmd.params) {
      std::string help = p.help;
      if (!p.fallback.empty()) help += " (default " + p.fallback + ")";
      cmd.app->add_option("--" + Settings::flag(p.key), cmd.flag_values[p.key], help);
    }
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e);
      return 0;
    }
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  for (const auto& cmd : commands) {
    if (!cmd.app->parsed()) continue;
    try {
      cmd.body(resolve(cmd));
      return 0;
    } catch (const Error& e) {
      std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
      return exit_code_for(e.kind());
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return 1;
}

}  // namespace aosr::cli
