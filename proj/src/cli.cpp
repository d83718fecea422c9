#include "onionlabel/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "onionlabel/baselines_metrics.hpp"
#include "onionlabel/errors.hpp"
#include "onionlabel/hull_engine.hpp"
#include "onionlabel/signal_model.hpp"
#include "onionlabel/synth_bench.hpp"

namespace onionlabel::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;  // std::map-backed, so keys come out sorted

namespace {

constexpr const char* kVersion = "0.1.0";

std::shared_ptr<spdlog::logger> logger() {
  static const std::shared_ptr<spdlog::logger> instance = [] {
    auto log = std::make_shared<spdlog::logger>("onionlabel", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    log->set_pattern("[%l] %v");
    log->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("ONIONLABEL_LOG")) log->set_level(spdlog::level::from_str(env));
    return log;
  }();
  return instance;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T value{};
  in >> value;
  if (!in || !(in >> std::ws).eof()) throw ParseError("config key '" + key + "': cannot parse '" + text + "'");
  if constexpr (std::is_unsigned_v<T>) {
    if (text.find('-') != std::string::npos) throw ParseError("config key '" + key + "' must be non-negative");
  }
  return value;
}

// Options shared by the commands that read a weak-label matrix and solve.
struct SolveFlags {
  std::string weak_labels;
  std::optional<std::size_t> n;
  std::optional<std::size_t> k;
  std::string config;
  std::optional<double> alpha;
  std::optional<std::size_t> chunks;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_input_flags(CLI::App* cmd, SolveFlags& f) {
  cmd->add_option("--weak-labels", f.weak_labels, "Weak-label matrix (CSV votes or JSON)")->required();
  cmd->add_option("--n", f.n, "Number of data points (checked against the file)");
  cmd->add_option("--k", f.k, "Number of classes (required for CSV input)");
}

void add_solver_flags(CLI::App* cmd, SolveFlags& f) {
  cmd->add_option("--config", f.config, "key=value solver config file");
  cmd->add_option("--alpha", f.alpha, "Epsilon step size");
  cmd->add_option("--chunks", f.chunks, "Signal count after reduction");
  cmd->add_option("--seed", f.seed, "RNG seed");
}

SolverConfig resolve_config(const SolveFlags& f) {
  SolverConfig cfg = f.config.empty() ? SolverConfig{} : load_config(f.config);
  if (f.alpha) cfg.alpha = *f.alpha;
  if (f.chunks) cfg.chunks = *f.chunks;
  if (f.seed) cfg.seed = *f.seed;
  cfg.validate();
  return cfg;
}

json config_json(const SolverConfig& cfg) {
  return json{{"alpha", cfg.alpha},       {"chunks", cfg.chunks},
              {"conv_tol", cfg.conv_tol}, {"hull_tol", cfg.hull_tol},
              {"learning_rate", cfg.learning_rate}, {"max_anneal_steps", cfg.max_anneal_steps},
              {"max_iters", cfg.max_iters}, {"seed", cfg.seed}};
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream file(path);
  if (!file) throw Error("cannot write '" + path.string() + "'");
  file << doc.dump(2) << '\n';
}

fs::path manifest_path(const fs::path& out) {
  fs::path p = out;
  p.replace_extension(".manifest.json");
  return p;
}

int label_command(const std::string& command, const SolveFlags& f, std::ostream& out) {
  const SolverConfig cfg = resolve_config(f);
  const WeakSignalMatrix w = load_pws_matrix(f.weak_labels, f.n, f.k);
  logger()->info("{}: m={} n={} k={}", command, w.m(), w.n(), w.k());

  const SyntheticLabel label = command == "ablate" ? run_ablation(w, cfg) : run_oua(w, cfg);
  if (!label.converged) {
    logger()->warn("solver stopped after {} iterations without meeting conv_tol={}", label.iterations, cfg.conv_tol);
  }

  json artifact{{"ablation", label.ablation},
                {"converged", label.converged},
                {"epsilon_used", label.epsilon_used},
                {"hard", label.hard},
                {"initial_residual", label.initial_residual},
                {"iterations", label.iterations},
                {"k", w.k()},
                {"n", w.n()},
                {"residual", label.residual},
                {"soft", std::vector<double>(label.soft.data(), label.soft.data() + label.soft.size())}};

  if (f.out.empty()) {
    out << artifact.dump(2) << '\n';
    return kExitOk;
  }
  const fs::path out_path = f.out;
  const fs::path manifest = manifest_path(out_path);
  artifact["manifest"] = manifest.filename().string();
  write_json(out_path, artifact);
  write_json(manifest, json{{"command", command},
                            {"config", config_json(cfg)},
                            {"inputs", {{"weak_labels", f.weak_labels}}},
                            {"outputs", {{"labels", out_path.string()}}},
                            {"shape", {{"k", w.k()}, {"m", w.m()}, {"n", w.n()}}},
                            {"timestamp", utc_timestamp()},
                            {"version", kVersion}});
  out << json{{"converged", label.converged}, {"epsilon_used", label.epsilon_used}, {"manifest", manifest.string()},
              {"out", out_path.string()}, {"residual", label.residual}}
             .dump()
      << '\n';
  return kExitOk;
}

struct LoadedLabels {
  std::vector<int> hard;
  std::optional<std::size_t> k;
};

// Either a label artifact (JSON with "hard") or one class per line.
LoadedLabels read_label_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ParseError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << file.rdbuf();
  const std::string content = buf.str();
  LoadedLabels loaded;
  const auto first = content.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && content[first] == '{') {
    try {
      const json doc = json::parse(content);
      loaded.hard = doc.at("hard").get<std::vector<int>>();
      if (doc.contains("k")) loaded.k = doc.at("k").get<std::size_t>();
    } catch (const json::exception& e) {
      throw ParseError("'" + path + "': " + e.what());
    }
    return loaded;
  }
  std::istringstream in(content);
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    try {
      std::size_t used = 0;
      loaded.hard.push_back(std::stoi(t, &used));
      if (used != t.size()) throw std::invalid_argument(t);
    } catch (const std::logic_error&) {
      throw ParseError("'" + path + "' line " + std::to_string(line_no) + ": expected an integer class");
    }
  }
  if (loaded.hard.empty()) throw ParseError("'" + path + "' holds no labels");
  return loaded;
}

json report_json(const EvalReport& report) {
  json per_class = json::array();
  for (const auto& s : report.per_class) {
    per_class.push_back(
        {{"class", s.cls}, {"f1", s.f1}, {"precision", s.precision}, {"recall", s.recall}, {"support", s.support}});
  }
  return json{{"metric", report.metric}, {"n", report.n}, {"per_class", per_class}, {"value", report.value}};
}

std::vector<Method> parse_methods(const std::string& list) {
  std::vector<Method> methods;
  std::istringstream in(list);
  for (std::string item; std::getline(in, item, ',');) {
    if (!trim(item).empty()) methods.push_back(parse_method(trim(item)));
  }
  if (methods.empty()) throw std::invalid_argument("no methods given");
  return methods;
}

}  // namespace

SolverConfig parse_config(std::istream& in, SolverConfig cfg) {
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "alpha") {
      cfg.alpha = parse_number<double>(key, value);
    } else if (key == "learning_rate") {
      cfg.learning_rate = parse_number<double>(key, value);
    } else if (key == "max_iters") {
      cfg.max_iters = parse_number<std::size_t>(key, value);
    } else if (key == "conv_tol") {
      cfg.conv_tol = parse_number<double>(key, value);
    } else if (key == "seed") {
      cfg.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "max_anneal_steps") {
      cfg.max_anneal_steps = parse_number<std::size_t>(key, value);
    } else if (key == "chunks") {
      cfg.chunks = parse_number<std::size_t>(key, value);
    } else if (key == "hull_tol") {
      cfg.hull_tol = parse_number<double>(key, value);
    } else {
      throw ParseError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

SolverConfig load_config(const std::string& path, SolverConfig base) {
  std::ifstream file(path);
  if (!file) throw ParseError("cannot open config '" + path + "'");
  return parse_config(file, base);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"onionlabel: weak-signal label model with safe-region hull geometry", "onionlabel"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  SolveFlags label_flags, ablate_flags, hull_flags;
  auto* label = app.add_subcommand("label", "Produce synthetic labels from a weak-label matrix");
  add_input_flags(label, label_flags);
  add_solver_flags(label, label_flags);
  label->add_option("--out", label_flags.out, "Label artifact path (a .manifest.json is written beside it)");

  auto* ablate = app.add_subcommand("ablate", "Solve with b/n pushed inside Conv(H2)");
  add_input_flags(ablate, ablate_flags);
  add_solver_flags(ablate, ablate_flags);
  ablate->add_option("--out", ablate_flags.out, "Label artifact path");

  auto* hull = app.add_subcommand("inspect-hull", "Summarize the hull decomposition without solving");
  add_input_flags(hull, hull_flags);
  hull->add_option("--chunks", hull_flags.chunks, "Signal count after reduction");
  hull->add_option("--config", hull_flags.config, "key=value solver config file");

  std::string pred_path, truth_path, metric = "acc";
  std::optional<std::size_t> eval_k;
  auto* eval = app.add_subcommand("eval", "Score predicted labels against ground truth");
  eval->add_option("--pred", pred_path, "Label artifact JSON or one class per line")->required();
  eval->add_option("--truth", truth_path, "Ground-truth labels, one class per line")->required();
  eval->add_option("--metric", metric, "acc or f1")->check(CLI::IsMember({"acc", "f1"}));
  eval->add_option("--k", eval_k, "Number of classes");

  SynthSpec spec;
  std::string synth_out, synth_truth;
  auto* synth = app.add_subcommand("synth", "Generate a planted-truth weak-label instance");
  synth->add_option("--n", spec.n, "Number of data points");
  synth->add_option("--k", spec.k, "Number of classes");
  synth->add_option("--m", spec.m, "Number of weak signals");
  synth->add_option("--accuracy", spec.signal_accuracy, "Probability a non-abstaining vote is correct");
  synth->add_option("--abstain", spec.abstain_rate, "Probability of abstaining");
  synth->add_option("--seed", spec.seed, "RNG seed");
  synth->add_option("--out", synth_out, "Weak-label CSV path")->required();
  synth->add_option("--truth", synth_truth, "Ground-truth label path")->required();

  SynthSpec sweep_spec;
  SolveFlags sweep_flags;
  std::size_t instances = 5, threads = 1;
  std::string methods = "oua,mv,wmv,ablation", sweep_metric = "acc";
  auto* sweep_cmd = app.add_subcommand("sweep", "Run methods over seeded synthetic instances");
  sweep_cmd->add_option("--n", sweep_spec.n, "Number of data points");
  sweep_cmd->add_option("--k", sweep_spec.k, "Number of classes");
  sweep_cmd->add_option("--m", sweep_spec.m, "Number of weak signals");
  sweep_cmd->add_option("--accuracy", sweep_spec.signal_accuracy, "Probability a non-abstaining vote is correct");
  sweep_cmd->add_option("--abstain", sweep_spec.abstain_rate, "Probability of abstaining");
  sweep_cmd->add_option("--instances", instances, "Instances, seeded seed..seed+instances-1");
  sweep_cmd->add_option("--methods", methods, "Comma-separated subset of oua,mv,wmv,ablation");
  sweep_cmd->add_option("--metric", sweep_metric, "acc or f1")->check(CLI::IsMember({"acc", "f1"}));
  sweep_cmd->add_option("--threads", threads, "Worker threads");
  add_solver_flags(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--out", sweep_flags.out, "Results CSV path (stdout if omitted)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (*label) return label_command("label", label_flags, out);
    if (*ablate) return label_command("ablate", ablate_flags, out);

    if (*hull) {
      const SolverConfig cfg = resolve_config(hull_flags);
      const WeakSignalMatrix w = reduce_signals(load_pws_matrix(hull_flags.weak_labels, hull_flags.n, hull_flags.k),
                                                cfg.chunks);
      const ColumnCloud cloud = build_A(w);
      const HullDecomposition decomposition = hull_decompose(cloud, cfg.hull_tol);
      const TargetVector target = init_b(w, epsilon_upper_bound(w.k()));
      const RegionStatus status = safe_region_status(target.b, static_cast<double>(w.n()), decomposition, cloud,
                                                     cfg.hull_tol);
      out << json{{"h1_size", decomposition.h1.size()},
                  {"h2_interior_size", decomposition.h2_interior.size()},
                  {"h2_size", decomposition.h2.size()},
                  {"status_at_eps_max", std::string(to_string(status))}}
                 .dump(2)
          << '\n';
      return kExitOk;
    }

    if (*eval) {
      const LoadedLabels pred = read_label_file(pred_path);
      const LoadedLabels truth = read_label_file(truth_path);
      if (eval_k && pred.k && *eval_k != *pred.k) throw ShapeError("--k disagrees with the artifact's class count");
      std::size_t k = eval_k ? *eval_k : pred.k ? *pred.k : 2;
      if (!eval_k && !pred.k) {
        for (const auto* v : {&pred.hard, &truth.hard}) {
          for (int c : *v) k = std::max(k, static_cast<std::size_t>(std::max(c, 0)));
        }
      }
      const LabelVector p(pred.hard, k);
      const LabelVector t(truth.hard, k);
      out << report_json(metric == "f1" ? f1(p, t) : accuracy(p, t)).dump(2) << '\n';
      return kExitOk;
    }

    if (*synth) {
      const Instance instance = generate_instance(spec);
      std::ofstream w_file(synth_out);
      std::ofstream t_file(synth_truth);
      if (!w_file || !t_file) throw Error("cannot write synth outputs");
      write_pws_csv(w_file, instance.signals);
      write_labels(t_file, instance.truth);
      out << json{{"k", spec.k}, {"m", spec.m}, {"n", spec.n}, {"seed", spec.seed}, {"truth", synth_truth},
                  {"weak_labels", synth_out}}
                 .dump()
          << '\n';
      return kExitOk;
    }

    if (*sweep_cmd) {
      const SolverConfig cfg = resolve_config(sweep_flags);
      std::vector<SynthSpec> specs;
      for (std::size_t i = 0; i < instances; ++i) {
        SynthSpec s = sweep_spec;
        s.seed = cfg.seed + i;
        s.validate();
        specs.push_back(std::move(s));
      }
      const auto rows = sweep(specs, parse_methods(methods), cfg, sweep_metric, threads);
      for (const auto& row : rows) {
        if (!row.error.empty()) logger()->warn("{} / {}: {}", row.instance_id, row.method, row.error);
      }
      if (sweep_flags.out.empty()) {
        write_sweep_csv(out, rows);
      } else {
        std::ofstream file(sweep_flags.out);
        if (!file) throw Error("cannot write '" + sweep_flags.out + "'");
        write_sweep_csv(file, rows);
      }
      return kExitOk;
    }
  } catch (const AnnealError& e) {
    logger()->error("{}", e.what());
    err << "error: " << e.what() << '\n';
    return kExitAnneal;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace onionlabel::cli
