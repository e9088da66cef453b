// botflow command-line front end. Links only the C API.

#include <botflow/botflow.h>

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDegenerate = 3;

int exit_code_for(bf_status s) {
  switch (s) {
    case BF_OK: return kExitOk;
    case BF_E_INVALID_ARGUMENT:
    case BF_E_UNKNOWN_SCENARIO:
    case BF_E_BAD_COMPONENT_COUNT:
    case BF_E_BAD_BINS:
    case BF_E_BAD_CONFIG: return kExitUsage;
    case BF_E_TOO_FEW_ROWS:
    case BF_E_SINGLE_CLASS:
    case BF_E_DEGENERATE_SPLIT:
    case BF_E_DEGENERATE_ROW:
    case BF_E_NON_FINITE_LOSS: return kExitDegenerate;
    default: return kExitData;
  }
}

struct Failure {
  bf_status status;
};

void check(bf_status s) {
  if (s != BF_OK) throw Failure{s};
}

struct FlowsDeleter {
  void operator()(bf_flows* p) const { bf_flows_free(p); }
};
struct MatrixDeleter {
  void operator()(bf_matrix* p) const { bf_matrix_free(p); }
};
struct ModelDeleter {
  void operator()(bf_model* p) const { bf_model_free(p); }
};
using FlowsPtr = std::unique_ptr<bf_flows, FlowsDeleter>;
using MatrixPtr = std::unique_ptr<bf_matrix, MatrixDeleter>;
using ModelPtr = std::unique_ptr<bf_model, ModelDeleter>;

FlowsPtr read_flows(const std::string& path, const std::string& on_error) {
  bf_flows* f = nullptr;
  check(bf_flows_read(path.c_str(), on_error == "abort", &f));
  FlowsPtr out(f);
  bf_ingest_stats st{};
  check(bf_flows_stats(f, &st));
  if (st.skipped_rows > 0)
    std::cerr << "warning: skipped " << st.skipped_rows << " malformed row(s), first at line " << st.first_error_line
              << "\n";
  if (st.unknown_labels > 0)
    std::cerr << "warning: " << st.unknown_labels << " label(s) matched no rule and were counted as background\n";
  return out;
}

MatrixPtr read_matrix(const std::string& path) {
  bf_matrix* m = nullptr;
  check(bf_matrix_read_csv(path.c_str(), &m));
  return MatrixPtr(m);
}

unsigned class_mask(const std::string& text) {
  unsigned mask = 0;
  check(bf_parse_class_set(text.c_str(), &mask));
  return mask;
}

// Flags shared by every subcommand that trains a model.
struct TrainFlags {
  double l2 = 1e-4;
  double lr = 0.5;
  int max_iter = 2000;
  double tol = 1e-8;
  std::string class_weight = "balanced";
  double threshold = 0.5;

  void add(CLI::App* app) {
    app->add_option("--l2", l2, "L2 penalty on the weights")->capture_default_str()->check(CLI::NonNegativeNumber);
    app->add_option("--lr", lr, "initial gradient-descent step")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--max-iter", max_iter, "iteration cap")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--tol", tol, "convergence tolerance")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--class-weight", class_weight, "balanced|none")
        ->capture_default_str()
        ->check(CLI::IsMember({"balanced", "none"}));
    app->add_option("--threshold", threshold, "decision threshold on P(positive)")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
  }

  bf_train_options options(std::uint64_t seed, unsigned mask) const {
    bf_train_options o;
    bf_train_options_default(&o);
    o.l2_lambda = l2;
    o.learning_rate = lr;
    o.max_iter = max_iter;
    o.tol = tol;
    o.balanced = class_weight == "balanced";
    o.threshold = threshold;
    o.seed = seed;
    o.positive_mask = mask;
    return o;
  }
};

struct RunFlags {
  std::string split;
  double fraction = 0.7;
  double purge = -1;
  unsigned jobs = std::max(1U, std::thread::hardware_concurrency());
  bool timing = false;
  std::string positive = "botnet,cnc";
  TrainFlags train;

  void add(CLI::App* app, const std::string& default_split) {
    split = default_split;
    app->add_option("--split", split, "chrono|random")->capture_default_str()->check(CLI::IsMember({"chrono", "random"}));
    app->add_option("--fraction", fraction, "training fraction")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    app->add_option("--purge", purge, "seconds dropped between train and test (chrono split)")
        ->default_str("width")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--jobs", jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_flag("--timing", timing, "record measured wall times instead of 0")->capture_default_str();
    app->add_option("--positive-classes", positive, "classes labelled positive")->capture_default_str();
    train.add(app);
  }

  bf_run_options options(std::uint64_t seed) const {
    bf_run_options o;
    bf_run_options_default(&o);
    o.split_random = split == "random";
    o.train_fraction = fraction;
    o.purge_gap_s = purge;
    o.train = train.options(seed, class_mask(positive));
    o.jobs = jobs;
    o.record_timing = timing;
    return o;
  }
};

void add_output(CLI::App* app, std::string& out, bool required = true) {
  auto* opt = app->add_option("-o,--output", out, "output path");
  if (required) opt->required();
}

void add_on_error(CLI::App* app, std::string& on_error) {
  app->add_option("--on-error", on_error, "malformed rows: skip|abort")
      ->capture_default_str()
      ->check(CLI::IsMember({"skip", "abort"}));
}

std::vector<std::int64_t> parse_list(const std::string& text, const std::string& flag) {
  std::vector<std::int64_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || v <= 0)
      throw CLI::ValidationError(flag, "expected a comma-separated list of positive integers, got '" + text + "'");
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string column_name(const std::string& c) {
  if (c == "precision" || c == "recall" || c == "f1") return "test_" + c;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Windowed flow features and logistic-regression botnet detection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", bf_version());

  std::string input, output, on_error = "skip";
  std::int64_t width = 90, stride = 15;
  std::uint64_t seed = 0;

  // stats
  bool stats_json = false;
  auto* stats = app.add_subcommand("stats", "label distribution of a flow file");
  stats->add_option("flows", input, "binetflow CSV")->required();
  stats->add_flag("--json", stats_json, "emit JSON instead of a table")->capture_default_str();
  add_output(stats, output, false);
  add_on_error(stats, on_error);

  // featurize
  std::string positive = "botnet,cnc";
  std::string group_by = "src";
  auto* featurize = app.add_subcommand("featurize", "window flows into per-source feature rows");
  featurize->add_option("flows", input, "binetflow CSV")->required();
  featurize->add_option("--width", width, "window width in seconds")->capture_default_str()->check(CLI::PositiveNumber);
  featurize->add_option("--stride", stride, "window stride in seconds")->capture_default_str()->check(CLI::PositiveNumber);
  featurize->add_option("--positive-classes", positive, "classes labelled positive")->capture_default_str();
  featurize->add_option("--group-by", group_by, "src|pair")->capture_default_str()->check(CLI::IsMember({"src", "pair"}));
  add_output(featurize, output);
  add_on_error(featurize, on_error);

  // train
  TrainFlags train_flags;
  double corr_threshold = 0;
  bool backward_elim = false;
  auto* train = app.add_subcommand("train", "fit a logistic-regression model on a feature CSV");
  train->add_option("features", input, "feature CSV")->required();
  train_flags.add(train);
  train->add_option("--seed", seed, "seed recorded with the model")->capture_default_str();
  train->add_option("--positive-classes", positive, "classes the feature targets were built from")
      ->capture_default_str();
  train->add_option("--corr-threshold", corr_threshold, "drop features correlated above |r| (0 disables)")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  train->add_flag("--backward-elim", backward_elim, "greedy backward feature elimination")->capture_default_str();
  add_output(train, output);

  // eval
  std::string model_path;
  auto* eval = app.add_subcommand("eval", "evaluate a model on a feature CSV");
  eval->add_option("features", input, "feature CSV")->required();
  eval->add_option("--model", model_path, "model file written by train")->required();
  add_output(eval, output);

  // select
  std::size_t min_features = 1, pca_components = 0;
  double elim_tolerance = 0, select_fraction = 0.7;
  std::string metric = "f1", report_path;
  auto* select = app.add_subcommand("select", "feature selection and PCA on a feature CSV");
  select->add_option("features", input, "feature CSV")->required();
  select->add_option("--corr-threshold", corr_threshold, "drop features correlated above |r| (0 disables)")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  select->add_flag("--backward-elim", backward_elim, "greedy backward feature elimination")->capture_default_str();
  select->add_option("--min-features", min_features, "elimination floor")->capture_default_str()->check(CLI::PositiveNumber);
  select->add_option("--elim-tolerance", elim_tolerance, "allowed score drop per elimination step")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  select->add_option("--metric", metric, "f1|precision|recall")
      ->capture_default_str()
      ->check(CLI::IsMember({"f1", "precision", "recall"}));
  select->add_option("--pca-components", pca_components, "project onto the leading components (0 disables)")
      ->capture_default_str();
  select->add_option("--fraction", select_fraction, "chronological validation split")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  select->add_option("--report", report_path, "selection report JSON");
  add_output(select, output);

  // sweep
  std::string widths_text = "90", strides_text = "15";
  RunFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "train and evaluate over a width x stride grid");
  sweep->add_option("flows", input, "binetflow CSV")->required();
  sweep->add_option("--widths", widths_text, "comma-separated window widths (s)")->capture_default_str();
  sweep->add_option("--strides", strides_text, "comma-separated window strides (s)")->capture_default_str();
  sweep->add_option("--seed", seed, "base seed")->capture_default_str();
  sweep_flags.add(sweep, "chrono");
  add_output(sweep, output);
  add_on_error(sweep, on_error);

  // repeat
  int runs = 4;
  bool fixed_seed = false;
  RunFlags repeat_flags;
  auto* repeat = app.add_subcommand("repeat", "repeat one configuration with distinct seeds");
  repeat->add_option("flows", input, "binetflow CSV")->required();
  repeat->add_option("--width", width, "window width in seconds")->capture_default_str()->check(CLI::PositiveNumber);
  repeat->add_option("--stride", stride, "window stride in seconds")->capture_default_str()->check(CLI::PositiveNumber);
  repeat->add_option("--runs", runs, "number of runs (>= 2)")->capture_default_str()->check(CLI::Range(2, 1000000));
  repeat->add_option("--seed", seed, "seed of the first run")->capture_default_str();
  repeat->add_flag("--fixed-seed", fixed_seed, "reuse --seed for every run")->capture_default_str();
  repeat_flags.add(repeat, "random");
  add_output(repeat, output);
  add_on_error(repeat, on_error);

  // scenarios
  std::string files_text;
  std::int64_t scen_width = 189, scen_stride = 129;
  RunFlags scen_flags;
  auto* scenarios = app.add_subcommand("scenarios", "one run per labelled scenario file");
  scenarios->add_option("--files", files_text, "id=path pairs, e.g. 5=a.csv,8=b.csv")->required();
  scenarios->add_option("--width", scen_width, "window width in seconds")->capture_default_str()->check(CLI::PositiveNumber);
  scenarios->add_option("--stride", scen_stride, "window stride in seconds")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  scenarios->add_option("--seed", seed, "run seed")->capture_default_str();
  scen_flags.add(scenarios, "chrono");
  add_output(scenarios, output);

  // synth
  std::string preset = "scenario9";
  bool hard = false;
  double duration = 3600;
  std::uint64_t synth_seed = 42;
  auto* synth = app.add_subcommand("synth", "generate a labelled synthetic flow file");
  synth->add_option("--preset", preset, "traffic preset")->capture_default_str()->check(CLI::IsMember({"scenario9"}));
  synth->add_flag("--hard", hard, "bot traffic mimics background")->capture_default_str();
  synth->add_option("--duration", duration, "capture length in seconds")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "generator seed")->capture_default_str();
  add_output(synth, output);

  // report
  std::string hist_column;
  double bin_width = 0.05, lo = 0, hi = 1;
  auto* report = app.add_subcommand("report", "histograms over sweep or repeat output");
  report->add_option("sweep", input, "sweep or repeat CSV")->required();
  report->add_option("--histogram", hist_column, "column to bin (precision, recall, f1 or any CSV column)")->required();
  report->add_option("--bin-width", bin_width, "bin width")->capture_default_str()->check(CLI::PositiveNumber);
  report->add_option("--lo", lo, "lowest bin edge")->capture_default_str();
  report->add_option("--hi", hi, "highest bin edge")->capture_default_str();
  add_output(report, output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*stats) {
      auto flows = read_flows(input, on_error);
      if (stats_json) {
        if (!output.empty()) {
          check(bf_flows_write_stats_json(flows.get(), output.c_str()));
        } else {
          std::cout << bf_flows_stats_json(flows.get());
        }
      } else {
        bf_label_distribution d{};
        check(bf_flows_distribution(flows.get(), &d));
        static const char* names[] = {"background", "normal", "botnet", "cnc"};
        std::string text = "class,count,percent\n";
        char buf[96];
        for (int c = 0; c < 4; ++c) {
          std::snprintf(buf, sizeof buf, "%s,%llu,%.2f\n", names[c], static_cast<unsigned long long>(d.counts[c]),
                        d.percent[c]);
          text += buf;
        }
        std::snprintf(buf, sizeof buf, "total,%llu,100.00\n", static_cast<unsigned long long>(d.total));
        text += buf;
        if (output.empty()) {
          std::cout << text;
        } else {
          std::FILE* f = std::fopen((output + ".tmp").c_str(), "wb");
          if (!f || std::fwrite(text.data(), 1, text.size(), f) != text.size() || std::fclose(f) != 0 ||
              std::rename((output + ".tmp").c_str(), output.c_str()) != 0) {
            std::cerr << "error: cannot write " << output << "\n";
            return kExitData;
          }
        }
      }
    } else if (*featurize) {
      const unsigned mask = class_mask(positive);
      auto flows = read_flows(input, on_error);
      const bf_window_config cfg{width, stride, group_by == "pair"};
      bf_matrix* m = nullptr;
      check(bf_matrix_build(flows.get(), &cfg, mask, &m));
      MatrixPtr holder(m);
      check(bf_matrix_write_csv(m, output.c_str()));
      std::cerr << bf_matrix_rows(m) << " rows, " << bf_matrix_positives(m) << " positive\n";
    } else if (*train) {
      const unsigned mask = class_mask(positive);
      MatrixPtr m = read_matrix(input);
      if (corr_threshold > 0 || backward_elim) {
        bf_select_options so;
        bf_select_options_default(&so);
        so.corr_threshold = corr_threshold;
        so.backward_elim = backward_elim;
        bf_matrix* reduced = nullptr;
        check(bf_select(m.get(), &so, &reduced, nullptr));
        m.reset(reduced);
      }
      const bf_train_options o = train_flags.options(seed, mask);
      bf_model* model = nullptr;
      bf_train_summary summary{};
      check(bf_model_fit(m.get(), &o, &model, &summary));
      ModelPtr holder(model);
      check(bf_model_save(model, output.c_str()));
      std::cerr << "iterations " << summary.iterations_run << (summary.converged ? " (converged)" : " (cap reached)")
                << ", loss " << summary.final_loss << "\n";
    } else if (*eval) {
      MatrixPtr m = read_matrix(input);
      bf_model* model = nullptr;
      check(bf_model_load(model_path.c_str(), &model));
      ModelPtr holder(model);
      check(bf_evaluate_to_file(model, m.get(), output.c_str()));
    } else if (*select) {
      MatrixPtr m = read_matrix(input);
      bf_select_options so;
      bf_select_options_default(&so);
      so.corr_threshold = corr_threshold;
      so.backward_elim = backward_elim;
      so.min_features = min_features;
      so.elim_tolerance = elim_tolerance;
      so.metric = metric == "f1" ? 0 : metric == "precision" ? 1 : 2;
      so.pca_components = pca_components;
      so.train_fraction = select_fraction;
      bf_matrix* reduced = nullptr;
      check(bf_select(m.get(), &so, &reduced, report_path.empty() ? nullptr : report_path.c_str()));
      MatrixPtr holder(reduced);
      check(bf_matrix_write_csv(reduced, output.c_str()));
    } else if (*sweep) {
      const auto ws = parse_list(widths_text, "--widths");
      const auto ss = parse_list(strides_text, "--strides");
      const bf_run_options o = sweep_flags.options(seed);
      auto flows = read_flows(input, on_error);
      check(bf_sweep(flows.get(), ws.data(), ws.size(), ss.data(), ss.size(), &o, seed, output.c_str()));
    } else if (*repeat) {
      const bf_run_options o = repeat_flags.options(seed);
      auto flows = read_flows(input, on_error);
      check(bf_repeat(flows.get(), width, stride, runs, &o, seed, fixed_seed, output.c_str()));
    } else if (*scenarios) {
      std::vector<int> ids;
      std::vector<std::string> paths;
      std::size_t pos = 0;
      while (pos <= files_text.size()) {
        const std::size_t comma = files_text.find(',', pos);
        const std::string item = files_text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        const std::size_t eq = item.find('=');
        std::size_t used = 0;
        int id = 0;
        try {
          id = eq == std::string::npos ? 0 : std::stoi(item.substr(0, eq), &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (eq == std::string::npos || used != eq || eq + 1 >= item.size()) {
          std::cerr << "usage error: --files: expected id=path pairs, got '" << item << "'\n";
          return kExitUsage;
        }
        ids.push_back(id);
        paths.push_back(item.substr(eq + 1));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      std::vector<const char*> cpaths;
      for (const auto& p : paths) cpaths.push_back(p.c_str());
      const bf_run_options o = scen_flags.options(seed);
      check(bf_scenarios(ids.data(), cpaths.data(), ids.size(), scen_width, scen_stride, &o, seed, output.c_str()));
    } else if (*synth) {
      bf_synth_options so{synth_seed, hard, duration};
      std::uint64_t n = 0;
      check(bf_synth(preset.c_str(), &so, output.c_str(), &n));
      std::cerr << n << " flows written to " << output << "\n";
    } else if (*report) {
      const std::string col = column_name(hist_column);
      check(bf_report_histogram(input.c_str(), col.c_str(), bin_width, lo, hi, output.c_str()));
    }
  } catch (const Failure& f) {
    std::cerr << "error (" << bf_status_name(f.status) << "): " << bf_last_error() << "\n";
    return exit_code_for(f.status);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}
