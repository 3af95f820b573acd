// lfqa: generate, distort, measure, simulate, scale, evaluate, serve.

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <sstream>

#include "lfqa/commands.hpp"
#include "lfqa/dataset.hpp"
#include "lfqa/error.hpp"
#include "lfqa/io.hpp"
#include "lfqa/report.hpp"
#include "lfqa/simulate.hpp"
#include "lfqa/study.hpp"

namespace fs = std::filesystem;
using namespace lfqa;

namespace {

HttpStudyServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Light-field quality assessment toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_path, source, dataset, metrics_list, external, input,
      report_path, jod_path, summary_path, truth_path, loss = "auto", log_dir,
      host = "127.0.0.1";
  int observers = 40, repetitions = 1, bootstrap = 500, per_fold = 2, reference_level = 2,
      port = 8080;
  std::uint64_t seed = 0;
  bool sparse_ref = false;

  auto* gen = app.add_subcommand("generate", "Render synthetic reference scenes");
  gen->add_option("--config", config_path, "Generation config JSON")->required();
  gen->add_option("--out", out_path, "Output directory")->required();

  auto* dist = app.add_subcommand("distort", "Build the distorted condition tree");
  dist->add_option("--config", config_path, "Distortion config JSON")->required();
  dist->add_option("--source", source, "Directory of reference scenes")->required();
  dist->add_option("--out", out_path, "Output dataset directory")->required();

  auto* meas = app.add_subcommand("measure", "Score every condition with the metric battery");
  meas->add_option("--dataset", dataset, "Distorted dataset directory")->required();
  meas->add_option("--metrics", metrics_list, "Comma-separated metric ids (default: all)");
  meas->add_option("--config", config_path, "Metric parameter JSON");
  meas->add_option("--external", external, "Extra scores to merge (metric report CSV)");
  meas->add_option("--out", out_path, "Metric report CSV")->required();

  auto* sim = app.add_subcommand("simulate", "Simulate pairwise answers from a model observer");
  sim->add_option("--dataset", dataset, "Distorted dataset directory")->required();
  sim->add_option("--observers", observers, "Number of observers");
  sim->add_option("--repetitions", repetitions, "Answers per pair and observer");
  sim->add_option("--seed", seed, "Random seed");
  sim->add_option("--out", out_path, "Comparison CSV")->required();
  sim->add_option("--truth", truth_path, "Model JOD CSV");

  auto* scale = app.add_subcommand("scale", "Scale pairwise comparisons to JOD");
  scale->add_option("--input", input, "Comparison CSV or session log directory")->required();
  scale->add_option("--bootstrap", bootstrap, "Bootstrap replicates (0 disables)");
  scale->add_option("--seed", seed, "Random seed");
  scale->add_option("--out", out_path, "JOD CSV")->required();

  auto* ev = app.add_subcommand("evaluate", "Cross-validated metric goodness");
  ev->add_option("--report", report_path, "Metric report CSV");
  ev->add_option("--jod", jod_path, "JOD CSV")->required();
  ev->add_option("--metrics", metrics_list, "Comma-separated metric ids");
  ev->add_option("--loss", loss, "chi2, mse or auto")
      ->check(CLI::IsMember({"auto", "chi2", "mse"}));
  ev->add_option("--seed", seed, "Fold and bootstrap seed");
  ev->add_option("--scenes-per-fold", per_fold, "Test scenes per fold");
  ev->add_option("--bootstrap", bootstrap, "Bootstrap replicates for significance");
  ev->add_flag("--sparse-ref", sparse_ref, "Compare dense, sparse and approximate references");
  ev->add_option("--dataset", dataset, "Distorted dataset directory (with --sparse-ref)");
  ev->add_option("--reference-level", reference_level, "Sparse reference level");
  ev->add_option("--out", out_path, "Goodness CSV")->required();
  ev->add_option("--summary", summary_path, "Summary JSON");

  auto* serve = app.add_subcommand("serve", "Run the pairwise study server");
  serve->add_option("--dataset", dataset, "Distorted dataset directory")->required();
  serve->add_option("--logs", log_dir, "Session log directory")->required();
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");
  serve->add_option("--seed", seed, "Queue seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto dirs = generate_dataset(generate_config_from_json(read_text_file(config_path)),
                                         out_path);
      std::cout << "generated " << dirs.size() << " scenes\n";
    } else if (*dist) {
      const DatasetIndex index = distort_dataset(
          source, distort_config_from_json(read_text_file(config_path)), out_path);
      std::cout << "wrote " << index.conditions.size() << " conditions, skipped "
                << index.skipped.size() << "\n";
    } else if (*meas) {
      MeasureOptions opts;
      opts.dataset_root = dataset;
      if (!metrics_list.empty()) {
        opts.metrics.clear();
        for (const std::string& m : split_list(metrics_list)) opts.metrics.push_back(metric_from_name(m));
      }
      if (!config_path.empty()) opts.config = metric_config_from_json(read_text_file(config_path));
      if (!external.empty()) opts.external_scores = external;
      const auto rows = measure_dataset(opts);
      write_text_file(out_path, metric_rows_to_csv(rows));
      std::cout << "wrote " << rows.size() << " scores\n";
    } else if (*sim) {
      SimulationOptions opts;
      opts.observers = observers;
      opts.repetitions = repetitions;
      opts.seed = seed;
      const SimulatedStudy study = simulate_study(dataset, opts);
      write_text_file(out_path, comparison_rows_to_csv(study.comparisons));
      if (!truth_path.empty()) write_text_file(truth_path, jod_rows_to_csv(study.truth));
      std::cout << "wrote " << study.comparisons.size() << " comparisons\n";
    } else if (*scale) {
      int corrupt = 0;
      const auto rows = load_comparisons(input, &corrupt);
      if (corrupt > 0) std::cerr << "skipped " << corrupt << " corrupt log lines\n";
      const auto jods = scale_comparisons(rows, bootstrap, seed);
      write_text_file(out_path, jod_rows_to_csv(jods));
      std::cout << "scaled " << jods.size() << " conditions\n";
    } else if (*ev) {
      const auto jods = jod_rows_from_csv(read_text_file(jod_path));
      if (sparse_ref) {
        if (dataset.empty()) throw Error(ErrorCode::kInvalidArgument, "--sparse-ref needs --dataset");
        SparseReferenceConfig cfg;
        if (!metrics_list.empty()) {
          cfg.metric_ids.clear();
          for (const std::string& m : split_list(metrics_list)) cfg.metric_ids.push_back(metric_from_name(m));
        }
        cfg.reference_level = reference_level;
        cfg.seed = seed;
        cfg.folds_per_test = per_fold;
        cfg.bootstrap = bootstrap;
        if (loss != "auto") cfg.loss = loss_from_name(loss);
        write_text_file(out_path, sparse_reference_to_csv(evaluate_sparse_reference(dataset, jods, cfg)));
      } else {
        if (report_path.empty()) throw Error(ErrorCode::kInvalidArgument, "--report is required");
        EvaluateOptions opts;
        opts.metrics = split_list(metrics_list);
        opts.loss = loss;
        opts.seed = seed;
        opts.scenes_per_fold = per_fold;
        const auto entries =
            evaluate_report(metric_rows_from_csv(read_text_file(report_path)), jods, opts);
        write_text_file(out_path, goodness_to_csv(entries));
        if (!summary_path.empty()) write_text_file(summary_path, goodness_summary_json(entries));
      }
    } else if (*serve) {
      StudyServer study({dataset, log_dir, seed});
      HttpStudyServer http(study, {host, port});
      const int bound = http.bind();
      g_server = &http;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on " << host << ":" << bound << std::endl;
      http.listen();
      g_server = nullptr;
    }
  } catch (const std::exception& e) {
    std::cerr << format_error(e) << "\n";
    return 1;
  }
  return 0;
}
