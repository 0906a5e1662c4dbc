// pdd — personal data detection scanner and benchmark toolkit.
//
// Subcommands:
//   scan    classify every column of a dataset (rules or llm detector)
//   eval    score a predictions file against a labels file
//   prompt  print the exact conversation scan would send for one column
//   report  render a cross-detector, cross-dataset comparison grid
//
// Exit codes: 0 success, 1 usage/config error, 2 partial scan failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "pdd/corpus.hpp"
#include "pdd/eval.hpp"
#include "pdd/llm.hpp"
#include "pdd/rules.hpp"
#include "pdd/scan.hpp"

namespace {

using pdd::Errc;
using pdd::Error;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitPartial = 2;

// Config-file sections mirror the modules: corpus, scan, rules, llm.
// Precedence is flags > config file > defaults.
struct ConfigFile {
  nlohmann::json doc = nlohmann::json::object();

  static ConfigFile load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw Error(Errc::config_error, "cannot open config '" + path + "'");
    }
    ConfigFile cf;
    cf.doc = nlohmann::json::parse(in, nullptr, false);
    if (cf.doc.is_discarded() || !cf.doc.is_object()) {
      throw Error(Errc::config_error,
                  "config '" + path + "' must be a JSON object");
    }
    return cf;
  }

  template <typename T>
  std::optional<T> get(const char* section, const char* key) const {
    auto s = doc.find(section);
    if (s == doc.end() || !s->is_object()) return std::nullopt;
    auto v = s->find(key);
    if (v == s->end()) return std::nullopt;
    try {
      return v->get<T>();
    } catch (const nlohmann::json::exception&) {
      throw Error(Errc::config_error, std::string("config value ") + section +
                                          "." + key + " has the wrong type");
    }
  }
};

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(Errc::unreadable_file, "cannot write '" + path + "'");
  }
  out << content;
}

std::string default_meta_path(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  p.replace_extension(".meta.json");
  return p.string();
}

struct ScanArgs {
  std::string csv_path, meta_path, out_path, config_path;
  std::string detector = "rules";
  std::string strategy, mock_path, endpoint, model;
  std::size_t values_per_column = 0;
  std::size_t min_hits = 0;
  double min_conf = -1.0;
  std::size_t workers = 0;
  std::string delimiter;
  std::string names_list, locations_list;
  std::optional<long> seed;
  double temperature = -1.0;
};

pdd::RunConfig resolve_scan_config(const ScanArgs& args, const CLI::App* sub) {
  ConfigFile cf;
  if (!args.config_path.empty()) cf = ConfigFile::load(args.config_path);

  pdd::RunConfig run;
  auto used = [&](const char* flag) { return sub->count(flag) > 0; };

  // corpus
  std::string delim =
      used("--delimiter") ? args.delimiter
                          : cf.get<std::string>("corpus", "delimiter")
                                .value_or(",");
  if (delim.size() != 1) {
    throw Error(Errc::config_error, "delimiter must be a single character");
  }
  run.delimiter = delim[0];

  // scan
  run.values_per_column =
      used("--values-per-column")
          ? args.values_per_column
          : cf.get<std::size_t>("scan", "values_per_column").value_or(10);
  run.workers = used("--workers")
                    ? args.workers
                    : cf.get<std::size_t>("scan", "workers").value_or(1);
  if (run.values_per_column < 1) {
    throw Error(Errc::config_error, "values-per-column must be >= 1");
  }
  if (run.workers < 1) {
    throw Error(Errc::config_error, "workers must be >= 1");
  }

  // rules
  run.policy.min_hits =
      used("--min-hits") ? args.min_hits
                         : cf.get<std::size_t>("rules", "min_hits").value_or(3);
  run.policy.min_confidence =
      used("--min-conf")
          ? args.min_conf
          : cf.get<double>("rules", "min_confidence").value_or(0.4);
  std::string strategy =
      used("--strategy")
          ? args.strategy
          : cf.get<std::string>("rules", "strategy").value_or("columnwise");
  run.policy.strategy = pdd::strategy_from_name(strategy);
  run.names_list_path =
      used("--names-list")
          ? args.names_list
          : cf.get<std::string>("rules", "names_list").value_or("");
  run.locations_list_path =
      used("--locations-list")
          ? args.locations_list
          : cf.get<std::string>("rules", "locations_list").value_or("");

  // llm
  run.transport.endpoint_url =
      used("--endpoint") ? args.endpoint
                         : cf.get<std::string>("llm", "endpoint").value_or("");
  run.transport.model_id =
      used("--model") ? args.model
                      : cf.get<std::string>("llm", "model").value_or("gpt-4o");
  run.transport.temperature =
      used("--temperature")
          ? args.temperature
          : cf.get<double>("llm", "temperature").value_or(0.0);
  if (used("--seed")) {
    run.transport.seed = args.seed;
  } else if (auto seed = cf.get<long>("llm", "seed")) {
    run.transport.seed = *seed;
  }
  run.transport.api_key_env =
      cf.get<std::string>("llm", "api_key_env").value_or("PDD_API_KEY");
  if (auto timeout = cf.get<long>("llm", "timeout_ms")) {
    run.transport.timeout = std::chrono::milliseconds(*timeout);
  }
  run.transport.max_retries =
      cf.get<std::size_t>("llm", "max_retries").value_or(2);
  run.transport.max_inflight =
      cf.get<std::size_t>("llm", "max_inflight").value_or(4);
  run.mock_path = used("--mock")
                      ? args.mock_path
                      : cf.get<std::string>("llm", "mock").value_or("");

  run.detector = args.detector == "llm" ? pdd::DetectorKind::llm
                                        : pdd::DetectorKind::rules;
  run.dataset_path = args.csv_path;
  run.meta_path =
      args.meta_path.empty() ? default_meta_path(args.csv_path) : args.meta_path;
  run.out_path = args.out_path;

  if (run.detector == pdd::DetectorKind::llm) {
    if (run.mock_path.empty() && run.transport.endpoint_url.empty()) {
      throw Error(Errc::config_error,
                  "llm detector requires --endpoint or --mock");
    }
    if (!run.mock_path.empty() && !run.transport.endpoint_url.empty()) {
      throw Error(Errc::config_error,
                  "--endpoint and --mock are mutually exclusive");
    }
  }
  return run;
}

int cmd_scan(const ScanArgs& args, const CLI::App* sub) {
  pdd::RunConfig run = resolve_scan_config(args, sub);

  if (!std::filesystem::exists(run.meta_path)) {
    throw Error(Errc::config_error,
                "metadata sidecar '" + run.meta_path +
                    "' not found (dataset context is required)");
  }
  pdd::Dataset ds =
      pdd::load_dataset(run.dataset_path, run.meta_path, run.delimiter);

  std::unique_ptr<pdd::Transport> transport;
  if (run.detector == pdd::DetectorKind::llm) {
    if (!run.mock_path.empty()) {
      transport = std::make_unique<pdd::MockTransport>(
          pdd::MockTransport::from_file(run.mock_path));
    } else {
      transport = std::make_unique<pdd::HttpTransport>(run.transport);
    }
  }

  pdd::ScanResult result = pdd::scan_dataset(ds, run, transport.get());
  std::string doc = pdd::predictions_to_json(ds, run, result);
  if (run.out_path.empty()) {
    std::cout << doc;
  } else {
    write_text_file(run.out_path, doc);
  }

  std::cerr << "scanned " << ds.columns.size() << " columns: "
            << result.verdicts.size() << " classified, "
            << result.errors.size() << " errors";
  if (run.detector == pdd::DetectorKind::llm) {
    std::cerr << ", " << result.requests << " requests";
  }
  std::cerr << "\n";
  for (const auto& err : result.errors) {
    std::cerr << "  column '" << err.column << "': " << err.message << "\n";
  }
  return result.errors.empty() ? kExitOk : kExitPartial;
}

int cmd_eval(const std::string& preds_path, const std::string& labels_path,
             const std::string& out_path) {
  pdd::PredictionsFile preds = pdd::load_predictions(preds_path);

  // Labels may cover more columns than were predicted; confusion() raises
  // MissingLabel for any predicted column the file lacks.
  pdd::AnnotationSet truth = pdd::load_labels(labels_path);

  pdd::ConfusionMatrix cm = pdd::confusion(preds.predictions, truth);
  std::string dataset_id = preds.dataset.empty()
                               ? std::filesystem::path(preds_path).stem().string()
                               : preds.dataset;
  pdd::MetricsReport report = pdd::MetricsReport::from_confusion(
      cm, preds.detector.empty() ? "unknown" : preds.detector, dataset_id,
      preds.errors.size());

  nlohmann::json doc = pdd::metrics_to_json(report);
  if (!preds.config.is_null()) doc["config"] = preds.config;
  std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text_file(out_path, text);
  }

  std::printf("macro_f1           %.3f\n", report.macro_f1);
  std::printf("micro_f1           %.3f\n", report.micro_f1);
  std::printf("balanced_accuracy  %.3f\n", report.balanced_accuracy);
  if (report.n_errors > 0) {
    std::printf("errored_columns    %zu (excluded)\n", report.n_errors);
  }
  return kExitOk;
}

int cmd_prompt(const std::string& csv_path, const std::string& meta_path,
               const std::string& column, std::size_t values_per_column,
               const std::string& delimiter) {
  if (delimiter.size() != 1) {
    throw Error(Errc::config_error, "delimiter must be a single character");
  }
  std::string meta =
      meta_path.empty() ? default_meta_path(csv_path) : meta_path;
  pdd::Dataset ds = pdd::load_dataset(csv_path, meta, delimiter[0]);
  const pdd::Column* col = ds.find_column(column);
  if (col == nullptr) {
    throw Error(Errc::column_not_in_dataset, "'" + column + "'");
  }
  pdd::ValueSample sample = pdd::sample_top_k(*col, values_per_column);
  pdd::Conversation conversation =
      pdd::assemble_conversation(pdd::build_prompt_bundle(ds, *col, sample));
  std::cout << pdd::dump_conversation(conversation);
  return kExitOk;
}

int cmd_report(const std::vector<std::string>& metrics_paths,
               const std::string& format) {
  std::vector<pdd::MetricsReport> reports;
  reports.reserve(metrics_paths.size());
  for (const auto& path : metrics_paths) {
    reports.push_back(pdd::load_metrics(path));
  }
  auto fmt = format == "json" ? pdd::ReportFormat::json
                              : pdd::ReportFormat::markdown;
  std::cout << pdd::render_report(reports, fmt);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"personal data detection scanner and benchmark toolkit"};
  app.require_subcommand(1);

  // scan
  ScanArgs scan_args;
  auto* scan = app.add_subcommand("scan", "classify every column of a dataset");
  scan->add_option("data", scan_args.csv_path, "delimited dataset file")
      ->required();
  scan->add_option("--meta", scan_args.meta_path,
                   "metadata sidecar (default: <data>.meta.json)");
  scan->add_option("--detector", scan_args.detector, "rules|llm")
      ->check(CLI::IsMember({"rules", "llm"}));
  scan->add_option("--values-per-column", scan_args.values_per_column,
                   "distinct values sampled per column (default 10)");
  scan->add_option("--min-hits", scan_args.min_hits,
                   "minimum hits per entity kind (default 3)");
  scan->add_option("--min-conf", scan_args.min_conf,
                   "minimum hit confidence (default 0.4)");
  scan->add_option("--strategy", scan_args.strategy, "columnwise|rowwise")
      ->check(CLI::IsMember({"columnwise", "rowwise"}));
  scan->add_option("--endpoint", scan_args.endpoint, "chat completion URL");
  scan->add_option("--model", scan_args.model, "model id (default gpt-4o)");
  scan->add_option("--temperature", scan_args.temperature,
                   "sampling temperature (default 0.0)");
  scan->add_option("--seed", scan_args.seed, "decoding seed passthrough");
  scan->add_option("--mock", scan_args.mock_path,
                   "mock script <name>.mock.json instead of an endpoint");
  scan->add_option("--workers", scan_args.workers,
                   "concurrent column workers (default 1)");
  scan->add_option("--delimiter", scan_args.delimiter,
                   "field delimiter (default ,)");
  scan->add_option("--names-list", scan_args.names_list,
                   "given-name word list override");
  scan->add_option("--locations-list", scan_args.locations_list,
                   "location word list override");
  scan->add_option("--config", scan_args.config_path, "JSON config file");
  scan->add_option("--out", scan_args.out_path,
                   "predictions output path (default stdout)");

  // eval
  std::string eval_preds, eval_labels, eval_out;
  auto* eval = app.add_subcommand("eval", "score predictions against labels");
  eval->add_option("--preds", eval_preds, "predictions file")->required();
  eval->add_option("--labels", eval_labels, "labels file")->required();
  eval->add_option("--out", eval_out, "metrics output path (default stdout)");

  // prompt
  std::string prompt_csv, prompt_meta, prompt_column, prompt_delim = ",";
  std::size_t prompt_values = 10;
  auto* prompt = app.add_subcommand(
      "prompt", "print the conversation scan would send for one column");
  prompt->add_option("data", prompt_csv, "delimited dataset file")->required();
  prompt->add_option("--meta", prompt_meta,
                     "metadata sidecar (default: <data>.meta.json)");
  prompt->add_option("--column", prompt_column, "column to classify")
      ->required();
  prompt->add_option("--values-per-column", prompt_values,
                     "distinct values sampled (default 10)");
  prompt->add_option("--delimiter", prompt_delim,
                     "field delimiter (default ,)");

  // report
  std::vector<std::string> report_paths;
  std::string report_format = "markdown";
  auto* report = app.add_subcommand("report", "render a comparison grid");
  report->add_option("metrics", report_paths, "metrics files")->required();
  report->add_option("--format", report_format, "markdown|json")
      ->check(CLI::IsMember({"markdown", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*scan) return cmd_scan(scan_args, scan);
    if (*eval) return cmd_eval(eval_preds, eval_labels, eval_out);
    if (*prompt) {
      return cmd_prompt(prompt_csv, prompt_meta, prompt_column, prompt_values,
                        prompt_delim);
    }
    if (*report) return cmd_report(report_paths, report_format);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
