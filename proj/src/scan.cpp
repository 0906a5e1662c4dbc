#include "pdd/scan.hpp"

#include <atomic>
#include <fstream>
#include <functional>
#include <thread>

namespace pdd {

std::string_view detector_name(DetectorKind d) {
  return d == DetectorKind::rules ? "rules" : "llm";
}

nlohmann::json verdict_to_json(const ColumnVerdict& v) {
  nlohmann::json entry = {
      {"column", v.column_name},
      {"personal", v.is_personal},
      {"detector", v.detector},
  };
  if (v.detector == "llm") {
    entry["evidence"] = v.raw_reply;
  } else if (!v.entity_kinds.empty()) {
    entry["evidence"] = v.entity_kinds;
  }
  return entry;
}

ColumnVerdict verdict_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("column") || !j.contains("personal") ||
      !j["personal"].is_boolean()) {
    throw Error(Errc::malformed_input,
                "prediction entry must carry column and boolean personal");
  }
  ColumnVerdict v;
  v.column_name = j["column"].get<std::string>();
  v.is_personal = j["personal"].get<bool>();
  v.detector = j.value("detector", std::string());
  if (j.contains("evidence")) {
    const auto& e = j["evidence"];
    if (e.is_string()) {
      v.raw_reply = e.get<std::string>();
    } else if (e.is_array()) {
      for (const auto& kind : e) {
        if (kind.is_string()) v.entity_kinds.push_back(kind.get<std::string>());
      }
    }
  }
  return v;
}

namespace {

/// Runs fn(i) for i in [0, count) on a bounded pool; exceptions propagate
/// after all workers join.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> failures(workers);
  const std::size_t n_threads = std::min(workers, count);
  for (std::size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next.fetch_add(1); i < count;
             i = next.fetch_add(1)) {
          fn(i);
        }
      } catch (...) {
        failures[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
}

std::string describe_error(const std::exception& e) { return e.what(); }

}  // namespace

ScanResult scan_dataset(const Dataset& ds, const RunConfig& config,
                        Transport* transport) {
  struct Slot {
    bool has_verdict = false;
    ColumnVerdict verdict;
    bool has_error = false;
    std::string error;
  };
  std::vector<Slot> slots(ds.columns.size());

  if (config.detector == DetectorKind::rules) {
    RuleEngine::Options options;
    options.names_list_path = config.names_list_path;
    options.locations_list_path = config.locations_list_path;
    RuleEngine engine(options);

    if (config.policy.strategy == Strategy::rowwise) {
      // Row-wise needs whole rows; one deterministic pass.
      auto verdicts = engine.classify_dataset(ds, config.policy);
      ScanResult result;
      result.verdicts = std::move(verdicts);
      return result;
    }
    parallel_for(ds.columns.size(), config.workers, [&](std::size_t i) {
      try {
        slots[i].verdict = engine.classify_column(ds.columns[i], config.policy);
        slots[i].has_verdict = true;
      } catch (const std::exception& e) {
        slots[i].has_error = true;
        slots[i].error = describe_error(e);
      }
    });
  } else {
    if (transport == nullptr) {
      throw Error(Errc::config_error, "llm detector requires a transport");
    }
    parallel_for(ds.columns.size(), config.workers, [&](std::size_t i) {
      try {
        LlmVerdict verdict =
            classify_column_llm(ds, ds.columns[i], config.transport,
                                *transport, config.values_per_column);
        slots[i].verdict.column_name = verdict.column_name;
        slots[i].verdict.is_personal = verdict.is_personal;
        slots[i].verdict.detector = "llm";
        slots[i].verdict.raw_reply = verdict.raw_reply;
        slots[i].has_verdict = true;
      } catch (const std::exception& e) {
        slots[i].has_error = true;
        slots[i].error = describe_error(e);
      }
    });
  }

  ScanResult result;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].has_verdict) {
      result.verdicts.push_back(std::move(slots[i].verdict));
    } else if (slots[i].has_error) {
      result.errors.push_back({ds.columns[i].name, slots[i].error});
    }
  }
  if (transport != nullptr) {
    result.requests = transport->request_count();
  }
  return result;
}

namespace {

/// Result-affecting settings only: the worker count and output path are
/// execution details and stay out so reruns compare byte-equal.
nlohmann::json effective_config(const RunConfig& config) {
  nlohmann::json doc = {
      {"detector", std::string(detector_name(config.detector))},
      {"values_per_column", config.values_per_column},
      {"delimiter", std::string(1, config.delimiter)},
  };
  if (config.detector == DetectorKind::rules) {
    doc["min_hits"] = config.policy.min_hits;
    doc["min_confidence"] = config.policy.min_confidence;
    doc["strategy"] = std::string(strategy_name(config.policy.strategy));
    if (!config.names_list_path.empty())
      doc["names_list"] = config.names_list_path;
    if (!config.locations_list_path.empty())
      doc["locations_list"] = config.locations_list_path;
  } else {
    if (!config.mock_path.empty()) {
      doc["mock"] = config.mock_path;
    } else {
      doc["endpoint"] = config.transport.endpoint_url;
      doc["api_key_env"] = config.transport.api_key_env;  // name, never value
    }
    doc["model"] = config.transport.model_id;
    doc["temperature"] = config.transport.temperature;
    if (config.transport.seed) doc["seed"] = *config.transport.seed;
    doc["max_retries"] = config.transport.max_retries;
  }
  return doc;
}

}  // namespace

std::string predictions_to_json(const Dataset& ds, const RunConfig& config,
                                const ScanResult& result) {
  nlohmann::json entries = nlohmann::json::array();
  std::size_t vi = 0;
  std::size_t ei = 0;
  for (const Column& col : ds.columns) {
    if (vi < result.verdicts.size() &&
        result.verdicts[vi].column_name == col.name) {
      entries.push_back(verdict_to_json(result.verdicts[vi++]));
    } else if (ei < result.errors.size() &&
               result.errors[ei].column == col.name) {
      entries.push_back({
          {"column", col.name},
          {"detector", std::string(detector_name(config.detector))},
          {"error", result.errors[ei++].message},
      });
    }
  }

  nlohmann::json doc = {
      {"dataset", ds.title},
      {"detector", std::string(detector_name(config.detector))},
      {"config", effective_config(config)},
      {"predictions", std::move(entries)},
  };
  return doc.dump(2) + "\n";
}

PredictionsFile load_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::unreadable_file, "cannot open '" + path + "'");
  }
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) {
    throw Error(Errc::malformed_input, "'" + path + "' is not valid JSON");
  }

  PredictionsFile file;
  const nlohmann::json* entries = nullptr;
  if (doc.is_array()) {
    entries = &doc;
  } else if (doc.is_object() && doc.contains("predictions") &&
             doc["predictions"].is_array()) {
    entries = &doc["predictions"];
    file.dataset = doc.value("dataset", std::string());
    file.detector = doc.value("detector", std::string());
    if (doc.contains("config")) file.config = doc["config"];
  } else {
    throw Error(Errc::malformed_input,
                "'" + path +
                    "' must be a predictions array or an object with a "
                    "'predictions' array");
  }

  for (const auto& entry : *entries) {
    if (entry.is_object() && entry.contains("error")) {
      file.errors.push_back({entry.value("column", std::string()),
                             entry["error"].get<std::string>()});
      continue;
    }
    file.predictions.push_back(verdict_from_json(entry));
    if (file.detector.empty()) {
      file.detector = file.predictions.back().detector;
    }
  }
  return file;
}

}  // namespace pdd
