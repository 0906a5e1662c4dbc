#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace pdd {

/// One column's binary prediction plus supporting evidence: surviving entity
/// kinds for the rule detector, the raw model reply for the LLM detector.
struct ColumnVerdict {
  std::string column_name;
  bool is_personal = false;
  std::string detector;                    // "rules" | "llm"
  std::vector<std::string> entity_kinds;   // rules evidence
  std::string raw_reply;                   // llm evidence
};

nlohmann::json verdict_to_json(const ColumnVerdict& v);
ColumnVerdict verdict_from_json(const nlohmann::json& j);

}  // namespace pdd
