#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include <json.hpp>

#include "cfx/candidate.hpp"
#include "cfx/dataset.hpp"
#include "cfx/metrics.hpp"

namespace cfx {

// A query and its candidate counterfactuals, as stored in a JSON-lines file:
// one {"kind": "query", ...} record followed by {"kind": "candidate", ...}
// records. Candidates may carry stored criteria; replaying such a file
// needs neither data nor model.
struct CandidateSet {
  SchemaConfig schema;  // classes filled
  Instance x;
  int predicted = -1;
  int desired = -1;
  std::vector<Candidate> candidates;  // annotated
  std::vector<std::optional<CriteriaVector>> criteria;
};

nlohmann::json schema_config_to_json(const SchemaConfig& cfg, const RangeTable* ranges = nullptr);
nlohmann::json instance_to_json(const Instance& x, const FeatureSchema& schema);
// Every feature must be present; unknown names are rejected.
Instance instance_from_json(const nlohmann::json& j, const FeatureSchema& schema);

// Throws LoadError with the offending line number on malformed input.
CandidateSet read_candidates_jsonl(std::istream& in);
CandidateSet read_candidates_jsonl(const std::filesystem::path& path);

// `ranges` (when given) are declared in the embedded schema so HEOM can be
// recomputed from the file alone.
void write_candidates_jsonl(std::ostream& out, const CandidateSet& set,
                            const RangeTable* ranges = nullptr);

}  // namespace cfx
