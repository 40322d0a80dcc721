#pragma once

#include <string>

#include <json.hpp>

#include "sbdag/ci.hpp"
#include "sbdag/dag_search.hpp"
#include "sbdag/diagnostics.hpp"
#include "sbdag/equivalence.hpp"
#include "sbdag/sim.hpp"
#include "sbdag/types.hpp"

namespace sbdag {

using Json = nlohmann::ordered_json;

// CSV, row major, optional single header row (detected when the first row has
// a non-numeric token). Writes use 17 significant digits.
Matrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix& m);

// Serialization with doubles at 17 significant digits, so identical inputs
// produce byte-identical files.
std::string dump_json(const Json& j, int indent = 2);
void write_json(const std::string& path, const Json& j);

Json dag_to_json(const WeightedDag& b, const DiagonalVariances* omega = nullptr,
                 const Permutation* pi = nullptr);
Json fit_result_to_json(const FitResult& fit);
Json class_summary_to_json(const EquivalenceClassSummary& summary);
Json min_trace_to_json(const MinTraceResult& mt);
Json ci_relation_to_json(const CiRelation& rel);
std::string ci_set_to_jsonl(const CiSet& set);
Json experiment_report_to_json(const ExperimentReport& report);
std::string experiment_report_to_csv(const ExperimentReport& report);
Json condition_report_to_json(const ConditionReport& rep);
Json penalty_to_json(const PenaltySpec& spec);

// config file: one "key = value..." pair per line, keys match SimConfig fields
SimConfig parse_sim_config(const std::string& text);

// Minimal JSON-Schema subset checker (type/properties/required/items/enum),
// enough to validate the shipped schemas; returns an empty string on success
// and the first failure description otherwise.
std::string validate_against_schema(const Json& value, const Json& schema);

}  // namespace sbdag
