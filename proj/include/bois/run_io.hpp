#pragma once

#include <filesystem>
#include <string>

#include "bois/orchestrator.hpp"

namespace bois {

/// Deterministic JSON encoding of a RunResult (schema "bois-run-1"). Two
/// runs with equal config and seed serialise to identical bytes.
std::string run_result_to_json(const RunResult& result);

/// Parses a run document written by run_result_to_json. Only the fields
/// needed for reporting are restored.
RunResult run_result_from_json_file(const std::filesystem::path& path);

/// Flat trace table: geometry_id,energy_eval_index,best_seen,rel_deviation.
std::string traces_to_csv(const RunResult& result);

void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace bois
