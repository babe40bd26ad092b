#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "locasso/problem.hpp"
#include "locasso/simulation.hpp"

namespace locasso {

/// CSV datasets: columns x1..xd then y, '.' decimal separator, optional
/// header row. Malformed rows are rejected with their row number; nothing
/// is coerced.
Dataset read_dataset_csv(const std::filesystem::path& path);
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data,
                       bool header = true);

/// Binary column format for large n: magic "LOCASSO1", then u64 n, u64 d,
/// then the x columns and the y column as little-endian doubles.
Dataset read_dataset_binary(const std::filesystem::path& path);
void write_dataset_binary(const std::filesystem::path& path, const Dataset& data);

/// Sniff the magic bytes and dispatch to the binary or CSV reader.
Dataset read_dataset(const std::filesystem::path& path);

/// Canonical JSON schema for experiment configs and constants files.
/// Schema violations throw SchemaError naming the offending key and the
/// expected type.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

ProblemConstants parse_constants(const nlohmann::json& j);
nlohmann::json constants_to_json(const ProblemConstants& c);

nlohmann::json summary_to_json(const ExperimentSummary& summary);
nlohmann::json compliance_to_json(const ComplianceReport& report);

/// One CSV row per replicate; fixed column set per experiment kind;
/// doubles printed with round-trip precision so reruns are byte-identical.
std::string replicates_csv(const ExperimentSummary& summary);

/// Round-trip decimal formatting used by every CSV writer.
std::string format_double(double v);

}  // namespace locasso
