#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cloudrca/data_model.hpp"
#include "cloudrca/tsdetect.hpp"

namespace cloudrca {

/// "2024-01-01T00:00:00Z" style, UTC only.
std::string format_iso8601(Timestamp ts);
Timestamp parse_iso8601(std::string_view text);

// Metrics: one JSON object per line, {"metric_id", "module_id", "ts", "value"}.
// Records are grouped by metric and sorted by time; a repeated (metric, ts) is rejected.
std::vector<TimeSeries> parse_metrics(std::istream& in);
std::vector<TimeSeries> load_metrics(const std::filesystem::path& path);
void write_metrics(std::ostream& out, const std::vector<TimeSeries>& series);

// Logs: "<ISO8601> <module_id> <message>" per line.
std::vector<LogRecord> parse_logs(std::istream& in);
std::vector<LogRecord> load_logs(const std::filesystem::path& path);
void write_logs(std::ostream& out, const std::vector<LogRecord>& logs);

PlatformTopology parse_topology(const std::string& json_text);
PlatformTopology load_topology(const std::filesystem::path& path);
std::string topology_to_json(const PlatformTopology& topo);

Dataset parse_dataset(const std::string& json_text);
Dataset load_dataset(const std::filesystem::path& path);
std::string dataset_to_json(const Dataset& d);

/// Anomaly reports as a JSON array; statistics are kept per test.
std::vector<AnomalyReport> parse_reports(const std::string& json_text);
std::string reports_to_json(const std::vector<AnomalyReport>& reports);

std::string read_file(const std::filesystem::path& path);
/// Writes atomically enough for re-runs: truncates and rewrites.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace cloudrca
