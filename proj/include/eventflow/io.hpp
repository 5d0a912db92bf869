#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "eventflow/clustering.hpp"
#include "eventflow/core.hpp"
#include "eventflow/jumpflow.hpp"
#include "eventflow/studies.hpp"

// Delimited-text and JSON persistence for every artifact the CLI reads or writes.
// Numbers are written in shortest round-trip form so re-reading is exact.
namespace eventflow::io {

namespace fs = std::filesystem;

// Tolerance within which an ingested theta row is silently renormalised.
inline constexpr double kRenormaliseTolerance = 1e-6;

std::string format_double(double x);

// Splits one delimited line; double-quoted fields may contain the delimiter
// and "" escapes a quote.
std::vector<std::string> split_line(std::string_view line, char delim = ',');
std::string quote_field(std::string_view field, char delim = ',');

// Header `date,topic_0,...,topic_{K-1}` (comma, tab or semicolon separated).
// Rows off the simplex by at most 1e-6 are renormalised, others rejected;
// rows are sorted by date and duplicate dates rejected. Throws IngestError.
// The source id defaults to the file stem.
ThetaMatrix ingest_theta(const fs::path& path, std::string source_id = {});
void write_theta(const fs::path& path, const ThetaMatrix& m);

// Every *.csv / *.tsv file of a directory, sorted by file name.
std::vector<ThetaMatrix> ingest_theta_dir(const fs::path& dir);

// `name,date` rows with an optional header. An empty file yields an empty
// list and a warning.
std::vector<EventRecord> ingest_events(const fs::path& path, std::vector<std::string>* warnings = nullptr);
void write_events(const fs::path& path, const std::vector<EventRecord>& events);

// `offset,value,support`; absent values are left empty.
void write_curve(const fs::path& path, const jumpflow::JumpEntropyCurve& curve);

// Long format `source,event,date,offset,value,support`.
void write_flows(const fs::path& path, const std::vector<jumpflow::EventFlow>& flows);
std::vector<jumpflow::EventFlow> read_flows(const fs::path& path);
void write_coverage(const fs::path& path, const std::vector<jumpflow::CoverageMiss>& misses);

// Square matrix with an `id` header row and an id column.
void write_distance_matrix(const fs::path& path, const clustering::DistanceMatrix& dm);
clustering::DistanceMatrix read_distance_matrix(const fs::path& path);

// `source,anchor,date,distance`
void write_deviations(const fs::path& path, const studies::DeviationTable& table);
studies::DeviationTable read_deviations(const fs::path& path);
void write_decades(const fs::path& path, const std::vector<studies::DecadeRow>& rows);
std::vector<studies::DecadeRow> read_decades(const fs::path& path);

void write_matches(const fs::path& path, const std::vector<studies::QueryMatch>& matches);

// `offset,value` (or a single value column).
std::vector<double> read_series(const fs::path& path);
void write_series(const fs::path& path, std::span<const double> values,
                  std::span<const std::int64_t> offsets);

// JSON document with labels, grid, merges, archetypes and embedding.
void write_model(const fs::path& path, const clustering::ClusterModel& model);
clustering::ClusterModel read_model(const fs::path& path);

// Hex SHA-256 of a file's bytes.
std::string sha256_file(const fs::path& path);

// Writes through a temporary file and renames, so readers never see partial output.
void write_text(const fs::path& path, std::string_view text);
std::string read_text(const fs::path& path);

}  // namespace eventflow::io
