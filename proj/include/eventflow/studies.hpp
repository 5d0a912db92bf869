#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eventflow/alignment.hpp"
#include "eventflow/core.hpp"
#include "eventflow/jumpflow.hpp"

namespace eventflow::studies {

enum class ConsensusMode { dba, soft_dba };

std::string_view to_string(ConsensusMode m);
ConsensusMode consensus_mode_from_string(std::string_view s);

struct ConsensusOptions {
  ConsensusMode mode = ConsensusMode::dba;
  alignment::BarycenterOptions dba;
  alignment::SoftBarycenterOptions soft;
};

// Barycenter of one anchor's flows across sources.
alignment::Barycenter consensus_flow(const std::vector<jumpflow::EventFlow>& flows,
                                     const ConsensusOptions& opts = {});

struct DeviationRow {
  std::string source_id;
  std::string anchor;  // event name, or the ISO date for random anchors
  Date date;
  double distance = 0.0;  // DTW cost to the anchor's consensus
};

struct DeviationTable {
  std::vector<DeviationRow> rows;
};

// DTW cost from every flow to the consensus, in input order.
std::vector<DeviationRow> deviation_from_consensus(const std::vector<jumpflow::EventFlow>& flows,
                                                   std::span<const double> consensus,
                                                   std::string_view anchor = {});

struct SourceScore {
  std::string source_id;
  double mean_distance = 0.0;
  std::size_t anchors = 0;
};

// Mean deviation per source, sorted by decreasing mean (ties by id).
std::vector<SourceScore> rank_sources(const DeviationTable& table);

struct BaselineParams {
  jumpflow::FlowParams flow{30, {}, 0};
  ConsensusOptions consensus;
};

// Draws n_dates anchors uniformly (with replacement) from the days where every
// corpus can produce a full flow, then records each source's distance to the
// per-date consensus. Rows are ordered by date, then source id. Throws
// DomainError when the corpora share no usable span.
DeviationTable random_date_baseline(const std::vector<ThetaMatrix>& corpora, std::size_t n_dates,
                                    std::uint64_t seed, const BaselineParams& params = {});

// Consensus and deviations per event; sources that miss an event are skipped.
DeviationTable event_deviation(const std::vector<ThetaMatrix>& corpora,
                               const std::vector<EventRecord>& events,
                               const BaselineParams& params = {});

struct DecadeRow {
  std::string source_id;
  int decade = 0;  // e.g. 1960
  std::size_t n = 0;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool degenerate = false;  // single observation: interval collapses to the mean
};

// Per (source, decade) mean with a 95% interval: Student t for n < 30,
// normal approximation otherwise. Sorted by source, then decade.
std::vector<DecadeRow> decade_aggregate(const DeviationTable& table);

// Two-sided 95% interval half-width for a sample (t for n < 30, else normal).
double ci95_half_width(std::span<const double> sample);

struct QueryConfig {
  jumpflow::FlowParams flow;
  std::int64_t stride = 1;
  // Narrow warping keeps the best match on the event date; nullopt is unbanded.
  std::optional<std::size_t> band = 2;
  std::size_t top_n = 0;  // 0 keeps every surviving match
};

struct QueryMatch {
  std::string source_id;
  Date center;
  Date window_start;  // center - flow half width
  double cost = 0.0;
  std::size_t rank = 0;  // 1-based, dense
};

// Extracts a flow every `stride` days, ranks candidates by DTW cost to the
// template (ties by date), then drops any candidate closer than one flow width
// to a cheaper kept match.
std::vector<QueryMatch> query_by_template(const ThetaMatrix& m, std::span<const double> templ,
                                          const QueryConfig& cfg);

}  // namespace eventflow::studies
