#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eventflow/core.hpp"

namespace eventflow::jumpflow {

// Parameters of a Jump Entropy curve. Offsets are signed day counts: negative
// jumps compare the focal window with the past, positive ones with the future.
struct JumpConfig {
  std::int64_t half_width = 7;
  std::int64_t jump_min = -1500;
  std::int64_t jump_max = 1500;
  std::int64_t jump_step = 15;
  // Rolling-mean length applied to event flows before z-normalisation.
  std::optional<std::size_t> smoothing;

  // Throws DomainError when the configuration is unusable.
  void validate() const;

  // Every multiple of jump_step inside [jump_min, jump_max], ascending.
  std::vector<std::int64_t> grid() const;
};

struct JumpEntropyCurve {
  std::string source_id;
  Date focal;
  std::vector<std::int64_t> offsets;
  // Mean JSD in bits; nullopt where the jumped window was unusable.
  std::vector<std::optional<double>> values;
  // Number of row pairs averaged per offset (0 when absent).
  std::vector<std::size_t> support;

  std::size_t size() const noexcept { return offsets.size(); }
  std::size_t supported_count() const;
};

// Mean JSD between the rows around `focal` and the rows around `focal + J`
// for every J of cfg.grid(). Both windows have half-width cfg.half_width; rows
// are paired by rank after sorting by date and the longer window is truncated.
// A jump is unsupported when its window is not fully inside the corpus span or
// holds no rows.
//
// Throws DomainError when focal lies outside the corpus span and
// EmptyCurveError when no jump is supported.
JumpEntropyCurve jump_entropy_curve(const ThetaMatrix& m, Date focal, const JumpConfig& cfg);

struct EventFlow {
  EventRecord event;
  std::string source_id;
  std::vector<std::int64_t> offsets;  // -W..W
  std::vector<double> values;         // z-normalised
  std::vector<std::size_t> support;   // raw support (0 = interpolated)

  std::size_t size() const noexcept { return values.size(); }
  Series series() const { return Series(values, offsets); }
};

// Event signature: the curve on the day grid -W..W around the event date.
// Offset 0 compares a window with itself and is replaced, like any interior
// gap, by linear interpolation. Optional smoothing is applied before
// z-normalisation.
//
// Throws CoverageError when the event is outside the corpus or the flow has
// unsupported offsets at either end.
EventFlow event_flow(const ThetaMatrix& m, const EventRecord& e, std::int64_t flow_half_width,
                     const JumpConfig& cfg);

struct FlowParams {
  std::int64_t flow_half_width = 28;
  JumpConfig jump;
  std::size_t workers = 0;
};

struct CoverageMiss {
  std::string source_id;
  EventRecord event;
  std::string reason;
};

struct FlowTable {
  std::vector<EventFlow> flows;
  std::vector<CoverageMiss> misses;
};

// One flow per covered (source, event) pair, ordered by source id, then event
// date, then event name. Uncovered pairs are listed in `misses`.
FlowTable batch_event_flows(const std::vector<ThetaMatrix>& corpora,
                            const std::vector<EventRecord>& events, const FlowParams& params);

}  // namespace eventflow::jumpflow
