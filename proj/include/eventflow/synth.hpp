#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "eventflow/core.hpp"
#include "eventflow/jumpflow.hpp"

namespace eventflow::synth {

enum class Shape { anticipation_dip, sudden_onset_plateau, symmetric_dip, noise_only, release_after };

std::string_view to_string(Shape s);
Shape shape_from_string(std::string_view s);

// Time profile of a planted event, in [0, 1], as a function of the day offset
// t from the event date:
//   anticipation_dip      linear ramp over onset_lead days, then exp(-t / recovery)
//   sudden_onset_plateau  0 before the event, 1 for recovery days from the event
//   symmetric_dip         triangle 1 - |t| / (onset_lead + 1)
//   noise_only            0
//   release_after         1 from -onset_lead to the event, then a linear decline
//                         to 0 over recovery days
struct ArchetypeSpec {
  Shape shape = Shape::noise_only;
  std::int64_t onset_lead = 0;
  std::int64_t recovery = 0;
  double depth = 0.0;  // effect size in standard deviations of a background topic

  void validate() const;
  double profile(std::int64_t t) const;
};

struct PlannedEvent {
  std::string name;
  std::int64_t day = 0;  // offset from SynthPlan::start
  ArchetypeSpec spec;
};

struct SynthPlan {
  std::string source_id = "synthetic";
  std::size_t n_topics = 20;
  std::size_t n_days = 365;
  Date start = Date::from_ymd(1960, 1, 1);
  double concentration = 0.1;  // symmetric Dirichlet parameter per topic
  std::vector<PlannedEvent> events;
  std::uint64_t seed = 1;

  void validate() const;
  // Index of the topic that planted events push mass towards.
  std::size_t event_topic() const noexcept { return n_topics - 1; }
  // Mixing weight reached at profile 1 for a given depth.
  double amplitude(double depth) const;
};

// Background rows i.i.d. Dirichlet(concentration); around each event the rows
// are mixed toward the event topic with weight amplitude(depth) * profile(t).
// Overlapping events add their weights, capped at 1.
ThetaMatrix generate(const SynthPlan& plan);

// One message per pair of events whose effective windows (profile above 1e-3)
// share a day. Overlapping weights add and are capped at 1.
std::vector<std::string> overlap_warnings(const SynthPlan& plan);

// Several sources sharing one background stream and the same events. Each
// source's background is (1 - source_noise) * shared + source_noise * own,
// with the own stream drawn from a seed derived from (plan.seed, source).
struct SourceSet {
  std::size_t n_sources = 9;
  double source_noise = 0.5;
  std::string id_prefix = "S";
};
std::vector<ThetaMatrix> generate_sources(const SynthPlan& plan, const SourceSet& sources);

// Deterministic seed for the i-th child stream of a parent seed (SplitMix64).
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t i);

// The four shapes planted by the standard benchmark, in label order.
std::vector<ArchetypeSpec> benchmark_archetypes(double depth = 3.0);

struct Benchmark {
  std::vector<ThetaMatrix> corpora;
  std::vector<EventRecord> events;
  std::vector<std::size_t> labels;  // archetype index per event
  std::vector<ArchetypeSpec> archetypes;
  SynthPlan plan;
};

// 9 sources, 60 events every 120 days, 4 archetype groups of 15 events,
// sparse background (concentration 0.02) and half of each source's background
// shared. Event dates and labels do not depend on the seed; rows do.
Benchmark standard_benchmark(std::uint64_t seed, double depth = 3.0);

// Expected flow of one archetype: the pointwise mean of event flows extracted
// from `replicates` independent single-event corpora, z-normalised.
std::vector<double> reference_flow(const ArchetypeSpec& spec, const jumpflow::FlowParams& params,
                                   std::size_t replicates, std::uint64_t seed,
                                   std::size_t n_topics = 20, double concentration = 0.02);

}  // namespace eventflow::synth
