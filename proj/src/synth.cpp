#include "eventflow/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "eventflow/error.hpp"

namespace eventflow::synth {

namespace {

constexpr std::size_t kBenchmarkSources = 9;
constexpr std::size_t kBenchmarkEvents = 60;
constexpr std::int64_t kBenchmarkSpacing = 120;
constexpr double kBenchmarkConcentration = 0.02;

std::vector<double> dirichlet_rows(std::size_t n_rows, std::size_t k, double alpha,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> rows(n_rows * k);
  for (std::size_t r = 0; r < n_rows; ++r) {
    double* row = rows.data() + r * k;
    double sum = 0.0;
    while (sum <= 0.0) {
      sum = 0.0;
      for (std::size_t i = 0; i < k; ++i) sum += row[i] = gamma(rng);
    }
    for (std::size_t i = 0; i < k; ++i) row[i] /= sum;
  }
  return rows;
}

// Mixes planted events into background rows in place and renormalises.
void apply_events(const SynthPlan& plan, std::vector<double>& rows) {
  const std::size_t k = plan.n_topics;
  const std::size_t e = plan.event_topic();
  for (std::size_t d = 0; d < plan.n_days; ++d) {
    double w = 0.0;
    for (const auto& ev : plan.events) {
      w += plan.amplitude(ev.spec.depth) * ev.spec.profile(static_cast<std::int64_t>(d) - ev.day);
    }
    w = std::min(w, 1.0);
    double* row = rows.data() + d * k;
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      row[i] = (1.0 - w) * row[i] + (i == e ? w : 0.0);
      sum += row[i];
    }
    for (std::size_t i = 0; i < k; ++i) row[i] /= sum;
  }
}

std::vector<Date> day_range(Date start, std::size_t n) {
  std::vector<Date> dates(n);
  for (std::size_t i = 0; i < n; ++i) dates[i] = start + static_cast<std::int64_t>(i);
  return dates;
}

}  // namespace

std::string_view to_string(Shape s) {
  switch (s) {
    case Shape::anticipation_dip:
      return "anticipation_dip";
    case Shape::sudden_onset_plateau:
      return "sudden_onset_plateau";
    case Shape::symmetric_dip:
      return "symmetric_dip";
    case Shape::noise_only:
      return "noise_only";
    case Shape::release_after:
      return "release_after";
  }
  return "noise_only";
}

Shape shape_from_string(std::string_view s) {
  for (Shape shape : {Shape::anticipation_dip, Shape::sudden_onset_plateau, Shape::symmetric_dip,
                      Shape::noise_only, Shape::release_after}) {
    if (to_string(shape) == s) return shape;
  }
  throw DomainError("unknown archetype shape '" + std::string(s) + "'");
}

void ArchetypeSpec::validate() const {
  if (!(depth >= 0.0)) throw DomainError("archetype depth must be >= 0");
  if (onset_lead < 0 || recovery < 0) throw DomainError("archetype lead/recovery must be >= 0");
}

double ArchetypeSpec::profile(std::int64_t t) const {
  const auto td = static_cast<double>(t);
  switch (shape) {
    case Shape::noise_only:
      return 0.0;
    case Shape::anticipation_dip:
      if (t <= 0) {
        if (t < -onset_lead) return 0.0;
        return onset_lead == 0 ? 1.0 : (td + static_cast<double>(onset_lead)) / static_cast<double>(onset_lead);
      }
      return recovery == 0 ? 0.0 : std::exp(-td / static_cast<double>(recovery));
    case Shape::sudden_onset_plateau:
      return t >= 0 && t < recovery ? 1.0 : 0.0;
    case Shape::symmetric_dip:
      return std::max(0.0, 1.0 - std::abs(td) / static_cast<double>(onset_lead + 1));
    case Shape::release_after:
      if (t <= 0) return t >= -onset_lead ? 1.0 : 0.0;
      if (t >= recovery) return 0.0;
      return 1.0 - td / static_cast<double>(recovery);
  }
  return 0.0;
}

void SynthPlan::validate() const {
  if (n_topics < 2) throw DomainError("synth plan: n_topics must be >= 2");
  if (n_days < 1) throw DomainError("synth plan: n_days must be >= 1");
  if (!(concentration > 0.0)) throw DomainError("synth plan: concentration must be > 0");
  for (const auto& ev : events) {
    ev.spec.validate();
    if (ev.day < 0 || ev.day >= static_cast<std::int64_t>(n_days)) {
      throw DomainError("synth plan: event '" + ev.name + "' outside [0, n_days)");
    }
  }
}

double SynthPlan::amplitude(double depth) const {
  // Standard deviation of one coordinate of a symmetric Dirichlet draw.
  const double k = static_cast<double>(n_topics);
  const double p = 1.0 / k;
  const double sd = std::sqrt(p * (1.0 - p) / (k * concentration + 1.0));
  return std::clamp(depth * sd / (1.0 - p), 0.0, 1.0);
}

ThetaMatrix generate(const SynthPlan& plan) {
  plan.validate();
  auto rows = dirichlet_rows(plan.n_days, plan.n_topics, plan.concentration, plan.seed);
  apply_events(plan, rows);
  return ThetaMatrix(plan.source_id, day_range(plan.start, plan.n_days), std::move(rows),
                     plan.n_topics);
}

std::vector<std::string> overlap_warnings(const SynthPlan& plan) {
  constexpr double kEffective = 1e-3;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < plan.events.size(); ++i) {
    for (std::size_t j = i + 1; j < plan.events.size(); ++j) {
      const auto& a = plan.events[i];
      const auto& b = plan.events[j];
      for (std::size_t d = 0; d < plan.n_days; ++d) {
        const auto day = static_cast<std::int64_t>(d);
        if (a.spec.profile(day - a.day) > kEffective && b.spec.profile(day - b.day) > kEffective) {
          out.push_back("events '" + a.name + "' and '" + b.name + "' overlap from day " + std::to_string(d));
          break;
        }
      }
    }
  }
  return out;
}

std::vector<ThetaMatrix> generate_sources(const SynthPlan& plan, const SourceSet& sources) {
  plan.validate();
  if (sources.source_noise < 0.0 || sources.source_noise > 1.0) {
    throw DomainError("synth: source_noise must be in [0, 1]");
  }
  const auto shared = dirichlet_rows(plan.n_days, plan.n_topics, plan.concentration, plan.seed);
  std::vector<ThetaMatrix> out;
  for (std::size_t s = 0; s < sources.n_sources; ++s) {
    auto own = dirichlet_rows(plan.n_days, plan.n_topics, plan.concentration,
                              derive_seed(plan.seed, s + 1));
    for (std::size_t i = 0; i < own.size(); ++i) {
      own[i] = (1.0 - sources.source_noise) * shared[i] + sources.source_noise * own[i];
    }
    apply_events(plan, own);
    char id[16];
    std::snprintf(id, sizeof id, "%02zu", s + 1);
    out.emplace_back(sources.id_prefix + id, day_range(plan.start, plan.n_days), std::move(own),
                     plan.n_topics);
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t i) {
  std::uint64_t z = parent + (i + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<ArchetypeSpec> benchmark_archetypes(double depth) {
  return {
      {Shape::anticipation_dip, 28, 14, depth},
      {Shape::sudden_onset_plateau, 0, 60, depth},
      {Shape::symmetric_dip, 3, 3, depth},
      {Shape::release_after, 60, 0, depth},
  };
}

Benchmark standard_benchmark(std::uint64_t seed, double depth) {
  Benchmark b;
  b.archetypes = benchmark_archetypes(depth);
  b.plan.source_id = "benchmark";
  b.plan.n_days = static_cast<std::size_t>(kBenchmarkSpacing * (kBenchmarkEvents + 1));
  b.plan.seed = seed;
  b.plan.concentration = kBenchmarkConcentration;
  for (std::size_t i = 0; i < kBenchmarkEvents; ++i) {
    const std::size_t label = i % b.archetypes.size();
    PlannedEvent ev;
    ev.name = "event_" + std::to_string(i + 1) + "_" + std::string(to_string(b.archetypes[label].shape));
    ev.day = kBenchmarkSpacing * static_cast<std::int64_t>(i + 1);
    ev.spec = b.archetypes[label];
    b.plan.events.push_back(ev);
    b.events.push_back({ev.name, b.plan.start + ev.day});
    b.labels.push_back(label);
  }
  b.corpora = generate_sources(b.plan, SourceSet{kBenchmarkSources, 0.5, "S"});
  return b;
}

std::vector<double> reference_flow(const ArchetypeSpec& spec, const jumpflow::FlowParams& params,
                                   std::size_t replicates, std::uint64_t seed,
                                   std::size_t n_topics, double concentration) {
  if (replicates < 1) throw DomainError("reference_flow: need at least one replicate");
  const std::int64_t margin = params.flow_half_width + params.jump.half_width + 1;
  SynthPlan plan;
  plan.n_topics = n_topics;
  plan.concentration = concentration;
  plan.n_days = static_cast<std::size_t>(2 * margin + 1);
  plan.events.push_back({"reference", margin, spec});
  const EventRecord ev{"reference", plan.start + margin};

  std::vector<double> sum;
  for (std::size_t r = 0; r < replicates; ++r) {
    plan.seed = derive_seed(seed, r);
    const auto flow = jumpflow::event_flow(generate(plan), ev, params.flow_half_width, params.jump);
    if (sum.empty()) sum.assign(flow.size(), 0.0);
    for (std::size_t i = 0; i < flow.size(); ++i) sum[i] += flow.values[i];
  }
  return z_normalize(std::span<const double>(sum));
}

}  // namespace eventflow::synth
