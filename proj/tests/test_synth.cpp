#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "eventflow/error.hpp"
#include "eventflow/jumpflow.hpp"
#include "eventflow/synth.hpp"
#include "oracles.hpp"

using namespace eventflow;
using synth::ArchetypeSpec;
using synth::Shape;

namespace {

synth::SynthPlan single_event(Shape shape, std::int64_t lead, std::int64_t rec, double depth,
                              std::uint64_t seed) {
  synth::SynthPlan plan;
  plan.n_days = 300;
  plan.seed = seed;
  plan.events.push_back({"e", 150, {shape, lead, rec, depth}});
  return plan;
}

}  // namespace

TEST_CASE("archetype profiles") {
  const ArchetypeSpec dip{Shape::anticipation_dip, 10, 5, 3.0};
  CHECK(dip.profile(-11) == 0.0);
  CHECK(dip.profile(-5) == doctest::Approx(0.5));
  CHECK(dip.profile(0) == 1.0);
  CHECK(dip.profile(5) == doctest::Approx(std::exp(-1.0)));

  const ArchetypeSpec plateau{Shape::sudden_onset_plateau, 0, 20, 3.0};
  CHECK(plateau.profile(-1) == 0.0);
  CHECK(plateau.profile(0) == 1.0);
  CHECK(plateau.profile(19) == 1.0);
  CHECK(plateau.profile(20) == 0.0);

  const ArchetypeSpec sym{Shape::symmetric_dip, 3, 3, 3.0};
  CHECK(sym.profile(0) == 1.0);
  CHECK(sym.profile(2) == doctest::Approx(0.5));
  CHECK(sym.profile(-2) == sym.profile(2));
  CHECK(sym.profile(4) == 0.0);

  const ArchetypeSpec release{Shape::release_after, 10, 10, 3.0};
  CHECK(release.profile(-10) == 1.0);
  CHECK(release.profile(-11) == 0.0);
  CHECK(release.profile(5) == doctest::Approx(0.5));

  const ArchetypeSpec noise{Shape::noise_only, 5, 5, 3.0};
  for (std::int64_t t = -10; t <= 10; ++t) CHECK(noise.profile(t) == 0.0);

  for (auto s : {Shape::anticipation_dip, Shape::sudden_onset_plateau, Shape::symmetric_dip,
                 Shape::noise_only, Shape::release_after})
    CHECK(synth::shape_from_string(synth::to_string(s)) == s);
  CHECK_THROWS_AS(synth::shape_from_string("spike"), DomainError);
}

TEST_CASE("plan and archetype validation") {
  CHECK_THROWS_AS((ArchetypeSpec{Shape::symmetric_dip, 3, 3, -1.0}.validate()), DomainError);
  CHECK_THROWS_AS((ArchetypeSpec{Shape::symmetric_dip, -1, 3, 1.0}.validate()), DomainError);
  auto plan = single_event(Shape::symmetric_dip, 3, 3, 3.0, 1);
  plan.events[0].day = 300;
  CHECK_THROWS_AS(synth::generate(plan), DomainError);
  plan.events[0].day = -1;
  CHECK_THROWS_AS(synth::generate(plan), DomainError);
  plan = single_event(Shape::symmetric_dip, 3, 3, 3.0, 1);
  plan.concentration = 0.0;
  CHECK_THROWS_AS(synth::generate(plan), DomainError);
  plan.concentration = 0.1;
  plan.n_topics = 1;
  CHECK_THROWS_AS(synth::generate(plan), DomainError);
}

TEST_CASE("generation is deterministic and rows stay on the simplex") {
  const auto plan = single_event(Shape::anticipation_dip, 14, 14, 3.0, 99);
  const auto a = synth::generate(plan);
  const auto b = synth::generate(plan);
  CHECK(a.data() == b.data());
  CHECK(a.dates() == b.dates());
  REQUIRE(a.size() == 300);
  for (std::size_t i = 0; i < a.size(); ++i) {
    double s = 0;
    for (double x : a.row(i)) {
      CHECK(x >= 0.0);
      s += x;
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
  auto other = plan;
  other.seed = 100;
  CHECK(synth::generate(other).data() != a.data());
}

TEST_CASE("sudden onset plateau: event-topic mass jumps at the event and persists") {
  const auto plan = single_event(Shape::sudden_onset_plateau, 0, 60, 3.0, 5);
  const auto m = synth::generate(plan);
  const std::size_t k = plan.event_topic();
  auto mean_mass = [&](std::size_t from, std::size_t to) {
    double s = 0;
    for (std::size_t i = from; i < to; ++i) s += m.row(i)[k];
    return s / static_cast<double>(to - from);
  };
  const double before = mean_mass(90, 150);
  const double during = mean_mass(150, 210);
  const double after = mean_mass(220, 300);
  CHECK(during > before + 0.3);
  CHECK(during > after + 0.3);
  // Every row of the plateau carries at least the mixing weight.
  for (std::size_t i = 150; i < 210; ++i) CHECK(m.row(i)[k] >= plan.amplitude(3.0) - 1e-12);
  CHECK(m.row(149)[k] < plan.amplitude(3.0));
}

TEST_CASE("depth zero leaves the stream stationary") {
  int flat = 0;
  for (std::uint64_t r = 0; r < 40; ++r) {
    auto plan = single_event(Shape::sudden_onset_plateau, 0, 60, 0.0, 300 + r);
    plan.n_days = 900;
    plan.events[0].day = 450;
    const auto m = synth::generate(plan);
    jumpflow::JumpConfig cfg;
    cfg.jump_min = -420;
    cfg.jump_max = 420;
    cfg.jump_step = 15;
    const auto curve = jumpflow::jump_entropy_curve(m, plan.start + 450, cfg);
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < curve.size(); ++i) {
      if (curve.values[i] && curve.offsets[i] != 0) {
        x.push_back(static_cast<double>(curve.offsets[i]));
        y.push_back(*curve.values[i]);
      }
    }
    const auto fit = oracle::ols_slope(x, y);
    if (std::abs(fit.slope) < 3 * fit.stderr_slope) ++flat;
  }
  CHECK(flat >= 38);
}

TEST_CASE("overlap warnings") {
  synth::SynthPlan plan;
  plan.n_days = 200;
  plan.events.push_back({"a", 50, {Shape::symmetric_dip, 3, 3, 3.0}});
  plan.events.push_back({"b", 100, {Shape::symmetric_dip, 3, 3, 3.0}});
  CHECK(synth::overlap_warnings(plan).empty());
  plan.events.push_back({"c", 53, {Shape::symmetric_dip, 3, 3, 3.0}});
  const auto w = synth::overlap_warnings(plan);
  REQUIRE(w.size() == 1);
  CHECK(w[0].find("'a'") != std::string::npos);
  CHECK(w[0].find("'c'") != std::string::npos);
  // Overlapping weights add and are capped, so rows stay valid.
  CHECK_NOTHROW(synth::generate(plan));
}

TEST_CASE("derived seeds are distinct and stable") {
  CHECK(synth::derive_seed(1, 0) == synth::derive_seed(1, 0));
  CHECK(synth::derive_seed(1, 0) != synth::derive_seed(1, 1));
  CHECK(synth::derive_seed(1, 0) != synth::derive_seed(2, 0));
}

TEST_CASE("standard benchmark construction") {
  const auto a = synth::standard_benchmark(2026);
  REQUIRE(a.corpora.size() == 9);
  CHECK(a.events.size() == 60);
  CHECK(a.labels.size() == 60);
  CHECK(a.archetypes.size() == 4);
  std::map<std::size_t, int> hist;
  for (auto l : a.labels) ++hist[l];
  CHECK(hist == std::map<std::size_t, int>{{0, 15}, {1, 15}, {2, 15}, {3, 15}});
  CHECK(synth::overlap_warnings(a.plan).empty());
  for (std::size_t i = 1; i < a.events.size(); ++i) CHECK(a.events[i].date - a.events[i - 1].date == 120);

  const auto b = synth::standard_benchmark(2027);
  CHECK(b.labels == a.labels);
  CHECK(b.events == a.events);
  CHECK(b.corpora[0].data() != a.corpora[0].data());
  const auto again = synth::standard_benchmark(2026);
  for (std::size_t s = 0; s < 9; ++s) CHECK(again.corpora[s].data() == a.corpora[s].data());
  // Sources differ from each other but share the background.
  CHECK(a.corpora[0].data() != a.corpora[1].data());
}

TEST_CASE("benchmark flows correlate with their planted expected flow") {
  const auto b = synth::standard_benchmark(2026);
  jumpflow::FlowParams params;
  const auto table = jumpflow::batch_event_flows(b.corpora, b.events, params);
  REQUIRE(table.flows.size() == 9 * 60);
  std::vector<std::vector<double>> refs;
  for (const auto& a : b.archetypes) refs.push_back(synth::reference_flow(a, params, 100, 5));

  std::map<std::string, std::size_t> label_of;
  for (std::size_t e = 0; e < b.events.size(); ++e) label_of[b.events[e].name] = b.labels[e];
  std::map<std::string, std::vector<double>> per_event;
  std::vector<double> all;
  for (const auto& f : table.flows) {
    const double r = oracle::pearson(f.values, refs[label_of.at(f.event.name)]);
    per_event[f.event.name].push_back(r);
    all.push_back(r);
  }
  std::sort(all.begin(), all.end());
  CHECK(all[all.size() / 2] >= 0.5);
  for (auto& [name, rs] : per_event) {
    std::sort(rs.begin(), rs.end());
    CHECK_MESSAGE(rs[rs.size() / 2] > 0.0, name);
  }
}
