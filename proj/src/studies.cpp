#include "eventflow/studies.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <tuple>

#include "eventflow/error.hpp"
#include "eventflow/parallel.hpp"

namespace eventflow::studies {

namespace {

constexpr double kNormal975 = 1.959963984540054;
constexpr std::size_t kLargeSample = 30;
constexpr double kTemplateTolerance = 1e-6;

std::vector<std::vector<double>> values_of(const std::vector<jumpflow::EventFlow>& flows) {
  std::vector<std::vector<double>> out;
  out.reserve(flows.size());
  for (const auto& f : flows) out.push_back(f.values);
  return out;
}

int decade_of(Date d) {
  const int y = d.year();
  return y >= 0 ? y / 10 * 10 : -((-y + 9) / 10 * 10);
}

// Flows and deviations for one anchor; empty when no source covers it.
std::vector<DeviationRow> anchor_rows(const std::vector<ThetaMatrix>& corpora,
                                      const EventRecord& anchor, const BaselineParams& params) {
  std::vector<jumpflow::EventFlow> flows;
  for (const auto& m : corpora) {
    try {
      flows.push_back(
          jumpflow::event_flow(m, anchor, params.flow.flow_half_width, params.flow.jump));
    } catch (const CoverageError&) {
    }
  }
  if (flows.empty()) return {};
  const auto consensus = consensus_flow(flows, params.consensus);
  auto rows = deviation_from_consensus(flows, consensus.values, anchor.name);
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.source_id < b.source_id; });
  return rows;
}

}  // namespace

std::string_view to_string(ConsensusMode m) { return m == ConsensusMode::dba ? "dba" : "soft_dba"; }

ConsensusMode consensus_mode_from_string(std::string_view s) {
  if (s == "dba") return ConsensusMode::dba;
  if (s == "soft_dba" || s == "soft-dba") return ConsensusMode::soft_dba;
  throw DomainError("unknown consensus mode '" + std::string(s) + "'");
}

alignment::Barycenter consensus_flow(const std::vector<jumpflow::EventFlow>& flows,
                                     const ConsensusOptions& opts) {
  if (flows.empty()) throw DomainError("consensus_flow: no flows");
  const auto members = values_of(flows);
  return opts.mode == ConsensusMode::dba ? alignment::dba(members, opts.dba)
                                         : alignment::soft_dtw_barycenter(members, opts.soft);
}

std::vector<DeviationRow> deviation_from_consensus(const std::vector<jumpflow::EventFlow>& flows,
                                                   std::span<const double> consensus,
                                                   std::string_view anchor) {
  std::vector<DeviationRow> rows;
  rows.reserve(flows.size());
  for (const auto& f : flows) {
    rows.push_back({f.source_id, anchor.empty() ? f.event.name : std::string(anchor), f.event.date,
                    alignment::dtw_cost(f.values, consensus)});
  }
  return rows;
}

std::vector<SourceScore> rank_sources(const DeviationTable& table) {
  std::map<std::string, SourceScore> by_source;
  for (const auto& r : table.rows) {
    auto& s = by_source[r.source_id];
    s.source_id = r.source_id;
    ++s.anchors;
    s.mean_distance += (r.distance - s.mean_distance) / static_cast<double>(s.anchors);
  }
  std::vector<SourceScore> out;
  for (auto& [id, s] : by_source) out.push_back(s);
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.mean_distance > b.mean_distance; });
  return out;
}

DeviationTable random_date_baseline(const std::vector<ThetaMatrix>& corpora, std::size_t n_dates,
                                    std::uint64_t seed, const BaselineParams& params) {
  if (corpora.empty()) throw DomainError("random_date_baseline: no corpora");
  if (n_dates < 1) throw DomainError("random_date_baseline: n_dates must be >= 1");
  Date lo = corpora.front().first_date();
  Date hi = corpora.front().last_date();
  for (const auto& m : corpora) {
    if (m.empty()) throw DomainError("random_date_baseline: empty corpus " + m.source_id());
    lo = std::max(lo, m.first_date());
    hi = std::min(hi, m.last_date());
  }
  // A flow needs its outermost jumped windows inside the corpus.
  const std::int64_t margin = params.flow.flow_half_width + params.flow.jump.half_width;
  lo = lo + margin;
  hi = hi - margin;
  if (hi < lo) throw DomainError("random_date_baseline: corpora share no usable date span");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> pick(0, hi - lo);
  std::vector<Date> anchors(n_dates);
  for (auto& d : anchors) d = lo + pick(rng);
  std::sort(anchors.begin(), anchors.end());

  std::vector<std::vector<DeviationRow>> per_anchor(n_dates);
  parallel_for(n_dates, params.flow.workers, [&](std::size_t i) {
    per_anchor[i] = anchor_rows(corpora, {anchors[i].iso(), anchors[i]}, params);
  });
  DeviationTable table;
  for (auto& rows : per_anchor) {
    for (auto& r : rows) table.rows.push_back(std::move(r));
  }
  return table;
}

DeviationTable event_deviation(const std::vector<ThetaMatrix>& corpora,
                               const std::vector<EventRecord>& events,
                               const BaselineParams& params) {
  std::vector<std::vector<DeviationRow>> per_event(events.size());
  parallel_for(events.size(), params.flow.workers,
               [&](std::size_t i) { per_event[i] = anchor_rows(corpora, events[i], params); });
  DeviationTable table;
  for (auto& rows : per_event) {
    for (auto& r : rows) table.rows.push_back(std::move(r));
  }
  return table;
}

double ci95_half_width(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 2) return 0.0;
  const double mu = mean(sample);
  double ss = 0.0;
  for (double x : sample) ss += (x - mu) * (x - mu);
  const double se = std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
  if (n >= kLargeSample) return kNormal975 * se;
  const boost::math::students_t dist(static_cast<double>(n - 1));
  return boost::math::quantile(dist, 0.975) * se;
}

std::vector<DecadeRow> decade_aggregate(const DeviationTable& table) {
  std::map<std::pair<std::string, int>, std::vector<double>> groups;
  for (const auto& r : table.rows) groups[{r.source_id, decade_of(r.date)}].push_back(r.distance);
  std::vector<DecadeRow> out;
  for (const auto& [key, values] : groups) {
    DecadeRow row;
    row.source_id = key.first;
    row.decade = key.second;
    row.n = values.size();
    row.mean = mean(values);
    const double half = ci95_half_width(values);
    row.ci_low = row.mean - half;
    row.ci_high = row.mean + half;
    row.degenerate = row.n < 2;
    out.push_back(row);
  }
  return out;
}

std::vector<QueryMatch> query_by_template(const ThetaMatrix& m, std::span<const double> templ,
                                          const QueryConfig& cfg) {
  if (cfg.stride < 1) throw DomainError("query: stride must be >= 1");
  if (templ.empty()) throw DomainError("query: empty template");
  const double mu = mean(templ);
  const double sd = population_stddev(templ);
  const bool flat = std::all_of(templ.begin(), templ.end(), [](double x) { return x == 0.0; });
  if (!flat && (std::abs(mu) > kTemplateTolerance || std::abs(sd - 1.0) > kTemplateTolerance)) {
    throw DomainError("query: template is not z-normalised");
  }
  const std::int64_t w = cfg.flow.flow_half_width;
  const std::int64_t margin = w + cfg.flow.jump.half_width;
  if (m.empty() || m.last_date() - m.first_date() < 2 * margin) {
    throw DomainError("query: corpus " + m.source_id() + " is shorter than one flow window");
  }
  const Date first = m.first_date() + margin;
  const Date last = m.last_date() - margin;
  const auto n_candidates = static_cast<std::size_t>((last - first) / cfg.stride + 1);

  std::vector<std::optional<double>> costs(n_candidates);
  parallel_for(n_candidates, cfg.flow.workers, [&](std::size_t i) {
    const Date center = first + static_cast<std::int64_t>(i) * cfg.stride;
    try {
      const auto flow = jumpflow::event_flow(m, {center.iso(), center}, w, cfg.flow.jump);
      costs[i] = alignment::dtw_cost(flow.values, templ, cfg.band);
    } catch (const CoverageError&) {
    }
  });

  std::vector<QueryMatch> candidates;
  for (std::size_t i = 0; i < n_candidates; ++i) {
    if (!costs[i]) continue;
    const Date center = first + static_cast<std::int64_t>(i) * cfg.stride;
    candidates.push_back({m.source_id(), center, center - w, *costs[i], 0});
  }
  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    return std::tie(a.cost, a.center) < std::tie(b.cost, b.center);
  });

  const std::int64_t width = 2 * w + 1;
  std::vector<QueryMatch> kept;
  for (const auto& c : candidates) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const auto& k) {
      return std::abs(k.center - c.center) < width;
    });
    if (suppressed) continue;
    kept.push_back(c);
    kept.back().rank = kept.size();
    if (cfg.top_n > 0 && kept.size() == cfg.top_n) break;
  }
  return kept;
}

}  // namespace eventflow::studies
