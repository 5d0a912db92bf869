#include "eventflow/jumpflow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "eventflow/divergence.hpp"
#include "eventflow/error.hpp"
#include "eventflow/parallel.hpp"

namespace eventflow::jumpflow {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

void JumpConfig::validate() const {
  if (half_width < 0) throw DomainError("jump config: half_width must be >= 0");
  if (jump_step < 1) throw DomainError("jump config: jump_step must be >= 1");
  if (!(jump_min < jump_max)) throw DomainError("jump config: jump_min must be < jump_max");
  if (smoothing && *smoothing < 1) throw DomainError("jump config: smoothing must be >= 1");
  if (grid().empty()) throw DomainError("jump config: no multiple of jump_step in range");
}

std::vector<std::int64_t> JumpConfig::grid() const {
  std::vector<std::int64_t> out;
  if (jump_step < 1 || jump_min > jump_max) return out;
  const std::int64_t first = -floor_div(-jump_min, jump_step);  // ceil(jump_min / step)
  const std::int64_t last = floor_div(jump_max, jump_step);
  for (std::int64_t k = first; k <= last; ++k) out.push_back(k * jump_step);
  return out;
}

std::size_t JumpEntropyCurve::supported_count() const {
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(),
                                                [](const auto& v) { return v.has_value(); }));
}

JumpEntropyCurve jump_entropy_curve(const ThetaMatrix& m, Date focal, const JumpConfig& cfg) {
  cfg.validate();
  if (m.empty() || focal < m.first_date() || focal > m.last_date()) {
    throw DomainError("jump_entropy_curve: focal date " + focal.iso() + " outside corpus " +
                      m.source_id());
  }
  const std::int64_t h = cfg.half_width;
  const auto [fb, fe] = m.row_range(focal - h, focal + h);

  JumpEntropyCurve curve;
  curve.source_id = m.source_id();
  curve.focal = focal;
  curve.offsets = cfg.grid();
  curve.values.assign(curve.offsets.size(), std::nullopt);
  curve.support.assign(curve.offsets.size(), 0);

  if (fb != fe) {
    for (std::size_t k = 0; k < curve.offsets.size(); ++k) {
      const Date center = focal + curve.offsets[k];
      if (center - h < m.first_date() || center + h > m.last_date()) continue;
      const auto [jb, je] = m.row_range(center - h, center + h);
      const std::size_t pairs = std::min(fe - fb, je - jb);
      if (pairs == 0) continue;
      double sum = 0.0;
      for (std::size_t r = 0; r < pairs; ++r) sum += divergence::jsd(m.row(fb + r), m.row(jb + r));
      curve.values[k] = sum / static_cast<double>(pairs);
      curve.support[k] = pairs;
    }
  }
  if (curve.supported_count() == 0) {
    throw EmptyCurveError("jump_entropy_curve: no supported jump around " + focal.iso() + " in " +
                          m.source_id());
  }
  return curve;
}

EventFlow event_flow(const ThetaMatrix& m, const EventRecord& e, std::int64_t flow_half_width,
                     const JumpConfig& cfg) {
  if (flow_half_width < 1) throw DomainError("event_flow: flow half width must be >= 1");
  if (m.empty() || e.date < m.first_date() || e.date > m.last_date()) {
    throw CoverageError(m.source_id() + " does not cover " + e.name + " (" + e.date.iso() + ")");
  }
  JumpConfig flow_cfg = cfg;
  flow_cfg.jump_min = -flow_half_width;
  flow_cfg.jump_max = flow_half_width;
  flow_cfg.jump_step = 1;

  JumpEntropyCurve curve;
  try {
    curve = jump_entropy_curve(m, e.date, flow_cfg);
  } catch (const EmptyCurveError& err) {
    throw CoverageError(err.what());
  }

  const std::size_t n = curve.size();
  std::vector<std::optional<double>> raw = curve.values;
  std::vector<std::size_t> support = curve.support;
  const auto zero = static_cast<std::size_t>(flow_half_width);
  raw[zero].reset();
  support[zero] = 0;

  if (!raw.front() || !raw.back()) {
    throw CoverageError(m.source_id() + " lacks rows at the flow edges for " + e.name + " (" +
                        e.date.iso() + ")");
  }

  std::vector<double> values(n);
  std::size_t left = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (raw[i]) {
      values[i] = *raw[i];
      left = i;
      continue;
    }
    std::size_t right = i + 1;
    while (!raw[right]) ++right;
    const double t = static_cast<double>(i - left) / static_cast<double>(right - left);
    values[i] = (1.0 - t) * *raw[left] + t * *raw[right];
  }

  Series s(std::move(values), curve.offsets);
  if (cfg.smoothing && *cfg.smoothing > 1) s = rolling_mean(s, std::min(*cfg.smoothing, n));
  s = z_normalize(s);

  EventFlow flow;
  flow.event = e;
  flow.source_id = m.source_id();
  flow.offsets = std::move(s.index);
  flow.values = std::move(s.values);
  flow.support = std::move(support);
  return flow;
}

FlowTable batch_event_flows(const std::vector<ThetaMatrix>& corpora,
                            const std::vector<EventRecord>& events, const FlowParams& params) {
  std::vector<std::size_t> source_order(corpora.size());
  std::iota(source_order.begin(), source_order.end(), std::size_t{0});
  std::stable_sort(source_order.begin(), source_order.end(), [&](std::size_t a, std::size_t b) {
    return corpora[a].source_id() < corpora[b].source_id();
  });
  std::vector<std::size_t> event_order(events.size());
  std::iota(event_order.begin(), event_order.end(), std::size_t{0});
  std::stable_sort(event_order.begin(), event_order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(events[a].date, events[a].name) < std::tie(events[b].date, events[b].name);
  });

  const std::size_t n_pairs = corpora.size() * events.size();
  std::vector<std::optional<EventFlow>> results(n_pairs);
  std::vector<std::string> reasons(n_pairs);
  parallel_for(n_pairs, params.workers, [&](std::size_t k) {
    const auto& src = corpora[source_order[k / events.size()]];
    const auto& ev = events[event_order[k % events.size()]];
    try {
      results[k] = event_flow(src, ev, params.flow_half_width, params.jump);
    } catch (const CoverageError& err) {
      reasons[k] = err.what();
    }
  });

  FlowTable table;
  for (std::size_t k = 0; k < n_pairs; ++k) {
    if (results[k]) {
      table.flows.push_back(std::move(*results[k]));
    } else {
      table.misses.push_back({corpora[source_order[k / events.size()]].source_id(),
                              events[event_order[k % events.size()]], reasons[k]});
    }
  }
  return table;
}

}  // namespace eventflow::jumpflow
