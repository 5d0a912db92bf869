#include "eventflow/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

#include "eventflow/core.hpp"
#include "eventflow/io.hpp"

namespace eventflow::plot {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::pair<double, double> value_range(const std::vector<std::vector<double>>& series) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    for (double v : s) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(lo < hi)) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

std::vector<std::pair<double, double>> trace(const Panel& p, std::span<const double> values,
                                             double x0) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < values.size(); ++i) {
    pts.emplace_back(p.px(x0 + static_cast<double>(i)), p.py(values[i]));
  }
  return pts;
}

// Grey-scale ramp: dark for small values, light for large ones.
std::string shade(double t) {
  const int v = static_cast<int>(std::lround(30 + 200 * std::clamp(t, 0.0, 1.0)));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", v / 3, v / 2 + 20, v);
  return buf;
}

}  // namespace

Svg::Svg(double width, double height) : width_(width), height_(height) {}

void Svg::line(double x1, double y1, double x2, double y2, std::string_view stroke, double width) {
  body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
           num(y2) + "\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" + num(width) +
           "\"/>\n";
}

void Svg::polyline(const std::vector<std::pair<double, double>>& pts, std::string_view stroke,
                   double width, double opacity) {
  body_ += "<polyline fill=\"none\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" +
           num(width) + "\" stroke-opacity=\"" + num(opacity) + "\" points=\"";
  for (const auto& [x, y] : pts) body_ += num(x) + "," + num(y) + " ";
  body_ += "\"/>\n";
}

void Svg::rect(double x, double y, double w, double h, std::string_view fill, std::string_view stroke) {
  body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" +
           num(h) + "\" fill=\"" + std::string(fill) + "\" stroke=\"" + std::string(stroke) + "\"/>\n";
}

void Svg::circle(double cx, double cy, double r, std::string_view fill) {
  body_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) + "\" fill=\"" +
           std::string(fill) + "\"/>\n";
}

void Svg::text(double x, double y, std::string_view s, double size, std::string_view anchor,
               double rotate) {
  body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + num(size) +
           "\" font-family=\"sans-serif\" text-anchor=\"" + std::string(anchor) + "\"";
  if (rotate != 0.0) body_ += " transform=\"rotate(" + num(rotate) + " " + num(x) + " " + num(y) + ")\"";
  body_ += ">" + escape(s) + "</text>\n";
}

std::string Svg::str() const {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         num(width_) + "\" height=\"" + num(height_) + "\" viewBox=\"0 0 " + num(width_) + " " +
         num(height_) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + body_ +
         "</svg>\n";
}

void Svg::save(const fs::path& path) const { io::write_text(path, str()); }

double Panel::px(double v) const { return x + (v - xmin) / (xmax - xmin) * w; }
double Panel::py(double v) const { return y + h - (v - ymin) / (ymax - ymin) * h; }

void Panel::axes(Svg& svg, std::string_view title, std::string_view xlabel,
                 std::string_view ylabel) const {
  svg.line(x, y + h, x + w, y + h, "#333");
  svg.line(x, y, x, y + h, "#333");
  svg.text(x + w / 2, y - 6, title, 11, "middle");
  if (!xlabel.empty()) svg.text(x + w / 2, y + h + 26, xlabel, 10, "middle");
  if (!ylabel.empty()) svg.text(x - 34, y + h / 2, ylabel, 10, "middle", -90);
  if (x_ticks) {
    svg.text(x, y + h + 13, num(xmin), 9, "middle");
    svg.text(x + w, y + h + 13, num(xmax), 9, "middle");
  }
  svg.text(x - 4, y + h, num(ymin), 9, "end");
  svg.text(x - 4, y + 8, num(ymax), 9, "end");
  if (xmin < 0 && xmax > 0) svg.line(px(0), y, px(0), y + h, "#bbb", 0.5);
}

std::string_view palette(std::size_t i) {
  static constexpr std::array<std::string_view, 10> kColors{
      "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
      "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return kColors[i % kColors.size()];
}

void event_flows(const fs::path& path, const std::vector<jumpflow::EventFlow>& flows,
                 std::size_t rolling, std::size_t max_flows) {
  const std::size_t n = std::min(flows.size(), max_flows);
  const std::size_t cols = 4;
  const std::size_t rows = std::max<std::size_t>(1, (n + cols - 1) / cols);
  Svg svg(cols * 240.0 + 40, rows * 200.0 + 30);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& f = flows[i];
    Panel p;
    p.x = 60 + static_cast<double>(i % cols) * 240;
    p.y = 30 + static_cast<double>(i / cols) * 200;
    p.w = 170;
    p.h = 130;
    p.xmin = static_cast<double>(f.offsets.front());
    p.xmax = static_cast<double>(f.offsets.back());
    const Series raw(f.values, f.offsets);
    const auto smooth = rolling_mean(raw, std::min(std::max<std::size_t>(rolling, 1), raw.size()));
    std::tie(p.ymin, p.ymax) = value_range({f.values});
    p.axes(svg, f.source_id + ": " + f.event.name, "jump (days)", "z");
    svg.polyline(trace(p, f.values, p.xmin), "#1f77b4", 1.0);
    svg.polyline(trace(p, smooth.values, p.xmin), "#ff7f0e", 2.0);
  }
  svg.save(path);
}

void consensus(const fs::path& path, const std::vector<jumpflow::EventFlow>& flows,
               const alignment::Barycenter& dba, const alignment::Barycenter& soft,
               std::string_view title) {
  Svg svg(820, 320);
  std::vector<std::vector<double>> all{dba.values, soft.values};
  for (const auto& f : flows) all.push_back(f.values);
  const auto [lo, hi] = value_range(all);
  const double x0 = flows.empty() ? 0.0 : static_cast<double>(flows.front().offsets.front());
  const double len = static_cast<double>(std::max(dba.values.size(), soft.values.size()));
  const std::array<const alignment::Barycenter*, 2> centers{&dba, &soft};
  const std::array<std::string, 2> names{"DBA", "soft-DTW"};
  for (std::size_t side = 0; side < 2; ++side) {
    Panel p;
    p.x = 60 + static_cast<double>(side) * 400;
    p.y = 40;
    p.w = 320;
    p.h = 220;
    p.xmin = x0;
    p.xmax = x0 + len - 1;
    p.ymin = lo;
    p.ymax = hi;
    p.axes(svg, std::string(title) + " (" + names[side] + ")", "offset (days)", "z");
    for (std::size_t i = 0; i < flows.size(); ++i) {
      svg.polyline(trace(p, flows[i].values, x0), palette(i), 1.0, 0.6);
    }
    svg.polyline(trace(p, centers[side]->values, x0), "#d62728", 3.0);
  }
  svg.save(path);
}

void embedding(const fs::path& path, const clustering::ClusterModel& model) {
  Svg svg(520, 480);
  Panel p;
  p.x = 60;
  p.y = 40;
  p.w = 420;
  p.h = 380;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& c : model.embedding.coords) {
    xs.push_back(c[0]);
    ys.push_back(c[1]);
  }
  std::tie(p.xmin, p.xmax) = value_range({xs});
  std::tie(p.ymin, p.ymax) = value_range({ys});
  p.axes(svg, "MDS projection, k=" + std::to_string(model.k) + ", stress " + num(model.embedding.stress),
         "dim 1", "dim 2");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::size_t label = i < model.labels.size() ? model.labels[i] : 0;
    svg.circle(p.px(xs[i]), p.py(ys[i]), 3.0, palette(label));
  }
  svg.save(path);
}

void clusters(const fs::path& path, const clustering::ClusterModel& model,
              const std::vector<std::vector<double>>& series) {
  const std::size_t k = model.archetypes.size();
  const double width = std::max(600.0, static_cast<double>(k) * 220.0 + 60);
  Svg svg(width, 560);

  // Dendrogram: leaves ordered by a depth-first walk of the merge tree.
  const auto& tree = model.dendrogram;
  const std::size_t n = tree.leaves;
  if (n >= 2 && tree.merges.size() + 1 == n) {
    std::vector<double> xpos(2 * n - 1, 0.0);
    std::vector<double> height(2 * n - 1, 0.0);
    std::vector<std::size_t> order;
    std::vector<std::size_t> stack{2 * n - 2};
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      if (node < n) {
        order.push_back(node);
      } else {
        stack.push_back(tree.merges[node - n].b);
        stack.push_back(tree.merges[node - n].a);
      }
    }
    for (std::size_t i = 0; i < order.size(); ++i) xpos[order[i]] = static_cast<double>(i);
    double top = 0.0;
    for (std::size_t m = 0; m < tree.merges.size(); ++m) {
      const auto& mg = tree.merges[m];
      xpos[n + m] = 0.5 * (xpos[mg.a] + xpos[mg.b]);
      height[n + m] = mg.height;
      top = std::max(top, mg.height);
    }
    Panel p;
    p.x = 60;
    p.y = 30;
    p.w = width - 100;
    p.h = 200;
    p.xmin = -0.5;
    p.xmax = static_cast<double>(n) - 0.5;
    p.ymin = 0.0;
    p.ymax = top > 0 ? top * 1.05 : 1.0;
    p.x_ticks = false;
    p.axes(svg, "UPGMA dendrogram", "", "height");
    for (std::size_t m = 0; m < tree.merges.size(); ++m) {
      const auto& mg = tree.merges[m];
      const double hy = p.py(mg.height);
      svg.line(p.px(xpos[mg.a]), p.py(height[mg.a]), p.px(xpos[mg.a]), hy, "#444", 0.6);
      svg.line(p.px(xpos[mg.b]), p.py(height[mg.b]), p.px(xpos[mg.b]), hy, "#444", 0.6);
      svg.line(p.px(xpos[mg.a]), hy, p.px(xpos[mg.b]), hy, "#444", 0.6);
    }
    for (std::size_t i = 0; i < n && i < model.labels.size(); ++i) {
      svg.circle(p.px(xpos[i]), p.py(0.0) + 4, 2.0, palette(model.labels[i]));
    }
  }

  std::vector<std::vector<double>> all = series;
  for (const auto& a : model.archetypes) all.push_back(a.values);
  const auto [lo, hi] = value_range(all);
  for (std::size_t c = 0; c < k; ++c) {
    Panel p;
    p.x = 60 + static_cast<double>(c) * 220;
    p.y = 300;
    p.w = 180;
    p.h = 200;
    const double len = static_cast<double>(model.archetypes[c].values.size());
    const double half = std::floor((len - 1) / 2);
    p.xmin = -half;
    p.xmax = len - 1 - half;
    p.ymin = lo;
    p.ymax = hi;
    std::size_t members = 0;
    for (std::size_t i = 0; i < series.size() && i < model.labels.size(); ++i) {
      if (model.labels[i] != c) continue;
      ++members;
      svg.polyline(trace(p, series[i], p.xmin), palette(c), 0.5, 0.25);
    }
    p.axes(svg, "cluster " + std::to_string(c) + " (n=" + std::to_string(members) + ")",
           "offset (days)", c == 0 ? "z" : "");
    svg.polyline(trace(p, model.archetypes[c].values, p.xmin), "#000", 2.5);
  }
  svg.save(path);
}

void decades(const fs::path& path, const std::vector<studies::DecadeRow>& rows) {
  std::vector<std::string> sources;
  std::set<int> decade_set;
  for (const auto& r : rows) {
    if (std::find(sources.begin(), sources.end(), r.source_id) == sources.end()) {
      sources.push_back(r.source_id);
    }
    decade_set.insert(r.decade);
  }
  const std::vector<int> decade_list(decade_set.begin(), decade_set.end());
  Svg svg(720, 420);
  Panel p;
  p.x = 70;
  p.y = 40;
  p.w = 520;
  p.h = 300;
  p.xmin = -0.5;
  p.xmax = static_cast<double>(std::max<std::size_t>(decade_list.size(), 1)) - 0.5;
  std::vector<double> bounds;
  for (const auto& r : rows) {
    bounds.push_back(r.ci_low);
    bounds.push_back(r.ci_high);
  }
  std::tie(p.ymin, p.ymax) = value_range({bounds});
  p.axes(svg, "Distance to consensus by decade (95% CI)", "decade", "DTW distance");
  for (std::size_t d = 0; d < decade_list.size(); ++d) {
    svg.text(p.px(static_cast<double>(d)), p.y + p.h + 13, std::to_string(decade_list[d]) + "s", 9,
             "middle");
  }
  for (std::size_t s = 0; s < sources.size(); ++s) {
    std::vector<std::pair<double, double>> pts;
    const double jitter = (static_cast<double>(s) - 0.5 * static_cast<double>(sources.size())) * 0.03;
    for (const auto& r : rows) {
      if (r.source_id != sources[s]) continue;
      const auto d = static_cast<double>(
          std::find(decade_list.begin(), decade_list.end(), r.decade) - decade_list.begin());
      const double x = p.px(d + jitter);
      svg.line(x, p.py(r.ci_low), x, p.py(r.ci_high), palette(s), 1.0);
      svg.circle(x, p.py(r.mean), 2.5, palette(s));
      pts.emplace_back(x, p.py(r.mean));
    }
    svg.polyline(pts, palette(s), 1.0, 0.7);
    svg.rect(p.x + p.w + 20, p.y + static_cast<double>(s) * 16, 10, 10, palette(s));
    svg.text(p.x + p.w + 34, p.y + static_cast<double>(s) * 16 + 9, sources[s], 10);
  }
  svg.save(path);
}

void deviation_heatmap(const fs::path& path, const studies::DeviationTable& table) {
  // Sources and anchors sorted by mean distance, as in a consensus ranking.
  std::map<std::string, std::pair<double, std::size_t>> by_source;
  std::map<std::string, std::pair<double, std::size_t>> by_anchor;
  std::map<std::pair<std::string, std::string>, double> cell;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& r : table.rows) {
    by_source[r.source_id].first += r.distance;
    ++by_source[r.source_id].second;
    by_anchor[r.anchor].first += r.distance;
    ++by_anchor[r.anchor].second;
    cell[{r.source_id, r.anchor}] = r.distance;
    lo = std::min(lo, r.distance);
    hi = std::max(hi, r.distance);
  }
  auto sorted_keys = [](const auto& m) {
    std::vector<std::pair<double, std::string>> v;
    for (const auto& [key, acc] : m) v.emplace_back(acc.first / static_cast<double>(acc.second), key);
    std::sort(v.begin(), v.end());
    std::vector<std::string> out;
    for (auto& [mean_value, key] : v) out.push_back(key);
    return out;
  };
  const auto sources = sorted_keys(by_source);
  const auto anchors = sorted_keys(by_anchor);
  const double cw = 14;
  const double ch = 16;
  const double left = 180;
  const double top = 40;
  Svg svg(std::max(520.0, left + cw * static_cast<double>(sources.size()) + 80),
          top + ch * static_cast<double>(anchors.size()) + 120);
  svg.text(10, 20, "Distance to consensus per anchor (dark = close, white = missing)", 11);
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    const double y = top + static_cast<double>(a) * ch;
    svg.text(left - 6, y + ch - 4, anchors[a], 9, "end");
    for (std::size_t s = 0; s < sources.size(); ++s) {
      const double x = left + static_cast<double>(s) * cw;
      auto it = cell.find({sources[s], anchors[a]});
      const std::string fill =
          it == cell.end() ? "white" : shade(hi > lo ? (it->second - lo) / (hi - lo) : 0.0);
      svg.rect(x, y, cw, ch, fill, "#eee");
    }
  }
  const double by = top + static_cast<double>(anchors.size()) * ch + 8;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    svg.text(left + (static_cast<double>(s) + 0.7) * cw, by, sources[s], 9, "end", -90);
  }
  svg.save(path);
}

}  // namespace eventflow::plot
