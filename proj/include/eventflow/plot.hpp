#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "eventflow/alignment.hpp"
#include "eventflow/clustering.hpp"
#include "eventflow/jumpflow.hpp"
#include "eventflow/studies.hpp"

// Standalone SVG figures for batch results.
namespace eventflow::plot {

namespace fs = std::filesystem;

// Minimal SVG document builder with fixed two-decimal coordinates.
class Svg {
 public:
  Svg(double width, double height);

  void line(double x1, double y1, double x2, double y2, std::string_view stroke, double width = 1.0);
  void polyline(const std::vector<std::pair<double, double>>& pts, std::string_view stroke,
                double width = 1.0, double opacity = 1.0);
  void rect(double x, double y, double w, double h, std::string_view fill,
            std::string_view stroke = "none");
  void circle(double cx, double cy, double r, std::string_view fill);
  void text(double x, double y, std::string_view s, double size = 11.0,
            std::string_view anchor = "start", double rotate = 0.0);

  std::string str() const;
  void save(const fs::path& path) const;

 private:
  double width_;
  double height_;
  std::string body_;
};

// Linear map from data space into a rectangle of the canvas, with axes.
struct Panel {
  double x = 0, y = 0, w = 0, h = 0;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool x_ticks = true;

  double px(double v) const;
  double py(double v) const;
  void axes(Svg& svg, std::string_view title, std::string_view xlabel, std::string_view ylabel) const;
};

std::string_view palette(std::size_t i);

// Up to `max_flows` flows in a grid, each with its rolling mean overlaid.
void event_flows(const fs::path& path, const std::vector<jumpflow::EventFlow>& flows,
                 std::size_t rolling = 5, std::size_t max_flows = 8);

// One anchor's member flows with the DBA (left) and soft-DTW (right) barycenters.
void consensus(const fs::path& path, const std::vector<jumpflow::EventFlow>& flows,
               const alignment::Barycenter& dba, const alignment::Barycenter& soft,
               std::string_view title);

// Embedded points coloured by cluster label.
void embedding(const fs::path& path, const clustering::ClusterModel& model);

// Dendrogram on top, per-cluster member flows and archetypes below.
void clusters(const fs::path& path, const clustering::ClusterModel& model,
              const std::vector<std::vector<double>>& series);

// Mean deviation per source and decade with 95% interval bars.
void decades(const fs::path& path, const std::vector<studies::DecadeRow>& rows);

// Source x anchor heatmap of distance to consensus; missing cells stay white.
void deviation_heatmap(const fs::path& path, const studies::DeviationTable& table);

}  // namespace eventflow::plot
