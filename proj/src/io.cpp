#include "eventflow/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

#include "eventflow/error.hpp"
#include "json.hpp"

namespace eventflow::io {

using nlohmann::json;

namespace {

struct Line {
  std::size_t number;
  std::string text;
};

std::vector<Line> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError(path.string(), 0, "cannot open file");
  std::vector<Line> lines;
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (number == 1 && text.rfind("\xEF\xBB\xBF", 0) == 0) text.erase(0, 3);
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back({number, std::move(text)});
  }
  return lines;
}

char detect_delimiter(std::string_view header) {
  for (char c : {',', '\t', ';'}) {
    if (header.find(c) != std::string_view::npos) return c;
  }
  return ',';
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

double require_double(const fs::path& path, const Line& line, std::string_view field,
                      std::string_view what) {
  double v = 0.0;
  if (!parse_double(field, v)) {
    throw IngestError(path.string(), line.number,
                      "cannot parse " + std::string(what) + " '" + std::string(field) + "'");
  }
  return v;
}

Date require_date(const fs::path& path, const Line& line, std::string_view field) {
  auto d = Date::parse(trim(field));
  if (!d) {
    throw IngestError(path.string(), line.number, "unparseable date '" + std::string(field) + "'");
  }
  return *d;
}

void expect_header(const fs::path& path, const std::vector<Line>& lines,
                   const std::vector<std::string>& expected) {
  if (lines.empty()) throw IngestError(path.string(), 0, "empty file");
  const auto fields = split_line(lines.front().text, detect_delimiter(lines.front().text));
  std::vector<std::string> got;
  for (const auto& f : fields) got.emplace_back(trim(f));
  if (got != expected) {
    std::string want;
    for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
    throw IngestError(path.string(), lines.front().number, "expected header '" + want + "'");
  }
}

std::string csv_row(std::initializer_list<std::string> fields) {
  std::string out;
  bool first = true;
  for (const auto& f : fields) {
    if (!first) out += ',';
    out += quote_field(f);
    first = false;
  }
  out += '\n';
  return out;
}

json barycenter_json(const alignment::Barycenter& b) {
  return {{"values", b.values},
          {"objective", b.objective},
          {"iterations", b.iterations},
          {"converged", b.converged},
          {"history", b.history}};
}

alignment::Barycenter barycenter_from_json(const json& j) {
  alignment::Barycenter b;
  b.values = j.at("values").get<std::vector<double>>();
  b.objective = j.at("objective").get<double>();
  b.iterations = j.at("iterations").get<std::size_t>();
  b.converged = j.at("converged").get<bool>();
  b.history = j.value("history", std::vector<double>{});
  return b;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

std::vector<std::string> split_line(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

std::string quote_field(std::string_view field, char delim) {
  if (field.find_first_of(std::string{delim, '"', '\n'}) == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

ThetaMatrix ingest_theta(const fs::path& path, std::string source_id) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw IngestError(path.string(), 0, "empty theta file");
  const char delim = detect_delimiter(lines.front().text);
  const auto header = split_line(lines.front().text, delim);
  if (header.size() < 3 || trim(header[0]) != "date") {
    throw IngestError(path.string(), lines.front().number,
                      "header must be date,topic_0,...,topic_{K-1} with K >= 2");
  }
  const std::size_t k = header.size() - 1;
  for (std::size_t i = 0; i < k; ++i) {
    if (trim(header[i + 1]) != "topic_" + std::to_string(i)) {
      throw IngestError(path.string(), lines.front().number,
                        "header column " + std::to_string(i + 2) + " must be topic_" +
                            std::to_string(i));
    }
  }

  struct Row {
    Date date;
    std::size_t line;
    std::vector<double> probs;
  };
  std::vector<Row> rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto& line = lines[li];
    const auto fields = split_line(line.text, delim);
    if (fields.size() != k + 1) {
      throw IngestError(path.string(), line.number,
                        "expected " + std::to_string(k + 1) + " fields, got " +
                            std::to_string(fields.size()));
    }
    Row row{require_date(path, line, fields[0]), line.number, std::vector<double>(k)};
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double v = require_double(path, line, fields[i + 1], "probability");
      if (!std::isfinite(v)) throw IngestError(path.string(), line.number, "non-finite probability");
      if (v < 0.0) throw IngestError(path.string(), line.number, "negative probability");
      row.probs[i] = v;
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRenormaliseTolerance) {
      throw IngestError(path.string(), line.number,
                        "row sums to " + format_double(sum) + ", not 1 within 1e-6");
    }
    if (sum != 1.0) {
      for (double& v : row.probs) v /= sum;
    }
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].date == rows[i - 1].date) {
      throw IngestError(path.string(), std::max(rows[i].line, rows[i - 1].line),
                        "duplicate date " + rows[i].date.iso());
    }
  }

  std::vector<Date> dates;
  std::vector<double> cells;
  dates.reserve(rows.size());
  cells.reserve(rows.size() * k);
  for (auto& r : rows) {
    dates.push_back(r.date);
    cells.insert(cells.end(), r.probs.begin(), r.probs.end());
  }
  if (source_id.empty()) source_id = path.stem().string();
  return ThetaMatrix(std::move(source_id), std::move(dates), std::move(cells), k);
}

void write_theta(const fs::path& path, const ThetaMatrix& m) {
  std::string out = "date";
  for (std::size_t i = 0; i < m.topics(); ++i) out += ",topic_" + std::to_string(i);
  out += '\n';
  for (std::size_t r = 0; r < m.size(); ++r) {
    out += m.dates()[r].iso();
    for (double p : m.row(r)) {
      out += ',';
      out += format_double(p);
    }
    out += '\n';
  }
  write_text(path, out);
}

std::vector<ThetaMatrix> ingest_theta_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IngestError(dir.string(), 0, "not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".csv" || ext == ".tsv")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ThetaMatrix> out;
  for (const auto& f : files) out.push_back(ingest_theta(f));
  return out;
}

std::vector<EventRecord> ingest_events(const fs::path& path, std::vector<std::string>* warnings) {
  const auto lines = read_lines(path);
  std::vector<EventRecord> events;
  if (lines.empty()) {
    if (warnings) warnings->push_back(path.string() + ": empty event file");
    return events;
  }
  const char delim = detect_delimiter(lines.front().text);
  std::size_t start = 0;
  {
    const auto first = split_line(lines.front().text, delim);
    if (first.size() == 2 && trim(first[0]) == "name" && trim(first[1]) == "date") start = 1;
  }
  for (std::size_t li = start; li < lines.size(); ++li) {
    const auto fields = split_line(lines[li].text, delim);
    if (fields.size() != 2) {
      throw IngestError(path.string(), lines[li].number, "expected name,date");
    }
    events.push_back({std::string(trim(fields[0])), require_date(path, lines[li], fields[1])});
  }
  if (events.empty() && warnings) warnings->push_back(path.string() + ": no events");
  return events;
}

void write_events(const fs::path& path, const std::vector<EventRecord>& events) {
  std::string out = "name,date\n";
  for (const auto& e : events) out += csv_row({e.name, e.date.iso()});
  write_text(path, out);
}

void write_curve(const fs::path& path, const jumpflow::JumpEntropyCurve& curve) {
  std::string out = "offset,value,support\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out += std::to_string(curve.offsets[i]) + ',' +
           (curve.values[i] ? format_double(*curve.values[i]) : std::string()) + ',' +
           std::to_string(curve.support[i]) + '\n';
  }
  write_text(path, out);
}

void write_flows(const fs::path& path, const std::vector<jumpflow::EventFlow>& flows) {
  std::string out = "source,event,date,offset,value,support\n";
  for (const auto& f : flows) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      out += csv_row({f.source_id, f.event.name, f.event.date.iso(), std::to_string(f.offsets[i]),
                      format_double(f.values[i]), std::to_string(f.support[i])});
    }
  }
  write_text(path, out);
}

std::vector<jumpflow::EventFlow> read_flows(const fs::path& path) {
  const auto lines = read_lines(path);
  expect_header(path, lines, {"source", "event", "date", "offset", "value", "support"});
  std::vector<jumpflow::EventFlow> flows;
  std::map<std::tuple<std::string, std::string, std::int64_t>, std::size_t> slot;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto& line = lines[li];
    const auto fields = split_line(line.text);
    if (fields.size() != 6) throw IngestError(path.string(), line.number, "expected 6 fields");
    const Date date = require_date(path, line, fields[2]);
    std::int64_t offset = 0;
    std::size_t support = 0;
    if (!parse_int(fields[3], offset) || !parse_int(fields[5], support)) {
      throw IngestError(path.string(), line.number, "bad offset or support");
    }
    const double value = require_double(path, line, fields[4], "value");
    auto key = std::make_tuple(fields[0], fields[1], date.days());
    auto [it, inserted] = slot.try_emplace(key, flows.size());
    if (inserted) {
      flows.emplace_back();
      flows.back().source_id = fields[0];
      flows.back().event = {fields[1], date};
    }
    auto& f = flows[it->second];
    if (!f.offsets.empty() && offset <= f.offsets.back()) {
      throw IngestError(path.string(), line.number, "flow offsets must increase");
    }
    f.offsets.push_back(offset);
    f.values.push_back(value);
    f.support.push_back(support);
  }
  return flows;
}

void write_coverage(const fs::path& path, const std::vector<jumpflow::CoverageMiss>& misses) {
  std::string out = "source,event,date,reason\n";
  for (const auto& m : misses) {
    out += csv_row({m.source_id, m.event.name, m.event.date.iso(), m.reason});
  }
  write_text(path, out);
}

void write_distance_matrix(const fs::path& path, const clustering::DistanceMatrix& dm) {
  std::string out = "id";
  for (const auto& id : dm.ids()) out += ',' + quote_field(id);
  out += '\n';
  for (std::size_t i = 0; i < dm.size(); ++i) {
    out += quote_field(dm.ids()[i]);
    for (std::size_t j = 0; j < dm.size(); ++j) out += ',' + format_double(dm(i, j));
    out += '\n';
  }
  write_text(path, out);
}

clustering::DistanceMatrix read_distance_matrix(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw IngestError(path.string(), 0, "empty distance matrix");
  auto header = split_line(lines.front().text);
  if (header.empty() || header.front() != "id") {
    throw IngestError(path.string(), lines.front().number, "header must start with 'id'");
  }
  std::vector<std::string> ids(header.begin() + 1, header.end());
  const std::size_t n = ids.size();
  if (lines.size() != n + 1) throw IngestError(path.string(), 0, "matrix is not square");
  std::vector<double> values;
  values.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& line = lines[i + 1];
    const auto fields = split_line(line.text);
    if (fields.size() != n + 1 || fields[0] != ids[i]) {
      throw IngestError(path.string(), line.number, "row does not match header id " + ids[i]);
    }
    for (std::size_t j = 0; j < n; ++j) values.push_back(require_double(path, line, fields[j + 1], "distance"));
  }
  try {
    return clustering::DistanceMatrix(std::move(ids), std::move(values));
  } catch (const DomainError& e) {
    throw IngestError(path.string(), 0, e.what());
  }
}

void write_deviations(const fs::path& path, const studies::DeviationTable& table) {
  std::string out = "source,anchor,date,distance\n";
  for (const auto& r : table.rows) {
    out += csv_row({r.source_id, r.anchor, r.date.iso(), format_double(r.distance)});
  }
  write_text(path, out);
}

studies::DeviationTable read_deviations(const fs::path& path) {
  const auto lines = read_lines(path);
  expect_header(path, lines, {"source", "anchor", "date", "distance"});
  studies::DeviationTable table;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto fields = split_line(lines[li].text);
    if (fields.size() != 4) throw IngestError(path.string(), lines[li].number, "expected 4 fields");
    table.rows.push_back({fields[0], fields[1], require_date(path, lines[li], fields[2]),
                          require_double(path, lines[li], fields[3], "distance")});
  }
  return table;
}

void write_decades(const fs::path& path, const std::vector<studies::DecadeRow>& rows) {
  std::string out = "source,decade,n,mean,ci_low,ci_high,degenerate\n";
  for (const auto& r : rows) {
    out += csv_row({r.source_id, std::to_string(r.decade), std::to_string(r.n), format_double(r.mean),
                    format_double(r.ci_low), format_double(r.ci_high), r.degenerate ? "1" : "0"});
  }
  write_text(path, out);
}

std::vector<studies::DecadeRow> read_decades(const fs::path& path) {
  const auto lines = read_lines(path);
  expect_header(path, lines, {"source", "decade", "n", "mean", "ci_low", "ci_high", "degenerate"});
  std::vector<studies::DecadeRow> rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto& line = lines[li];
    const auto f = split_line(line.text);
    if (f.size() != 7) throw IngestError(path.string(), line.number, "expected 7 fields");
    studies::DecadeRow r;
    r.source_id = f[0];
    if (!parse_int(f[1], r.decade) || !parse_int(f[2], r.n)) {
      throw IngestError(path.string(), line.number, "bad decade or count");
    }
    r.mean = require_double(path, line, f[3], "mean");
    r.ci_low = require_double(path, line, f[4], "ci_low");
    r.ci_high = require_double(path, line, f[5], "ci_high");
    r.degenerate = trim(f[6]) == "1";
    rows.push_back(r);
  }
  return rows;
}

void write_matches(const fs::path& path, const std::vector<studies::QueryMatch>& matches) {
  std::string out = "rank,source,center,window_start,cost\n";
  for (const auto& m : matches) {
    out += csv_row({std::to_string(m.rank), m.source_id, m.center.iso(), m.window_start.iso(),
                    format_double(m.cost)});
  }
  write_text(path, out);
}

std::vector<double> read_series(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw IngestError(path.string(), 0, "empty series file");
  const auto header = split_line(lines.front().text);
  std::size_t start = 0;
  std::size_t column = header.size() >= 2 ? 1 : 0;
  double probe = 0.0;
  if (!parse_double(header[column], probe)) {
    start = 1;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == "value") column = i;
    }
  }
  std::vector<double> values;
  for (std::size_t li = start; li < lines.size(); ++li) {
    const auto fields = split_line(lines[li].text);
    if (fields.size() <= column) throw IngestError(path.string(), lines[li].number, "missing value column");
    values.push_back(require_double(path, lines[li], fields[column], "value"));
  }
  return values;
}

void write_series(const fs::path& path, std::span<const double> values,
                  std::span<const std::int64_t> offsets) {
  std::string out = "offset,value\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    out += std::to_string(i < offsets.size() ? offsets[i] : static_cast<std::int64_t>(i)) + ',' +
           format_double(values[i]) + '\n';
  }
  write_text(path, out);
}

void write_model(const fs::path& path, const clustering::ClusterModel& model) {
  json j;
  j["k"] = model.k;
  j["linkage"] = std::string(clustering::to_string(model.linkage));
  j["space"] = std::string(clustering::to_string(model.space));
  j["silhouette"] = model.silhouette;
  j["ids"] = model.ids;
  j["labels"] = model.labels;
  json grid = json::array();
  for (const auto& g : model.grid) {
    grid.push_back({{"k", g.k}, {"linkage", std::string(clustering::to_string(g.linkage))},
                    {"silhouette", g.silhouette}});
  }
  j["grid"] = grid;
  json merges = json::array();
  for (const auto& m : model.dendrogram.merges) {
    merges.push_back({{"a", m.a}, {"b", m.b}, {"height", m.height}, {"size", m.size}});
  }
  j["dendrogram"] = {{"leaves", model.dendrogram.leaves},
                     {"merges", merges},
                     {"inversions", model.dendrogram.inversions}};
  json arche = json::array();
  for (const auto& a : model.archetypes) arche.push_back(barycenter_json(a));
  j["archetypes"] = arche;
  json coords = json::array();
  for (const auto& c : model.embedding.coords) coords.push_back({c[0], c[1]});
  j["embedding"] = {{"coords", coords},
                    {"stress", model.embedding.stress},
                    {"degenerate", model.embedding.degenerate}};
  write_text(path, j.dump(2) + "\n");
}

clustering::ClusterModel read_model(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
    clustering::ClusterModel m;
    m.k = j.at("k").get<std::size_t>();
    m.linkage = clustering::linkage_from_string(j.at("linkage").get<std::string>());
    m.space = clustering::cluster_space_from_string(j.value("space", std::string("dtw")));
    m.silhouette = j.at("silhouette").get<double>();
    m.ids = j.at("ids").get<std::vector<std::string>>();
    m.labels = j.at("labels").get<std::vector<std::size_t>>();
    for (const auto& g : j.at("grid")) {
      m.grid.push_back({g.at("k").get<std::size_t>(),
                        clustering::linkage_from_string(g.at("linkage").get<std::string>()),
                        g.at("silhouette").get<double>()});
    }
    const auto& d = j.at("dendrogram");
    m.dendrogram.leaves = d.at("leaves").get<std::size_t>();
    for (const auto& mg : d.at("merges")) {
      m.dendrogram.merges.push_back({mg.at("a").get<std::size_t>(), mg.at("b").get<std::size_t>(),
                                     mg.at("height").get<double>(), mg.at("size").get<std::size_t>()});
    }
    m.dendrogram.inversions = d.value("inversions", std::vector<std::size_t>{});
    for (const auto& a : j.at("archetypes")) m.archetypes.push_back(barycenter_from_json(a));
    const auto& e = j.at("embedding");
    for (const auto& c : e.at("coords")) m.embedding.coords.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
    m.embedding.stress = e.at("stress").get<double>();
    m.embedding.degenerate = e.at("degenerate").get<bool>();
    return m;
  } catch (const json::exception& e) {
    throw IngestError(path.string(), 0, std::string("malformed model: ") + e.what());
  }
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError(path.string(), 0, "cannot open file for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error("sha256: digest initialisation failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[md[i] >> 4];
    hex += kHex[md[i] & 0xF];
  }
  return hex;
}

void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error("write failed for " + path.string());
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError(path.string(), 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace eventflow::io
