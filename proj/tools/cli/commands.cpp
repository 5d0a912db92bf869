#include "cli/commands.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include <CLI11.hpp>

#include "eventflow/error.hpp"
#include "eventflow/io.hpp"
#include "eventflow/parallel.hpp"
#include "eventflow/plot.hpp"
#include "eventflow/synth.hpp"

#ifndef EVENTFLOW_VERSION
#define EVENTFLOW_VERSION "0.0.0"
#endif

namespace eventflow::cli {

using nlohmann::json;

namespace {

// Collects every artifact path so the manifest can list them; writes happen on
// the calling thread only.
class Emitter {
 public:
  Emitter(const fs::path& root, RunResult& result) : root_(root), result_(result) {}

  fs::path operator()(const fs::path& rel) {
    result_.outputs.push_back(rel);
    return root_ / rel;
  }

 private:
  fs::path root_;
  RunResult& result_;
};

std::vector<fs::path> theta_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".csv" || ext == ".tsv")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<ThetaMatrix> load_corpora(const RunConfig& cfg, RunResult& res) {
  const std::set<std::string> excluded(cfg.exclude_sources.begin(), cfg.exclude_sources.end());
  std::vector<ThetaMatrix> corpora;
  for (const auto& f : theta_files(cfg.input_dir)) {
    if (excluded.count(f.stem().string())) continue;
    res.inputs.push_back(f);
    corpora.push_back(io::ingest_theta(f));
  }
  if (corpora.empty()) throw IngestError(cfg.input_dir.string(), 0, "no theta files (*.csv, *.tsv)");
  return corpora;
}

std::vector<EventRecord> load_events(const RunConfig& cfg, RunResult& res) {
  res.inputs.push_back(cfg.events);
  return io::ingest_events(cfg.events, &res.warnings);
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += io::quote_field(fields[i]);
  }
  return out + "\n";
}

std::vector<std::int64_t> centered_offsets(std::size_t length) {
  const auto half = static_cast<std::int64_t>((length - 1) / 2);
  std::vector<std::int64_t> offsets(length);
  for (std::size_t i = 0; i < length; ++i) offsets[i] = static_cast<std::int64_t>(i) - half;
  return offsets;
}

std::string ranking_csv(const studies::DeviationTable& table) {
  std::string out = "rank,source,mean_distance,anchors\n";
  std::size_t rank = 1;
  for (const auto& s : studies::rank_sources(table)) {
    out += csv_line({std::to_string(rank++), s.source_id, io::format_double(s.mean_distance),
                     std::to_string(s.anchors)});
  }
  return out;
}

void run_entropy(const RunConfig& cfg, RunResult& res, Emitter& emit) {
  const auto corpora = load_corpora(cfg, res);
  std::vector<EventRecord> focal;
  if (!cfg.events.empty()) focal = load_events(cfg, res);
  for (const auto& d : cfg.dates) focal.push_back({d.iso(), d});
  std::set<Date> seen;
  std::erase_if(focal, [&](const EventRecord& e) { return !seen.insert(e.date).second; });

  struct Task {
    std::size_t source;
    std::size_t event;
    std::optional<jumpflow::JumpEntropyCurve> curve;
    std::string reason;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < corpora.size(); ++s) {
    for (std::size_t e = 0; e < focal.size(); ++e) tasks.push_back({s, e, std::nullopt, {}});
  }
  parallel_for(tasks.size(), cfg.workers, [&](std::size_t i) {
    auto& t = tasks[i];
    try {
      t.curve = jumpflow::jump_entropy_curve(corpora[t.source], focal[t.event].date, cfg.jump);
    } catch (const DomainError& e) {
      t.reason = e.what();
    } catch (const EmptyCurveError& e) {
      t.reason = e.what();
    }
  });

  std::vector<jumpflow::CoverageMiss> misses;
  std::size_t written = 0;
  for (const auto& t : tasks) {
    const auto& src = corpora[t.source].source_id();
    if (t.curve) {
      io::write_curve(emit(fs::path("entropy") / (src + "__" + focal[t.event].date.iso() + ".csv")), *t.curve);
      ++written;
    } else {
      misses.push_back({src, focal[t.event], t.reason});
    }
  }
  io::write_coverage(emit("coverage.csv"), misses);
  if (written == 0) throw CoverageError("no source covers any focal date");
}

std::vector<jumpflow::EventFlow> compute_flows(const RunConfig& cfg, RunResult& res, Emitter& emit,
                                               const std::string& command) {
  const auto corpora = load_corpora(cfg, res);
  const auto events = load_events(cfg, res);
  auto table = jumpflow::batch_event_flows(corpora, events, cfg.flow_params(command));
  io::write_flows(emit("flows.csv"), table.flows);
  io::write_coverage(emit("coverage.csv"), table.misses);
  if (table.flows.empty()) throw CoverageError("no (source, event) pair yields a flow");
  return std::move(table.flows);
}

void run_cluster(const RunConfig& cfg, RunResult& res, Emitter& emit) {
  std::vector<jumpflow::EventFlow> flows;
  if (!cfg.flows.empty()) {
    res.inputs.push_back(cfg.flows);
    flows = io::read_flows(cfg.flows);
    const std::set<std::string> excluded(cfg.exclude_sources.begin(), cfg.exclude_sources.end());
    std::erase_if(flows, [&](const jumpflow::EventFlow& f) { return excluded.count(f.source_id) > 0; });
  } else {
    flows = compute_flows(cfg, res, emit, "cluster");
  }
  std::vector<std::vector<double>> series;
  std::vector<std::string> ids;
  for (const auto& f : flows) {
    series.push_back(f.values);
    ids.push_back(clustering::flow_id(f));
  }
  if (series.size() < 3) throw DomainError("cluster: need at least 3 flows, got " + std::to_string(series.size()));

  clustering::ClusterOptions opts;
  opts.k_min = cfg.k_min;
  opts.k_max = cfg.k_max;
  opts.linkages = cfg.linkages;
  opts.space = cfg.space;
  opts.workers = cfg.workers;
  const auto dm = clustering::pairwise_dtw(series, ids, cfg.workers);
  const auto model = clustering::fit(series, dm, opts);

  io::write_distance_matrix(emit("distances.csv"), dm);
  io::write_model(emit("model.json"), model);

  std::string assign = "id,source,event,date,label\n";
  for (std::size_t i = 0; i < flows.size(); ++i) {
    assign += csv_line({ids[i], flows[i].source_id, flows[i].event.name, flows[i].event.date.iso(),
                        std::to_string(model.labels[i])});
  }
  io::write_text(emit("assignments.csv"), assign);

  std::string arche = "cluster,offset,value\n";
  for (std::size_t c = 0; c < model.archetypes.size(); ++c) {
    const auto& values = model.archetypes[c].values;
    const auto offsets = centered_offsets(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      arche += csv_line({std::to_string(c), std::to_string(offsets[i]), io::format_double(values[i])});
    }
    io::write_series(emit("archetype_" + std::to_string(c) + ".csv"), values, offsets);
  }
  io::write_text(emit("archetypes.csv"), arche);
  std::cout << "cluster: " << flows.size() << " flows, k=" << model.k << " ("
            << clustering::to_string(model.linkage) << "), silhouette "
            << io::format_double(model.silhouette) << "\n";
}

void run_baseline(const RunConfig& cfg, RunResult& res, Emitter& emit) {
  const auto corpora = load_corpora(cfg, res);
  studies::BaselineParams params;
  params.flow = cfg.flow_params("baseline");
  params.consensus = cfg.consensus_options();
  const auto table = studies::random_date_baseline(corpora, cfg.n_dates, cfg.seed, params);
  io::write_deviations(emit("baseline.csv"), table);
  io::write_decades(emit("baseline_decades.csv"), studies::decade_aggregate(table));
  io::write_text(emit("baseline_ranking.csv"), ranking_csv(table));
  if (!cfg.events.empty()) {
    const auto events = load_events(cfg, res);
    const auto ev = studies::event_deviation(corpora, events, params);
    io::write_deviations(emit("event_deviation.csv"), ev);
    io::write_decades(emit("event_decades.csv"), studies::decade_aggregate(ev));
    io::write_text(emit("event_ranking.csv"), ranking_csv(ev));
  }
}

void run_query(const RunConfig& cfg, RunResult& res, Emitter& emit) {
  const auto corpora = load_corpora(cfg, res);
  res.inputs.push_back(cfg.templ);
  const auto raw = io::read_series(cfg.templ);
  if (raw.size() < 3 || raw.size() % 2 == 0) {
    throw ConfigError("template must hold an odd number (>= 3) of values, got " + std::to_string(raw.size()));
  }
  const auto half = static_cast<std::int64_t>((raw.size() - 1) / 2);
  if (cfg.flow_window && *cfg.flow_window != half) {
    throw ConfigError("flow_window " + std::to_string(*cfg.flow_window) + " does not match template half-width " +
                      std::to_string(half));
  }
  const auto templ = z_normalize(std::span<const double>(raw));
  studies::QueryConfig q;
  q.flow = cfg.flow_params("query");
  q.flow.flow_half_width = half;
  q.stride = cfg.stride;
  q.band = cfg.band;
  q.top_n = cfg.top_n;
  std::vector<studies::QueryMatch> all;
  for (const auto& m : corpora) {
    const auto matches = studies::query_by_template(m, templ, q);
    all.insert(all.end(), matches.begin(), matches.end());
  }
  io::write_matches(emit("query.csv"), all);
}

void run_simulate(const RunConfig& cfg, RunResult& res, Emitter& emit) {
  const auto b = synth::standard_benchmark(cfg.seed, cfg.depth);
  for (auto& w : synth::overlap_warnings(b.plan)) res.warnings.push_back(std::move(w));
  for (const auto& m : b.corpora) io::write_theta(emit(fs::path("corpora") / (m.source_id() + ".csv")), m);
  io::write_events(emit("events.csv"), b.events);
  std::string labels = "name,date,label,shape\n";
  for (std::size_t i = 0; i < b.events.size(); ++i) {
    labels += csv_line({b.events[i].name, b.events[i].date.iso(), std::to_string(b.labels[i]),
                        std::string(synth::to_string(b.archetypes[b.labels[i]].shape))});
  }
  io::write_text(emit("planted_labels.csv"), labels);
  const auto params = cfg.flow_params("simulate");
  for (std::size_t a = 0; a < b.archetypes.size(); ++a) {
    const auto ref = synth::reference_flow(b.archetypes[a], params, 50, synth::derive_seed(cfg.seed, 1000 + a));
    io::write_series(emit(fs::path("templates") / (std::string(synth::to_string(b.archetypes[a].shape)) + ".csv")),
                     ref, centered_offsets(ref.size()));
  }
}

void run_plot(const RunConfig& cfg, RunResult& res, Emitter& emit) {
  const fs::path dir = cfg.input_dir.empty() ? cfg.out : cfg.input_dir;
  auto input = [&](const char* name) -> std::optional<fs::path> {
    const fs::path p = dir / name;
    if (!fs::is_regular_file(p)) return std::nullopt;
    res.inputs.push_back(p);
    return p;
  };
  std::size_t figures = 0;
  std::vector<jumpflow::EventFlow> flows;
  if (const auto p = input("flows.csv")) {
    flows = io::read_flows(*p);
    plot::event_flows(emit("fig2_event_flows.svg"), flows, 5);
    ++figures;

    // Anchor with the most sources (earliest on ties) for the consensus figure.
    std::map<std::pair<Date, std::string>, std::vector<jumpflow::EventFlow>> groups;
    for (const auto& f : flows) groups[{f.event.date, f.event.name}].push_back(f);
    const std::vector<jumpflow::EventFlow>* best = nullptr;
    for (const auto& [key, g] : groups) {
      if (!best || g.size() > best->size()) best = &g;
    }
    if (best && best->size() >= 2) {
      auto opts = cfg.consensus_options();
      opts.mode = studies::ConsensusMode::dba;
      const auto dba = studies::consensus_flow(*best, opts);
      opts.mode = studies::ConsensusMode::soft_dba;
      const auto soft = studies::consensus_flow(*best, opts);
      plot::consensus(emit("fig4_consensus.svg"), *best, dba, soft, best->front().event.name);
      ++figures;
    }
  }
  if (const auto p = input("model.json")) {
    const auto model = io::read_model(*p);
    std::map<std::string, const std::vector<double>*> by_id;
    for (const auto& f : flows) by_id[clustering::flow_id(f)] = &f.values;
    std::vector<std::vector<double>> series;
    for (const auto& id : model.ids) {
      if (auto it = by_id.find(id); it != by_id.end()) {
        series.push_back(*it->second);
      } else {
        series.clear();
        break;
      }
    }
    if (!flows.empty() && series.empty()) res.warnings.push_back("model ids do not match flows.csv; member traces omitted");
    plot::embedding(emit("fig5_embedding.svg"), model);
    plot::clusters(emit("fig7_clusters.svg"), model, series);
    figures += 2;
  }
  std::optional<fs::path> dec = input("baseline_decades.csv");
  if (!dec) dec = input("event_decades.csv");
  if (dec) {
    plot::decades(emit("fig8_decades.svg"), io::read_decades(*dec));
    ++figures;
  }
  std::optional<fs::path> dev = input("event_deviation.csv");
  if (!dev) dev = input("baseline.csv");
  if (dev) {
    plot::deviation_heatmap(emit("fig9_deviation_heatmap.svg"), io::read_deviations(*dev));
    ++figures;
  }
  if (figures == 0) throw ConfigError("nothing to plot in " + dir.string());
}

std::string error_type(const std::exception& e) {
  if (dynamic_cast<const IngestError*>(&e)) return "IngestError";
  if (dynamic_cast<const CoverageError*>(&e)) return "CoverageError";
  if (dynamic_cast<const EmptyWindowError*>(&e)) return "EmptyWindowError";
  if (dynamic_cast<const EmptyCurveError*>(&e)) return "EmptyCurveError";
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  if (dynamic_cast<const SupportError*>(&e)) return "SupportError";
  if (dynamic_cast<const NumericError*>(&e)) return "NumericError";
  if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
  if (dynamic_cast<const CLI::Error*>(&e)) return "UsageError";
  return "InternalError";
}

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
  bool list = false;
};

const std::vector<FlagSpec>& flag_specs() {
  static const std::vector<FlagSpec> specs{
      {"--input-dir", "input_dir", "directory of theta files (plot: results directory)"},
      {"--events", "events", "event list, name,date"},
      {"--out", "out", "output directory"},
      {"--template", "template", "query template series (offset,value)"},
      {"--flows", "flows", "precomputed flows.csv for cluster"},
      {"--seed", "seed", "random seed"},
      {"--window", "window", "jump entropy half-width in days"},
      {"--flow-window", "flow_window", "event flow half-width in days"},
      {"--jump-min", "jump_min", "smallest jump in days"},
      {"--jump-max", "jump_max", "largest jump in days"},
      {"--jump-step", "jump_step", "jump grid step in days"},
      {"--smoothing", "smoothing", "rolling-mean length applied to flows"},
      {"--exclude-source", "exclude_source", "source id to leave out (repeatable)", true},
      {"--k-range", "k_range", "cluster count range, e.g. 2:8"},
      {"--linkage", "linkage", "average, complete or single (repeatable)", true},
      {"--space", "space", "cluster on dtw distances or the 2-D embedding"},
      {"--workers", "workers", "worker threads (0 = hardware)"},
      {"--stride", "stride", "query candidate stride in days"},
      {"--band", "band", "Sakoe-Chiba band for query DTW"},
      {"--n-dates", "n_dates", "random anchor dates for baseline"},
      {"--depth", "depth", "planted event depth for simulate"},
      {"--top-n", "top_n", "matches kept per source (0 = all)"},
      {"--date", "dates", "focal date for entropy (repeatable)", true},
      {"--consensus", "consensus", "dba or soft_dba"},
      {"--gamma", "gamma", "soft-DTW smoothing"},
  };
  return specs;
}

}  // namespace

const char* tool_version() { return EVENTFLOW_VERSION; }

RunResult run_command(const std::string& command, const RunConfig& cfg) {
  cfg.validate(command);
  RunResult res;
  Emitter emit(cfg.out, res);
  if (command == "entropy") {
    run_entropy(cfg, res, emit);
  } else if (command == "flows") {
    compute_flows(cfg, res, emit, "flows");
  } else if (command == "cluster") {
    run_cluster(cfg, res, emit);
  } else if (command == "baseline") {
    run_baseline(cfg, res, emit);
  } else if (command == "query") {
    run_query(cfg, res, emit);
  } else if (command == "simulate") {
    run_simulate(cfg, res, emit);
  } else if (command == "plot") {
    run_plot(cfg, res, emit);
  } else {
    throw ConfigError("unknown command '" + command + "'");
  }
  return res;
}

void write_manifest(const std::string& command, const RunConfig& cfg, const RunResult& result) {
  json inputs = json::array();
  for (const auto& p : result.inputs) {
    inputs.push_back({{"path", p.generic_string()}, {"sha256", io::sha256_file(p)}});
  }
  json outputs = json::array();
  for (const auto& p : result.outputs) {
    outputs.push_back({{"path", p.generic_string()}, {"sha256", io::sha256_file(cfg.out / p)}});
  }
  json doc;
  doc["tool"] = "eventflow";
  doc["version"] = tool_version();
  doc["command"] = command;
  doc["seed"] = cfg.seed;
  doc["config"] = to_json(cfg, command);
  doc["inputs"] = inputs;
  doc["outputs"] = outputs;
  doc["warnings"] = result.warnings;
  io::write_text(cfg.out / ("manifest-" + command + ".json"), doc.dump(2) + "\n");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const CLI::Error*>(&e)) return 2;
  if (dynamic_cast<const IngestError*>(&e) || dynamic_cast<const CoverageError*>(&e) ||
      dynamic_cast<const DomainError*>(&e) || dynamic_cast<const EmptyWindowError*>(&e) ||
      dynamic_cast<const EmptyCurveError*>(&e) || dynamic_cast<const json::exception*>(&e)) {
    return 3;
  }
  if (dynamic_cast<const NumericError*>(&e) || dynamic_cast<const SupportError*>(&e)) return 4;
  return 1;
}

json error_record(const std::string& command, const std::exception& e) {
  json err{{"command", command},
           {"type", error_type(e)},
           {"message", e.what()},
           {"exit_code", exit_code_for(e)}};
  if (const auto* ie = dynamic_cast<const IngestError*>(&e)) err["line"] = ie->line();
  return {{"error", err}};
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Event flows in serial text corpora"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);

  std::string config_path;
  std::map<std::string, std::string> scalar_values;
  std::map<std::string, std::vector<std::string>> list_values;
  std::map<std::string, std::vector<std::pair<std::string, CLI::Option*>>> given;

  const std::map<std::string, std::string> about{
      {"entropy", "Jump Entropy curves per source and focal date"},
      {"flows", "event flows for every (source, event) pair"},
      {"cluster", "pairwise DTW, hierarchical clustering and archetypes"},
      {"baseline", "distance to consensus on random dates (and events)"},
      {"query", "rank date ranges by DTW distance to a template"},
      {"simulate", "write the synthetic benchmark corpora"},
      {"plot", "SVG figures from a results directory"},
  };
  for (const auto& name : kCommands) {
    auto* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--config", config_path, "JSON config file or run manifest");
    for (const auto& spec : flag_specs()) {
      CLI::Option* opt = spec.list ? sub->add_option(spec.flag, list_values[spec.key], spec.help)
                                   : sub->add_option(spec.flag, scalar_values[spec.key], spec.help);
      given[name].emplace_back(spec.key, opt);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << error_record("", e).dump() << "\n";
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  std::map<std::string, std::string> flags;
  for (const auto& [key, opt] : given[command]) {
    if (opt->count() == 0) continue;
    if (list_values.count(key)) {
      std::string joined;
      for (const auto& v : list_values[key]) joined += (joined.empty() ? "" : ",") + v;
      flags[key] = joined;
    } else {
      flags[key] = scalar_values[key];
    }
  }

  std::optional<fs::path> out_dir;
  if (flags.count("out")) out_dir = flags["out"];
  try {
    const auto doc = resolve(config_path.empty() ? std::nullopt : std::optional<fs::path>(config_path), flags);
    const RunConfig cfg = from_json(doc);
    out_dir = cfg.out;
    const auto result = run_command(command, cfg);
    write_manifest(command, cfg, result);
    std::error_code ec;
    fs::remove(cfg.out / "error.json", ec);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << command << ": wrote " << result.outputs.size() << " artifacts to " << cfg.out.generic_string()
              << "\n";
    return 0;
  } catch (const std::exception& e) {
    const auto record = error_record(command, e);
    std::cerr << record.dump() << "\n";
    if (out_dir) {
      try {
        io::write_text(*out_dir / "error.json", record.dump(2) + "\n");
      } catch (const std::exception&) {
      }
    }
    return exit_code_for(e);
  }
}

}  // namespace eventflow::cli
