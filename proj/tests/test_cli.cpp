#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cli/commands.hpp"
#include "cli/run_config.hpp"
#include "eventflow/error.hpp"
#include "eventflow/io.hpp"
#include "fixtures.hpp"

using namespace eventflow;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("eventflow_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "eventflow");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run_cli(static_cast<int>(argv.size()), argv.data());
}

void write_json(const fs::path& p, const json& doc) { std::ofstream(p) << doc.dump(2); }

json read_json(const fs::path& p) { return json::parse(io::read_text(p)); }

}  // namespace

TEST_CASE("config precedence: file, then environment, then flags") {
  TempDir tmp;
  write_json(tmp.path / "cfg.json", {{"seed", 1}, {"window", 5}, {"k_min", 3}});
  ::unsetenv("EVENTFLOW_SEED");
  auto doc = cli::resolve(tmp.path / "cfg.json", {});
  CHECK(doc["seed"] == 1);

  ::setenv("EVENTFLOW_SEED", "2", 1);
  doc = cli::resolve(tmp.path / "cfg.json", {});
  CHECK(doc["seed"] == 2);
  doc = cli::resolve(tmp.path / "cfg.json", {{"seed", "3"}});
  CHECK(doc["seed"] == 3);
  ::unsetenv("EVENTFLOW_SEED");

  const auto cfg = cli::from_json(doc);
  CHECK(cfg.seed == 3);
  CHECK(cfg.jump.half_width == 5);
  CHECK(cfg.k_min == 3);
  CHECK(cfg.k_max == 8);
}

TEST_CASE("config files and overrides are validated") {
  TempDir tmp;
  write_json(tmp.path / "manifest-flows.json", {{"tool", "eventflow"}, {"config", {{"seed", 9}, {"jump_step", 5}}}});
  const auto m = cli::load_config_file(tmp.path / "manifest-flows.json");
  CHECK(m["seed"] == 9);
  CHECK(cli::from_json(m).jump.jump_step == 5);

  write_json(tmp.path / "bad.json", {{"seeed", 9}});
  CHECK_THROWS_AS(cli::load_config_file(tmp.path / "bad.json"), ConfigError);
  CHECK_THROWS_AS(cli::load_config_file(tmp.path / "none.json"), ConfigError);
  std::ofstream(tmp.path / "broken.json") << "{\"seed\": ";
  CHECK_THROWS_AS(cli::load_config_file(tmp.path / "broken.json"), ConfigError);

  json doc = json::object();
  cli::apply_override(doc, "k_range", "3:5");
  CHECK(doc["k_min"] == 3);
  CHECK(doc["k_max"] == 5);
  CHECK_THROWS_AS(cli::apply_override(doc, "k_range", "5"), ConfigError);
  CHECK_THROWS_AS(cli::apply_override(doc, "seed", "abc"), ConfigError);
  CHECK_THROWS_AS(cli::apply_override(doc, "colour", "red"), ConfigError);
  cli::apply_override(doc, "exclude_source", "A,B");
  CHECK(cli::from_json(doc).exclude_sources == std::vector<std::string>{"A", "B"});
  CHECK_THROWS_AS(cli::from_json({{"seed", "seven"}}), ConfigError);
}

TEST_CASE("config echo round trips") {
  cli::RunConfig cfg;
  cfg.seed = 77;
  cfg.flow_window = 20;
  cfg.linkages = {clustering::Linkage::complete, clustering::Linkage::single};
  cfg.dates = {Date::from_ymd(1969, 7, 21)};
  cfg.band = std::nullopt;
  const auto doc = cli::to_json(cfg, "query");
  const auto back = cli::from_json(doc);
  CHECK(cli::to_json(back, "query") == doc);
  CHECK(!back.band);
  CHECK(back.flow_half_width("baseline") == 20);
  CHECK(cli::RunConfig{}.flow_half_width("baseline") == 30);
  CHECK(cli::RunConfig{}.flow_half_width("flows") == 28);
  CHECK(cli::from_json(json::object()).band == std::optional<std::size_t>{2});
}

TEST_CASE("exit codes") {
  TempDir tmp;
  const auto out = (tmp.path / "out").string();
  CHECK(run({}) == 2);
  CHECK(run({"flows", "--input-dir", (tmp.path / "missing").string(), "--out", out}) == 2);
  CHECK(run({"cluster", "--k-range", "9:2", "--out", out}) == 2);
  CHECK(run({"flows", "--no-such-flag"}) == 2);

  fs::create_directories(tmp.path / "in");
  std::ofstream(tmp.path / "in" / "A.csv") << "date,topic_0,topic_1\n1960-01-01,0.5,0.5\n1960-01-01,0.5,0.5\n";
  std::ofstream(tmp.path / "ev.csv") << "name,date\nx,1960-01-01\n";
  CHECK(run({"flows", "--input-dir", (tmp.path / "in").string(), "--events", (tmp.path / "ev.csv").string(),
             "--out", out}) == 3);
  const auto err = read_json(tmp.path / "out" / "error.json");
  CHECK(err["error"]["exit_code"] == 3);
  CHECK(err["error"]["type"] == "IngestError");
  CHECK(err["error"]["line"] == 3);

  CHECK(cli::exit_code_for(ConfigError("x")) == 2);
  CHECK(cli::exit_code_for(CoverageError("x")) == 3);
  CHECK(cli::exit_code_for(EmptyWindowError("x")) == 3);
  CHECK(cli::exit_code_for(NumericError("x")) == 4);
  CHECK(cli::exit_code_for(SupportError("x")) == 4);
  CHECK(cli::exit_code_for(std::runtime_error("x")) == 1);
}

TEST_CASE("entropy on a constant corpus writes an all-zero curve") {
  TempDir tmp;
  fs::create_directories(tmp.path / "in");
  io::write_theta(tmp.path / "in" / "flat.csv", fixture::constant_corpus("flat", Date::from_ymd(1960, 1, 1), 240));
  const auto out = tmp.path / "out";
  REQUIRE(run({"entropy", "--input-dir", (tmp.path / "in").string(), "--date", "1960-05-01", "--jump-min", "-90",
               "--jump-max", "90", "--out", out.string()}) == 0);
  std::ifstream in(out / "entropy" / "flat__1960-05-01.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "offset,value,support");
  int rows = 0;
  while (std::getline(in, line)) {
    const auto f = io::split_line(line);
    REQUIRE(f.size() == 3);
    REQUIRE(!f[1].empty());
    CHECK(std::stod(f[1]) == 0.0);
    ++rows;
  }
  CHECK(rows == 13);
  const auto manifest = read_json(out / "manifest-entropy.json");
  CHECK(manifest["command"] == "entropy");
  CHECK(manifest["inputs"].size() == 1);
  CHECK(manifest["inputs"][0]["sha256"].get<std::string>().size() == 64);
}

TEST_CASE("simulate then cluster recovers four groups and reruns byte-identically") {
  TempDir tmp;
  const auto sim = tmp.path / "sim";
  const auto a = tmp.path / "a";
  const auto b = tmp.path / "b";
  REQUIRE(run({"simulate", "--seed", "2026", "--out", sim.string()}) == 0);
  CHECK(fs::exists(sim / "events.csv"));
  CHECK(fs::exists(sim / "planted_labels.csv"));
  REQUIRE(run({"cluster", "--input-dir", (sim / "corpora").string(), "--events", (sim / "events.csv").string(),
               "--out", a.string()}) == 0);
  const auto model = read_json(a / "model.json");
  CHECK(model["k"] == 4);

  REQUIRE(run({"cluster", "--config", (a / "manifest-cluster.json").string(), "--out", b.string()}) == 0);
  for (const char* f : {"flows.csv", "distances.csv", "model.json", "assignments.csv", "archetypes.csv"}) {
    CHECK_MESSAGE(io::read_text(a / f) == io::read_text(b / f), f);
  }
  auto ma = read_json(a / "manifest-cluster.json");
  auto mb = read_json(b / "manifest-cluster.json");
  CHECK(ma["outputs"] == mb["outputs"]);
  CHECK(ma["inputs"] == mb["inputs"]);
  CHECK(!fs::exists(a / "error.json"));
}
