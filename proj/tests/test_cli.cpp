#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <unistd.h>
#include <sys/wait.h>

#include "csv.hpp"
#include "experiment.hpp"
#include "plot.hpp"
#include "rpsd/error.hpp"

using namespace rpsd;
using namespace rpsd::bench;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("rpsd_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json small_config(const fs::path& out) {
  return json{{"loss", "logistic"},
              {"synthetic", {{"samples", 40}, {"dimension", 12}, {"planted", 2}, {"seed", 4}}},
              {"lambda2", 0.01},
              {"regularizer", {{"kind", "l1"}, {"lambda1", 0.02}}},
              {"algorithms", json::array({{{"kind", "pgd"}}, {{"kind", "rpsd"}, {"percent", 25}}, {{"kind", "arpsd"}, {"percent", 25}}})},
              {"seeds", {1, 2, 3}},
              {"max_iters", 60},
              {"output_dir", out.string()}};
}

int run_bench(const std::string& args) {
  const std::string cmd = std::string(RPSD_BENCH_EXE) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("config parsing fills defaults and labels") {
  const auto c = parse_config(small_config("o"));
  CHECK(c.algorithms.size() == 3);
  CHECK(algorithm_label(c.algorithms[0]) == "pgd");
  CHECK(algorithm_label(c.algorithms[1]) == "rpsd25");
  CHECK(algorithm_label(c.algorithms[2]) == "arpsd25");
  CHECK(c.algorithms[1].adaptation == Adaptation::None);
  CHECK(c.algorithms[2].adaptation == Adaptation::IdentificationDriven);
  CHECK(c.seeds == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(parse_config(to_json(c)).algorithms.size() == 3);
  CHECK(config_hash(parse_config(to_json(c))) == config_hash(c));
}

TEST_CASE("bad configs are rejected") {
  const auto broken = [](auto edit) {
    json j = small_config("o");
    edit(j);
    return j;
  };
  CHECK_THROWS_AS(parse_config(broken([](json& j) { j["algorithms"][1]["percent"] = 0; })), InvalidConfiguration);
  CHECK_THROWS_AS(parse_config(broken([](json& j) { j["algorithms"][1]["percent"] = 100.5; })), InvalidConfiguration);
  CHECK_NOTHROW(parse_config(broken([](json& j) { j["algorithms"][1]["percent"] = 100; })));
  CHECK_THROWS_AS(parse_config(broken([](json& j) { j["seeds"] = json::array(); })), InvalidConfiguration);
  CHECK_THROWS_AS(parse_config(broken([](json& j) { j["sedes"] = 1; })), InvalidConfiguration);
  CHECK_THROWS_AS(parse_config(broken([](json& j) { j["dataset"] = {{"path", "x"}}; })), InvalidConfiguration);
  CHECK_THROWS_AS(parse_config(broken([](json& j) { j["lambda2"] = "1/n"; })), InvalidConfiguration);
  CHECK_THROWS_AS(parse_config(broken([](json& j) { j["regularizer"]["kind"] = "l2"; })), InvalidConfiguration);
  CHECK_THROWS_AS(parse_config(broken([](json& j) { j["algorithms"][2]["kind"] = "rpsd"; })), InvalidConfiguration);
  CHECK_THROWS_AS(parse_config(broken([](json& j) { j["max_iters"] = "ten"; })), InvalidConfiguration);
  const fs::path dir = scratch("toml");
  write(dir / "c.toml", "seeds = [1]\n");
  CHECK_THROWS_AS(load_config(dir / "c.toml"), InvalidConfiguration);
  write(dir / "c.json", "{ not json");
  CHECK_THROWS_AS(load_config(dir / "c.json"), InvalidConfiguration);
}

TEST_CASE("config hash changes iff a field changes") {
  const json base = small_config("o");
  const std::string h0 = config_hash(parse_config(base));
  const std::vector<std::pair<std::string, json>> edits{
      {"/name", "other"},
      {"/loss", "least_squares"},
      {"/synthetic/samples", 41},
      {"/synthetic/seed", 5},
      {"/synthetic/noise", 0.1},
      {"/lambda2", 0.02},
      {"/lambda2", "1/m"},
      {"/regularizer/lambda1", 0.03},
      {"/regularizer/kind", "tv"},
      {"/algorithms/1/percent", 30},
      {"/algorithms/2/option", 1},
      {"/algorithms/2/adaptation", "cadence"},
      {"/algorithms/2/cadence", 7},
      {"/algorithms/2/beta", 1e-4},
      {"/seeds", json::array({1, 2})},
      {"/max_iters", 61},
      {"/stop_suboptimality", 1e-9},
      {"/reference_tol", 1e-11},
      {"/median", false},
  };
  for (const auto& [pointer, value] : edits) {
    json j = base;
    j[json::json_pointer(pointer)] = value;
    CAPTURE(pointer);
    CHECK(config_hash(parse_config(j)) != h0);
  }
  json same = base;
  same["synthetic"]["samples"] = 40;  // explicit default is the same config
  same["algorithms"][1]["option"] = 2;
  CHECK(config_hash(parse_config(same)) == h0);
  // Where results go and how many threads compute them are not part of the experiment.
  same["jobs"] = 4;
  same["output_dir"] = "elsewhere";
  CHECK(config_hash(parse_config(same)) == h0);
}

TEST_CASE("zero-iteration run writes only the first row") {
  const fs::path dir = scratch("zero");
  json j = small_config(dir);
  j["max_iters"] = 0;
  const auto out = run_experiment(parse_config(j));
  REQUIRE(out.runs.size() == 9);
  for (const auto& file : out.runs) {
    const CsvTable t = read_csv(file);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][t.column("iter")] == "0");
    // x0 = 0, so every logistic term is log 2 and the penalties vanish.
    const double sub = std::stod(t.rows[0][t.column("suboptimality")]);
    CHECK(std::abs(sub - (std::log(2.0) - out.f_star)) <= 1e-15);
    CHECK(t.rows[0][t.column("subspaces_explored")] == "0");
  }
}

TEST_CASE("same seed gives byte-identical CSVs, with or without threads") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  json ja = small_config(a), jb = small_config(b);
  jb["jobs"] = 3;
  const auto oa = run_experiment(parse_config(ja));
  const auto ob = run_experiment(parse_config(jb));
  REQUIRE(oa.runs.size() == ob.runs.size());
  for (std::size_t i = 0; i < oa.runs.size(); ++i) {
    CHECK(oa.runs[i].filename() == ob.runs[i].filename());
    CHECK(slurp(oa.runs[i]) == slurp(ob.runs[i]));
  }
  for (std::size_t i = 0; i < oa.medians.size(); ++i) CHECK(slurp(oa.medians[i]) == slurp(ob.medians[i]));
  // Different seeds draw different subspaces.
  CHECK(slurp(a / "rpsd25_seed1.csv") != slurp(a / "rpsd25_seed2.csv"));
}

TEST_CASE("run CSV schema and manifest") {
  const fs::path dir = scratch("manifest");
  const auto out = run_experiment(parse_config(small_config(dir)));
  const std::string text = slurp(dir / "arpsd25_seed2.csv");
  CHECK(text.rfind(std::string(kRunHeader) + "\r\n", 0) == 0);
  const CsvTable t = read_csv(dir / "arpsd25_seed2.csv");
  CHECK(t.rows.size() == 61);
  double running = 0;
  for (const auto& row : t.rows) {
    running += std::stod(row[t.column("selection_size")]);
    CHECK(std::stod(row[t.column("subspaces_explored")]) == running);
  }
  const CsvTable pgd = read_csv(dir / "pgd_seed1.csv");
  CHECK(pgd.rows[5][pgd.column("selection_size")] == "12");

  const json m = json::parse(slurp(out.manifest));
  CHECK(m["config_hash"] == config_hash(parse_config(small_config(dir))));
  CHECK(m["version"].get<std::string>() == version());
  CHECK(!version().empty());
  CHECK(m["f_star"].get<double>() == out.f_star);
  CHECK(m["reference"]["converged"].get<bool>());
  CHECK(m["runs"].size() == 9);
  CHECK(m["medians"].size() == 3);
  const CsvTable med = read_csv(dir / "rpsd25_median.csv");
  CHECK(med.header == std::vector<std::string>{"iter", "suboptimality", "pattern_size", "subspaces_explored", "runs"});
  CHECK(med.rows.back()[med.column("runs")] == "3");
}

TEST_CASE("output directory override and unwritable directories") {
  const fs::path dir = scratch("env");
  ::setenv("RPSD_OUTPUT_DIR", (dir / "override").c_str(), 1);
  json j = small_config(dir / "ignored");
  j["max_iters"] = 2;
  const auto out = run_experiment(parse_config(j));
  ::unsetenv("RPSD_OUTPUT_DIR");
  CHECK(out.directory == dir / "override");
  CHECK(fs::exists(dir / "override" / "manifest.json"));
  CHECK(!fs::exists(dir / "ignored"));

  write(dir / "plain_file", "x");
  j["output_dir"] = (dir / "plain_file" / "sub").string();
  CHECK_THROWS_AS(run_experiment(parse_config(j)), InvalidConfiguration);
}

TEST_CASE("missing dataset is a data error") {
  json j = small_config(scratch("missing"));
  j.erase("synthetic");
  j["dataset"] = {{"path", "/nonexistent/a1a"}};
  CHECK_THROWS_AS(run_experiment(parse_config(j)), DataError);
}

TEST_CASE("dataset runs from a LibSVM file") {
  json j = small_config(scratch("fixture"));
  j.erase("synthetic");
  j["dataset"] = {{"path", std::string(RPSD_FIXTURE_DIR) + "/small.libsvm"}};
  j["regularizer"] = {{"kind", "tv"}, {"lambda1", 0.01}};
  const auto out = run_experiment(parse_config(j));
  CHECK(out.runs.size() == 9);
  CHECK(read_csv(out.runs[0]).rows.size() == 61);
}

TEST_CASE("CSV reader") {
  const CsvTable t = parse_csv("a,\"b,c\",d\r\n1,\"say \"\"hi\"\"\",3\r\n4,5,6\n");
  CHECK(t.header == std::vector<std::string>{"a", "b,c", "d"});
  CHECK(t.rows[0][1] == "say \"hi\"");
  CHECK(t.rows[1][2] == "6");
  CHECK_THROWS_AS(parse_csv("a,b\r\n1\r\n"), DataError);
  CHECK_THROWS_AS(parse_csv("a\r\n\"open\r\n"), DataError);
  CHECK_THROWS_AS(t.column("zzz"), DataError);
}

TEST_CASE("plots") {
  const fs::path dir = scratch("plot");
  json j = small_config(dir / "runs");
  j["seeds"] = json::array();
  for (int s = 1; s <= 20; ++s) j["seeds"].push_back(s);
  j["algorithms"] = json::array({{{"kind", "arpsd"}, {"percent", 25}}});
  run_experiment(parse_config(j));

  const auto count = [](const std::string& svg) {
    std::size_t n = 0;
    for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++n;
    return n;
  };
  const auto one = load_series({dir / "runs" / "arpsd25_seed1.csv"}, Criterion::SuboptIters);
  CHECK(count(render_svg(one, Criterion::SuboptIters, false)) == 1);

  const auto all = load_series({dir / "runs"}, Criterion::SuboptExplored);
  CHECK(all.size() == 20);
  CHECK(all.front().group == "arpsd25");
  CHECK(count(render_svg(all, Criterion::SuboptExplored, true)) == 21);
  CHECK(render_svg(all, Criterion::SuboptIters, false).find(">1e") != std::string::npos);
  CHECK(render_svg(load_series({dir / "runs"}, Criterion::PatternIters), Criterion::PatternIters, false).find(">1e") ==
        std::string::npos);

  plot({dir / "runs"}, Criterion::PatternIters, dir / "p.svg", true);
  CHECK(slurp(dir / "p.svg").rfind("<svg", 0) == 0);

  CHECK_THROWS_AS(load_series({}, Criterion::SuboptIters), InvalidConfiguration);
  CHECK_THROWS_AS(parse_criterion("objective"), InvalidConfiguration);

  write(dir / "other_seed1.csv", "iter,suboptimality\r\n0,1\r\n");
  CHECK_THROWS_AS(load_series({dir / "runs" / "arpsd25_seed1.csv", dir / "other_seed1.csv"}, Criterion::SuboptIters),
                  DataError);

  std::string tampered = slurp(dir / "runs" / "arpsd25_seed3.csv");
  const auto line2 = tampered.find("\r\n", tampered.find("\r\n") + 2) + 2;  // start of iter-1 row
  const auto line3 = tampered.find("\r\n", line2);
  tampered.replace(line2, line3 - line2, "1,1,1,0,3,4,0,0");
  write(dir / "bad_seed1.csv", tampered);
  CHECK_THROWS_AS(load_series({dir / "bad_seed1.csv"}, Criterion::SuboptIters), DataError);
}

TEST_CASE("bench exit codes") {
  const fs::path dir = scratch("exit");
  json j = small_config(dir / "out");
  j["max_iters"] = 3;
  write(dir / "good.json", j.dump());
  CHECK(run_bench("run --config " + (dir / "good.json").string()) == 0);
  CHECK(fs::exists(dir / "out" / "manifest.json"));

  CHECK(run_bench("plot --criterion subopt-iters --out " + (dir / "a.svg").string() + " " + (dir / "out").string()) == 0);
  CHECK(run_bench("plot --criterion subopt-iters --out " + (dir / "b.svg").string()) == 2);
  CHECK(run_bench("plot --criterion nope --out " + (dir / "b.svg").string() + " " + (dir / "out").string()) == 2);

  write(dir / "c.toml", "x = 1\n");
  CHECK(run_bench("run --config " + (dir / "c.toml").string()) == 2);
  CHECK(run_bench("run --config " + (dir / "absent.json").string()) == 2);
  CHECK(run_bench("run") == 2);
  CHECK(run_bench("frobnicate") == 2);

  json bad = j;
  bad["algorithms"][0]["percent"] = 0;
  write(dir / "bad.json", bad.dump());
  CHECK(run_bench("run --config " + (dir / "bad.json").string()) == 2);

  json missing = j;
  missing.erase("synthetic");
  missing["dataset"] = {{"path", (dir / "none.libsvm").string()}};
  write(dir / "missing.json", missing.dump());
  CHECK(run_bench("run --config " + (dir / "missing.json").string()) == 3);

  write(dir / "broken.libsvm", "+1 1:0.5\nspam 2:1\n");
  json broken = missing;
  broken["dataset"]["path"] = (dir / "broken.libsvm").string();
  write(dir / "broken.json", broken.dump());
  CHECK(run_bench("run --config " + (dir / "broken.json").string()) == 3);

  write(dir / "mismatch_seed1.csv", "a,b\r\n1,2\r\n");
  CHECK(run_bench("plot --criterion subopt-iters --out " + (dir / "c.svg").string() + " " +
              (dir / "out" / "pgd_seed1.csv").string() + " " + (dir / "mismatch_seed1.csv").string()) == 3);

  CHECK(run_bench("--version") == 0);
}
