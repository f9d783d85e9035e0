#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "detach/harness.hpp"

using namespace detach::harness;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out, err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "detachment");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("detach_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// A small Monte Carlo experiment that runs in well under a second.
ExperimentSpec small_mc_spec(const std::string& out = "") {
  auto spec = make_spec("first_detachment_hist", Json::object(),
                        {"n_grid=5", "replicas=300", "horizon=20000", "reference_means=[20]"});
  spec.output_path = out;
  return spec;
}

}  // namespace

TEST_CASE("registry: twelve experiments with seeds and column contracts") {
  const auto& reg = registry();
  REQUIRE(reg.size() == 12);
  for (const auto& info : reg) {
    CHECK(find_experiment(info.name) == &info);
    CHECK_FALSE(info.columns.empty());
    bool has_seed = false;
    for (const auto& p : info.params) has_seed |= p.name == "seed";
    CHECK_MESSAGE(has_seed, info.name);
    // Defaults validate.
    CHECK_NOTHROW(validate(make_spec(info.name)));
  }
  CHECK(find_experiment("no_such_thing") == nullptr);
}

TEST_CASE("make_spec: defaults, config forms and overrides") {
  const auto def = make_spec("tau_tail");
  CHECK(def.parameters.at("k_tail").get<std::uint64_t>() == 1000000);
  CHECK(def.parameters.at("seed").get<std::uint64_t>() == 1);

  // Flat object; integral doubles normalize to integers.
  const auto flat = make_spec("tau_tail", Json{{"k_tail", 5000.0}, {"n_grid", {2, 3}}});
  CHECK(flat.parameters.at("k_tail").is_number_unsigned());
  CHECK(flat.parameters.at("k_tail").get<std::uint64_t>() == 5000);
  CHECK(flat.parameters.at("n_grid") == Json({2, 3}));

  // Wrapped object.
  const auto wrapped = make_spec(
      "tau_tail", Json{{"name", "tau_tail"}, {"parameters", {{"seed", 9}}}, {"output_path", "x/y"}});
  CHECK(wrapped.parameters.at("seed").get<std::uint64_t>() == 9);
  CHECK(wrapped.output_path == "x/y");

  // Overrides win over config; comma lists and JSON both parse.
  const auto over = make_spec("tau_tail", Json{{"seed", 9}}, {"seed=4", "n_grid=2,7", "tail_tolerance=0.5"});
  CHECK(over.parameters.at("seed").get<std::uint64_t>() == 4);
  CHECK(over.parameters.at("n_grid") == Json({2, 7}));
  CHECK(over.parameters.at("tail_tolerance").get<double>() == 0.5);
  const auto js = make_spec("ie_limit", Json::object(), {"n_grid=[300, 400]"});
  CHECK(js.parameters.at("n_grid") == Json({300, 400}));
}

TEST_CASE("make_spec: schema errors") {
  CHECK_THROWS_AS(make_spec("nope"), SchemaError);
  CHECK_THROWS_AS(make_spec("tau_tail", Json{{"bogus", 1}}), SchemaError);
  CHECK_THROWS_AS(make_spec("tau_tail", Json{{"k_tail", 0}}), SchemaError);       // below minimum
  CHECK_THROWS_AS(make_spec("tau_tail", Json{{"k_tail", 2.5}}), SchemaError);     // not integral
  CHECK_THROWS_AS(make_spec("tau_tail", Json{{"k_tail", "big"}}), SchemaError);   // not a number
  CHECK_THROWS_AS(make_spec("tau_tail", Json{{"n_grid", Json::array()}}), SchemaError);
  CHECK_THROWS_AS(make_spec("tau_tail", Json{{"n_grid", {2, 1}}}), SchemaError);  // element below min
  CHECK_THROWS_AS(make_spec("tau_tail", Json{{"name", "ie_limit"}}), SchemaError);
  CHECK_THROWS_AS(make_spec("tau_tail", Json::array()), SchemaError);
  CHECK_THROWS_AS(make_spec("tau_tail", Json::object(), {"seed"}), SchemaError);
  CHECK_THROWS_AS(make_spec("tau_tail", Json::object(), {"seed=abc"}), SchemaError);
  CHECK_THROWS_AS(make_spec("tau_tail", Json::object(), {"n_grid=2,x"}), SchemaError);

  ExperimentSpec missing = make_spec("tau_tail");
  missing.parameters.erase("seed");
  CHECK_THROWS_AS(validate(missing), SchemaError);
  CHECK_THROWS_AS(run_experiment(missing), SchemaError);
}

TEST_CASE("csv: formatting of cells") {
  Table t;
  t.columns = {"a", "b", "c", "d"};
  t.add({std::int64_t{-3}, 0.1, std::string("2/9"), Cell{}});
  t.add({std::int64_t{7}, 1e300, std::string("x,\"y\""), 0.5});
  CHECK(to_csv(t) == "a,b,c,d\n-3,0.10000000000000001,2/9,\n7,1.0000000000000001e+300,\"x,\"\"y\"\"\",0.5\n");
  CHECK_THROWS(t.add({std::int64_t{1}}));  // wrong arity
}

TEST_CASE("json: provenance tags, verdicts, typed columns") {
  CHECK(provenance_tag(Provenance::paper) == "PAPER");
  CHECK(provenance_tag(Provenance::trivial) == "TRIVIAL");
  CHECK(provenance_tag(Provenance::derived) == "DERIVED");

  const auto r = run_experiment(make_spec("tau_tail", Json::object(),
                                          {"n_grid=2", "k_tail=1000", "symbolic_k_max=20",
                                           "truncation_n_max=2", "truncation_k_max=3"}));
  const Json j = to_json(r);
  CHECK(j.at("experiment") == "tau_tail");
  CHECK(j.at("spec").at("parameters") == r.spec.parameters);
  REQUIRE(j.at("columns").size() == r.table.columns.size());
  CHECK(j.at("columns")[0].at("name") == "part");
  CHECK(j.at("columns")[0].at("type") == "text");
  CHECK(j.at("rows").size() == r.table.rows.size());
  REQUIRE_FALSE(j.at("references").empty());
  for (const auto& ref : j.at("references")) {
    const std::string tag = ref.at("provenance");
    CHECK((tag == "PAPER" || tag == "TRIVIAL" || tag == "DERIVED"));
  }
  REQUIRE_FALSE(j.at("verdicts").empty());
  bool all = true;
  for (const auto& v : j.at("verdicts")) {
    CHECK(v.contains("condition"));
    all = all && v.at("pass").get<bool>();
  }
  CHECK(j.at("passed").get<bool>() == all);
  CHECK(r.passed());
}

TEST_CASE("outputs: byte-identical files on rerun and across thread counts") {
  const fs::path dir = scratch_dir("rerun");
  const auto a = run_experiment(small_mc_spec((dir / "a").string()));
  const auto b = run_experiment(small_mc_spec((dir / "b.csv").string()));  // extension stripped
  REQUIRE(fs::exists(dir / "a.csv"));
  REQUIRE(fs::exists(dir / "a.json"));
  REQUIRE(fs::exists(dir / "b.csv"));
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(a.table.rows.size() == 300);

  const char* old = std::getenv("DETACH_THREADS");
  const std::string saved = old ? old : "";
  setenv("DETACH_THREADS", "3", 1);
  const auto c = run_experiment(small_mc_spec());
  if (old) setenv("DETACH_THREADS", saved.c_str(), 1); else unsetenv("DETACH_THREADS");
  CHECK(to_csv(c.table) == slurp(dir / "a.csv"));

  const Json js = Json::parse(slurp(dir / "a.json"));
  CHECK(js.at("rows").size() == 300);
  fs::remove_all(dir);
}

TEST_CASE("cli: exact, oracle and list") {
  auto r = cli({"exact", "pi", "--n", "3", "--k", "3", "--exact"});
  CHECK(r.code == 0);
  CHECK(r.out == "2/9\n");
  r = cli({"exact", "tau-cdf", "--n", "2", "--k", "3"});
  CHECK(r.code == 0);
  CHECK(r.out == "0.5\n");
  r = cli({"list"});
  CHECK(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) ++count;
  CHECK(count == 12);
  CHECK(r.out.find("zero_percent") != std::string::npos);

  r = cli({"oracle", "single", "--n", "2", "--k", "2"});
  CHECK(r.code == 0);
  CHECK(r.out.find("lonely,support") == 0);
}

TEST_CASE("cli: exit codes") {
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  CHECK(cli({"exact", "no-such-formula", "--n", "3", "--k", "3"}).code == 1);
  CHECK(cli({"exact", "pi", "--n", "x", "--k", "3"}).code == 1);
  CHECK(cli({"experiment", "no_such_experiment"}).code == 1);
  const auto bad = cli({"experiment", "tau_tail", "--set", "bogus=1", "--no-files"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("k_tail") != std::string::npos);  // schema printed

  // Passing experiment with --check.
  CHECK(cli({"experiment", "tau_tail", "--no-files", "--check", "--set", "n_grid=2", "--set",
             "k_tail=1000", "--set", "symbolic_k_max=10", "--set", "truncation_n_max=2"})
            .code == 0);
  // Failing verdict: only exits 2 with --check.
  const std::vector<std::string> failing = {"experiment", "zero_percent", "--no-files",
                                            "--set", "n_grid=100", "--set", "mc_n=5",
                                            "--set", "mc_replicas=20"};
  CHECK(cli(failing).code == 0);
  auto with_check = failing;
  with_check.push_back("--check");
  const auto r = cli(with_check);
  CHECK(r.code == 2);
  CHECK(r.out.find("FAIL") != std::string::npos);
}

TEST_CASE("cli: experiment writes files to --out") {
  const fs::path dir = scratch_dir("cli_out");
  const std::string base = (dir / "run").string();
  const auto r = cli({"experiment", "first_detachment_hist", "--out", base, "--set", "n_grid=5", "--set",
                      "replicas=50", "--set", "reference_means=[20]"});
  CHECK(r.code == 0);
  CHECK(fs::exists(base + ".csv"));
  CHECK(fs::exists(base + ".json"));
  const std::string cfg = (dir / "cfg.json").string();
  {
    std::ofstream f(cfg);
    f << R"({"name": "first_detachment_hist", "parameters": {"n_grid": [5], "replicas": 50, "reference_means": [20]}})";
  }
  const auto r2 = cli({"experiment", "first_detachment_hist", "--config", cfg, "--out", (dir / "cfg").string()});
  CHECK(r2.code == 0);
  CHECK(slurp(dir / "cfg.csv") == slurp(base + ".csv"));
  CHECK(cli({"experiment", "first_detachment_hist", "--config", (dir / "missing.json").string()}).code == 1);
  fs::remove_all(dir);
}
