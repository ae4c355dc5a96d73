#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "qgnn/model.hpp"

using namespace qgnn;
using namespace qgnn::testing;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(QGNN_CLI_PATH) + " " + args + " 2>/dev/null";
  return std::system(cmd.c_str());
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  return nlohmann::json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path work_dir() {
  auto dir = fs::temp_directory_path() / "qgnn_cli_tests";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("cli compress reports the documented compression ratio") {
  auto dir = work_dir();
  auto bundle = dir / "layered10_bundle";
  auto report = dir / "layered10_report.json";
  fs::remove_all(bundle);
  const std::string args = "compress --graph " + fixture("layered10.edges.tsv") +
                           " --features " + fixture("layered10.features.tsv") +
                           " --scheme spgc --model-class vanilla --out " + bundle.string() +
                           " --report " + report.string();
  REQUIRE(run_cli(args) == 0);
  auto j = read_json(report);
  CHECK(j["super_nodes"] == 7);
  CHECK(j["super_edges"] == 7);
  CHECK(j["ncr"].get<double>() == doctest::Approx(0.30));
}

TEST_CASE("cli alpha-r at (1,1) writes a partition byte-identical to spgc") {
  auto dir = work_dir();
  auto spgc = dir / "b_spgc";
  auto ar = dir / "b_ar";
  fs::remove_all(spgc);
  fs::remove_all(ar);
  const std::string base = " --graph " + fixture("layered10.edges.tsv") + " --features " +
                           fixture("layered10.features.tsv") + " --model-class vanilla ";
  REQUIRE(run_cli("compress" + base + "--scheme spgc --out " + spgc.string() + " --report " +
                  (dir / "r1.json").string()) == 0);
  REQUIRE(run_cli("compress" + base + "--scheme alpha-r --alpha 1 --r 1 --out " + ar.string() +
                  " --report " + (dir / "r2.json").string()) == 0);
  CHECK(slurp(spgc / "partition.tsv") == slurp(ar / "partition.tsv"));
}

TEST_CASE("cli compressing an already-compressed fixture reports zero ncr") {
  auto dir = work_dir();
  // ring12 quotient: 3 nodes, all features distinct, nothing left to merge
  auto e = dir / "quotient.edges.tsv";
  auto f = dir / "quotient.features.tsv";
  {
    std::ofstream(e) << "1\t0\n2\t1\n0\t2\n";
    std::ofstream(f) << "3 2\n1 0\n0 1\n1 1\n";
  }
  auto bundle = dir / "b_quotient";
  auto report = dir / "r_quotient.json";
  fs::remove_all(bundle);
  REQUIRE(run_cli("compress --graph " + e.string() + " --features " + f.string() +
                  " --scheme spgc --model-class gcn --out " + bundle.string() + " --report " +
                  report.string()) == 0);
  CHECK(read_json(report)["ncr"].get<double>() == 0.0);
}

TEST_CASE("cli verify passes an exact bundle and flags unanchored probes") {
  auto dir = work_dir();
  auto bundle = dir / "b_verify";
  auto model = dir / "verify_model.txt";
  auto report = dir / "r_verify.json";
  fs::remove_all(bundle);
  save_model(generate_model(ModelClass::kGcn, 2, std::vector<std::size_t>{2, 4, 2}, 12),
             model.string());

  const std::string base = " --graph " + fixture("layered10.edges.tsv") + " --features " +
                           fixture("layered10.features.tsv");
  REQUIRE(run_cli("compress" + base + " --scheme spgc --model-class gcn --out " +
                  bundle.string() + " --report " + (dir / "rv.json").string()) == 0);
  REQUIRE(run_cli("verify" + base + " --bundle " + bundle.string() + " --model " +
                  model.string() + " --out " + report.string()) == 0);
  auto j = read_json(report);
  CHECK(j["pass"] == true);
  CHECK(j["max_abs_gap"].get<double>() <= 1e-9);
  CHECK(j["label_agreement"].get<double>() == 1.0);

  // anchored bundle, probing a non-anchor: report carries a warning
  auto anchors = dir / "anchors.txt";
  std::ofstream(anchors) << "0\n";
  auto abundle = dir / "b_anchored";
  fs::remove_all(abundle);
  const std::string cbase = " --graph " + fixture("chain9.edges.tsv") + " --features " +
                            fixture("chain9.features.tsv");
  REQUIRE(run_cli("compress" + cbase + " --scheme anchored --anchors " + anchors.string() +
                  " --layers 2 --model-class vanilla --out " + abundle.string() + " --report " +
                  (dir / "ra.json").string()) == 0);
  auto targets = dir / "probe.txt";
  std::ofstream(targets) << "1\n";
  auto vmodel = dir / "vanilla_model.txt";
  save_model(generate_model(ModelClass::kVanilla, 2, std::vector<std::size_t>{2, 3, 2}, 4),
             vmodel.string());
  auto areport = dir / "r_anchored.json";
  run_cli("verify" + cbase + " --bundle " + abundle.string() + " --model " + vmodel.string() +
          " --targets " + targets.string() + " --out " + areport.string());
  auto aj = read_json(areport);
  REQUIRE(aj.contains("warnings"));
  CHECK(!aj["warnings"].empty());
}

TEST_CASE("cli verify reports lossy bundles without asserting") {
  auto dir = work_dir();
  auto bundle = dir / "b_lossy";
  auto model = dir / "lossy_model.txt";
  auto report = dir / "r_lossy.json";
  fs::remove_all(bundle);
  save_model(generate_model(ModelClass::kVanilla, 2, std::vector<std::size_t>{3, 4, 2}, 9),
             model.string());
  const std::string base = " --graph " + fixture("fanout8.edges.tsv") + " --features " +
                           fixture("fanout8.features.tsv");
  REQUIRE(run_cli("compress" + base + " --scheme alpha-r --alpha 0.5 --r 1 " +
                  "--model-class vanilla --out " + bundle.string() + " --report " +
                  (dir / "rl.json").string()) == 0);
  REQUIRE(run_cli("verify" + base + " --bundle " + bundle.string() + " --model " +
                  model.string() + " --out " + report.string()) == 0);
  auto j = read_json(report);
  CHECK(j["asserted"] == false);
  CHECK(j["pass"] == true);  // nothing asserted for lossy schemes
  CHECK(j.contains("label_agreement"));
}

TEST_CASE("cli infer and explain produce machine-readable results") {
  auto dir = work_dir();
  auto bundle = dir / "b_infer";
  auto model = dir / "infer_model.txt";
  fs::remove_all(bundle);
  save_model(generate_model(ModelClass::kGcn, 2, std::vector<std::size_t>{2, 4, 2}, 21),
             model.string());
  const std::string base = " --graph " + fixture("txn12.edges.tsv") + " --features " +
                           fixture("txn12.features.tsv");
  REQUIRE(run_cli("compress" + base + " --scheme spgc --model-class gcn --out " +
                  bundle.string() + " --report " + (dir / "ri.json").string()) == 0);

  auto targets = dir / "t.txt";
  std::ofstream(targets) << "0\n";
  auto ireport = dir / "r_infer.json";
  REQUIRE(run_cli("infer --bundle " + bundle.string() + " --model " + model.string() +
                  " --targets " + targets.string() + " --n 2 --out " + ireport.string()) == 0);
  auto ij = read_json(ireport);
  REQUIRE(ij["results"].size() == 1);
  CHECK(ij["results"][0]["target"] == 0);
  CHECK(ij["results"][0].contains("embedding"));

  auto ereport = dir / "r_explain.json";
  REQUIRE(run_cli("explain --bundle " + bundle.string() + " --model " + model.string() +
                  " --targets " + targets.string() + " --budget 3 --out " + ereport.string()) ==
          0);
  auto ej = read_json(ereport);
  REQUIRE(ej["explanations"].size() == 1);
  CHECK(ej["explanations"][0].contains("factual_ok"));
}
