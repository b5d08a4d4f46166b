#include "doctest.h"
#include "support.hpp"

#include "cli.hpp"
#include "jive/io.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const char* env = std::getenv("JIVE_TEST_TMP");
  const fs::path root = env ? fs::path(env) : fs::temp_directory_path() / "jive_cli_tests";
  const fs::path dir = root / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = jive::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

json without_metadata(json j) {
  j.erase("metadata");
  return j;
}

void write_toy(const fs::path& dir, std::uint64_t seed = 1) {
  REQUIRE(run({"simulate", "--out", dir.string(), "--seed", std::to_string(seed)}).code == 0);
}

std::vector<std::string> jackstraw_args(const fs::path& data, const fs::path& out) {
  return {"jackstraw", "--blocks", (data / "block1.csv").string() + "," + (data / "block2.csv").string(),
          "--ranks", "2,2", "--joint-rank", "1", "--s", "1200", "--out", out.string()};
}

}  // namespace

TEST_CASE("simulate writes the toy blocks and ground truth") {
  const fs::path dir = scratch("simulate");
  write_toy(dir);
  const jive::DataBlock b = jive::read_block_csv(dir / "block1.csv", "b");
  CHECK(b.features() == 120);
  CHECK(b.cases() == 160);
  const json truth = load(dir / "truth.json");
  CHECK(truth["tool"] == "jive-jackstraw");
  CHECK(truth["seed"] == 1);
  CHECK(truth["config"]["toy"]["cases"] == 160);
  CHECK(truth["metadata"].contains("timestamp"));
  CHECK(truth["result"]["blocks"][0]["joint_mask"].size() == 120);
  CHECK(slurp(dir / "block1.csv").rfind("# jive-jackstraw", 0) == 0);
}

TEST_CASE("simulate is byte-identical for a fixed seed") {
  const fs::path a = scratch("sim_a");
  const fs::path b = scratch("sim_b");
  write_toy(a, 7);
  write_toy(b, 7);
  CHECK(slurp(a / "block1.csv") == slurp(b / "block1.csv"));
  CHECK(slurp(a / "block2.csv") == slurp(b / "block2.csv"));
  CHECK(without_metadata(load(a / "truth.json")) == without_metadata(load(b / "truth.json")));
  const fs::path c = scratch("sim_c");
  write_toy(c, 8);
  CHECK(slurp(a / "block1.csv") != slurp(c / "block1.csv"));
}

TEST_CASE("invalid support ranges exit with a validation error") {
  const auto r = run({"simulate", "--out", scratch("bad_support").string(), "--joint-support", "1-80,1-500"});
  CHECK(r.code == 2);
  CHECK(r.err.find("outside rows") != std::string::npos);
  CHECK(run({"simulate", "--joint-support", "1-80"}).code == 2);
  CHECK(run({"simulate", "--joint-support", "a-b,1-2"}).code == 2);
}

TEST_CASE("ajive echoes the rank arithmetic with an indicator block") {
  const fs::path dir = scratch("ajive_ranks");
  const jive::Index n = 100;
  std::vector<std::string> cases;
  for (jive::Index j = 0; j < n; ++j) cases.push_back("p" + std::to_string(j));
  auto names = [](const std::string& stem, jive::Index count) {
    std::vector<std::string> out;
    for (jive::Index i = 0; i < count; ++i) out.push_back(stem + std::to_string(i));
    return out;
  };
  jive::write_matrix_csv(dir / "cnv.csv", testing::gaussian(90, n, 1), names("r", 90), cases);
  jive::write_matrix_csv(dir / "ge.csv", testing::gaussian(80, n, 2), names("g", 80), cases);
  {
    std::ofstream labels(dir / "subtype.csv");
    labels << "case_id,label\n";
    const char* types[] = {"Basal", "Her2", "LumA", "LumB"};
    for (jive::Index j = 0; j < n; ++j) labels << cases[static_cast<std::size_t>(j)] << ',' << types[j % 4] << '\n';
  }
  const auto r = run({"ajive", "--blocks", (dir / "cnv.csv").string() + "," + (dir / "ge.csv").string(),
                      "--ranks", "77,70", "--indicator", (dir / "subtype.csv").string(), "--joint-rank", "3",
                      "--out", (dir / "out").string()});
  REQUIRE(r.code == 0);
  const json s = load(dir / "out" / "summary.json");
  CHECK(s["result"]["joint_rank"] == 3);
  const auto& blocks = s["result"]["blocks"];
  REQUIRE(blocks.size() == 3);
  CHECK(blocks[0]["initial_rank"] == 77);
  CHECK(blocks[0]["individual_rank"] == 74);
  CHECK(blocks[1]["individual_rank"] == 67);
  CHECK(blocks[2]["initial_rank"] == 3);
  CHECK(blocks[2]["individual_rank"] == 0);
  CHECK(blocks[2]["centered_on_entry"] == true);
  CHECK(fs::exists(dir / "out" / "cns.csv"));
  CHECK(jive::read_block_csv(dir / "out" / "cns.csv", "cns").features() == 3);
  CHECK(jive::read_block_csv(dir / "out" / "cnv_bss.csv", "bss").features() == 74);
  CHECK(fs::exists(dir / "out" / "indicator_joint.csv"));
}

TEST_CASE("jackstraw on the toy joint component") {
  const fs::path data = scratch("js_data");
  write_toy(data);
  const fs::path out = scratch("js_out");
  const auto r = run(jackstraw_args(data, out));
  REQUIRE(r.code == 0);

  std::ifstream csv(out / "features.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line.rfind("# ", 0) == 0);
  std::getline(csv, line);
  CHECK(line == "feature,F,p,p_adj,significant");
  int rows = 0;
  int significant = 0;
  while (std::getline(csv, line)) {
    ++rows;
    significant += line.back() == '1' ? 1 : 0;
  }
  CHECK(rows == 120);
  CHECK(significant >= 55);
  CHECK(significant <= 85);

  const json result = load(out / "jackstraw.json");
  CHECK(result["result"]["significant_count"] == significant);
  CHECK(result["config"]["jackstraw"]["mode"] == "approximate");
  CHECK(result["result"]["f_null"].size() == 1200);
  const json diag = load(out / "diagnostics.json");
  CHECK(diag["result"]["ks"]["pvalue"].get<double>() < 1e-20);
  CHECK(fs::exists(out / "diagnostics_ks.svg"));

  SUBCASE("full mode is recorded in the provenance") {
    const fs::path full = scratch("js_full");
    auto args = jackstraw_args(data, full);
    *std::find(args.begin(), args.end(), "1200") = "100";
    args.insert(args.end(), {"--mode", "full"});
    REQUIRE(run(args).code == 0);
    CHECK(load(full / "jackstraw.json")["config"]["jackstraw"]["mode"] == "full");
    CHECK(slurp(full / "features.csv") != slurp(out / "features.csv"));
  }
  SUBCASE("same seed, any thread count, identical artifacts") {
    const fs::path again = scratch("js_again");
    auto args = jackstraw_args(data, again);
    args.insert(args.end(), {"--threads", "3"});
    REQUIRE(run(args).code == 0);
    CHECK(slurp(out / "features.csv") == slurp(again / "features.csv"));
    CHECK(without_metadata(load(out / "jackstraw.json")) == without_metadata(load(again / "jackstraw.json")));
    CHECK(load(again / "jackstraw.json")["metadata"]["threads"] == 3);
    CHECK(slurp(out / "diagnostics_null_density.svg") == slurp(again / "diagnostics_null_density.svg"));
  }
  SUBCASE("embedded config reproduces the run") {
    const fs::path rerun = scratch("js_rerun");
    REQUIRE(run({"jackstraw", "--config", (out / "jackstraw.json").string(), "--out", rerun.string()}).code == 0);
    CHECK(slurp(out / "features.csv") == slurp(rerun / "features.csv"));
  }
  SUBCASE("diagnose rebuilds the report from the saved result") {
    const fs::path d = scratch("js_diag");
    REQUIRE(run({"diagnose", "--result", (out / "jackstraw.json").string(), "--out", d.string()}).code == 0);
    CHECK(load(d / "diagnostics.json")["result"] == diag["result"]);
  }
  SUBCASE("bad component") {
    auto args = jackstraw_args(data, scratch("js_bad"));
    args.insert(args.end(), {"--component", "2"});
    CHECK(run(args).code == 2);
  }
}

TEST_CASE("config file values are overridden by flags") {
  const fs::path data = scratch("cfg_data");
  write_toy(data);
  const fs::path dir = scratch("cfg");
  {
    std::ofstream cfg(dir / "run.json");
    cfg << json{{"blocks", {{{"path", (data / "block1.csv").string()}, {"name", "left"}},
                            {{"path", (data / "block2.csv").string()}, {"name", "right"}}}},
                {"ranks", {2, 2}},
                {"joint_rank", 1},
                {"jackstraw", {{"s", 50}, {"adjust", "bh"}}},
                {"target", {{"space", "individual"}, {"block_index", 2}}}}
               .dump();
  }
  REQUIRE(run({"jackstraw", "--config", (dir / "run.json").string(), "--s", "60", "--out", (dir / "o").string()})
              .code == 0);
  const json j = load(dir / "o" / "jackstraw.json");
  CHECK(j["config"]["jackstraw"]["s"] == 60);
  CHECK(j["config"]["jackstraw"]["adjust"] == "bh");
  CHECK(j["config"]["blocks"][0]["name"] == "left");
  CHECK(j["result"]["target"]["space"] == "individual");
  CHECK(j["result"]["target"]["block"] == 1);
  CHECK(j["result"]["warnings"].size() == 1);

  std::ofstream(dir / "broken.json") << "{\"ranks\": [2,";
  CHECK(run({"jackstraw", "--config", (dir / "broken.json").string()}).code == 2);
  std::ofstream(dir / "typed.json") << "{\"ranks\": \"two\"}";
  CHECK(run({"jackstraw", "--config", (dir / "typed.json").string()}).code == 2);
}

TEST_CASE("compare writes the two tables") {
  const fs::path dir = scratch("compare");
  REQUIRE(run({"compare", "--noise-variance", "0", "--replicates", "1", "--s", "200", "--out", dir.string()})
              .code == 0);
  std::ifstream in(dir / "accuracy.csv");
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  CHECK(line == "method,D1.(joint/PC2),D1.(indivi/PC1),D2.(joint/PC2),D2.(indivi/PC1)");
  std::getline(in, line);
  CHECK(line == "AJIVE,1,1,1,1");
  std::getline(in, line);
  CHECK(line == "PCA,1,1,1,1");
  CHECK(fs::exists(dir / "angle.csv"));
  CHECK(load(dir / "compare.json")["result"]["replicates"].size() == 1);
}

TEST_CASE("diproperm subcommand") {
  const fs::path dir = scratch("dpp");
  const jive::Index n = 60;
  jive::Matrix x = testing::gaussian(30, n, 5);
  std::vector<std::string> cases;
  std::ofstream labels(dir / "labels.csv");
  for (jive::Index j = 0; j < n; ++j) {
    cases.push_back("s" + std::to_string(j));
    const bool treated = j >= n / 2;
    if (treated) x(0, j) += 5.0;
    labels << cases.back() << ',' << (treated ? "treated" : "control") << '\n';
  }
  labels.close();
  std::vector<std::string> features;
  for (int i = 0; i < 30; ++i) features.push_back("v" + std::to_string(i));
  jive::write_matrix_csv(dir / "x.csv", x, features, cases);

  const std::vector<std::string> args = {"diproperm", "--data", (dir / "x.csv").string(), "--labels",
                                         (dir / "labels.csv").string(), "--n-perm", "300", "--out",
                                         (dir / "o1").string()};
  REQUIRE(run(args).code == 0);
  const json r = load(dir / "o1" / "diproperm.json");
  CHECK(r["result"]["class1"] == "treated");
  CHECK(r["result"]["z_score"].get<double>() > 5.0);
  CHECK(r["result"]["null_stats"].size() == 300);

  auto threaded = args;
  threaded.back() = (dir / "o2").string();
  threaded.insert(threaded.end(), {"--threads", "2"});
  REQUIRE(run(threaded).code == 0);
  CHECK(without_metadata(r) == without_metadata(load(dir / "o2" / "diproperm.json")));

  std::ofstream(dir / "short.csv") << "s0,a\ns1,b\n";
  auto mismatch = args;
  mismatch[4] = (dir / "short.csv").string();
  CHECK(run(mismatch).code == 2);
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"--version"}).code == 0);
  CHECK(run({"jackstraw", "--blocks", "missing1.csv,missing2.csv", "--ranks", "2,2"}).code == 2);
  CHECK(run({"jackstraw", "--mode", "fast"}).code == 2);

  const fs::path dir = scratch("exit");
  std::ofstream(dir / "file") << "x";
  CHECK(run({"simulate", "--out", (dir / "file" / "sub").string()}).code == 1);

  ::setenv("JIVE_JACKSTRAW_THREADS", "0", 1);
  CHECK(run({"simulate", "--out", (dir / "s").string()}).code == 2);
  ::setenv("JIVE_JACKSTRAW_THREADS", "3", 1);
  REQUIRE(run({"simulate", "--out", (dir / "s").string()}).code == 0);
  CHECK(load(dir / "s" / "truth.json")["metadata"]["threads"] == 3);
  ::unsetenv("JIVE_JACKSTRAW_THREADS");
}
