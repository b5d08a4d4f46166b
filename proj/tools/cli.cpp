#include "cli.hpp"

#include "jive/diagnostics.hpp"
#include "jive/errors.hpp"
#include "jive/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"

namespace jive::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kTool = "jive-jackstraw";

// --- small conversions -----------------------------------------------------

json num(double v) { return std::isfinite(v) ? json(v) : json(format_double(v)); }

json nums(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

json nums(const Vector& v) { return nums(std::span<const double>(v.data(), static_cast<std::size_t>(v.size()))); }

double read_num(const json& j) {
  if (j.is_string()) return parse_double(j.get<std::string>(), "JSON number");
  return j.get<double>();
}

std::vector<double> read_nums(const json& j) {
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(read_num(x));
  return out;
}

Index parse_index(const std::string& text, const std::string& what) {
  Index v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InputError(what + ": expected an integer, got '" + text + "'");
  }
  return v;
}

RowRange parse_range(const std::string& text) {
  const auto dash = text.find('-');
  if (dash == std::string::npos) throw InputError("row range must look like FIRST-LAST, got '" + text + "'");
  return RowRange{parse_index(text.substr(0, dash), "row range"),
                  parse_index(text.substr(dash + 1), "row range")};
}

std::array<RowRange, 2> parse_range_pair(const std::vector<std::string>& parts) {
  if (parts.size() != 2) throw InputError("expected two row ranges, one per block");
  return {parse_range(parts[0]), parse_range(parts[1])};
}

json range_json(const RowRange& r) { return json::array({r.first, r.last}); }

RowRange range_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw InputError("row range must be [first, last]");
  return RowRange{j[0].get<Index>(), j[1].get<Index>()};
}

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("error writing " + path.string());
}

fs::path prepare_out(const RunConfig& c) {
  const fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory " + dir.string());
  }
  return dir;
}

// --- provenance ------------------------------------------------------------

std::string provenance_line(const RunConfig& c) {
  return std::string(kTool) + " " + JIVE_VERSION + " " + c.command + " seed=" + std::to_string(c.seed) +
         " config=" + to_json(c).dump();
}

void write_artifact(const fs::path& path, const RunConfig& c, json result) {
  json doc;
  doc["tool"] = kTool;
  doc["version"] = JIVE_VERSION;
  doc["command"] = c.command;
  doc["seed"] = c.seed;
  doc["config"] = to_json(c);
  doc["result"] = std::move(result);
  doc["metadata"] = {{"timestamp", timestamp()}, {"threads", c.threads}, {"out", c.out}};
  write_text(path, doc.dump(2) + "\n");
}

// --- config sections -------------------------------------------------------

json toy_json(const ToyConfig& t) {
  return {{"features", {t.features[0], t.features[1]}},
          {"cases", t.cases},
          {"joint_amplitude", t.joint_amplitude},
          {"individual_amplitude", t.individual_amplitude},
          {"noise_variance", t.noise_variance},
          {"joint_support", {range_json(t.joint_support[0]), range_json(t.joint_support[1])}},
          {"individual_support",
           {range_json(t.individual_support[0]), range_json(t.individual_support[1])}},
          {"joint_shape", t.joint_shape},
          {"individual_shape", {t.individual_shape[0], t.individual_shape[1]}}};
}

void apply_toy(ToyConfig& t, const json& j) {
  if (j.contains("features")) t.features = {j["features"].at(0).get<Index>(), j["features"].at(1).get<Index>()};
  if (j.contains("cases")) t.cases = j["cases"].get<Index>();
  if (j.contains("joint_amplitude")) t.joint_amplitude = j["joint_amplitude"].get<double>();
  if (j.contains("individual_amplitude")) t.individual_amplitude = j["individual_amplitude"].get<double>();
  if (j.contains("noise_variance")) t.noise_variance = j["noise_variance"].get<double>();
  if (j.contains("joint_support")) {
    t.joint_support = {range_from_json(j["joint_support"].at(0)), range_from_json(j["joint_support"].at(1))};
  }
  if (j.contains("individual_support")) {
    t.individual_support = {range_from_json(j["individual_support"].at(0)),
                            range_from_json(j["individual_support"].at(1))};
  }
  if (j.contains("joint_shape")) t.joint_shape = j["joint_shape"].get<double>();
  if (j.contains("individual_shape")) {
    t.individual_shape = {j["individual_shape"].at(0).get<double>(), j["individual_shape"].at(1).get<double>()};
  }
}

json jackstraw_json(const JackstrawConfig& c) {
  return {{"k", c.k_rows},
          {"s", c.n_reps},
          {"mode", to_string(c.mode)},
          {"alpha", c.alpha},
          {"adjust", to_string(c.adjustment)},
          {"smoothing", c.smoothing}};
}

void apply_jackstraw(JackstrawConfig& c, const json& j) {
  if (j.contains("k")) c.k_rows = j["k"].get<Index>();
  if (j.contains("s")) c.n_reps = j["s"].get<Index>();
  if (j.contains("mode")) c.mode = parse_mode(j["mode"].get<std::string>());
  if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
  if (j.contains("adjust")) c.adjustment = parse_adjustment(j["adjust"].get<std::string>());
  if (j.contains("smoothing")) c.smoothing = j["smoothing"].get<bool>();
}

std::string to_string(ProjectionStatistic s) {
  return s == ProjectionStatistic::mean_difference ? "mean_difference" : "t";
}

ProjectionStatistic parse_statistic(const std::string& s) {
  if (s == "mean_difference" || s == "mean") return ProjectionStatistic::mean_difference;
  if (s == "t" || s == "t_statistic") return ProjectionStatistic::t_statistic;
  throw InputError("unknown projection statistic '" + s + "' (expected mean_difference or t)");
}

bool uses_blocks(const std::string& cmd) { return cmd == "ajive" || cmd == "jackstraw"; }
bool uses_toy(const std::string& cmd) { return cmd == "simulate" || cmd == "compare"; }

}  // namespace

json to_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["seed"] = c.seed;
  if (uses_blocks(c.command)) {
    json blocks = json::array();
    for (const auto& b : c.blocks) blocks.push_back({{"path", b.path}, {"name", b.name}});
    j["blocks"] = blocks;
    j["ranks"] = c.ranks;
    j["joint_rank"] = c.joint_rank ? json(*c.joint_rank) : json("auto");
    j["normalize"] = c.normalize;
    j["indicator"] = c.indicator ? json{{"labels", c.indicator->labels}, {"classes", c.indicator->classes}}
                                 : json(nullptr);
  }
  if (c.command == "jackstraw") {
    j["target"] = {{"space", jive::to_string(c.space)},
                   {"block_index", c.block_index},
                   {"component", c.component ? json(*c.component) : json("all")}};
  }
  if (c.command == "jackstraw" || c.command == "compare") j["jackstraw"] = jackstraw_json(c.jackstraw);
  if (uses_toy(c.command)) j["toy"] = toy_json(c.toy);
  if (c.command == "compare") j["replicates"] = c.replicates;
  if (c.command == "diproperm") {
    const auto& d = c.diproperm;
    j["diproperm"] = {{"data", d.data},
                      {"labels", d.labels},
                      {"class1", d.class1},
                      {"n_perm", d.config.n_perm},
                      {"balanced", d.config.balanced},
                      {"batches", d.config.batches},
                      {"statistic", to_string(d.config.statistic)}};
  }
  if (c.command == "diagnose") j["result"] = c.result;
  return j;
}

void apply_json(RunConfig& c, const json& input) {
  const json& j = (input.contains("config") && input.contains("tool")) ? input["config"] : input;
  if (!j.is_object()) throw InputError("config must be a JSON object");
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("blocks")) {
    c.blocks.clear();
    for (const auto& b : j["blocks"]) {
      const std::string path = b.at("path").get<std::string>();
      c.blocks.push_back({path, b.contains("name") ? b["name"].get<std::string>() : fs::path(path).stem().string()});
    }
  }
  if (j.contains("ranks")) c.ranks = j["ranks"].get<std::vector<Index>>();
  if (j.contains("joint_rank")) {
    const auto& r = j["joint_rank"];
    if (r.is_string() && r.get<std::string>() == "auto") {
      c.joint_rank.reset();
    } else {
      c.joint_rank = r.get<Index>();
    }
  }
  if (j.contains("normalize")) c.normalize = j["normalize"].get<bool>();
  if (j.contains("indicator")) {
    if (j["indicator"].is_null()) {
      c.indicator.reset();
    } else {
      IndicatorSpec spec;
      spec.labels = j["indicator"].at("labels").get<std::string>();
      if (j["indicator"].contains("classes")) {
        spec.classes = j["indicator"]["classes"].get<std::vector<std::string>>();
      }
      c.indicator = spec;
    }
  }
  if (j.contains("target")) {
    const auto& t = j["target"];
    if (t.contains("space")) c.space = parse_space(t["space"].get<std::string>());
    if (t.contains("block_index")) c.block_index = t["block_index"].get<Index>();
    if (t.contains("component")) {
      if (t["component"].is_string() && t["component"].get<std::string>() == "all") {
        c.component.reset();
      } else {
        c.component = t["component"].get<Index>();
      }
    }
  }
  if (j.contains("jackstraw")) apply_jackstraw(c.jackstraw, j["jackstraw"]);
  if (j.contains("toy")) apply_toy(c.toy, j["toy"]);
  if (j.contains("replicates")) c.replicates = j["replicates"].get<Index>();
  if (j.contains("diproperm")) {
    const auto& d = j["diproperm"];
    auto& s = c.diproperm;
    if (d.contains("data")) s.data = d["data"].get<std::string>();
    if (d.contains("labels")) s.labels = d["labels"].get<std::string>();
    if (d.contains("class1")) s.class1 = d["class1"].get<std::string>();
    if (d.contains("n_perm")) s.config.n_perm = d["n_perm"].get<Index>();
    if (d.contains("balanced")) s.config.balanced = d["balanced"].get<bool>();
    if (d.contains("batches")) s.config.batches = d["batches"].get<Index>();
    if (d.contains("statistic")) s.config.statistic = parse_statistic(d["statistic"].get<std::string>());
  }
  if (j.contains("result")) c.result = j["result"].get<std::string>();
}

namespace {

// --- result serialization --------------------------------------------------

json result_json(const JackstrawResult& r) {
  json sig = json::array();
  for (bool s : r.significant) sig.push_back(s);
  return {{"method", r.method},
          {"target",
           {{"space", jive::to_string(r.target.space)},
            {"block", r.target.block},
            {"component", r.target.component ? json(*r.target.component) : json("all")}}},
          {"predictor_rank", r.predictor_rank},
          {"mode", to_string(r.config.mode)},
          {"k", r.config.k_rows},
          {"s", r.config.n_reps},
          {"alpha", r.config.alpha},
          {"adjust", to_string(r.config.adjustment)},
          {"smoothing", r.config.smoothing},
          {"significant_count", r.significant_count()},
          {"feature_names", r.feature_names},
          {"f_observed", nums(r.f_observed)},
          {"p_raw", nums(r.p_raw)},
          {"p_adjusted", nums(r.p_adjusted)},
          {"significant", sig},
          {"f_null", nums(r.f_null)},
          {"warnings", r.warnings}};
}

JackstrawResult result_from_json(const json& doc) {
  const json& j = doc.contains("result") ? doc["result"] : doc;
  JackstrawResult r;
  r.method = j.at("method").get<std::string>();
  r.target.space = parse_space(j.at("target").at("space").get<std::string>());
  r.target.block = j["target"].at("block").get<Index>();
  const auto& comp = j["target"].at("component");
  if (comp.is_string()) {
    r.target.component.reset();
  } else {
    r.target.component = comp.get<Index>();
  }
  r.predictor_rank = j.at("predictor_rank").get<Index>();
  r.config.mode = parse_mode(j.at("mode").get<std::string>());
  r.config.k_rows = j.at("k").get<Index>();
  r.config.n_reps = j.at("s").get<Index>();
  r.config.alpha = j.at("alpha").get<double>();
  r.config.adjustment = parse_adjustment(j.at("adjust").get<std::string>());
  r.config.smoothing = j.at("smoothing").get<bool>();
  r.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  r.f_observed = read_nums(j.at("f_observed"));
  r.p_raw = read_nums(j.at("p_raw"));
  r.p_adjusted = read_nums(j.at("p_adjusted"));
  r.significant = j.at("significant").get<std::vector<bool>>();
  r.f_null = read_nums(j.at("f_null"));
  if (j.contains("warnings")) r.warnings = j["warnings"].get<std::vector<std::string>>();
  return r;
}

json report_json(const DiagnosticReport& d) {
  json points = json::array();
  for (const auto& p : d.observed_points) {
    points.push_back({{"feature", p.feature}, {"log10_f", num(p.log10_f)}, {"significant", p.significant}});
  }
  json ranked = json::array();
  for (const auto& p : d.sorted_pvalues) ranked.push_back({{"rank", p.rank}, {"p", num(p.p)}});
  return {{"null_density",
           {{"grid", nums(d.null_density.grid)},
            {"density", nums(d.null_density.density)},
            {"bandwidth", d.null_density.bandwidth}}},
          {"observed_points", points},
          {"sorted_pvalues", ranked},
          {"ks", {{"statistic", d.ks.statistic}, {"pvalue", num(d.ks.pvalue)}}},
          {"null_zero_dropped", d.null_zero_dropped},
          {"null_infinite", d.null_infinite},
          {"observed_infinite", d.observed_infinite},
          {"significant", d.significant}};
}

json tables_json(const ComparisonTables& t) {
  auto arr = [](const auto& a) {
    json out = json::array();
    for (const auto& x : a) out.push_back(x);
    return out;
  };
  return {{"columns", kComparisonColumns},
          {"ajive_accuracy", arr(t.ajive_accuracy)},
          {"pca_accuracy", arr(t.pca_accuracy)},
          {"ajive_angle", arr(t.ajive_angle)},
          {"pca_angle", arr(t.pca_angle)},
          {"ajive_tpr", arr(t.ajive_tpr)},
          {"pca_tpr", arr(t.pca_tpr)},
          {"ajive_significant", arr(t.ajive_significant)},
          {"pca_significant", arr(t.pca_significant)},
          {"pca_component", arr(t.pca_component)}};
}

// --- pipeline pieces -------------------------------------------------------

struct LoadedBlocks {
  std::vector<DataBlock> blocks;
  std::vector<Index> ranks;
};

LoadedBlocks load_blocks(const RunConfig& c) {
  if (c.blocks.size() < 2 && !(c.blocks.size() == 1 && c.indicator)) {
    throw InputError("at least two blocks are needed (--blocks a.csv,b.csv)");
  }
  LoadedBlocks out;
  for (const auto& b : c.blocks) out.blocks.push_back(read_block_csv(b.path, b.name));
  out.ranks = c.ranks;
  if (c.indicator) {
    const auto rows = read_labels_csv(c.indicator->labels);
    const auto labels = align_labels(rows, out.blocks.front().case_ids());
    std::vector<std::string> classes = c.indicator->classes;
    if (classes.empty()) {
      std::set<std::string> seen;
      for (const auto& l : labels) {
        if (seen.insert(l).second) classes.push_back(l);
      }
    }
    out.blocks.push_back(build_indicator_block(labels, classes, "indicator", out.blocks.front().case_ids()));
    if (out.ranks.size() == c.blocks.size()) out.ranks.push_back(static_cast<Index>(classes.size()) - 1);
  }
  if (out.ranks.size() != out.blocks.size()) {
    throw InputError(std::to_string(out.ranks.size()) + " ranks given for " +
                     std::to_string(out.blocks.size()) + " blocks");
  }
  return out;
}

AjiveOptions ajive_options(const RunConfig& c, const LoadedBlocks& lb) {
  return AjiveOptions{lb.ranks, c.joint_rank, c.normalize};
}

void cmd_simulate(const RunConfig& c) {
  ToyConfig toy = c.toy;
  toy.seed = c.seed;
  const ToyData data = simulate_toy(toy);
  const fs::path dir = prepare_out(c);
  const std::string comment = provenance_line(c);
  for (std::size_t m = 0; m < 2; ++m) {
    const DataBlock& b = data.blocks[m];
    write_matrix_csv(dir / ("block" + std::to_string(m + 1) + ".csv"), b.matrix(), b.feature_names(),
                     b.case_ids(), comment);
  }
  const auto& t = data.truth;
  json truth;
  truth["joint_scores"] = nums(t.joint_scores);
  for (std::size_t m = 0; m < 2; ++m) {
    truth["blocks"].push_back({{"name", data.blocks[m].name()},
                               {"joint_support", range_json(toy.joint_support[m])},
                               {"individual_support", range_json(toy.individual_support[m])},
                               {"joint_mask", t.joint_mask[m]},
                               {"individual_mask", t.individual_mask[m]},
                               {"individual_scores", nums(t.individual_scores[m])}});
  }
  write_artifact(dir / "truth.json", c, truth);
}

void cmd_ajive(const RunConfig& c) {
  const LoadedBlocks lb = load_blocks(c);
  const AjiveDecomposition dec = ajive_decompose(lb.blocks, ajive_options(c, lb));
  const fs::path dir = prepare_out(c);
  const std::string comment = provenance_line(c);
  const auto& cases = lb.blocks.front().case_ids();

  auto labels = [](const std::string& stem, Index count) {
    std::vector<std::string> out;
    for (Index i = 1; i <= count; ++i) out.push_back(stem + std::to_string(i));
    return out;
  };
  write_matrix_csv(dir / "cns.csv", dec.cns, labels("joint", dec.cns.rows()), cases, comment);
  write_matrix_csv(dir / "stacked_singular_values.csv", dec.stacked_singular_values,
                   labels("sv", dec.stacked_singular_values.size()), {"value"}, comment);

  json blocks = json::array();
  for (std::size_t m = 0; m < dec.blocks.size(); ++m) {
    const auto& b = dec.blocks[m];
    const auto& src = lb.blocks[m];
    write_matrix_csv(dir / (b.name + "_joint.csv"), b.joint, src.feature_names(), cases, comment);
    write_matrix_csv(dir / (b.name + "_individual.csv"), b.individual, src.feature_names(), cases, comment);
    write_matrix_csv(dir / (b.name + "_bss.csv"), b.bss, labels("indiv", b.bss.rows()), cases, comment);
    blocks.push_back({{"name", b.name},
                      {"features", src.features()},
                      {"initial_rank", b.initial_rank},
                      {"individual_rank", b.individual_rank},
                      {"centered_on_entry", b.centered_on_entry},
                      {"scale", b.scale},
                      {"joint_norm", b.joint.norm()},
                      {"individual_norm", b.individual.norm()}});
  }
  write_artifact(dir / "summary.json", c,
                 {{"cases", cases.size()},
                  {"joint_rank", dec.joint_rank},
                  {"auto_threshold", auto_joint_threshold(static_cast<Index>(lb.blocks.size()))},
                  {"stacked_singular_values", nums(dec.stacked_singular_values)},
                  {"blocks", blocks}});
}

void write_diagnostics(const fs::path& dir, const RunConfig& c, const JackstrawResult& r) {
  const DiagnosticReport report = build_report(r);
  write_artifact(dir / "diagnostics.json", c, report_json(report));
  write_svg_panels(report, dir / "diagnostics");
}

void cmd_jackstraw(const RunConfig& c, std::ostream& err) {
  const LoadedBlocks lb = load_blocks(c);
  if (c.block_index < 1 || c.block_index > static_cast<Index>(lb.blocks.size())) {
    throw InputError("--block-index " + std::to_string(c.block_index) + " outside 1.." +
                     std::to_string(lb.blocks.size()));
  }
  if (c.component && *c.component < 1) throw InputError("--component is 1-based");
  JackstrawConfig jc = c.jackstraw;
  jc.seed = c.seed;
  jc.threads = c.threads;
  const JackstrawTarget target{c.space, c.block_index - 1,
                               c.component ? std::optional<Index>(*c.component - 1) : std::nullopt};
  const JackstrawResult r = jackstraw_run(lb.blocks, target, ajive_options(c, lb), jc);
  for (const auto& w : r.warnings) err << "warning: " << w << '\n';

  const fs::path dir = prepare_out(c);
  write_artifact(dir / "jackstraw.json", c, result_json(r));

  std::ofstream csv(dir / "features.csv", std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + (dir / "features.csv").string());
  csv << "# " << provenance_line(c) << "\nfeature,F,p,p_adj,significant\n";
  for (std::size_t i = 0; i < r.f_observed.size(); ++i) {
    csv << r.feature_names[i] << ',' << format_double(r.f_observed[i]) << ',' << format_double(r.p_raw[i])
        << ',' << format_double(r.p_adjusted[i]) << ',' << (r.significant[i] ? 1 : 0) << '\n';
  }
  if (!csv) throw std::runtime_error("error writing features.csv");
  csv.close();

  write_diagnostics(dir, c, r);
}

void write_table(const fs::path& path, const RunConfig& c, const std::array<double, 4>& ajive,
                 const std::array<double, 4>& pca) {
  std::ostringstream s;
  s << "# " << provenance_line(c) << "\nmethod";
  for (const auto& col : kComparisonColumns) s << ',' << col;
  s << "\nAJIVE";
  for (double v : ajive) s << ',' << format_double(v);
  s << "\nPCA";
  for (double v : pca) s << ',' << format_double(v);
  s << '\n';
  write_text(path, s.str());
}

void cmd_compare(const RunConfig& c) {
  if (c.replicates < 1) throw InputError("--replicates must be at least 1");
  std::vector<ComparisonTables> tables;
  json per_replicate = json::array();
  for (Index r = 0; r < c.replicates; ++r) {
    ToyConfig toy = c.toy;
    toy.seed = c.seed + static_cast<std::uint64_t>(r);
    JackstrawConfig jc = c.jackstraw;
    jc.seed = toy.seed;
    jc.threads = c.threads;
    tables.push_back(compare_methods(toy, jc));
    json entry = tables_json(tables.back());
    entry["seed"] = toy.seed;
    per_replicate.push_back(entry);
  }
  const ComparisonTables med = median_tables(tables);
  const fs::path dir = prepare_out(c);
  write_table(dir / "accuracy.csv", c, med.ajive_accuracy, med.pca_accuracy);
  write_table(dir / "angle.csv", c, med.ajive_angle, med.pca_angle);
  json median = tables_json(med);
  median.erase("pca_component");
  write_artifact(dir / "compare.json", c, {{"median", median}, {"replicates", per_replicate}});
}

void cmd_diproperm(const RunConfig& c) {
  const auto& spec = c.diproperm;
  if (spec.data.empty() || spec.labels.empty()) throw InputError("diproperm needs --data and --labels");
  const DataBlock block = read_block_csv(spec.data, fs::path(spec.data).stem().string());
  const auto labels = align_labels(read_labels_csv(spec.labels), block.case_ids());

  std::vector<std::string> classes;
  for (const auto& l : labels) {
    if (std::find(classes.begin(), classes.end(), l) == classes.end()) classes.push_back(l);
  }
  if (classes.size() != 2) {
    throw InputError("diproperm needs exactly two classes, found " + std::to_string(classes.size()));
  }
  std::string class1 = spec.class1.empty() ? classes[1] : spec.class1;
  if (class1 != classes[0] && class1 != classes[1]) throw InputError("class '" + class1 + "' not in labels");
  const std::string class0 = class1 == classes[0] ? classes[1] : classes[0];

  std::vector<int> binary;
  binary.reserve(labels.size());
  for (const auto& l : labels) binary.push_back(l == class1 ? 1 : 0);

  DiProPermConfig config = spec.config;
  config.seed = c.seed;
  config.threads = c.threads;
  const DiProPermResult r = diproperm_test(block.matrix(), binary, config);
  const fs::path dir = prepare_out(c);
  write_artifact(dir / "diproperm.json", c,
                 {{"class0", class0},
                  {"class1", class1},
                  {"n_class0", std::count(binary.begin(), binary.end(), 0)},
                  {"n_class1", std::count(binary.begin(), binary.end(), 1)},
                  {"statistic", to_string(config.statistic)},
                  {"observed_stat", num(r.observed_stat)},
                  {"z_score", num(r.z_score)},
                  {"z_interval", {num(r.z_interval.first), num(r.z_interval.second)}},
                  {"empirical_pvalue", r.empirical_pvalue},
                  {"retries", r.retries},
                  {"direction", nums(r.direction)},
                  {"null_stats", nums(r.null_stats)}});
}

void cmd_diagnose(const RunConfig& c) {
  if (c.result.empty()) throw InputError("diagnose needs --result jackstraw.json");
  std::ifstream in(c.result);
  if (!in) throw InputError("cannot open " + c.result);
  const JackstrawResult r = result_from_json(json::parse(in));
  write_diagnostics(prepare_out(c), c, r);
}

unsigned default_threads() {
  const char* env = std::getenv("JIVE_JACKSTRAW_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  const Index t = parse_index(env, "JIVE_JACKSTRAW_THREADS");
  if (t < 1) throw InputError("JIVE_JACKSTRAW_THREADS must be at least 1");
  return static_cast<unsigned>(t);
}

// Raw command-line values; each is applied only when given.
struct Flags {
  std::string config;
  std::vector<std::string> blocks;
  std::vector<std::string> names;
  std::vector<Index> ranks;
  std::string joint_rank;
  bool normalize = false;
  std::string indicator;
  std::vector<std::string> classes;
  std::string space;
  Index block_index = 1;
  std::string component;
  Index k = 1;
  Index s = 1000;
  std::string mode;
  double alpha = 0.05;
  std::string adjust;
  bool smoothing = false;
  std::uint64_t seed = 1;
  Index threads = 1;
  std::string out;
  Index cases = 160;
  double noise_variance = 2.0;
  std::vector<std::string> joint_support;
  std::vector<std::string> individual_support;
  Index replicates = 10;
  std::string data;
  std::string labels;
  std::string class1;
  Index n_perm = 1000;
  bool unbalanced = false;
  Index batches = 10;
  std::string statistic;
  std::string result;
};

bool given(const CLI::App& app, const std::string& name) {
  try {
    return app.get_option(name)->count() > 0;
  } catch (const CLI::OptionNotFound&) {
    return false;
  }
}

RunConfig resolve(const CLI::App& sub, const Flags& f) {
  RunConfig c;
  c.command = sub.get_name();
  c.threads = default_threads();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw InputError("cannot open config " + f.config);
    apply_json(c, json::parse(in));
    c.command = sub.get_name();
  }
  if (given(sub, "--blocks")) {
    if (!f.names.empty() && f.names.size() != f.blocks.size()) {
      throw InputError("--names must give one name per block");
    }
    c.blocks.clear();
    for (std::size_t i = 0; i < f.blocks.size(); ++i) {
      c.blocks.push_back({f.blocks[i], f.names.empty() ? fs::path(f.blocks[i]).stem().string() : f.names[i]});
    }
  }
  if (given(sub, "--ranks")) c.ranks = f.ranks;
  if (given(sub, "--joint-rank")) {
    if (f.joint_rank == "auto") {
      c.joint_rank.reset();
    } else {
      c.joint_rank = parse_index(f.joint_rank, "--joint-rank");
    }
  }
  if (given(sub, "--normalize")) c.normalize = f.normalize;
  if (given(sub, "--indicator")) c.indicator = IndicatorSpec{f.indicator, f.classes};
  if (given(sub, "--space")) c.space = parse_space(f.space);
  if (given(sub, "--block-index")) c.block_index = f.block_index;
  if (given(sub, "--component")) {
    if (f.component == "all") {
      c.component.reset();
    } else {
      c.component = parse_index(f.component, "--component");
    }
  }
  if (given(sub, "--k")) c.jackstraw.k_rows = f.k;
  if (given(sub, "--s")) c.jackstraw.n_reps = f.s;
  if (given(sub, "--mode")) c.jackstraw.mode = parse_mode(f.mode);
  if (given(sub, "--alpha")) c.jackstraw.alpha = f.alpha;
  if (given(sub, "--adjust")) c.jackstraw.adjustment = parse_adjustment(f.adjust);
  if (given(sub, "--smoothing")) c.jackstraw.smoothing = f.smoothing;
  if (given(sub, "--seed")) c.seed = f.seed;
  if (given(sub, "--threads")) {
    if (f.threads < 1) throw InputError("--threads must be at least 1");
    c.threads = static_cast<unsigned>(f.threads);
  }
  if (given(sub, "--out")) c.out = f.out;
  if (given(sub, "--cases")) c.toy.cases = f.cases;
  if (given(sub, "--noise-variance")) c.toy.noise_variance = f.noise_variance;
  if (given(sub, "--joint-support")) c.toy.joint_support = parse_range_pair(f.joint_support);
  if (given(sub, "--individual-support")) c.toy.individual_support = parse_range_pair(f.individual_support);
  if (given(sub, "--replicates")) c.replicates = f.replicates;
  if (given(sub, "--data")) c.diproperm.data = f.data;
  if (given(sub, "--labels")) c.diproperm.labels = f.labels;
  if (given(sub, "--class1")) c.diproperm.class1 = f.class1;
  if (given(sub, "--n-perm")) c.diproperm.config.n_perm = f.n_perm;
  if (given(sub, "--unbalanced")) c.diproperm.config.balanced = !f.unbalanced;
  if (given(sub, "--batches")) c.diproperm.config.batches = f.batches;
  if (given(sub, "--statistic")) c.diproperm.config.statistic = parse_statistic(f.statistic);
  if (given(sub, "--result")) c.result = f.result;
  return c;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file (flags override its fields)");
  sub->add_option("--seed", f.seed, "Master seed");
  sub->add_option("--threads", f.threads, "Worker threads (default: $JIVE_JACKSTRAW_THREADS or 1)");
  sub->add_option("--out", f.out, "Output directory");
}

void add_decomposition(CLI::App* sub, Flags& f) {
  sub->add_option("--blocks", f.blocks, "Block CSV files")->delimiter(',');
  sub->add_option("--names", f.names, "Block names (default: file stems)")->delimiter(',');
  sub->add_option("--ranks", f.ranks, "Initial signal rank per block")->delimiter(',');
  sub->add_option("--joint-rank", f.joint_rank, "Joint rank, or 'auto'");
  sub->add_flag("--normalize", f.normalize, "Scale each block to unit Frobenius norm");
  sub->add_option("--indicator", f.indicator, "case_id,label file appended as a one-hot block");
  sub->add_option("--classes", f.classes, "Indicator class order")->delimiter(',');
}

void add_jackstraw(CLI::App* sub, Flags& f) {
  sub->add_option("--k", f.k, "Rows permuted per replicate");
  sub->add_option("--s", f.s, "Replicates");
  sub->add_option("--mode", f.mode, "full or approx");
  sub->add_option("--alpha", f.alpha, "Significance level");
  sub->add_option("--adjust", f.adjust, "bonferroni, bh or none");
  sub->add_flag("--smoothing", f.smoothing, "Use (1 + count) / (1 + B) p-values");
}

void add_toy(CLI::App* sub, Flags& f) {
  sub->add_option("--cases", f.cases, "Number of cases");
  sub->add_option("--noise-variance", f.noise_variance, "Noise variance");
  sub->add_option("--joint-support", f.joint_support, "Joint rows per block, e.g. 1-80,1-40")->delimiter(',');
  sub->add_option("--individual-support", f.individual_support, "Individual rows per block")->delimiter(',');
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"AJIVE decomposition with jackstraw inference on the loadings", kTool};
  app.set_version_flag("--version", JIVE_VERSION);
  app.require_subcommand(1);
  Flags f;

  auto* simulate = app.add_subcommand("simulate", "Write the two-block toy data and its ground truth");
  add_common(simulate, f);
  add_toy(simulate, f);

  auto* ajive = app.add_subcommand("ajive", "Joint/individual decomposition");
  add_common(ajive, f);
  add_decomposition(ajive, f);

  auto* jack = app.add_subcommand("jackstraw", "Jackstraw test of AJIVE loadings");
  add_common(jack, f);
  add_decomposition(jack, f);
  add_jackstraw(jack, f);
  jack->add_option("--space", f.space, "joint or individual");
  jack->add_option("--block-index", f.block_index, "Block whose features are tested (1-based)");
  jack->add_option("--component", f.component, "Component (1-based) or 'all'");

  auto* compare = app.add_subcommand("compare", "AJIVE- vs PCA-jackstraw on toy replicates");
  add_common(compare, f);
  add_toy(compare, f);
  add_jackstraw(compare, f);
  compare->add_option("--replicates", f.replicates, "Toy draws; replicate r uses seed + r");

  auto* dpp = app.add_subcommand("diproperm", "Direction-projection-permutation two-sample test");
  add_common(dpp, f);
  dpp->add_option("--data", f.data, "Matrix CSV (features x cases)");
  dpp->add_option("--labels", f.labels, "case_id,label file with two classes");
  dpp->add_option("--class1", f.class1, "Label treated as class 1");
  dpp->add_option("--n-perm", f.n_perm, "Permutations");
  dpp->add_flag("--unbalanced", f.unbalanced, "Plain label shuffles");
  dpp->add_option("--batches", f.batches, "Batches for the z-score interval");
  dpp->add_option("--statistic", f.statistic, "mean_difference or t");

  auto* diag = app.add_subcommand("diagnose", "Diagnostic report for a saved jackstraw.json");
  add_common(diag, f);
  diag->add_option("--result", f.result, "jackstraw.json written by the jackstraw command");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << JIVE_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    const RunConfig c = resolve(*sub, f);
    if (c.command == "simulate") {
      cmd_simulate(c);
    } else if (c.command == "ajive") {
      cmd_ajive(c);
    } else if (c.command == "jackstraw") {
      cmd_jackstraw(c, err);
    } else if (c.command == "compare") {
      cmd_compare(c);
    } else if (c.command == "diproperm") {
      cmd_diproperm(c);
    } else {
      cmd_diagnose(c);
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    err << "error: bad JSON: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace jive::cli
