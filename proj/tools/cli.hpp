#pragma once

#include "jive/diproperm.hpp"
#include "jive/jackstraw.hpp"
#include "jive/simulation.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace jive::cli {

struct BlockSpec {
  std::string path;
  std::string name;
};

struct IndicatorSpec {
  std::string labels;                // case_id,label file
  std::vector<std::string> classes;  // empty: order of first appearance
};

struct DiProPermSpec {
  std::string data;
  std::string labels;
  std::string class1;  // empty: second label by first appearance
  DiProPermConfig config;
};

/// Everything a subcommand needs. Thread count and output directory only
/// affect where and how fast results are produced, so they are reported as
/// run metadata rather than as part of the resolved config.
struct RunConfig {
  std::string command;
  std::vector<BlockSpec> blocks;
  std::vector<Index> ranks;
  std::optional<Index> joint_rank;
  bool normalize = false;
  std::optional<IndicatorSpec> indicator;

  Space space = Space::joint;
  Index block_index = 1;              // 1-based on the command line
  std::optional<Index> component = 1; // 1-based; empty tests the whole space
  JackstrawConfig jackstraw;

  ToyConfig toy;
  Index replicates = 10;

  DiProPermSpec diproperm;
  std::string result;  // jackstraw.json consumed by `diagnose`

  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out = ".";
};

/// Resolved config as JSON: the sections used by `config.command`.
nlohmann::json to_json(const RunConfig& config);

/// Overlays fields present in `j` onto `config`. Accepts either a bare config
/// object or a previously written artifact (its "config" member is used).
void apply_json(RunConfig& config, const nlohmann::json& j);

/// Entry point used by main and by tests. Returns the process exit code:
/// 0 on success, 2 for invalid input, 1 for failures while running.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace jive::cli
