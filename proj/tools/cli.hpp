#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "semrte/config.hpp"

namespace semrte::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

// Everything `train` needs. Read from a flat JSON object whose keys are the
// field names below; command-line flags override file values.
struct RunConfig {
  std::string train_pairs;
  std::string val_pairs;  // empty: split off train_pairs with val_ratio
  std::string aspects;
  std::string output_dir = "run";
  double val_ratio = 0.1;
  int chunk_size = 3;
  bool ablate_semantics = false;
  TrainConfig train;
  EncoderConfig encoder;
  FusionConfig fusion;
};

// Throws std::invalid_argument listing every unknown key, DataError on
// malformed JSON.
RunConfig parse_run_config(const std::string& json_text);
std::string run_config_to_json(const RunConfig& cfg);
std::vector<std::string> run_config_keys();

// Runs one subcommand. Output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace semrte::cli
