#pragma once

#include <string>

#include "driftscan/config.hpp"
#include "driftscan/stream.hpp"

namespace driftscan {

// Load, preprocess (entropy normalization, correlation pruning, scaling fit
// on the training window), and chunk one configured dataset.
GroupedStream prepare_dataset(const RunConfig& cfg, const DatasetConfig& ds);

// Subcommands; all outputs go under cfg.output_dir, every file embeds the
// config snapshot, and reruns with the same config are byte-identical.
void cmd_synth(const RunConfig& cfg);
void cmd_detect(const RunConfig& cfg);
void cmd_baseline(const RunConfig& cfg);
void cmd_score(const RunConfig& cfg);
void cmd_rank(const RunConfig& cfg);

// Write-then-rename so partial files never appear under their final name.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace driftscan
