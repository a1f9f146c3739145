#pragma once

#include "mlnl/config.hpp"

#include <string>

namespace mlnl {

/// Executes the configured pipeline and writes the artifact files into
/// output_dir: solution.csv, solve_report.json, per-diagnostic reports, and
/// summary.json with fitted exponents and pass/fail flags. On a failure the
/// partial artifacts are kept and MANIFEST.json records the completion
/// state. Returns the process exit status (0 = success).
int run(const ExperimentConfig& config);

/// Only the kernel assumption check (the check-kernel subcommand).
int run_kernel_check(const ExperimentConfig& config);

/// Filesystem helper shared with the CLI: write a whole file, creating
/// parent directories.
void write_file(const std::string& path, const std::string& content);

} // namespace mlnl
