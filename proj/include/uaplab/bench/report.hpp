#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "uaplab/attackforge/train_set.hpp"
#include "uaplab/bench/experiment.hpp"

namespace uaplab::bench {

/// %.17g, with "nan" for NaN so values survive a text round trip.
std::string format_real(double v);
double parse_real(const std::string& s);

/// Writes attack_report.tsv, attack_summary.txt, train_set.bin and, per row,
/// traces/row_<i>/seed_<s>.trace plus perturbations/row_<i>.uapp when a fixed
/// perturbation was applied. Files are deterministic for equal inputs.
void write_attack_report(const std::filesystem::path& dir, const AttackReport& report,
                         const std::filesystem::path& agent_path, const attack::TrainSet& d);

struct StoredReport {
  AttackReport report;  ///< rows carry no traces or perturbations
  std::filesystem::path agent_path;
};
StoredReport read_attack_report(const std::filesystem::path& dir);

struct CheckResult {
  std::size_t rows_checked = 0;
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
};

/// Recomputes every row's return statistics from the emitted traces and its
/// fooling rate from the stored agent, train set and perturbation.
CheckResult check_report(const std::filesystem::path& dir);

}  // namespace uaplab::bench
