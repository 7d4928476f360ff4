#pragma once

#include "voxpath/config.hpp"
#include "voxpath/paths.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace voxpath {

/// Results of one scheme's phantom -> metric -> solve -> trace -> score run.
struct SchemeReport {
  std::int64_t accepted_voxels = 0;
  double s_net = 0.0;
  double coverage = 0.0;
  std::int64_t failed_paths = 0;
  std::int64_t contour_seeds = 0;
  double wall_ms = 0.0;  // serialized only on request; see run_compare
};

struct RunReport {
  CompareConfig config;
  SchemeReport baseline;
  SchemeReport corrected;
  double coverage_gap = 0.0;  // corrected - baseline

  /// Timings are excluded by default so that identical configs produce
  /// byte-identical reports.
  nlohmann::ordered_json to_json(bool include_timings = false) const;
};

/// Runs the full pipeline twice (baseline, corrected) on identical inputs,
/// writes report.json plus the exported volumes and networks under out_dir.
RunReport run_compare(const CompareConfig& cfg, const std::filesystem::path& out_dir,
                      bool include_timings = false);

}  // namespace voxpath
