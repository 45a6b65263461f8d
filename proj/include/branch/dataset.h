#ifndef BRANCH_DATASET_H
#define BRANCH_DATASET_H

#include <optional>
#include <string>
#include <vector>

#include "branch/completion.h"
#include "branch/model_io.h"
#include "branch/pruning.h"
#include "branch/synth.h"

namespace branch
{
/// Dataset generation settings.
struct DatasetParams
{
  size_t count = 20;
  std::string mode = "fb";      // fb: random branch skeletons, nb: tree units
  size_t complete_count = 4096;
  size_t partial_count = 0;     // 0 derives it from the occlusion fraction
  double occlusion_fraction = 0.4;
  int grid_resolution = 256;
  size_t gap_count = 2;
  double gap_radius = 0.05;     // meters
  // "junction": the first gap lands near the measurement station, the regime
  // where incomplete data breaks diameter estimation; "uniform": anywhere
  std::string gap_placement = "junction";
  double junction_band = 0.005;  // jitter of the first gap centre, meters
  double split_train_fraction = 0.8;
  std::string split_rounding = "floor";  // floor | round
  double diameter_offset = 0.05;         // measurement station, meters from base
  RandomBranchParams branch_params;
  TreeUnitParams tree_params;
};

/// Everything one end-to-end run needs. All randomness derives from the single
/// root seed through named substreams, so per-sample results are stable when
/// the count changes.
struct RunConfig
{
  uint64_t seed = 0;
  std::string out_dir = "out";
  DatasetParams dataset;
  CompletionConfig completion;
  double diameter_cutoff_cm = 2.0;
  double length_cutoff_cm = 45.0;
  int threads = 0;  // 0 = hardware concurrency
};

RunConfig run_config_from_json(const std::string &path);

/// Generates clouds, skeletons and trait sidecars under cfg.out_dir and writes
/// manifest.json. Idempotent for a fixed seed.
Manifest run_generate(const RunConfig &cfg);

struct CompletionSummaryRow
{
  std::string id;
  double cd_l1_x1000 = 0.0;  // completed vs ground-truth complete cloud
};

struct CompletionRun
{
  Manifest manifest;  // with completed paths filled in
  std::vector<CompletionSummaryRow> summary;
  double mean_cd_l1_x1000 = 0.0;
};

/// Runs the completion optimizer over every manifest sample, writing completed
/// clouds, estimated skeletons, loss traces, a summary CSV and the updated
/// manifest (completed_manifest.json).
CompletionRun run_complete(const Manifest &manifest, const RunConfig &cfg);

/// Per-branch characterization outcome; estimation can fail on bad slices, so
/// measured traits are optional.
struct BranchEval
{
  std::string id;
  TraitRecord gt;
  std::optional<TraitRecord> raw;
  std::optional<TraitRecord> completed;
};

struct ReportRow
{
  std::string model;    // raw | completed
  std::string dataset;
  std::string trait;    // diameter | angle | length
  ErrorReport report;
};

struct EvaluateResult
{
  std::vector<BranchEval> branches;
  std::vector<ReportRow> rows;
  PruningPlan gt_plan;
  PruningPlan raw_plan;
  PruningPlan completed_plan;
  size_t decision_flips = 0;  // raw vs completed actions that disagree
};

/// Characterizes raw partial clouds and completed clouds against the sidecar
/// ground truth, assembles the error table, and builds pruning plans for both.
EvaluateResult run_evaluate(const Manifest &manifest, const RunConfig &cfg);

void write_report_csv(const std::string &path, const std::vector<ReportRow> &rows);
std::string report_table(const std::vector<ReportRow> &rows);

/// Writes report.csv/report.txt, plan JSONs, side-view pruning maps for the raw
/// and completed plans, and flips.json under cfg.out_dir.
void write_evaluation_outputs(const EvaluateResult &result, const Manifest &manifest, const RunConfig &cfg);

}  // namespace branch

#endif  // BRANCH_DATASET_H
