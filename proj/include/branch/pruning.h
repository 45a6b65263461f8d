#ifndef BRANCH_PRUNING_H
#define BRANCH_PRUNING_H

#include <optional>
#include <string>
#include <vector>

#include "branch/branch_model.h"
#include "branch/characterize.h"

namespace branch
{
/// Per-branch pruning decision with rule attribution. Remove decisions carry a
/// global order starting at 1.
struct PruneDecision
{
  enum class Action
  {
    Remove,
    Shorten,
    Keep
  };
  enum class Rule
  {
    DiameterRule,
    LengthRule,
    None
  };

  std::string branch_id;
  Action action = Action::Keep;
  Rule rule = Rule::None;
  double shorten_to_cm = 0.0;       // meaningful for Shorten only
  std::optional<int> order;         // meaningful for Remove only

  bool operator==(const PruneDecision &other) const = default;
};

struct PruningPlan
{
  std::vector<PruneDecision> decisions;  // one per input branch, input order
  double diameter_cutoff_cm = 2.0;
  double length_cutoff_cm = 45.0;

  bool operator==(const PruningPlan &other) const = default;
};

/// Global pruning strategy over branch traits. Branches whose diameter exceeds
/// the cutoff become Remove targets: the largest first, the rest by attachment
/// height descending (ties by branch id ascending). Non-targets longer than the
/// length cutoff are shortened to it; everything else is kept.
/// Throws DuplicateBranchId.
PruningPlan plan_pruning(const std::vector<TraitRecord> &traits, double diameter_cutoff_cm = 2.0,
                         double length_cutoff_cm = 45.0);

/// Writes a side-view SVG of the tree coloured by action (removal order
/// labelled) and a machine-readable JSON of the same plan.
/// Throws UnknownBranchId when the plan names a branch the tree lacks.
void emit_pruning_map(const PruningPlan &plan, const TreeModel &tree, const std::string &svg_path,
                      const std::string &json_path);

std::string plan_to_json(const PruningPlan &plan);
PruningPlan plan_from_json(const std::string &json_text);

}  // namespace branch

#endif  // BRANCH_PRUNING_H
