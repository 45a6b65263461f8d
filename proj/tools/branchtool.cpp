#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "branch/cloud_io.h"
#include "branch/dataset.h"
#include "branch/errors.h"
#include "branch/rng.h"

namespace fs = std::filesystem;
using namespace branch;

namespace
{
Vec3 parse_vec3(const std::string &text)
{
  Vec3 v;
  if (std::sscanf(text.c_str(), "%lf,%lf,%lf", &v[0], &v[1], &v[2]) != 3)
    throw BadInput("expected x,y,z but got: " + text);
  return v;
}

int cmd_generate(const RunConfig &cfg)
{
  const Manifest manifest = run_generate(cfg);
  std::cout << "generated " << manifest.samples.size() << " samples under " << cfg.out_dir << "\n";
  std::cout << "split: " << manifest.train_ids.size() << " train / " << manifest.test_ids.size()
            << " test\n";
  return 0;
}

int cmd_corrupt(const std::string &in_path, const std::string &out_path,
                const std::vector<std::string> &gaps, double radius)
{
  const Cloud cloud = read_cloud(in_path);
  std::vector<Vec3> centres;
  for (const auto &g : gaps) centres.push_back(parse_vec3(g));
  const Cloud out = corrupt_gaps(cloud, centres, radius);
  write_cloud(out_path, out);
  std::cout << "kept " << out.size() << " of " << cloud.size() << " points\n";
  return 0;
}

int cmd_complete_manifest(const std::string &manifest_path, const RunConfig &cfg)
{
  const Manifest manifest = read_manifest(manifest_path);
  const CompletionRun run = run_complete(manifest, cfg);
  std::cout << "completed " << run.summary.size() << " samples, mean CD-l1 x1000 = "
            << run.mean_cd_l1_x1000 << "\n";
  return 0;
}

int cmd_complete_single(const std::string &cloud_path, const std::string &skeleton_path,
                        const RunConfig &cfg)
{
  const Cloud partial = read_cloud(cloud_path);
  CompletionConfig ccfg = cfg.completion;
  ccfg.seed = derive_seed(cfg.seed, "coarse", 0);

  CompletionResult result;
  if (!skeleton_path.empty())
  {
    const Skeleton skeleton = read_skeleton_json(skeleton_path);
    const Cloud coarse = synthesize_coarse(skeleton, ccfg.output_count, ccfg.seed);
    result = refine(coarse, partial, skeleton, ccfg);
  }
  else
    result = complete_cloud(partial, ccfg);

  fs::create_directories(cfg.out_dir);
  const std::string stem = fs::path(cloud_path).stem().string();
  const std::string completed = (fs::path(cfg.out_dir) / (stem + "_completed.ply")).string();
  const std::string est = (fs::path(cfg.out_dir) / (stem + "_skeleton.json")).string();
  const std::string trace = (fs::path(cfg.out_dir) / (stem + "_trace.csv")).string();
  write_cloud(completed, result.completed);
  write_skeleton_json(est, result.skeleton_est);
  std::ofstream tr(trace);
  tr << "step,cd,rep,var,total\n";
  for (const auto &row : result.loss_trace)
    tr << row.step << "," << row.cd << "," << row.rep << "," << row.var << "," << row.total << "\n";
  std::cout << "wrote " << completed << "\n";
  return 0;
}

int cmd_characterize(const std::string &cloud_path, const std::string &skeleton_path,
                     const std::string &base_text, const std::string &axis_text, double offset,
                     size_t slices)
{
  const Cloud cloud = read_cloud(cloud_path);
  Skeleton skeleton;
  if (!skeleton_path.empty())
    skeleton = read_skeleton_json(skeleton_path);
  else
    skeleton = estimate_skeleton(cloud, std::max<size_t>(3, std::min(slices, cloud.size() / 10)));

  const Vec3 axis = axis_text.empty() ? Vec3(0, 0, 1) : parse_vec3(axis_text);
  if (base_text.empty())
    skeleton = orient_to_base(skeleton);
  else
  {
    const Vec3 base = parse_vec3(base_text);
    skeleton = orient_to_base(skeleton, &base);
  }

  nlohmann::ordered_json j;
  j["diameter_mm"] = measure_diameter(cloud, skeleton, offset);
  j["angle_deg"] = measure_angle(skeleton, axis);
  j["length_cm"] = measure_length(skeleton);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_prune(const std::string &traits_path, const std::string &tree_path, const RunConfig &cfg)
{
  std::ifstream in(traits_path);
  if (!in)
    throw IoError("cannot open " + traits_path);
  nlohmann::json jt;
  try
  {
    jt = nlohmann::json::parse(in);
  }
  catch (const nlohmann::json::exception &e)
  {
    throw IoError(traits_path + std::string(": ") + e.what());
  }
  std::vector<TraitRecord> traits;
  for (const auto &j : jt)
  {
    TraitRecord t;
    t.branch_id = j.at("branch_id").get<std::string>();
    t.diameter_mm = j.at("diameter_mm").get<double>();
    t.angle_deg = j.value("angle_deg", 0.0);
    t.length_cm = j.at("length_cm").get<double>();
    t.attachment_height_m = j.at("height_m").get<double>();
    traits.push_back(t);
  }
  const PruningPlan plan = plan_pruning(traits, cfg.diameter_cutoff_cm, cfg.length_cutoff_cm);
  fs::create_directories(cfg.out_dir);
  const std::string plan_path = (fs::path(cfg.out_dir) / "plan.json").string();
  if (!tree_path.empty())
  {
    const TreeModel tree = read_tree_json(tree_path);
    emit_pruning_map(plan, tree, (fs::path(cfg.out_dir) / "map.svg").string(), plan_path);
  }
  else
  {
    std::ofstream out(plan_path);
    out << plan_to_json(plan) << "\n";
  }
  size_t removals = 0;
  for (const auto &d : plan.decisions) removals += d.action == PruneDecision::Action::Remove ? 1 : 0;
  std::cout << "plan: " << removals << " removals of " << plan.decisions.size() << " branches -> "
            << plan_path << "\n";
  return 0;
}

int cmd_evaluate(const std::string &manifest_path, const RunConfig &cfg)
{
  const Manifest manifest = read_manifest(manifest_path);
  const EvaluateResult result = run_evaluate(manifest, cfg);
  write_evaluation_outputs(result, manifest, cfg);
  std::cout << report_table(result.rows);
  std::cout << "decision flips raw->completed: " << result.decision_flips << "\n";
  return 0;
}

int cmd_loss_eval(const std::string &loss, const std::string &a_path, const std::string &b_path,
                  const std::string &norm, size_t k, double h)
{
  const Cloud a = read_cloud(a_path);
  LossValue value;
  if (loss == "chamfer")
  {
    const Cloud b = read_cloud(b_path);
    value = chamfer(a, b, norm == "l2sq" ? ChamferNorm::L2Squared : ChamferNorm::L1);
  }
  else if (loss == "repulsion")
    value = repulsion(a, k, h > 0.0 ? h : 0.03 * bounds_of(a).diagonal());
  else if (loss == "variance")
  {
    const Cloud b = read_cloud(b_path);
    value = variance_loss(a, b);
  }
  else if (loss == "skeleton-cd")
  {
    const Cloud b = read_cloud(b_path);
    value = skeleton_cd_loss(a, b);
  }
  else
    throw BadInput("unknown loss: " + loss);

  double grad2 = 0.0;
  for (const auto &g : value.gradient) grad2 += g.squaredNorm();
  std::printf("value=%.12g grad_norm=%.12g\n", value.value, std::sqrt(grad2));
  return 0;
}
}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"branchtools: synthetic branch generation, completion and characterization"};
  app.require_subcommand(1);

  uint64_t seed = 0;
  std::string out_dir = "out";
  std::string config_path;
  app.add_option("--seed", seed, "root seed for all randomness");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--config", config_path, "JSON run configuration");

  auto build_config = [&]() {
    RunConfig cfg;
    if (!config_path.empty())
      cfg = run_config_from_json(config_path);
    if (seed != 0 || config_path.empty())
      cfg.seed = seed;
    if (out_dir != "out" || cfg.out_dir.empty())
      cfg.out_dir = out_dir;
    return cfg;
  };

  // generate
  auto *gen = app.add_subcommand("generate", "generate a synthetic branch dataset");
  size_t gen_count = 0;
  std::string gen_mode;
  double gen_occlusion = -1.0, gen_gap_radius = -1.0, gen_split = -1.0;
  int gen_gaps = -1, gen_grid = 0;
  size_t gen_complete = 0, gen_partial = 0;
  std::string gen_rounding;
  gen->add_option("--count", gen_count, "number of branch samples");
  gen->add_option("--mode", gen_mode, "fb (random skeletons) or nb (tree units)");
  gen->add_option("--complete-count", gen_complete, "points per complete cloud");
  gen->add_option("--partial-count", gen_partial, "points per partial cloud");
  gen->add_option("--occlusion", gen_occlusion, "occluded fraction when --partial-count is unset");
  gen->add_option("--gaps", gen_gaps, "number of surface gaps per sample");
  gen->add_option("--gap-radius", gen_gap_radius, "gap radius in meters");
  gen->add_option("--split", gen_split, "train fraction of the train/test split");
  gen->add_option("--split-rounding", gen_rounding, "floor or round");
  gen->add_option("--grid", gen_grid, "ray grid resolution");

  // corrupt
  auto *cor = app.add_subcommand("corrupt", "remove spherical gaps from a cloud");
  std::string cor_in, cor_out;
  std::vector<std::string> cor_gaps;
  double cor_radius = 0.05;
  cor->add_option("--in", cor_in, "input cloud")->required();
  cor->add_option("--out-file", cor_out, "output cloud")->required();
  cor->add_option("--gap", cor_gaps, "gap centre x,y,z (repeatable)")->required();
  cor->add_option("--gap-radius", cor_radius, "gap radius in meters");

  // complete
  auto *com = app.add_subcommand("complete", "run the completion optimizer");
  std::string com_manifest, com_cloud, com_skeleton;
  size_t com_output = 0, com_steps = SIZE_MAX, com_var_step = SIZE_MAX;
  double com_step_size = -1.0, com_l1 = -1.0, com_l2 = -1.0;
  com->add_option("--manifest", com_manifest, "dataset manifest to complete");
  com->add_option("--cloud", com_cloud, "single partial cloud file");
  com->add_option("--skeleton", com_skeleton, "optional skeleton JSON for --cloud mode");
  com->add_option("--output-count", com_output, "completed cloud size");
  com->add_option("--steps", com_steps, "gradient descent iterations");
  com->add_option("--step-size", com_step_size, "initial line-search step in meters");
  com->add_option("--var-step", com_var_step, "iteration that activates the variance term");
  com->add_option("--lambda1", com_l1, "skeleton loss weight");
  com->add_option("--lambda2", com_l2, "variance loss weight");

  // characterize
  auto *cha = app.add_subcommand("characterize", "measure branch traits from a cloud");
  std::string cha_cloud, cha_skeleton, cha_base, cha_axis;
  double cha_offset = 0.02;
  size_t cha_slices = 30;
  cha->add_option("--cloud", cha_cloud, "branch cloud")->required();
  cha->add_option("--skeleton", cha_skeleton, "skeleton JSON (estimated when omitted)");
  cha->add_option("--base", cha_base, "base point hint x,y,z");
  cha->add_option("--trunk-axis", cha_axis, "trunk axis x,y,z (default 0,0,1)");
  cha->add_option("--offset", cha_offset, "diameter station, meters from base");
  cha->add_option("--slices", cha_slices, "skeleton estimation slices");

  // prune
  auto *pru = app.add_subcommand("prune", "plan pruning from branch traits");
  std::string pru_traits, pru_tree;
  double pru_diam = -1.0, pru_len = -1.0;
  pru->add_option("--traits", pru_traits, "JSON array of branch traits")->required();
  pru->add_option("--tree", pru_tree, "tree JSON for the SVG map");
  pru->add_option("--diameter-cutoff-cm", pru_diam, "diameter rule cutoff");
  pru->add_option("--length-cutoff-cm", pru_len, "length rule cutoff");

  // evaluate
  auto *eva = app.add_subcommand("evaluate", "characterize raw vs completed and report errors");
  std::string eva_manifest;
  eva->add_option("--manifest", eva_manifest, "completed manifest")->required();

  // loss-eval
  auto *los = app.add_subcommand("loss-eval", "evaluate a loss between two cloud files");
  std::string los_loss = "chamfer", los_a, los_b, los_norm = "l1";
  size_t los_k = 5;
  double los_h = 0.0;
  los->add_option("--loss", los_loss, "chamfer | repulsion | variance | skeleton-cd");
  los->add_option("--a", los_a, "first cloud (prediction)")->required();
  los->add_option("--b", los_b, "second cloud (target / skeleton points)");
  los->add_option("--norm", los_norm, "l1 or l2sq (chamfer)");
  los->add_option("--k", los_k, "repulsion neighbours");
  los->add_option("--bandwidth", los_h, "repulsion bandwidth in meters");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try
  {
    RunConfig cfg = build_config();
    if (gen->parsed())
    {
      if (gen_count > 0) cfg.dataset.count = gen_count;
      if (!gen_mode.empty()) cfg.dataset.mode = gen_mode;
      if (gen_complete > 0) cfg.dataset.complete_count = gen_complete;
      if (gen_partial > 0) cfg.dataset.partial_count = gen_partial;
      if (gen_occlusion >= 0.0) cfg.dataset.occlusion_fraction = gen_occlusion;
      if (gen_gaps >= 0) cfg.dataset.gap_count = static_cast<size_t>(gen_gaps);
      if (gen_gap_radius > 0.0) cfg.dataset.gap_radius = gen_gap_radius;
      if (gen_split > 0.0) cfg.dataset.split_train_fraction = gen_split;
      if (!gen_rounding.empty()) cfg.dataset.split_rounding = gen_rounding;
      if (gen_grid > 0) cfg.dataset.grid_resolution = gen_grid;
      return cmd_generate(cfg);
    }
    if (cor->parsed())
      return cmd_corrupt(cor_in, cor_out, cor_gaps, cor_radius);
    if (com->parsed())
    {
      if (com_output > 0) cfg.completion.output_count = com_output;
      if (com_steps != SIZE_MAX) cfg.completion.steps = com_steps;
      if (com_step_size > 0.0) cfg.completion.step_size = com_step_size;
      if (com_var_step != SIZE_MAX) cfg.completion.variance_activation_step = com_var_step;
      if (com_l1 >= 0.0) cfg.completion.weights.lambda_skeleton = com_l1;
      if (com_l2 >= 0.0) cfg.completion.weights.lambda_variance = com_l2;
      if (!com_manifest.empty())
        return cmd_complete_manifest(com_manifest, cfg);
      if (!com_cloud.empty())
        return cmd_complete_single(com_cloud, com_skeleton, cfg);
      throw BadInput("complete needs --manifest or --cloud");
    }
    if (cha->parsed())
      return cmd_characterize(cha_cloud, cha_skeleton, cha_base, cha_axis, cha_offset, cha_slices);
    if (pru->parsed())
    {
      if (pru_diam > 0.0) cfg.diameter_cutoff_cm = pru_diam;
      if (pru_len > 0.0) cfg.length_cutoff_cm = pru_len;
      return cmd_prune(pru_traits, pru_tree, cfg);
    }
    if (eva->parsed())
      return cmd_evaluate(eva_manifest, cfg);
    if (los->parsed())
      return cmd_loss_eval(los_loss, los_a, los_b, los_norm, los_k, los_h);
  }
  catch (const BadInput &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  catch (const NumericError &e)
  {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
