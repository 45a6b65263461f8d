#include "branch/losses.h"

#include <algorithm>
#include <cmath>

#include "branch/errors.h"
#include "branch/knn.h"
#include "branch/rng.h"

namespace branch
{
LossValue chamfer(const Cloud &pred, const Cloud &gt, ChamferNorm norm)
{
  if (pred.empty() || gt.empty())
    throw EmptyCloud("chamfer needs two non-empty clouds");

  LossValue out;
  out.gradient.assign(pred.size(), Vec3::Zero());

  const KdTree pred_tree(pred);
  const KdTree gt_tree(gt);
  const double inv_gt = 1.0 / static_cast<double>(gt.size());
  const double inv_pred = 1.0 / static_cast<double>(pred.size());

  // gt -> pred: each ground-truth point pulls its nearest predicted point
  for (size_t i = 0; i < gt.size(); i++)
  {
    const size_t j = pred_tree.nearest(gt[i]);
    const Vec3 diff = pred[j] - gt[i];
    const double dist = diff.norm();
    if (norm == ChamferNorm::L1)
    {
      out.value += inv_gt * dist;
      if (dist > 0.0)
        out.gradient[j] += inv_gt * diff / dist;
    }
    else
    {
      out.value += inv_gt * diff.squaredNorm();
      out.gradient[j] += inv_gt * 2.0 * diff;
    }
  }
  // pred -> gt: each predicted point is pulled towards its nearest ground truth
  for (size_t j = 0; j < pred.size(); j++)
  {
    const size_t i = gt_tree.nearest(pred[j]);
    const Vec3 diff = pred[j] - gt[i];
    const double dist = diff.norm();
    if (norm == ChamferNorm::L1)
    {
      out.value += inv_pred * dist;
      if (dist > 0.0)
        out.gradient[j] += inv_pred * diff / dist;
    }
    else
    {
      out.value += inv_pred * diff.squaredNorm();
      out.gradient[j] += inv_pred * 2.0 * diff;
    }
  }
  return out;
}

LossValue repulsion(const Cloud &pred, size_t k, double h)
{
  if (k < 1 || pred.size() <= k)
    throw TooFewPoints("repulsion needs more points than neighbours");
  if (h <= 0.0)
    throw InvalidParams("repulsion bandwidth must be positive");

  LossValue out;
  out.gradient.assign(pred.size(), Vec3::Zero());
  const KdTree tree(pred);
  const double scale = 1.0 / (static_cast<double>(pred.size()) * static_cast<double>(k));
  for (size_t i = 0; i < pred.size(); i++)
  {
    for (const size_t j : tree.knn_of_point(i, k))
    {
      const Vec3 diff = pred[i] - pred[j];
      const double r = diff.norm();
      const double w = std::exp(-r * r / (h * h));
      out.value += scale * (-r) * w;
      if (r > 0.0)
      {
        // d/dr of -r exp(-r^2/h^2)
        const double df = w * (2.0 * r * r / (h * h) - 1.0);
        const Vec3 g = scale * df * diff / r;
        out.gradient[i] += g;
        out.gradient[j] -= g;
      }
    }
  }
  return out;
}

LossValue variance_loss(const std::vector<Cloud> &pred_clouds, const std::vector<Vec3> &skeleton_gt)
{
  if (skeleton_gt.empty())
    throw EmptySkeleton("variance loss needs skeleton points");
  size_t total = 0;
  for (const auto &cloud : pred_clouds)
  {
    if (cloud.empty())
      throw EmptyCloud("variance loss needs non-empty clouds");
    total += cloud.size();
  }
  if (pred_clouds.empty())
    throw EmptyCloud("variance loss needs at least one cloud");

  LossValue out;
  out.gradient.assign(total, Vec3::Zero());
  const KdTree tree(skeleton_gt);

  size_t offset = 0;
  for (const auto &cloud : pred_clouds)
  {
    const size_t n = cloud.size();
    std::vector<double> dist(n);
    std::vector<Vec3> dir(n, Vec3::Zero());
    double mean = 0.0;
    for (size_t i = 0; i < n; i++)
    {
      const size_t j = tree.nearest(cloud[i]);
      const Vec3 diff = cloud[i] - skeleton_gt[j];
      dist[i] = diff.norm();
      if (dist[i] > 0.0)
        dir[i] = diff / dist[i];
      mean += dist[i];
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (size_t i = 0; i < n; i++) var += (dist[i] - mean) * (dist[i] - mean);
    var /= static_cast<double>(n);
    out.value += var;
    const double scale = 2.0 / static_cast<double>(n);
    for (size_t i = 0; i < n; i++) out.gradient[offset + i] = scale * (dist[i] - mean) * dir[i];
    offset += n;
  }
  return out;
}

LossValue variance_loss(const Cloud &pred, const std::vector<Vec3> &skeleton_gt)
{
  return variance_loss(std::vector<Cloud>{pred}, skeleton_gt);
}

SphereLossValue skeleton_sampling_loss(const std::vector<SkeletalSphere> &spheres, const Cloud &gt_cloud,
                                       size_t samples_per_sphere, uint64_t seed)
{
  if (spheres.empty())
    throw EmptySkeleton("sampling loss needs spheres");
  if (gt_cloud.empty())
    throw EmptyCloud("sampling loss needs a ground-truth cloud");
  if (samples_per_sphere < 1)
    throw InvalidParams("need at least one sample per sphere");

  // fixed unit directions per sphere; positions move smoothly with centre/radius
  Rng rng(seed);
  const size_t count = spheres.size() * samples_per_sphere;
  Cloud samples(count);
  std::vector<Vec3> units(count);
  for (size_t s = 0; s < spheres.size(); s++)
  {
    for (size_t q = 0; q < samples_per_sphere; q++)
    {
      const size_t idx = s * samples_per_sphere + q;
      units[idx] = rng.unit_vector();
      samples[idx] = spheres[s].centre + spheres[s].radius * units[idx];
    }
  }

  const LossValue cd = chamfer(samples, gt_cloud, ChamferNorm::L1);
  SphereLossValue out;
  out.value = cd.value;
  out.d_centre.assign(spheres.size(), Vec3::Zero());
  out.d_radius.assign(spheres.size(), 0.0);
  for (size_t idx = 0; idx < count; idx++)
  {
    const size_t s = idx / samples_per_sphere;
    out.d_centre[s] += cd.gradient[idx];
    out.d_radius[s] += cd.gradient[idx].dot(units[idx]);
  }
  return out;
}

LossValue skeleton_cd_loss(const std::vector<Vec3> &pred_skeleton, const std::vector<Vec3> &gt_skeleton)
{
  return chamfer(pred_skeleton, gt_skeleton, ChamferNorm::L1);
}

AdversarialLosses adversarial_losses(const DiscriminatorScores &scores)
{
  if (!std::isfinite(scores.d_gt) || !std::isfinite(scores.d_r))
    throw InvalidParams("discriminator scores must be finite");
  AdversarialLosses out;
  out.generator = (scores.d_gt - 1.0) * (scores.d_gt - 1.0);
  out.discriminator = scores.d_gt * scores.d_gt + (scores.d_r - 1.0) * (scores.d_r - 1.0);
  return out;
}

double joint_loss(double cd, double rep, double adv_g, double skel, double var, const LossWeights &w,
                  bool variance_enabled)
{
  return cd + rep + adv_g + w.lambda_skeleton * skel + (variance_enabled ? w.lambda_variance * var : 0.0);
}

}  // namespace branch
