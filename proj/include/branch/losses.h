#ifndef BRANCH_LOSSES_H
#define BRANCH_LOSSES_H

#include <vector>

#include "branch/maths.h"
#include "branch/skeleton.h"

namespace branch
{
/// Weights of the staged loss terms. lambda_skeleton scales the skeleton loss,
/// lambda_variance scales the variance loss when it is active.
struct LossWeights
{
  double lambda_skeleton = 0.01;
  double lambda_variance = 10.0;
};

/// A scalar loss plus its analytic gradient with respect to the predicted
/// points (one 3-vector per predicted point, in order).
struct LossValue
{
  double value = 0.0;
  std::vector<Vec3> gradient;
};

/// Skeleton-sampling loss result: gradients flow to sphere centres and radii.
struct SphereLossValue
{
  double value = 0.0;
  std::vector<Vec3> d_centre;
  std::vector<double> d_radius;
};

/// Discriminator outputs on ground truth and on the refined completion.
struct DiscriminatorScores
{
  double d_gt = 0.0;
  double d_r = 0.0;
};

enum class ChamferNorm
{
  L1,         // mean of unsquared nearest distances, both directions
  L2Squared,  // mean of squared nearest distances, both directions
};

/// Symmetric Chamfer distance between prediction and ground truth:
///   (1/|gt|) sum_p min_c ||p-c||  +  (1/|pred|) sum_c min_p ||c-p||
/// (squared distances in L2Squared mode). The gradient is with respect to the
/// predicted points only; nearest-neighbour ties break to the lowest index.
/// Throws EmptyCloud.
LossValue chamfer(const Cloud &pred, const Cloud &gt, ChamferNorm norm = ChamferNorm::L1);

/// Repulsion over the k nearest neighbours of each point:
///   (1/(|pred| k)) sum_i sum_{j in kNN(i)} -||xi-xj|| exp(-||xi-xj||^2 / h^2)
/// Always <= 0. Throws TooFewPoints unless |pred| > k >= 1.
LossValue repulsion(const Cloud &pred, size_t k = 5, double h = 0.03);

/// Variance loss: for each cloud, the population variance of per-point nearest
/// distances to the skeleton points, summed over clouds. Zero exactly when all
/// nearest distances within each cloud are equal (the cylindrical prior).
/// The gradient is concatenated over the clouds in order.
/// Throws EmptyCloud / EmptySkeleton.
LossValue variance_loss(const std::vector<Cloud> &pred_clouds, const std::vector<Vec3> &skeleton_gt);
LossValue variance_loss(const Cloud &pred, const std::vector<Vec3> &skeleton_gt);

/// Unsupervised skeleton sampling loss: draws samples_per_sphere uniform
/// surface samples on every skeletal sphere (deterministic per seed) and
/// returns the Chamfer L1 value between the pooled samples and gt_cloud, with
/// analytic gradients to sphere centres and radii. Throws EmptyCloud.
SphereLossValue skeleton_sampling_loss(const std::vector<SkeletalSphere> &spheres, const Cloud &gt_cloud,
                                       size_t samples_per_sphere, uint64_t seed);

/// Chamfer L1 between predicted and ground-truth skeleton points, gradient
/// with respect to the predicted points.
LossValue skeleton_cd_loss(const std::vector<Vec3> &pred_skeleton, const std::vector<Vec3> &gt_skeleton);

/// Least-squares adversarial pair, exactly as formulated:
///   L_G = (d_gt - 1)^2,  L_D = d_gt^2 + (d_r - 1)^2
struct AdversarialLosses
{
  double generator = 0.0;
  double discriminator = 0.0;
};
AdversarialLosses adversarial_losses(const DiscriminatorScores &scores);

/// Joint loss: cd + rep + adv_g + lambda_skeleton * skel + lambda_variance * var.
/// The variance term contributes only while variance_enabled (staged training).
double joint_loss(double cd, double rep, double adv_g, double skel, double var,
                  const LossWeights &w, bool variance_enabled = true);

}  // namespace branch

#endif  // BRANCH_LOSSES_H
