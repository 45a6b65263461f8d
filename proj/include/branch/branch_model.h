#ifndef BRANCH_BRANCH_MODEL_H
#define BRANCH_BRANCH_MODEL_H

#include <string>
#include <vector>

#include "branch/maths.h"
#include "branch/skeleton.h"
#include "branch/spline.h"

namespace branch
{
/// Linear radius profile along arc length: r(s) = max(min_radius, base_radius
/// + s * tan(taper_angle)). A negative angle shrinks the branch towards the tip.
struct TaperProfile
{
  double base_radius = 0.01;     // meters
  double taper_angle_deg = kDefaultTaperAngleDeg;
  double min_radius = kDefaultMinRadius;  // meters, floor for r(s)

  double radius_at(double s) const
  {
    return std::max(min_radius, base_radius + s * std::tan(deg2rad(taper_angle_deg)));
  }

  static constexpr double kDefaultTaperAngleDeg = -0.5;
  static constexpr double kDefaultMinRadius = 0.0005;
};

/// A swept tube: interpolating spline centreline plus a taper profile. The
/// cross-section frame is rotation-minimising (double reflection transport),
/// so the surface has no torsion artifacts on curved centrelines.
class BranchModel
{
public:
  BranchModel() = default;
  BranchModel(CatmullRomSpline spline, TaperProfile taper, std::string id = "");

  const CatmullRomSpline &spline() const { return spline_; }
  const TaperProfile &taper() const { return taper_; }
  const std::string &id() const { return id_; }
  void set_id(const std::string &id) { id_ = id; }

  double length() const { return spline_.length(); }
  double radius_at(double s) const { return taper_.radius_at(s); }

  Vec3 centreline(double s) const { return spline_.point_at_arc(s); }
  Vec3 tangent(double s) const { return spline_.tangent_at_arc(s); }

  /// Rotation-minimising frame at arc length s: unit normal and binormal, both
  /// perpendicular to the tangent and continuous in s.
  void frame(double s, Vec3 &normal, Vec3 &binormal) const;

  /// Point on the tube surface at arc length s and ring angle theta:
  /// centreline(s) + r(s) * (cos(theta) n + sin(theta) b).
  /// Throws OutOfRange when s is outside [0, length()].
  Vec3 surface_point(double s, double theta) const;

  /// Closest centreline arc length to @p p, searched over the whole branch.
  double closest_arc(const Vec3 &p) const;

private:
  void build_frames();

  CatmullRomSpline spline_;
  TaperProfile taper_;
  std::string id_;
  // transported normals at the spline's arc-table stations
  std::vector<Vec3> frame_normals_;
  std::vector<double> frame_arcs_;
};

struct TreeUnitParams;  // synth.h

/// How a TreeModel came to be.
struct Provenance
{
  enum Kind
  {
    FromSkeleton,
    TreeUnit
  };
  Kind kind = FromSkeleton;
  uint64_t seed = 0;
};

/// A trunk with laterally attached branches. attachment_t is the normalised
/// arc parameter on the trunk where the branch base sits.
struct TreeModel
{
  BranchModel trunk;
  struct Attachment
  {
    BranchModel model;
    double attachment_t = 0.0;
  };
  std::vector<Attachment> branches;
  Provenance provenance;
};

/// Fits the interpolating centreline through skeletal sphere centres. The taper
/// base radius comes from the first sphere; the taper angle defaults to -0.5 deg.
/// Throws DegenerateSkeleton on fewer than two spheres or duplicate consecutive centres.
BranchModel fit_spline(const std::vector<SkeletalSphere> &spheres,
                       double taper_angle_deg = TaperProfile::kDefaultTaperAngleDeg,
                       double min_radius = TaperProfile::kDefaultMinRadius);

/// n points on the tube surface, uniform by surface area, deterministic per seed.
Cloud sample_complete(const BranchModel &model, size_t n, uint64_t seed);
Cloud sample_complete(const TreeModel &model, size_t n, uint64_t seed);

/// n points on the centreline at equal arc-length spacing, base first, tip last.
std::vector<Vec3> resample_skeleton(const BranchModel &model, size_t n = 100);

/// Ground-truth skeleton with radii taken from the taper profile at the same stations.
Skeleton skeleton_of(const BranchModel &model, size_t n = 100);

}  // namespace branch

#endif  // BRANCH_BRANCH_MODEL_H
