#include "branch/fitting.h"

#include <cmath>

#include "branch/errors.h"

namespace branch
{
Circle2 fit_circle_kasa(const std::vector<Eigen::Vector2d> &points)
{
  if (points.size() < 3)
    throw TooFewPoints("circle fit needs at least 3 points");
  // linearised circle equation: x^2 + y^2 = 2 a x + 2 b y + c
  Eigen::MatrixXd A(points.size(), 3);
  Eigen::VectorXd rhs(points.size());
  for (size_t i = 0; i < points.size(); i++)
  {
    const auto &p = points[i];
    A(static_cast<Eigen::Index>(i), 0) = 2.0 * p.x();
    A(static_cast<Eigen::Index>(i), 1) = 2.0 * p.y();
    A(static_cast<Eigen::Index>(i), 2) = 1.0;
    rhs(static_cast<Eigen::Index>(i)) = p.squaredNorm();
  }
  const Eigen::Vector3d sol = A.colPivHouseholderQr().solve(rhs);
  Circle2 circle;
  circle.centre = sol.head<2>();
  circle.radius = std::sqrt(std::max(0.0, sol[2] + sol.head<2>().squaredNorm()));
  return circle;
}

Vec3 principal_axis(const Cloud &cloud)
{
  if (cloud.size() < 2)
    throw TooFewPoints("principal axis needs at least 2 points");
  Vec3 mean = Vec3::Zero();
  for (const auto &p : cloud) mean += p;
  mean /= static_cast<double>(cloud.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto &p : cloud)
  {
    const Vec3 d = p - mean;
    cov += d * d.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  Vec3 axis = solver.eigenvectors().col(2);  // largest eigenvalue last
  int max_component = 0;
  axis.cwiseAbs().maxCoeff(&max_component);
  if (axis[max_component] < 0.0)
    axis = -axis;
  return axis.normalized();
}

Vec3 line_direction(const std::vector<Vec3> &points)
{
  if (points.size() < 2)
    throw TooFewPoints("line fit needs at least 2 points");
  Vec3 axis = principal_axis(points);
  if (axis.dot(points.back() - points.front()) < 0.0)
    axis = -axis;
  return axis;
}

}  // namespace branch
