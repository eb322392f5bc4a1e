#include "mcfsing/planes.hpp"

#include "mcfsing/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcfsing {

namespace {

constexpr double kOrthoTolerance = 1e-10;

Mat orthonormalize(const Mat& spanning) {
  const Eigen::Index d = spanning.rows();
  const Eigen::Index k = spanning.cols();
  Mat q(d, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    Vec v = spanning.col(j);
    const double scale = v.norm();
    if (!(scale > 0.0)) throw InvalidArgument("plane direction vectors are linearly dependent");
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < j; ++i) v -= q.col(i).dot(v) * q.col(i);
    }
    const double nv = v.norm();
    if (nv <= kOrthoTolerance * scale) {
      throw InvalidArgument("plane direction vectors are linearly dependent");
    }
    q.col(j) = v / nv;
  }
  return q;
}

void require_same_ambient(const TimeSlicePlane& v, const TimeSlicePlane& w) {
  if (v.ambient_dim() != w.ambient_dim()) {
    throw DimensionMismatch("planes live in spaces of different dimension");
  }
}

}  // namespace

TimeSlicePlane::TimeSlicePlane(SpaceTimePoint base, const Mat& spanning)
    : base_(std::move(base)) {
  if (spanning.rows() != base_.dim()) {
    throw DimensionMismatch("plane directions do not match the base dimension");
  }
  if (spanning.cols() > spanning.rows()) {
    throw InvalidArgument("plane dimension exceeds ambient dimension");
  }
  directions_ = orthonormalize(spanning);
}

TimeSlicePlane TimeSlicePlane::point(SpaceTimePoint base) {
  const auto d = base.dim();
  return TimeSlicePlane(std::move(base), Mat(d, 0));
}

TimeSlicePlane TimeSlicePlane::coordinate(SpaceTimePoint base, int k) {
  const auto d = base.dim();
  if (k < 0 || k > d) throw InvalidArgument("coordinate plane dimension out of range");
  return TimeSlicePlane(std::move(base), Mat::Identity(d, d).leftCols(k));
}

TimeSlicePlane TimeSlicePlane::translated_to(const SpaceTimePoint& new_base) const {
  if (new_base.dim() != ambient_dim()) throw DimensionMismatch("translation changes dimension");
  TimeSlicePlane out = *this;
  out.base_ = new_base;
  return out;
}

Vec TimeSlicePlane::closest_spatial_point(const Vec& x) const {
  const Vec rel = x - base_.x;
  return base_.x + directions_ * (directions_.transpose() * rel);
}

double TimeSlicePlane::spatial_distance(const Vec& x) const {
  const Vec rel = x - base_.x;
  return (rel - directions_ * (directions_.transpose() * rel)).norm();
}

Projection project(const SpaceTimePoint& p, const TimeSlicePlane& plane) {
  if (p.dim() != plane.ambient_dim()) throw DimensionMismatch("point and plane dimensions differ");
  const Vec rel = p.x - plane.base().x;
  Projection out;
  out.tangential = plane.directions().transpose() * rel;
  out.normal = rel - plane.directions() * out.tangential;
  out.time_offset = p.t - plane.time();
  return out;
}

SpaceTimePoint reconstruct(const Projection& parts, const TimeSlicePlane& plane) {
  return {plane.base().x + plane.directions() * parts.tangential + parts.normal,
          plane.time() + parts.time_offset};
}

double parabolic_distance(const SpaceTimePoint& p, const TimeSlicePlane& plane) {
  if (p.dim() != plane.ambient_dim()) throw DimensionMismatch("point and plane dimensions differ");
  return std::max(plane.spatial_distance(p.x), std::sqrt(std::abs(p.t - plane.time())));
}

bool in_parabolic_tube(const SpaceTimePoint& p, const TimeSlicePlane& plane, double r) {
  if (!(r > 0.0)) throw InvalidArgument("tube radius must be positive");
  return parabolic_distance(p, plane) < r;
}

std::vector<double> principal_angles(const TimeSlicePlane& v, const TimeSlicePlane& w) {
  require_same_ambient(v, w);
  const Mat gram = v.directions().transpose() * w.directions();
  std::vector<double> out;
  if (gram.size() == 0) return out;
  Eigen::JacobiSVD<Mat> svd(gram);
  const Vec s = svd.singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i) out.push_back(std::acos(std::clamp(s[i], -1.0, 1.0)));
  std::sort(out.begin(), out.end());
  return out;
}

double max_affine_norm_on_ball(const Vec& c, const Mat& m, double rho) {
  if (rho < 0.0) throw InvalidArgument("ball radius must be nonnegative");
  if (m.cols() == 0 || rho == 0.0) return c.norm();
  const Mat a = m.transpose() * m;
  const Vec g = m.transpose() * c;
  Eigen::SelfAdjointEigenSolver<Mat> eig(a);
  const Vec lambda = eig.eigenvalues();
  const Vec gh = eig.eigenvectors().transpose() * g;
  const Eigen::Index k = lambda.size();
  const double lmax = lambda[k - 1];
  const double scale = std::max({1.0, std::abs(lmax), g.norm()});
  const double tie = 1e-12 * scale;

  auto objective = [&](const Vec& b) {
    double f = c.squaredNorm() + 2.0 * gh.dot(b);
    for (Eigen::Index i = 0; i < k; ++i) f += lambda[i] * b[i] * b[i];
    return std::sqrt(std::max(f, 0.0));
  };

  double top_g2 = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (lmax - lambda[i] <= tie) top_g2 += gh[i] * gh[i];
  }
  // Hard case: the gradient has no component on the top eigenspace.
  if (top_g2 <= tie * tie) {
    Vec b = Vec::Zero(k);
    double norm2 = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (lmax - lambda[i] > tie) {
        b[i] = gh[i] / (lmax - lambda[i]);
        norm2 += b[i] * b[i];
      }
    }
    if (norm2 <= rho * rho) {
      Eigen::Index top = k - 1;
      b[top] = std::sqrt(rho * rho - norm2);
      return objective(b);
    }
  }
  auto phi = [&](double mu) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double den = mu - lambda[i];
      s += gh[i] * gh[i] / (den * den);
    }
    return s;
  };
  double lo = lmax;
  double hi = lmax + gh.norm() / rho + tie;
  while (phi(hi) > rho * rho) hi = lmax + 2.0 * (hi - lmax);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (phi(mid) > rho * rho) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  Vec b(k);
  for (Eigen::Index i = 0; i < k; ++i) b[i] = gh[i] / (hi - lambda[i]);
  // Project back onto the sphere to remove bisection slack.
  const double bn = b.norm();
  if (bn > 0.0) b *= rho / bn;
  return objective(b);
}

double max_distance_from_disk(const TimeSlicePlane& v, const Vec& center, double rho,
                              const TimeSlicePlane& w) {
  require_same_ambient(v, w);
  const Mat& qw = w.directions();
  const Eigen::Index d = v.ambient_dim();
  const Mat perp = Mat::Identity(d, d) - qw * qw.transpose();
  const Vec c = perp * (center - w.base().x);
  const Mat m = perp * v.directions();
  return max_affine_norm_on_ball(c, m, rho);
}

double one_sided_tube_constant(const TimeSlicePlane& v, const TimeSlicePlane& w, double r) {
  if (!(r > 0.0)) throw InvalidArgument("tube scale must be positive");
  return max_distance_from_disk(v, v.base().x, r, w) / r;
}

SymmetryCheck plane_symmetry_check(const TimeSlicePlane& v, const TimeSlicePlane& w,
                                   double delta) {
  require_same_ambient(v, w);
  if (v.k() != w.k()) {
    throw DimensionMismatch("symmetry lemma needs planes of equal dimension");
  }
  const TimeSlicePlane w0 = w.translated_to(v.base());
  SymmetryCheck out;
  out.forward = one_sided_tube_constant(v, w0, 1.0);
  out.backward = one_sided_tube_constant(w0, v, 1.0);
  out.hypothesis_holds = out.forward <= delta && delta < 1.0;
  if (out.hypothesis_holds && out.backward > delta + 1e-12) {
    throw LemmaViolation("tube containment is not symmetric for equal-dimension planes");
  }
  return out;
}

namespace {

struct DiskInBall {
  Vec center;
  double radius = 0.0;
};

DiskInBall restrict_to_ball(const TimeSlicePlane& v, double r, const SpaceTimePoint& center) {
  if (std::abs(v.time() - center.t) > r * r) {
    throw PreconditionFailed("plane misses the parabolic ball (time)");
  }
  const Vec foot = v.closest_spatial_point(center.x);
  const double d = (foot - center.x).norm();
  if (d > r) throw PreconditionFailed("plane misses the parabolic ball (space)");
  return {foot, std::sqrt(std::max(r * r - d * d, 0.0))};
}

}  // namespace

double plane_hausdorff_distance(const TimeSlicePlane& v, const TimeSlicePlane& w, double r,
                                const SpaceTimePoint& center) {
  require_same_ambient(v, w);
  if (!(r > 0.0)) throw InvalidArgument("ball radius must be positive");
  const auto dv = restrict_to_ball(v, r, center);
  const auto dw = restrict_to_ball(w, r, center);
  const double time_gap = std::sqrt(std::abs(v.time() - w.time()));
  const double vw = max_distance_from_disk(v, dv.center, dv.radius, w);
  const double wv = max_distance_from_disk(w, dw.center, dw.radius, v);
  return std::max({vw, wv, time_gap});
}

CloudPlaneDistance plane_hausdorff_distance(const PointCloud& cloud, const TimeSlicePlane& plane,
                                            double r, const SpaceTimePoint& center,
                                            int samples_per_axis) {
  if (cloud.ambient_dim() != plane.ambient_dim()) {
    throw DimensionMismatch("cloud and plane dimensions differ");
  }
  if (!(r > 0.0)) throw InvalidArgument("ball radius must be positive");
  if (samples_per_axis < 2) throw InvalidArgument("need at least two samples per axis");
  std::vector<const SpaceTimePoint*> inside;
  for (const auto& p : cloud) {
    if (parabolic_distance(p, center) <= r) inside.push_back(&p);
  }
  if (inside.empty()) throw PreconditionFailed("cloud misses the parabolic ball");
  const auto disk = restrict_to_ball(plane, r, center);

  CloudPlaneDistance out;
  for (const auto* p : inside) {
    out.cloud_to_plane = std::max(out.cloud_to_plane, parabolic_distance(*p, plane));
  }
  const int k = plane.k();
  const double time_gap_base = plane.time();
  auto dist_to_cloud = [&](const Vec& x) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto* p : inside) {
      best = std::min(best, std::max((p->x - x).norm(), std::sqrt(std::abs(p->t - time_gap_base))));
    }
    return best;
  };
  if (k == 0 || disk.radius == 0.0) {
    out.plane_to_cloud = dist_to_cloud(disk.center);
  } else {
    const double step = 2.0 * disk.radius / static_cast<double>(samples_per_axis - 1);
    out.sampling_gap = step;
    std::vector<int> idx(k, 0);
    Vec a(k);
    while (true) {
      for (int i = 0; i < k; ++i) a[i] = -disk.radius + step * idx[i];
      if (a.norm() <= disk.radius) {
        out.plane_to_cloud = std::max(out.plane_to_cloud,
                                      dist_to_cloud(disk.center + plane.directions() * a));
      }
      int i = 0;
      while (i < k && ++idx[i] == samples_per_axis) idx[i++] = 0;
      if (i == k) break;
    }
  }
  out.distance = std::max(out.cloud_to_plane, out.plane_to_cloud);
  return out;
}

}  // namespace mcfsing
