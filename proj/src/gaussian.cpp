#include "mcfsing/gaussian.hpp"

#include "mcfsing/errors.hpp"
#include "mcfsing/flows.hpp"
#include "mcfsing/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace mcfsing {

namespace {

constexpr double kPi = std::numbers::pi;

// 5-point Gauss-Legendre on [0, 1].
constexpr double kGlNode[5] = {0.04691007703066800, 0.23076534494715845, 0.5,
                               0.76923465505284155, 0.95308992296933200};
constexpr double kGlWeight[5] = {0.11846344252809454, 0.23931433524968324, 0.28444444444444444,
                                 0.23931433524968324, 0.11846344252809454};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Mat orthonormal_complement(const Mat& a, int ambient) {
  const int j = static_cast<int>(a.cols());
  Mat full(ambient, ambient);
  full.leftCols(j) = a;
  int filled = j;
  for (int e = 0; e < ambient && filled < ambient; ++e) {
    Vec v = Vec::Unit(ambient, e);
    for (int c = 0; c < filled; ++c) v -= full.col(c).dot(v) * full.col(c);
    if (v.norm() > 1e-6) full.col(filled++) = v.normalized();
  }
  return full.rightCols(ambient - j);
}

double line_factor(double a, double half_length, double tau) {
  if (!std::isfinite(half_length)) return std::sqrt(4.0 * kPi * tau);
  const double s = 2.0 * std::sqrt(tau);
  return std::sqrt(kPi * tau) * (std::erf((half_length - a) / s) + std::erf((half_length + a) / s));
}

template <class F>
void for_each_segment(const ProfileCurve& c, F&& f) {
  const std::size_t m = c.points.size();
  if (m < 2) return;
  const std::size_t segs = c.closed ? m : m - 1;
  for (std::size_t i = 0; i < segs; ++i) f(c.points[i], c.points[(i + 1) % m]);
}

double revolution_f(int n, const RevolutionShape& shape, const Vec& x, double tau) {
  const double x1 = x[0];
  const double d = x.size() > 1 ? x.tail(x.size() - 1).norm() : 0.0;
  double sum = 0.0;
  for (const auto& curve : shape.curves) {
    for_each_segment(curve, [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
      const double len = (b - a).norm();
      if (len == 0.0) return;
      for (int g = 0; g < 5; ++g) {
        const Eigen::Vector2d p = a + kGlNode[g] * (b - a);
        const double r = std::max(p.y(), 0.0);
        const double dx = p.x() - x1;
        const double e = std::exp(-(dx * dx + (r - d) * (r - d)) / (4.0 * tau));
        if (e == 0.0) continue;
        sum += kGlWeight[g] * len * std::pow(r, n - 1) * e *
               sphere_exp_integral_scaled(n - 1, r * d / (2.0 * tau));
      }
    });
  }
  return std::pow(4.0 * kPi * tau, -0.5 * n) * sum;
}

double distance_to_surface(const WeightedHypersurface& s, const Vec& x) {
  return std::visit(
      Overloaded{
          [&](const SampledShape& sh) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& p : sh.points) best = std::min(best, (p - x).norm());
            return best;
          },
          [&](const SphereShape& sh) { return std::abs((x - sh.center).norm() - sh.radius); },
          [&](const CylinderShape& sh) {
            const Vec v = x - sh.base;
            const Vec a = sh.axis.transpose() * v;
            const double radial = std::abs((v - sh.axis * a).norm() - sh.radius);
            double axial = 0.0;
            if (std::isfinite(sh.half_length)) {
              for (int i = 0; i < a.size(); ++i) {
                const double over = std::abs(a[i]) - sh.half_length;
                if (over > 0.0) axial += over * over;
              }
            }
            return std::sqrt(radial * radial + axial);
          },
          [&](const PlaneShape& sh) { return std::abs(sh.normal.dot(x - sh.base)); },
          [&](const RevolutionShape& sh) {
            const Eigen::Vector2d q(x[0], x.size() > 1 ? x.tail(x.size() - 1).norm() : 0.0);
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : sh.curves) {
              if (c.points.size() == 1) best = std::min(best, (c.points[0] - q).norm());
              for_each_segment(c, [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
                const Eigen::Vector2d ab = b - a;
                const double l2 = ab.squaredNorm();
                const double u = l2 > 0.0 ? std::clamp((q - a).dot(ab) / l2, 0.0, 1.0) : 0.0;
                best = std::min(best, (a + u * ab - q).norm());
              });
            }
            return best;
          },
      },
      s.shape());
}

}  // namespace

WeightedHypersurface::WeightedHypersurface(int n, Shape shape) : n_(n), shape_(std::move(shape)) {
  if (n < 1) throw InvalidArgument("hypersurface dimension must be at least 1");
  const int amb = n + 1;
  std::visit(Overloaded{
                 [&](const SampledShape& s) {
                   if (s.points.size() != s.weights.size()) {
                     throw InvalidArgument("one area weight per sample point is required");
                   }
                   for (std::size_t i = 0; i < s.points.size(); ++i) {
                     if (s.points[i].size() != amb) throw DimensionMismatch("sample dimension mismatch");
                     if (!(s.weights[i] > 0.0) || !std::isfinite(s.weights[i])) {
                       throw InvalidArgument("area weights must be positive and finite");
                     }
                   }
                 },
                 [&](const SphereShape& s) {
                   if (s.center.size() != amb) throw DimensionMismatch("sphere center dimension");
                   if (!(s.radius > 0.0)) throw InvalidArgument("sphere radius must be positive");
                 },
                 [&](const CylinderShape& s) {
                   if (s.base.size() != amb || s.axis.rows() != amb) {
                     throw DimensionMismatch("cylinder dimension");
                   }
                   if (s.axis.cols() < 1 || s.axis.cols() > n - 1 + 1 || s.axis.cols() >= amb) {
                     throw InvalidArgument("cylinder axis dimension out of range");
                   }
                   if (!(s.radius > 0.0)) throw InvalidArgument("cylinder radius must be positive");
                   if (!(s.half_length > 0.0)) throw InvalidArgument("cylinder length must be positive");
                   const Mat g = s.axis.transpose() * s.axis;
                   if ((g - Mat::Identity(g.rows(), g.cols())).norm() > 1e-10) {
                     throw InvalidArgument("cylinder axis must be orthonormal");
                   }
                 },
                 [&](const PlaneShape& s) {
                   if (s.base.size() != amb || s.normal.size() != amb) {
                     throw DimensionMismatch("plane dimension");
                   }
                   if (std::abs(s.normal.norm() - 1.0) > 1e-10) {
                     throw InvalidArgument("plane normal must be a unit vector");
                   }
                 },
                 [&](const RevolutionShape& s) {
                   for (const auto& c : s.curves) {
                     for (const auto& p : c.points) {
                       if (!(p.y() >= 0.0) || !p.allFinite()) {
                         throw InvalidArgument("profile curves must have finite r >= 0");
                       }
                     }
                   }
                 },
             },
             shape_);
}

WeightedHypersurface WeightedHypersurface::sphere(Vec center, double radius) {
  const int n = static_cast<int>(center.size()) - 1;
  return {n, SphereShape{std::move(center), radius}};
}

WeightedHypersurface WeightedHypersurface::cylinder(Vec base, Mat axis, double radius,
                                                    double half_length) {
  const int n = static_cast<int>(base.size()) - 1;
  return {n, CylinderShape{std::move(base), std::move(axis), radius, half_length}};
}

WeightedHypersurface WeightedHypersurface::plane(Vec base, Vec normal) {
  const int n = static_cast<int>(base.size()) - 1;
  return {n, PlaneShape{std::move(base), normal.normalized()}};
}

WeightedHypersurface WeightedHypersurface::revolution(int n, std::vector<ProfileCurve> curves) {
  return {n, RevolutionShape{std::move(curves)}};
}

WeightedHypersurface WeightedHypersurface::sampled(std::vector<Vec> points,
                                                   std::vector<double> weights) {
  if (points.empty()) throw InvalidArgument("sampled surface needs points");
  const int n = static_cast<int>(points.front().size()) - 1;
  return {n, SampledShape{std::move(points), std::move(weights)}};
}

bool WeightedHypersurface::bounded() const {
  if (const auto* c = std::get_if<CylinderShape>(&shape_)) return std::isfinite(c->half_length);
  return !std::holds_alternative<PlaneShape>(shape_);
}

bool WeightedHypersurface::empty() const {
  if (const auto* s = std::get_if<SampledShape>(&shape_)) return s->points.empty();
  if (const auto* r = std::get_if<RevolutionShape>(&shape_)) {
    for (const auto& c : r->curves) {
      if (c.points.size() >= 2) return false;
    }
    return true;
  }
  return false;
}

SampledShape WeightedHypersurface::discretize(double spacing) const {
  if (!(spacing > 0.0)) throw InvalidArgument("spacing must be positive");
  const int amb = ambient_dim();
  if (amb != 2 && amb != 3) throw InvalidArgument("discretization supports ambient dimension 2 or 3");
  SampledShape out;
  auto steps = [&](double length) { return std::max<int>(8, static_cast<int>(std::ceil(length / spacing))); };
  std::visit(
      Overloaded{
          [&](const SampledShape& s) { out = s; },
          [&](const SphereShape& s) {
            const double r = s.radius;
            if (amb == 2) {
              const int m = steps(2 * kPi * r);
              for (int i = 0; i < m; ++i) {
                const double phi = (i + 0.5) * 2 * kPi / m;
                Vec p(2);
                p << std::cos(phi), std::sin(phi);
                out.points.push_back(s.center + r * p);
                out.weights.push_back(r * 2 * kPi / m);
              }
              return;
            }
            const int mt = steps(kPi * r);
            const int mp = steps(2 * kPi * r);
            for (int i = 0; i < mt; ++i) {
              const double th = (i + 0.5) * kPi / mt;
              for (int k = 0; k < mp; ++k) {
                const double phi = (k + 0.5) * 2 * kPi / mp;
                Vec p(3);
                p << std::cos(th), std::sin(th) * std::cos(phi), std::sin(th) * std::sin(phi);
                out.points.push_back(s.center + r * p);
                out.weights.push_back(r * r * std::sin(th) * (kPi / mt) * (2 * kPi / mp));
              }
            }
          },
          [&](const CylinderShape& s) {
            if (amb != 3 || s.axis.cols() != 1) throw InvalidArgument("cylinder discretization needs R x S^1 in R^3");
            if (!std::isfinite(s.half_length)) throw InvalidArgument("truncate the cylinder before discretizing");
            const Mat perp = orthonormal_complement(s.axis, 3);
            const int ma = steps(2 * s.half_length);
            const int mp = steps(2 * kPi * s.radius);
            for (int i = 0; i < ma; ++i) {
              const double a = -s.half_length + (i + 0.5) * 2 * s.half_length / ma;
              for (int k = 0; k < mp; ++k) {
                const double phi = (k + 0.5) * 2 * kPi / mp;
                out.points.push_back(s.base + a * s.axis.col(0) +
                                     s.radius * (std::cos(phi) * perp.col(0) + std::sin(phi) * perp.col(1)));
                out.weights.push_back(s.radius * (2 * s.half_length / ma) * (2 * kPi / mp));
              }
            }
          },
          [&](const PlaneShape&) { throw InvalidArgument("cannot discretize an unbounded plane"); },
          [&](const RevolutionShape& s) {
            for (const auto& c : s.curves) {
              double rmax = 0.0;
              for (const auto& p : c.points) rmax = std::max(rmax, p.y());
              const int mp = amb == 2 ? 2 : steps(2 * kPi * rmax);
              for_each_segment(c, [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
                const double len = (b - a).norm();
                if (len == 0.0) return;
                const int ms = std::max(1, static_cast<int>(std::ceil(len / spacing)));
                for (int i = 0; i < ms; ++i) {
                  const Eigen::Vector2d q = a + (i + 0.5) / ms * (b - a);
                  const double ds = len / ms;
                  if (amb == 2) {
                    for (double sign : {1.0, -1.0}) {
                      Vec p(2);
                      p << q.x(), sign * q.y();
                      out.points.push_back(p);
                      out.weights.push_back(ds);
                    }
                    continue;
                  }
                  if (q.y() <= 0.0) continue;
                  for (int k = 0; k < mp; ++k) {
                    const double phi = (k + 0.5) * 2 * kPi / mp;
                    Vec p(3);
                    p << q.x(), q.y() * std::cos(phi), q.y() * std::sin(phi);
                    out.points.push_back(p);
                    out.weights.push_back(q.y() * ds * 2 * kPi / mp);
                  }
                }
              });
            }
          },
      },
      shape_);
  return out;
}

double unit_sphere_area(int m) {
  if (m < 0) throw InvalidArgument("sphere dimension must be nonnegative");
  const double k = 0.5 * (m + 1);
  return 2.0 * std::pow(kPi, k) / std::tgamma(k);
}

double unit_ball_volume(int m) {
  if (m < 0) throw InvalidArgument("ball dimension must be nonnegative");
  return std::pow(kPi, 0.5 * m) / std::tgamma(0.5 * m + 1.0);
}

double sphere_exp_integral_scaled(int m, double z) {
  if (m < 0) throw InvalidArgument("sphere dimension must be nonnegative");
  if (z < 0.0) throw InvalidArgument("argument must be nonnegative");
  if (m == 0) return 1.0 + std::exp(-2.0 * z);
  if (z < 1e-8) return unit_sphere_area(m) * std::exp(-z) * (1.0 + z * z / (2.0 * (m + 1)));
  const double nu = 0.5 * (m - 1);
  return std::pow(2.0 * kPi, 0.5 * (m + 1)) * std::pow(z, 0.5 * (1 - m)) * bessel_i_scaled(nu, z);
}

double f_functional(const WeightedHypersurface& surface, const Vec& x, double tau) {
  if (!(tau > 0.0)) throw InvalidArgument("Gaussian scale tau must be positive");
  if (x.size() != surface.ambient_dim()) throw DimensionMismatch("center dimension differs from surface");
  if (surface.empty()) throw InvalidArgument("surface is empty");
  const int n = surface.n();
  const double pref = std::pow(4.0 * kPi * tau, -0.5 * n);
  return std::visit(
      Overloaded{
          [&](const SampledShape& s) {
            double sum = 0.0;
            for (std::size_t i = 0; i < s.points.size(); ++i) {
              sum += s.weights[i] * std::exp(-(s.points[i] - x).squaredNorm() / (4.0 * tau));
            }
            return pref * sum;
          },
          [&](const SphereShape& s) {
            const double d = (x - s.center).norm();
            const double r = s.radius;
            return pref * std::pow(r, n) * std::exp(-(r - d) * (r - d) / (4.0 * tau)) *
                   sphere_exp_integral_scaled(n, r * d / (2.0 * tau));
          },
          [&](const CylinderShape& s) {
            const int j = static_cast<int>(s.axis.cols());
            const int m = n - j;
            const Vec v = x - s.base;
            const Vec a = s.axis.transpose() * v;
            const double d = (v - s.axis * a).norm();
            double lines = 1.0;
            for (int i = 0; i < j; ++i) lines *= line_factor(a[i], s.half_length, tau);
            const double r = s.radius;
            return pref * lines * std::pow(r, m) * std::exp(-(r - d) * (r - d) / (4.0 * tau)) *
                   sphere_exp_integral_scaled(m, r * d / (2.0 * tau));
          },
          [&](const PlaneShape& s) {
            const double d = s.normal.dot(x - s.base);
            return std::exp(-d * d / (4.0 * tau));
          },
          [&](const RevolutionShape& s) { return revolution_f(n, s, x, tau); },
      },
      surface.shape());
}

double f_functional_quadrature(const WeightedHypersurface& surface, const Vec& x, double tau,
                               double spacing) {
  const auto samples = surface.discretize(spacing);
  return f_functional(WeightedHypersurface(surface.n(), samples), x, tau);
}

EntropyResult entropy(const WeightedHypersurface& surface) {
  if (surface.empty()) throw InvalidArgument("surface is empty");
  const int amb = surface.ambient_dim();
  if (const auto* p = std::get_if<PlaneShape>(&surface.shape())) {
    return {1.0, p->base, 1.0, 0.0};
  }
  // Centers are parameterized by a few coordinates over a box; the symmetric
  // descriptors only need the distance from their symmetry set.
  Vec lo;
  Vec hi;
  double scale = 1.0;
  std::function<Vec(const Vec&)> center_of;
  std::visit(
      Overloaded{
          [&](const SphereShape& s) {
            lo = Vec::Zero(1);
            hi = Vec::Constant(1, 2.0 * s.radius);
            scale = s.radius;
            center_of = [c = s.center, amb](const Vec& q) {
              return Vec(c + std::abs(q[0]) * Vec::Unit(amb, 0));
            };
          },
          [&](const CylinderShape& s) {
            lo = Vec::Zero(1);
            hi = Vec::Constant(1, 2.0 * s.radius);
            scale = s.radius;
            const Vec dir = orthonormal_complement(s.axis, amb).col(0);
            center_of = [b = s.base, dir](const Vec& q) { return Vec(b + std::abs(q[0]) * dir); };
          },
          [&](const RevolutionShape& s) {
            double xmin = std::numeric_limits<double>::infinity();
            double xmax = -xmin;
            double rmax = 0.0;
            for (const auto& c : s.curves) {
              for (const auto& p : c.points) {
                xmin = std::min(xmin, p.x());
                xmax = std::max(xmax, p.x());
                rmax = std::max(rmax, p.y());
              }
            }
            scale = std::max(xmax - xmin, rmax);
            lo = Vec(2);
            hi = Vec(2);
            lo << xmin - 0.25 * scale, 0.0;
            hi << xmax + 0.25 * scale, 1.25 * rmax;
            center_of = [amb](const Vec& q) {
              Vec c = Vec::Zero(amb);
              c[0] = q[0];
              if (amb > 1) c[1] = std::abs(q[1]);
              return c;
            };
          },
          [&](const SampledShape& s) {
            lo = s.points.front();
            hi = s.points.front();
            for (const auto& p : s.points) {
              lo = lo.cwiseMin(p);
              hi = hi.cwiseMax(p);
            }
            scale = std::max((hi - lo).norm(), 1e-12);
            const Vec pad = Vec::Constant(amb, 0.1 * scale);
            lo -= pad;
            hi += pad;
            center_of = [](const Vec& q) { return q; };
          },
          [&](const PlaneShape&) {},
      },
      surface.shape());

  const int dims = static_cast<int>(lo.size());
  const double log_tau_lo = std::log(std::pow(scale / 400.0, 2));
  const double log_tau_hi = std::log(std::pow(2.0 * scale, 2));
  const int per_axis = dims >= 3 ? 7 : 11;
  const int tau_steps = 17;
  auto value = [&](const Vec& q) {
    return f_functional(surface, center_of(q.head(dims)), std::exp(q[dims]));
  };

  struct Cell {
    double f;
    Vec q;
  };
  std::vector<Cell> cells;
  std::vector<int> idx(dims + 1, 0);
  while (true) {
    Vec q(dims + 1);
    for (int i = 0; i < dims; ++i) {
      q[i] = lo[i] + (hi[i] - lo[i]) * idx[i] / (per_axis - 1);
    }
    q[dims] = log_tau_lo + (log_tau_hi - log_tau_lo) * idx[dims] / (tau_steps - 1);
    cells.push_back({value(q), q});
    int i = 0;
    while (i <= dims) {
      const int lim = i == dims ? tau_steps : per_axis;
      if (++idx[i] < lim) break;
      idx[i++] = 0;
    }
    if (i > dims) break;
  }
  std::partial_sort(cells.begin(), cells.begin() + std::min<std::size_t>(5, cells.size()), cells.end(),
                    [](const Cell& a, const Cell& b) { return a.f > b.f; });
  const double step = std::max(0.5 * (hi - lo).maxCoeff() / (per_axis - 1), 1e-3 * scale);
  EntropyResult best;
  best.value = -1.0;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < std::min<std::size_t>(5, cells.size()); ++c) {
    auto res = nelder_mead([&](const Vec& q) { return -value(q); }, cells[c].q, step, 3000, 1e-10);
    const double f = std::max(-res.value, cells[c].f);
    const Vec q = -res.value >= cells[c].f ? res.x : cells[c].q;
    worst = std::min(worst, f);
    if (f > best.value) {
      best.value = f;
      best.center = center_of(q.head(dims));
      best.tau = std::exp(q[dims]);
    }
  }
  best.spread = best.value - worst;
  return best;
}

double cylinder_density(int n, int k) {
  if (n < 1 || k < 0 || k > n) throw InvalidArgument("cylinder index out of range");
  const int m = n - k;
  if (m == 0) return 1.0;
  return unit_sphere_area(m) * std::pow(2.0 * m, 0.5 * m) * std::pow(4.0 * kPi, -0.5 * m) *
         std::exp(-0.5 * m);
}

std::vector<double> cylinder_density_table(int n) {
  if (n < 1) throw InvalidArgument("n must be at least 1");
  std::vector<double> out;
  for (int k = 0; k < n; ++k) out.push_back(cylinder_density(n, k));
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!(out[k] > 1.0) || (k > 0 && !(out[k] > out[k - 1]))) {
      throw LemmaViolation("cylinder density ladder is not strictly increasing above one");
    }
  }
  return out;
}

int nearest_cylinder_index(int n, double theta) {
  int best = n;
  double gap = std::abs(theta - 1.0);
  for (int k = 0; k < n; ++k) {
    const double g = std::abs(theta - cylinder_density(n, k));
    if (g < gap) {
      gap = g;
      best = k;
    }
  }
  return best;
}

double cylinder_axis_crossing_time(int n, int j) {
  if (j < 0 || j >= n) throw InvalidArgument("axis dimension out of range");
  const int m = n - j;
  const double rho2 = 2.0 * m;
  auto f = [&](double t) {
    return std::pow(4.0 * kPi * t, -0.5 * m) * unit_sphere_area(m) * std::pow(rho2, 0.5 * m) *
           std::exp(-rho2 / (4.0 * t));
  };
  double lo = 1.0;
  double hi = 2.0;
  while (f(hi) > 0.5) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.5 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

double far_term(double omega, double lambda0, int n) {
  double series = 0.0;
  for (int k = 1; k < 100000; ++k) {
    const double term = std::pow(k + 1.0, n) * std::exp(-omega * omega * k * k / 4.0);
    series += term;
    if (term < 1e-18 * std::max(series, 1e-300)) break;
  }
  return std::exp(1.0) * lambda0 * std::pow(2.0, -n) * std::pow(omega, n) * series;
}

}  // namespace

ClearingConstants clearing_constants(double eta, double lambda0, int n, int j) {
  if (!(eta > 0.0 && eta < 1.0)) throw InvalidArgument("eta must lie in (0, 1)");
  if (!(lambda0 >= 1.0)) throw InvalidArgument("entropy bound must be at least 1");
  if (n < 1) throw InvalidArgument("n must be at least 1");
  if (j < 0) j = n - 1;
  if (j >= n) throw InvalidArgument("axis dimension must be below n");
  ClearingConstants c;
  c.n = n;
  c.j = j;
  c.eta = eta;
  c.lambda0 = lambda0;
  const int m = n - j;
  c.c_n = unit_sphere_area(m) * std::pow(std::sqrt(2.0 * m), m) * unit_ball_volume(j) * (1.0 + eta);

  constexpr double kOmegaStep = 0.01;
  constexpr double kOmegaCap = 100.0;
  constexpr double kTCap = 1e12;
  c.omega = 0.0;
  for (int i = 1; i * kOmegaStep <= kOmegaCap; ++i) {
    if (far_term(i * kOmegaStep, lambda0, n) <= 0.25) {
      c.omega = i * kOmegaStep;
      break;
    }
  }
  if (c.omega == 0.0) throw PreconditionFailed("no omega on the grid bounds the far term");
  const double root_t = 4.0 * c.c_n * std::pow(c.omega, n - 1) * std::pow(4.0 * kPi, -0.5 * n);
  c.T = std::max(1.0, std::ceil(root_t * root_t));
  if (c.T > kTCap) throw PreconditionFailed("no T on the grid bounds the near term");
  c.far_term = far_term(c.omega, lambda0, n);
  c.near_term = c.c_n * std::pow(c.omega, n - 1) * std::pow(4.0 * kPi, -0.5 * n) / std::sqrt(c.T);
  if (c.omega * std::sqrt(c.T) > 1.0 / eta) {
    throw PreconditionFailed("eta too large: the region t >= T, |x| + omega sqrt(t) <= 1/eta is empty");
  }
  c.window_start = c.T - 1.0;
  c.window_end = (1.0 / (eta * eta) - 4.0 * c.omega * c.omega) / (4.0 * c.omega * c.omega);
  c.window_nonempty = c.window_end > c.window_start;
  return c;
}

std::vector<WeightedHypersurface> perturbed_cylinders(int n, int j, double eta, std::size_t count,
                                                      std::uint64_t seed) {
  if (j < 1 || j >= n) throw InvalidArgument("axis dimension out of range");
  const int amb = n + 1;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::normal_distribution<double> gauss;
  const double rho = std::sqrt(2.0 * (n - j));
  std::vector<WeightedHypersurface> out;
  for (std::size_t i = 0; i < count; ++i) {
    Mat axis = Mat::Zero(amb, j);
    for (int c = 0; c < j; ++c) axis(c, c) = 1.0;
    Mat tilt(amb, j);
    for (int r = 0; r < amb; ++r) {
      for (int c = 0; c < j; ++c) tilt(r, c) = gauss(rng);
    }
    tilt -= axis * (axis.transpose() * tilt);
    if (tilt.norm() > 0.0) tilt *= eta * std::abs(unif(rng)) / tilt.norm();
    Eigen::HouseholderQR<Mat> qr(axis + tilt);
    Mat q = qr.householderQ() * Mat::Identity(amb, j);
    for (int c = 0; c < j; ++c) {
      if (q.col(c).dot(axis.col(c)) < 0.0) q.col(c) = -q.col(c);
    }
    Vec base(amb);
    for (int r = 0; r < amb; ++r) base[r] = gauss(rng);
    base *= eta * std::abs(unif(rng)) / base.norm();
    out.push_back(WeightedHypersurface::cylinder(base, q, rho * (1.0 + eta * unif(rng))));
  }
  return out;
}

ClearingCertificate certify_clearing(const ClearingConstants& c,
                                     const std::vector<WeightedHypersurface>& surfaces,
                                     std::size_t count, std::uint64_t seed) {
  if (surfaces.empty()) throw InvalidArgument("no surfaces to certify");
  const double t_max = std::pow(1.0 / (c.eta * c.omega), 2);
  if (t_max < c.T) throw PreconditionFailed("certificate region is empty");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss;
  ClearingCertificate cert;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t si = k % surfaces.size();
    const auto& surf = surfaces[si];
    const int amb = surf.ambient_dim();
    const double t = c.T * std::pow(t_max / c.T, unif(rng));
    const double reach = std::max(0.0, 1.0 / c.eta - c.omega * std::sqrt(t));
    Vec dir(amb);
    for (int r = 0; r < amb; ++r) dir[r] = gauss(rng);
    dir.normalize();
    Vec x = dir * reach * unif(rng);
    if (k % 2 == 0) {
      // Points close to the surface's symmetry set give the largest F.
      if (const auto* cyl = std::get_if<CylinderShape>(&surf.shape())) {
        Vec a(cyl->axis.cols());
        for (int r = 0; r < a.size(); ++r) a[r] = gauss(rng);
        a *= 0.5 * reach * unif(rng) / std::max(a.norm(), 1e-300);
        x = cyl->base + cyl->axis * a;
        if (x.norm() > reach) x *= reach / x.norm();
      } else if (const auto* pl = std::get_if<PlaneShape>(&surf.shape())) {
        x -= pl->normal * pl->normal.dot(x - pl->base);
        if (x.norm() > reach) x *= reach / x.norm();
      }
    }
    const double f = f_functional(surf, x, t);
    cert.samples.push_back({si, x, t, f});
    cert.max_f = std::max(cert.max_f, f);
  }
  cert.holds = cert.max_f <= 0.5;
  return cert;
}

MonotonicityReport monotonicity_check(const Flow& flow, const Vec& x, double t,
                                      std::span<const double> taus, double tolerance) {
  if (taus.empty()) throw InvalidArgument("tau list is empty");
  MonotonicityReport rep;
  rep.tau.assign(taus.begin(), taus.end());
  std::sort(rep.tau.begin(), rep.tau.end());
  for (double tau : rep.tau) {
    if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
    const auto m = flow.surface_at(t - tau);
    rep.f.push_back(m ? f_functional(*m, x, tau) : 0.0);
  }
  double suffix_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = rep.f.size(); i-- > 0;) {
    rep.worst_violation = std::max(rep.worst_violation, rep.f[i] - suffix_min);
    suffix_min = std::min(suffix_min, rep.f[i]);
  }
  rep.monotone = rep.worst_violation <= tolerance;
  return rep;
}

DensityEstimate gaussian_density(const Flow& flow, const Vec& x, double t,
                                 const DensityOptions& options) {
  if (t < flow.t_begin) throw InvalidArgument("time precedes the flow");
  DensityEstimate est;
  est.tau = flow.backward_taus(t, options.tau_min, options.tau_max, options.count);
  if (est.tau.empty()) throw PreconditionFailed("no snapshots available below the requested time");
  for (double tau : est.tau) {
    const auto m = flow.surface_at(t - tau);
    est.f.push_back(m ? f_functional(*m, x, tau) : 0.0);
  }
  est.monotone = true;
  for (std::size_t i = 1; i < est.f.size(); ++i) {
    if (est.f[i] > est.f[i - 1] + 1e-9 * std::max(1.0, est.f[i - 1])) est.monotone = false;
  }
  const std::size_t m = est.f.size();
  if (m < 3) {
    est.value = est.f.back();
    est.residual = m == 2 ? std::abs(est.f[1] - est.f[0]) : std::numeric_limits<double>::infinity();
  } else {
    double st = 0.0;
    double sf = 0.0;
    for (std::size_t i = m - 3; i < m; ++i) {
      st += est.tau[i];
      sf += est.f[i];
    }
    st /= 3.0;
    sf /= 3.0;
    double stt = 0.0;
    double stf = 0.0;
    for (std::size_t i = m - 3; i < m; ++i) {
      stt += (est.tau[i] - st) * (est.tau[i] - st);
      stf += (est.tau[i] - st) * (est.f[i] - sf);
    }
    const double b = stt > 0.0 ? stf / stt : 0.0;
    est.value = sf - b * st;
    double rss = 0.0;
    for (std::size_t i = m - 3; i < m; ++i) {
      const double r = est.f[i] - (est.value + b * est.tau[i]);
      rss += r * r;
    }
    est.residual = std::abs(est.value - est.f.back()) + std::sqrt(rss / 3.0);
  }
  est.flagged = !(est.residual <= options.residual_threshold);
  return est;
}

ClearingWindowReport clearing_window_scan(const Flow& flow, const SpaceTimePoint& x0, double eta,
                                          double tau, double T, double omega,
                                          std::size_t s_samples) {
  if (!(eta > 0.0) || !(tau > 0.0) || !(omega > 0.0) || !(T >= 1.0)) {
    throw InvalidArgument("invalid clearing parameters");
  }
  const double start = T - 1.0;
  const double end = (1.0 / (eta * eta) - 4.0 * omega * omega) / (4.0 * omega * omega);
  if (!(end > start)) throw PreconditionFailed("clearing window is empty for these constants");
  const bool extinct_after = !flow.analytic && flow.t_end > x0.t;
  if (!flow.analytic && !extinct_after) throw PreconditionFailed("flow is not continued past the event");

  ClearingWindowReport rep;
  rep.cleared = true;
  const double s_hi = 0.9 * tau;
  const double s_lo = s_hi / 100.0;
  for (std::size_t k = 0; k < s_samples; ++k) {
    const double s = s_samples == 1 ? s_hi
                                    : s_hi * std::pow(s_lo / s_hi, static_cast<double>(k) /
                                                                       static_cast<double>(s_samples - 1));
    const double radius = std::sqrt(s) / (2.0 * eta);
    const double ta = x0.t + start * s;
    const double tb = x0.t + end * s;
    std::vector<double> times;
    if (flow.analytic) {
      for (int i = 1; i <= 16; ++i) times.push_back(ta + (tb - ta) * i / 17.0);
    } else {
      for (const auto& snap : flow.snapshots) {
        if (snap.time > ta && snap.time < tb) times.push_back(snap.time);
      }
      if (tb > flow.t_end && flow.status == RunStatus::resolved &&
          (flow.snapshots.empty() || flow.snapshots.back().surface.empty())) {
        times.push_back(std::max(ta, flow.t_end) + 0.5 * (tb - std::max(ta, flow.t_end)));
      }
    }
    double closest = std::numeric_limits<double>::infinity();
    bool any = false;
    for (double t : times) {
      std::optional<WeightedHypersurface> m;
      if (flow.analytic || t <= flow.t_end) {
        m = flow.surface_at(t);
      }
      any = true;
      if (!m || m->empty()) continue;
      const double d = distance_to_surface(*m, x0.x);
      closest = std::min(closest, d);
      if (d < radius && rep.cleared) {
        rep.cleared = false;
        rep.first_violation_s = s;
        rep.first_violation_t = t;
      }
    }
    rep.s.push_back(s);
    rep.ball_radius.push_back(radius);
    rep.t_begin.push_back(ta);
    rep.t_end.push_back(tb);
    rep.closest.push_back(any ? closest : std::numeric_limits<double>::quiet_NaN());
    rep.checked = rep.checked || any;
  }
  if (!rep.checked) rep.cleared = false;
  return rep;
}

ClearingWindowReport clearing_window_check(const Flow& flow, const SingularEvent& event, double eta,
                                           double tau, double T, double omega,
                                           std::size_t s_samples) {
  if (!event.classified) throw PreconditionFailed("event is unclassified");
  bool verified = false;
  for (std::size_t i = 0; i < event.eta_s.size(); ++i) {
    if (event.eta_s[i] > tau) continue;
    verified = true;
    if (!(event.eta[i] <= eta)) {
      throw PreconditionFailed("event is not (j, eta)-cylindrical on the requested time-scale");
    }
  }
  if (!verified) throw PreconditionFailed("no cylindricality measurements below tau");
  return clearing_window_scan(flow, event.location, eta, tau, T, omega, s_samples);
}

}  // namespace mcfsing
