#include "mcfsing/reifenberg.hpp"

#include "mcfsing/errors.hpp"
#include "mcfsing/optimize.hpp"
#include "neighbor_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace mcfsing {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// dist_P(q, V) for every q, together with dist_P(q, base), sorted by the latter.
struct RadialRow {
  double radius;
  double distance;
  std::size_t index;
};

std::vector<RadialRow> radial_rows(const PointCloud& cloud, const TimeSlicePlane& plane,
                                   std::size_t base) {
  std::vector<RadialRow> rows;
  rows.reserve(cloud.size());
  for (std::size_t j = 0; j < cloud.size(); ++j) {
    rows.push_back({parabolic_distance(cloud[j], cloud[base]), parabolic_distance(cloud[j], plane), j});
  }
  std::sort(rows.begin(), rows.end(),
            [](const RadialRow& a, const RadialRow& b) { return a.radius < b.radius; });
  return rows;
}

Mat complete_basis(const Mat& q, int k) {
  const int d = static_cast<int>(q.rows());
  Mat out(d, k);
  int filled = 0;
  for (int c = 0; c < q.cols() && filled < k; ++c) out.col(filled++) = q.col(c);
  for (int e = 0; e < d && filled < k; ++e) {
    Vec v = Vec::Unit(d, e);
    for (int c = 0; c < filled; ++c) v -= out.col(c).dot(v) * out.col(c);
    if (v.norm() > 1e-6) out.col(filled++) = v.normalized();
  }
  return out;
}

double slope_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double m = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / m;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> geometric_grid(double hi, double lo, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1 || hi <= lo) {
    std::fill(out.begin(), out.end(), hi);
    return out;
  }
  const double ratio = std::pow(lo / hi, 1.0 / static_cast<double>(count - 1));
  for (std::size_t i = 0; i < count; ++i) out[i] = hi * std::pow(ratio, static_cast<double>(i));
  return out;
}

PointCloud spatial_projection(const PointCloud& cloud, const std::vector<std::size_t>& idx) {
  std::vector<SpaceTimePoint> pts;
  pts.reserve(idx.size());
  for (auto i : idx) pts.emplace_back(cloud[i].x, 0.0);
  return PointCloud(std::move(pts));
}

}  // namespace

PlaneAssignment PlaneAssignment::uniform(const PointCloud& cloud, const TimeSlicePlane& prototype) {
  if (prototype.ambient_dim() != cloud.ambient_dim()) {
    throw DimensionMismatch("plane and cloud dimensions differ");
  }
  PlaneAssignment a;
  a.k = prototype.k();
  a.planes.reserve(cloud.size());
  for (const auto& p : cloud) a.planes.push_back(prototype.translated_to(p));
  return a;
}

void PlaneAssignment::validate(const PointCloud& cloud) const {
  if (planes.size() != cloud.size()) throw InvalidArgument("plane assignment does not cover the cloud");
  for (std::size_t i = 0; i < planes.size(); ++i) {
    const auto& v = planes[i];
    if (v.ambient_dim() != cloud.ambient_dim()) throw DimensionMismatch("plane dimension differs from cloud");
    if (v.k() != k) throw InvalidArgument("plane assignment mixes plane dimensions");
    const double scale = 1.0 + cloud[i].x.norm();
    if ((v.base().x - cloud[i].x).norm() > 1e-9 * scale || v.time() != cloud[i].t) {
      throw InvalidArgument("plane is not based at its point");
    }
  }
}

PlaneAssignment fit_plane_assignment(const PointCloud& cloud, int k, double fit_scale) {
  const int d = cloud.ambient_dim();
  if (k < 0 || k > d) throw InvalidArgument("plane dimension out of range");
  if (!(fit_scale > 0.0)) throw InvalidArgument("fit scale must be positive");
  detail::ParabolicGrid grid(d, fit_scale);
  for (std::size_t i = 0; i < cloud.size(); ++i) grid.insert(cloud[i], i);
  PlaneAssignment out;
  out.k = k;
  out.planes.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    Mat cov = Mat::Zero(d, d);
    grid.for_each_candidate(cloud[i], [&](std::size_t j) {
      const double r = parabolic_distance(cloud[i], cloud[j]);
      if (j == i || r >= fit_scale) return;
      const double w = 1.0 - (r / fit_scale) * (r / fit_scale);
      const Vec dx = cloud[j].x - cloud[i].x;
      cov += w * dx * dx.transpose();
    });
    Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
    Mat top(d, k);
    for (int c = 0; c < k; ++c) top.col(c) = eig.eigenvectors().col(d - 1 - c);
    out.planes.emplace_back(cloud[i], complete_basis(top, k));
  }
  return out;
}

double point_defect(const PointCloud& cloud, const TimeSlicePlane& plane, std::size_t base,
                    double r) {
  if (!(r > 0.0)) throw InvalidArgument("scale must be positive");
  double worst = 0.0;
  for (const auto& q : cloud) {
    if (parabolic_distance(q, cloud[base]) < r) worst = std::max(worst, parabolic_distance(q, plane));
  }
  return worst / r;
}

ReifenbergProfile strong_reifenberg_profile(const PointCloud& cloud, const PlaneAssignment& planes,
                                            std::span<const double> scales, bool enforce_floor) {
  planes.validate(cloud);
  if (scales.empty()) throw InvalidArgument("scale list is empty");
  ReifenbergProfile prof;
  prof.floor = sampling_floor(cloud);
  prof.scales.assign(scales.begin(), scales.end());
  std::sort(prof.scales.begin(), prof.scales.end(), std::greater<>());
  for (double r : prof.scales) {
    if (!(r > 0.0)) throw InvalidArgument("scales must be positive");
    if (enforce_floor && r < prof.floor) {
      throw PreconditionFailed("scale below the sampling floor");
    }
  }
  const std::size_t m = prof.scales.size();
  prof.delta.assign(m, 0.0);
  prof.witness_base.assign(m, 0);
  prof.witness_point.assign(m, 0);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto rows = radial_rows(cloud, planes.planes[i], i);
    std::vector<double> run(rows.size());
    std::vector<std::size_t> arg(rows.size());
    double best = -1.0;
    std::size_t who = i;
    for (std::size_t q = 0; q < rows.size(); ++q) {
      if (rows[q].distance > best) {
        best = rows[q].distance;
        who = rows[q].index;
      }
      run[q] = best;
      arg[q] = who;
    }
    for (std::size_t s = 0; s < m; ++s) {
      const double r = prof.scales[s];
      auto it = std::lower_bound(rows.begin(), rows.end(), r,
                                 [](const RadialRow& row, double v) { return row.radius < v; });
      if (it == rows.begin()) continue;
      const auto q = static_cast<std::size_t>(it - rows.begin()) - 1;
      const double value = run[q] / r;
      if (value > prof.delta[s]) {
        prof.delta[s] = value;
        prof.witness_base[s] = i;
        prof.witness_point[s] = arg[q];
      }
    }
  }
  const double peak = *std::max_element(prof.delta.begin(), prof.delta.end());
  prof.vanishing = peak <= 1e-12 || (m >= 3 && prof.delta.back() <= 0.5 * prof.delta.front());
  return prof;
}

double all_scales_defect(const PointCloud& cloud, const TimeSlicePlane& plane, std::size_t base,
                         double r_max) {
  double worst = 0.0;
  for (const auto& q : cloud) {
    const double d = parabolic_distance(q, cloud[base]);
    if (d > 0.0 && d < r_max) worst = std::max(worst, parabolic_distance(q, plane) / d);
  }
  return worst;
}

double local_reifenberg_radius(const PointCloud& cloud, const TimeSlicePlane& plane,
                               std::size_t base, double delta) {
  double r0 = kInf;
  for (const auto& q : cloud) {
    const double d = parabolic_distance(q, cloud[base]);
    if (d > 0.0 && parabolic_distance(q, plane) > delta * d) r0 = std::min(r0, d);
  }
  return r0;
}

BestPlane best_strong_plane(const PointCloud& cloud, std::size_t base, int k, double r_max) {
  const int d = cloud.ambient_dim();
  if (k < 0 || k > d) throw InvalidArgument("plane dimension out of range");
  const auto& p = cloud[base];
  if (k == 0 || k == d) {
    auto plane = k == 0 ? TimeSlicePlane::point(p) : TimeSlicePlane::coordinate(p, d);
    return {plane, all_scales_defect(cloud, plane, base, r_max)};
  }
  struct Offset {
    Vec dx;
    double dt_root;
    double r;
  };
  std::vector<Offset> offs;
  for (const auto& q : cloud) {
    const double r = parabolic_distance(q, p);
    if (r > 0.0 && r < r_max) offs.push_back({q.x - p.x, std::sqrt(std::abs(q.t - p.t)), r});
  }
  if (offs.empty()) return {TimeSlicePlane::coordinate(p, k), 0.0};

  auto defect_of = [&](const Mat& q) {
    double worst = 0.0;
    for (const auto& o : offs) {
      const Vec normal = o.dx - q * (q.transpose() * o.dx);
      worst = std::max(worst, std::max(normal.norm(), o.dt_root) / o.r);
    }
    return worst;
  };
  auto basis_of = [&](const Vec& params) -> std::optional<Mat> {
    Mat m = Eigen::Map<const Mat>(params.data(), d, k);
    Eigen::HouseholderQR<Mat> qr(m);
    Mat r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    for (int c = 0; c < k; ++c) {
      if (std::abs(r(c, c)) < 1e-9 * (1.0 + m.norm())) return std::nullopt;
    }
    return Mat(qr.householderQ() * Mat::Identity(d, k));
  };
  auto objective = [&](const Vec& params) {
    auto q = basis_of(params);
    return q ? defect_of(*q) : 1e300;
  };

  std::vector<Vec> starts;
  auto push_basis = [&](const Mat& q) { starts.emplace_back(Eigen::Map<const Vec>(q.data(), d * k)); };
  {
    Mat cov = Mat::Zero(d, d);
    for (const auto& o : offs) cov += o.dx * o.dx.transpose() / (o.r * o.r);
    Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
    Mat top(d, k);
    for (int c = 0; c < k; ++c) top.col(c) = eig.eigenvectors().col(d - 1 - c);
    push_basis(complete_basis(top, k));
  }
  {
    std::vector<int> sel(d, 0);
    std::fill(sel.begin(), sel.begin() + k, 1);
    std::sort(sel.begin(), sel.end());
    do {
      Mat q = Mat::Zero(d, k);
      int c = 0;
      for (int e = 0; e < d; ++e) {
        if (sel[e]) q(e, c++) = 1.0;
      }
      push_basis(q);
    } while (std::next_permutation(sel.begin(), sel.end()));
  }
  {
    std::vector<std::size_t> order(offs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return offs[a].r < offs[b].r; });
    const std::size_t take = std::min<std::size_t>(order.size(), 24);
    for (std::size_t a = 0; a < take; ++a) {
      if (offs[order[a]].dx.norm() == 0.0) continue;
      push_basis(complete_basis(offs[order[a]].dx.normalized(), k));
    }
  }
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> gauss;
  for (int s = 0; s < 8; ++s) {
    Vec v(d * k);
    for (int i = 0; i < v.size(); ++i) v[i] = gauss(rng);
    if (auto q = basis_of(v)) push_basis(*q);
  }

  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t s = 0; s < starts.size(); ++s) ranked.emplace_back(objective(starts[s]), s);
  std::sort(ranked.begin(), ranked.end());
  Vec best_x = starts[ranked.front().second];
  double best_v = ranked.front().first;
  for (std::size_t s = 0; s < std::min<std::size_t>(ranked.size(), 5); ++s) {
    Vec x = starts[ranked[s].second];
    for (int round = 0; round < 3; ++round) {
      auto res = nelder_mead(objective, x, 0.2 / (1 + round), 4000, 1e-12);
      x = res.x;
      if (res.value < best_v) {
        best_v = res.value;
        best_x = res.x;
      }
    }
  }
  const Mat q = *basis_of(best_x);
  return {TimeSlicePlane(p, q), defect_of(q)};
}

double full_reifenberg_defect(const PointCloud& cloud, const TimeSlicePlane& plane,
                              std::size_t base, double r) {
  return plane_hausdorff_distance(cloud, plane, r, cloud[base]).distance / r;
}

double RegularityFunction::value_at(double r) const {
  if (envelope.empty() || r < bin_lower.front()) return 0.0;
  for (std::size_t b = 0; b < bin_upper.size(); ++b) {
    if (r <= bin_upper[b]) return envelope[b];
  }
  return envelope.back();
}

double pair_regularity(const PointCloud& cloud, const PlaneAssignment& planes, std::size_t i,
                       std::size_t j) {
  const double r = parabolic_distance(cloud[i], cloud[j]);
  if (r == 0.0) return 0.0;
  return plane_hausdorff_distance(planes.planes[i], planes.planes[j], r, cloud[i]) / r;
}

RegularityFunction f_regularity_profile(const PointCloud& cloud, const PlaneAssignment& planes,
                                        std::size_t bins) {
  planes.validate(cloud);
  if (cloud.size() < 2) throw InvalidArgument("f-regularity needs at least two points");
  if (bins < 1) throw InvalidArgument("need at least one bin");
  struct Pair {
    double r;
    double f;
  };
  std::vector<Pair> pairs;
  double lo = kInf;
  double hi = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t j = 0; j < cloud.size(); ++j) {
      if (i == j) continue;
      const double r = parabolic_distance(cloud[i], cloud[j]);
      if (r == 0.0) continue;
      pairs.push_back({r, pair_regularity(cloud, planes, i, j)});
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  if (pairs.empty() || !(hi > lo * (1.0 + 1e-12))) {
    throw PreconditionFailed("all point pairs fall in one distance bin");
  }
  RegularityFunction f;
  const double ratio = std::pow(hi / lo, 1.0 / static_cast<double>(bins));
  for (std::size_t b = 0; b < bins; ++b) {
    f.bin_lower.push_back(lo * std::pow(ratio, static_cast<double>(b)));
    f.bin_upper.push_back(b + 1 == bins ? hi : lo * std::pow(ratio, static_cast<double>(b + 1)));
  }
  f.raw.assign(bins, 0.0);
  f.pair_counts.assign(bins, 0);
  for (const auto& pr : pairs) {
    auto b = static_cast<std::size_t>(std::floor(std::log(pr.r / lo) / std::log(ratio)));
    b = std::min(b, bins - 1);
    f.raw[b] = std::max(f.raw[b], pr.f);
    ++f.pair_counts[b];
  }
  f.envelope = f.raw;
  for (std::size_t b = 1; b < bins; ++b) f.envelope[b] = std::max(f.envelope[b], f.envelope[b - 1]);
  return f;
}

namespace {

std::vector<std::size_t> ball_members(const PointCloud& cloud, std::size_t base, double r) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (in_parabolic_ball(cloud[i], cloud[base], r)) out.push_back(i);
  }
  return out;
}

void check_extraction_inputs(const PointCloud& cloud, const PlaneAssignment& planes,
                             std::size_t base, double r0, double delta) {
  planes.validate(cloud);
  if (base >= cloud.size()) throw InvalidArgument("base point index out of range");
  if (!(r0 > 0.0)) throw InvalidArgument("working radius must be positive");
  if (!(delta > 0.0)) throw InvalidArgument("delta must be positive");
  if (delta > kLemmaDeltaMax) throw PreconditionFailed("delta above the smallness threshold 1/20");
}

double reifenberg_on_ball(const PointCloud& cloud, const PlaneAssignment& planes, std::size_t base,
                          double r0, double delta) {
  double worst = 0.0;
  for (auto i : ball_members(cloud, base, r0)) {
    worst = std::max(worst, all_scales_defect(cloud, planes.planes[i], i, r0));
  }
  if (worst > delta * (1.0 + 1e-12)) {
    throw PreconditionFailed("strong Reifenberg property fails on the working ball");
  }
  return worst;
}

LipschitzGraph project_half_ball(const PointCloud& cloud, std::size_t base,
                                 const TimeSlicePlane& plane, double r0) {
  LipschitzGraph g;
  g.plane = plane;
  g.working_radius = r0 / 2.0;
  for (auto i : ball_members(cloud, base, r0 / 2.0)) {
    auto pr = project(cloud[i], plane);
    g.samples.push_back({i, pr.tangential, pr.normal, cloud[i].t});
  }
  const double resolution = 1e-12 * r0;
  for (std::size_t a = 0; a < g.samples.size(); ++a) {
    for (std::size_t b = a + 1; b < g.samples.size(); ++b) {
      const auto& sa = g.samples[a];
      const auto& sb = g.samples[b];
      const double dpi = (sa.tangential - sb.tangential).norm();
      const double dn = (sa.normal - sb.normal).norm();
      const double dt = std::sqrt(std::abs(sa.time - sb.time));
      if (dpi <= resolution) {
        if (dn <= resolution && dt <= std::sqrt(resolution)) continue;  // duplicate sample
        throw InjectivityFailure("projection is not injective on the half ball", sa.index, sb.index);
      }
      g.time_constant = std::max(g.time_constant, dt / dpi);
      g.normal_constant = std::max(g.normal_constant, dn / dpi);
      g.constant = std::max(g.constant,
                            parabolic_distance(cloud[sa.index], cloud[sb.index]) / dpi);
    }
  }
  return g;
}

}  // namespace

LipschitzGraph extract_bilipschitz_graph(const PointCloud& cloud, const PlaneAssignment& planes,
                                         std::size_t base, const TimeSlicePlane& plane, double r0,
                                         double delta) {
  check_extraction_inputs(cloud, planes, base, r0, delta);
  if (plane.ambient_dim() != cloud.ambient_dim()) throw DimensionMismatch("plane dimension differs from cloud");
  const double defect = reifenberg_on_ball(cloud, planes, base, r0, delta);
  const auto closeness = plane_hausdorff_distance(cloud, plane, r0, cloud[base]);
  if (!(closeness.distance < delta * r0)) {
    throw PreconditionFailed("set and plane are not delta-close on the working ball");
  }
  auto g = project_half_ball(cloud, base, plane, r0);
  g.reifenberg_defect = defect;
  g.hypothesis_distance = closeness.distance / r0;
  return g;
}

LipschitzGraph extract_bilipschitz_graph(const PointCloud& cloud, const PlaneAssignment& planes,
                                         std::size_t base, double r0, double delta) {
  check_extraction_inputs(cloud, planes, base, r0, delta);
  return extract_bilipschitz_graph(cloud, planes, base, planes.planes[base], r0, delta);
}

LipschitzGraph extract_lipschitz_graph_fregular(const PointCloud& cloud,
                                                const PlaneAssignment& planes, std::size_t base,
                                                double r0, double delta) {
  check_extraction_inputs(cloud, planes, base, r0, delta);
  const double defect = reifenberg_on_ball(cloud, planes, base, r0, delta);
  const auto members = ball_members(cloud, base, r0);
  double f_sup = 0.0;
  for (auto i : members) {
    for (auto j : members) {
      if (i != j) f_sup = std::max(f_sup, pair_regularity(cloud, planes, i, j));
    }
  }
  if (!(f_sup < delta)) throw PreconditionFailed("plane distribution is not f-regular below delta");
  auto g = project_half_ball(cloud, base, planes.planes[base], r0);
  g.reifenberg_defect = defect;
  g.hypothesis_distance = f_sup;
  return g;
}

namespace {

struct HolderPairs {
  std::vector<std::pair<double, double>> dx_ratio;  // sorted by dx
  double sup = 0.0;
  std::pair<std::size_t, std::size_t> witness{0, 0};
};

HolderPairs holder_pairs(const PointCloud& cloud, const std::vector<std::size_t>& idx) {
  HolderPairs hp;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      const auto& p = cloud[idx[a]];
      const auto& q = cloud[idx[b]];
      const double dx = (p.x - q.x).norm();
      if (dx == 0.0) continue;
      const double ratio = std::abs(p.t - q.t) / (dx * dx);
      hp.dx_ratio.emplace_back(dx, ratio);
      if (ratio > hp.sup) {
        hp.sup = ratio;
        hp.witness = {idx[a], idx[b]};
      }
    }
  }
  std::sort(hp.dx_ratio.begin(), hp.dx_ratio.end());
  return hp;
}

void fill_profile(HolderFit& fit, const HolderPairs& hp) {
  fit.eps.clear();
  fit.gamma.clear();
  if (hp.dx_ratio.empty()) return;
  const double hi = hp.dx_ratio.back().first;
  const double lo = hp.dx_ratio.front().first;
  fit.eps = geometric_grid(hi, lo, 16);
  std::vector<double> prefix(hp.dx_ratio.size());
  double run = 0.0;
  for (std::size_t i = 0; i < hp.dx_ratio.size(); ++i) {
    run = std::max(run, hp.dx_ratio[i].second);
    prefix[i] = run;
  }
  for (double e : fit.eps) {
    auto it = std::upper_bound(hp.dx_ratio.begin(), hp.dx_ratio.end(),
                               std::make_pair(e * (1.0 + 1e-12), kInf));
    fit.gamma.push_back(it == hp.dx_ratio.begin()
                            ? 0.0
                            : prefix[static_cast<std::size_t>(it - hp.dx_ratio.begin()) - 1]);
  }
  const double peak = *std::max_element(fit.gamma.begin(), fit.gamma.end());
  fit.vanishing = !fit.unbounded && (peak == 0.0 || fit.gamma.back() <= 0.5 * fit.gamma.front());
}

void fit_single_graph(const PointCloud& cloud, HolderFit& fit) {
  const auto hp = holder_pairs(cloud, fit.domain);
  fit.raw_constant = hp.sup;
  fit.witness = hp.witness;
  const auto blow = ratio_blowup_test(hp.dx_ratio);
  fit.blowup_exponent = blow.exponent;
  fit.unbounded = blow.unbounded;
  fit.constant = fit.unbounded ? kInf : hp.sup;
  fill_profile(fit, hp);
}

}  // namespace

BlowupTest ratio_blowup_test(std::span<const std::pair<double, double>> dx_ratio,
                             std::size_t bins) {
  BlowupTest out;
  if (dx_ratio.empty() || bins == 0) return out;
  const double lo = dx_ratio.front().first;
  const double hi = dx_ratio.back().first;
  if (!(hi > lo) || !(lo > 0.0)) return out;
  const double width = std::log(hi / lo) / static_cast<double>(bins);
  std::vector<double> peak(bins, 0.0);
  for (const auto& [dx, ratio] : dx_ratio) {
    auto b = static_cast<std::size_t>(std::log(dx / lo) / width);
    b = std::min(b, bins - 1);
    peak[b] = std::max(peak[b], ratio);
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t b = 0; b < bins; ++b) {
    if (peak[b] <= 0.0) continue;
    xs.push_back(std::log(lo) + (static_cast<double>(b) + 0.5) * width);
    ys.push_back(std::log(peak[b]));
  }
  out.bins_used = xs.size();
  if (xs.size() >= 2) out.exponent = slope_fit(xs, ys);
  out.unbounded = out.bins_used >= 3 && out.exponent < -0.5;
  return out;
}

HolderFit two_holder_fit(const PointCloud& cloud) {
  // Group samples sharing a spatial position (exact match after sorting).
  std::vector<std::size_t> order(cloud.size());
  std::iota(order.begin(), order.end(), 0);
  auto spatial_less = [&](std::size_t a, std::size_t b) {
    const auto& xa = cloud[a].x;
    const auto& xb = cloud[b].x;
    for (int i = 0; i < xa.size(); ++i) {
      if (xa[i] != xb[i]) return xa[i] < xb[i];
    }
    return cloud[a].t < cloud[b].t;
  };
  std::stable_sort(order.begin(), order.end(), spatial_less);
  std::vector<std::vector<std::size_t>> groups;
  for (auto i : order) {
    if (!groups.empty() && cloud[groups.back().front()].x == cloud[i].x) {
      groups.back().push_back(i);
    } else {
      groups.push_back({i});
    }
  }
  HolderFit fit;
  bool multi = false;
  for (auto& g : groups) {
    std::vector<std::size_t> distinct{g.front()};
    for (std::size_t a = 1; a < g.size(); ++a) {
      if (cloud[g[a]].t != cloud[distinct.back()].t) distinct.push_back(g[a]);
    }
    if (distinct.size() > 1) multi = true;
    g = std::move(distinct);
  }
  if (!multi) {
    for (const auto& g : groups) fit.domain.push_back(g.front());
    std::sort(fit.domain.begin(), fit.domain.end());
    fit_single_graph(cloud, fit);
    return fit;
  }

  // Multi-valued: split each colliding fibre into time clusters and assign
  // the r-th cluster to sheet r.
  fit.single_valued = false;
  std::vector<std::size_t> reps;
  for (const auto& g : groups) reps.push_back(g.front());
  const auto spatial = spatial_projection(cloud, reps);
  auto nn = nearest_neighbor_distances(spatial);
  std::vector<double> finite;
  for (double v : nn) {
    if (std::isfinite(v) && v > 0.0) finite.push_back(v);
  }
  std::sort(finite.begin(), finite.end());
  const double h = finite.empty() ? 0.0 : finite[finite.size() / 2];
  double local_gamma = 0.0;
  {
    std::vector<std::size_t> all(cloud.size());
    std::iota(all.begin(), all.end(), 0);
    const auto hp = holder_pairs(cloud, all);
    for (const auto& [dx, ratio] : hp.dx_ratio) {
      if (dx <= 2.0 * h) local_gamma = std::max(local_gamma, ratio);
    }
  }
  const double gap = 10.0 * local_gamma * h * h;
  for (const auto& g : groups) {
    std::size_t sheet = 0;
    for (std::size_t a = 0; a < g.size(); ++a) {
      if (a > 0 && cloud[g[a]].t - cloud[g[a - 1]].t > gap) ++sheet;
      if (fit.sheets.size() <= sheet) fit.sheets.resize(sheet + 1);
      fit.sheets[sheet].push_back(g[a]);
    }
  }
  for (const auto& sheet : fit.sheets) {
    HolderFit part;
    part.domain = sheet;
    fit_single_graph(cloud, part);
    if (part.constant >= fit.constant) {
      fit.constant = part.constant;
      fit.raw_constant = part.raw_constant;
      fit.witness = part.witness;
      fit.unbounded = part.unbounded;
      fit.blowup_exponent = part.blowup_exponent;
    }
  }
  return fit;
}

double graph_parabolic_lipschitz(const PointCloud& cloud, const HolderFit& fit) {
  double worst = 1.0;
  const auto& idx = fit.domain;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      const double dx = (cloud[idx[a]].x - cloud[idx[b]].x).norm();
      if (dx > 0.0) worst = std::max(worst, parabolic_distance(cloud[idx[a]], cloud[idx[b]]) / dx);
    }
  }
  return worst;
}

std::vector<int> linkage_components(const PointCloud& cloud, double threshold) {
  const std::size_t n = cloud.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  if (threshold > 0.0) {
    detail::ParabolicGrid grid(cloud.ambient_dim(), threshold);
    for (std::size_t i = 0; i < n; ++i) {
      grid.for_each_candidate(cloud[i], [&](std::size_t j) {
        if (parabolic_distance(cloud[i], cloud[j]) <= threshold) parent[find(i)] = find(j);
      });
      grid.insert(cloud[i], i);
    }
  }
  std::vector<int> labels(n);
  std::map<std::size_t, int> ids;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, fresh] = ids.emplace(find(i), static_cast<int>(ids.size()));
    labels[i] = it->second;
  }
  return labels;
}

TimeSliceReport time_slice_test(const PointCloud& cloud, std::optional<std::vector<int>> labels,
                                double spread_tolerance) {
  TimeSliceReport rep;
  rep.fit = two_holder_fit(cloud);
  if (!rep.fit.single_valued) throw PreconditionFailed("set is not a single-valued graph over space");
  if (rep.fit.unbounded) throw PreconditionFailed("set is not a 2-Hölder graph");
  if (!rep.fit.vanishing) throw PreconditionFailed("2-Hölder constant does not vanish");

  const auto spatial = spatial_projection(cloud, rep.fit.domain);
  const double floor = spatial.size() > 1 ? sampling_floor(spatial) : 0.0;
  std::vector<double> eps;
  for (double e : rep.fit.eps) {
    if (e >= floor) eps.push_back(e);
  }
  if (eps.empty() && !rep.fit.eps.empty()) eps.push_back(rep.fit.eps.front());
  for (double e : eps) {
    const double count = static_cast<double>(greedy_cover_centers(spatial, e).size());
    const auto g = std::find(rep.fit.eps.begin(), rep.fit.eps.end(), e) - rep.fit.eps.begin();
    rep.eps.push_back(e);
    rep.spatial_cover_sums.push_back(count * e * e);
    rep.h1_bound.push_back(rep.fit.gamma[static_cast<std::size_t>(g)] * count * e * e);
  }
  if (rep.spatial_cover_sums.size() >= 3) {
    const std::size_t m = rep.spatial_cover_sums.size();
    const double first = rep.spatial_cover_sums[m - 3];
    if (std::max(rep.spatial_cover_sums[m - 2], rep.spatial_cover_sums[m - 1]) > 2.0 * first) {
      throw PreconditionFailed("spatial 2-dimensional covering sums are not bounded");
    }
  }
  if (rep.h1_bound.empty()) {
    rep.h1_vanishing = true;
  } else {
    const double peak = *std::max_element(rep.h1_bound.begin(), rep.h1_bound.end());
    rep.h1_vanishing = peak <= 1e-14 || rep.h1_bound.back() <= 0.5 * rep.h1_bound.front();
  }

  std::vector<int> comp = labels ? *labels
                          : cloud.labels() ? *cloud.labels()
                                           : linkage_components(cloud, sampling_floor(cloud));
  if (comp.size() != cloud.size()) throw InvalidArgument("component labels must have one entry per point");
  std::map<int, ComponentVerdict> by_label;
  std::map<int, std::pair<double, double>> range;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    auto& v = by_label[comp[i]];
    v.label = comp[i];
    ++v.size;
    auto [it, fresh] = range.emplace(comp[i], std::make_pair(cloud[i].t, cloud[i].t));
    if (!fresh) {
      it->second.first = std::min(it->second.first, cloud[i].t);
      it->second.second = std::max(it->second.second, cloud[i].t);
    }
  }
  rep.all_time_slices = true;
  for (auto& [label, v] : by_label) {
    v.time_spread = range[label].second - range[label].first;
    v.time_slice = v.time_spread <= spread_tolerance;
    rep.all_time_slices = rep.all_time_slices && v.time_slice;
    rep.components.push_back(v);
  }
  std::vector<double> times;
  for (const auto& p : cloud) times.push_back(p.t);
  std::sort(times.begin(), times.end());
  rep.distinct_times = 1;
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] - times[i - 1] > spread_tolerance) ++rep.distinct_times;
  }
  return rep;
}

}  // namespace mcfsing
