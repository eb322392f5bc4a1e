#include "mcfsing/errors.hpp"
#include "mcfsing/flows.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mcfsing {

namespace {

using TimeValue = std::pair<double, double>;

// Root of a quadratic least-squares fit to the last few (t, v) samples with
// v >= floor; falls back to a linear fit, then to `fallback`.
double extrapolate_zero(const std::vector<TimeValue>& hist, double floor, double fallback) {
  std::vector<TimeValue> use;
  for (const auto& tv : hist) {
    if (tv.second >= floor) use.push_back(tv);
  }
  if (use.size() > 6) use.erase(use.begin(), use.end() - 6);
  if (use.size() < 2) return fallback;
  const double t_last = use.back().first;
  if (use.size() >= 3) {
    Eigen::MatrixXd a(use.size(), 3);
    Eigen::VectorXd b(use.size());
    for (std::size_t i = 0; i < use.size(); ++i) {
      const double s = use[i].first - t_last;
      a(i, 0) = 1.0;
      a(i, 1) = s;
      a(i, 2) = s * s;
      b[i] = use[i].second;
    }
    const Eigen::Vector3d c = a.colPivHouseholderQr().solve(b);
    double best = std::numeric_limits<double>::infinity();
    if (std::abs(c[2]) > 1e-14) {
      const double disc = c[1] * c[1] - 4.0 * c[2] * c[0];
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        for (double r : {(-c[1] - sq) / (2.0 * c[2]), (-c[1] + sq) / (2.0 * c[2])}) {
          if (r >= 0.0) best = std::min(best, r);
        }
      }
    } else if (c[1] < 0.0) {
      best = -c[0] / c[1];
    }
    if (std::isfinite(best)) return t_last + best;
  }
  const auto& p = use[use.size() - 2];
  const auto& q = use.back();
  const double slope = (q.second - p.second) / (q.first - p.first);
  if (slope < 0.0) return q.first - q.second / slope;
  return fallback;
}

struct Run {
  std::size_t first = 0;
  std::size_t len = 0;
  bool ring = false;
  std::vector<TimeValue> bulb;  // (t, max w)
  double bulb_x = 0.0;
};

std::vector<Run> find_runs(const std::vector<char>& alive, bool periodic) {
  const std::size_t n = alive.size();
  std::vector<Run> runs;
  if (periodic) {
    std::size_t dead = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i]) {
        dead = i;
        break;
      }
    }
    if (dead == n) {
      runs.push_back({0, n, true, {}, 0.0});
      return runs;
    }
    std::size_t k = 0;
    while (k < n) {
      const std::size_t i = (dead + 1 + k) % n;
      if (!alive[i]) {
        ++k;
        continue;
      }
      Run r{i, 0, false, {}, 0.0};
      while (k < n && alive[(dead + 1 + k) % n]) {
        ++r.len;
        ++k;
      }
      runs.push_back(r);
    }
    return runs;
  }
  for (std::size_t i = 0; i < n;) {
    if (!alive[i]) {
      ++i;
      continue;
    }
    Run r{i, 0, false, {}, 0.0};
    while (i < n && alive[i]) {
      ++r.len;
      ++i;
    }
    runs.push_back(r);
  }
  return runs;
}

struct NeckTrack {
  double x = 0.0;
  std::vector<TimeValue> hist;
};

class GraphSolver {
 public:
  GraphSolver(const std::function<double(double)>& u0, double a, double b, const RotsymControls& c)
      : c_(c) {
    if (c.n < 1) throw InvalidArgument("n must be at least 1");
    if (!(b > a) || !(c.h > 0.0)) throw InvalidArgument("need a < b and h > 0");
    if (!(c.cfl > 0.0 && c.cfl <= 0.5)) throw InvalidArgument("cfl must lie in (0, 0.5]");
    const std::size_t cells = static_cast<std::size_t>(std::llround((b - a) / c.h));
    if (cells < 4) throw InvalidArgument("grid too coarse");
    g_.x0 = a;
    g_.h = (b - a) / static_cast<double>(cells);
    g_.periodic = c.periodic;
    const std::size_t nodes = c.periodic ? cells : cells + 1;
    g_.w.resize(nodes);
    g_.alive.resize(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
      const double u = u0(g_.x(i));
      if (!std::isfinite(u) || u < 0.0) throw InvalidArgument("initial profile must be finite and >= 0");
      g_.w[i] = u * u;
      g_.alive[i] = u > 0.0;
    }
    if (c.periodic) {
      if (std::find(g_.alive.begin(), g_.alive.end(), 0) != g_.alive.end()) {
        throw InvalidArgument("periodic mode needs a positive initial profile");
      }
    } else if (u0(a) != 0.0 || u0(b) != 0.0) {
      throw InvalidArgument("closed mode needs u0(a) = u0(b) = 0");
    }
    runs_ = find_runs(g_.alive, g_.periodic);
    if (runs_.empty()) throw InvalidArgument("initial profile is empty");
    double umin = std::numeric_limits<double>::infinity();
    double umax = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) umax = std::max(umax, std::sqrt(g_.w[i]));
    for (std::size_t i : necks()) umin = std::min(umin, std::sqrt(g_.w[i]));
    u_ref_ = std::isfinite(umin) ? umin : umax;
    thr_ = std::pow(c.pinch_factor * u_ref_, 2);
  }

  Flow run() {
    Flow f;
    f.n = c_.n;
    f.kind = FlowKind::rotational;
    f.t_begin = 0.0;
    snapshot(f);
    f.lambda0 = entropy(f.snapshots.front().surface).value;
    double next_snap = c_.snapshot_interval;
    std::size_t steps = 0;
    while (!runs_.empty()) {
      if (t_ >= c_.t_end) break;
      if (steps++ >= c_.max_steps) {
        f.status = RunStatus::unresolved;
        f.note = "step limit reached at t = " + std::to_string(t_);
        break;
      }
      step(std::min(time_step(), c_.t_end - t_));
      const bool changed = post_step(f);
      record_tracks();
      if (changed || t_ >= next_snap || dropped()) {
        snapshot(f);
        while (next_snap <= t_) next_snap += c_.snapshot_interval;
      }
    }
    f.t_end = t_;
    if (runs_.empty()) {
      FlowSnapshot s;
      s.time = t_;
      s.surface = WeightedHypersurface::revolution(c_.n, {});
      s.spacing = g_.h;
      f.snapshots.push_back(s);
    } else if (f.snapshots.back().time != t_) {
      snapshot(f);
    }
    return f;
  }

 private:
  std::size_t idx(const Run& r, std::size_t k) const { return (r.first + k) % g_.w.size(); }
  std::size_t left_of(std::size_t i) const { return (i + g_.w.size() - 1) % g_.w.size(); }

  std::vector<std::size_t> necks() const {
    std::vector<std::size_t> out;
    for (const auto& r : runs_) {
      const std::size_t lo = r.ring ? 0 : 1;
      const std::size_t hi = r.ring ? r.len : r.len - 1;
      for (std::size_t k = lo; k < hi; ++k) {
        const double wl = g_.w[left_of(idx(r, k))];
        const double wr = g_.w[idx(r, k + 1)];
        const double w = g_.w[idx(r, k)];
        if (w <= wl && w < wr) out.push_back(idx(r, k));
      }
    }
    return out;
  }

  double run_max(const Run& r, std::size_t* where = nullptr) const {
    double m = -1.0;
    for (std::size_t k = 0; k < r.len; ++k) {
      if (g_.w[idx(r, k)] > m) {
        m = g_.w[idx(r, k)];
        if (where) *where = idx(r, k);
      }
    }
    return m;
  }

  double time_step() const {
    double dt = c_.cfl * g_.h * g_.h;
    for (std::size_t i : necks()) dt = std::min(dt, 0.02 * g_.w[i] / (2.0 * c_.n));
    double wmax = std::numeric_limits<double>::infinity();
    for (const auto& r : runs_) wmax = std::min(wmax, run_max(r));
    return std::max(std::min(dt, 0.02 * wmax / (2.0 * c_.n)), 1e-16);
  }

  void step(double dt) {
    const double h = g_.h;
    std::vector<double> next = g_.w;
    for (const auto& r : runs_) {
      double gl = 0.0;
      double gr = 0.0;
      if (!r.ring) {
        const double* w = g_.w.data();
        const auto at = [&](std::size_t k) { return w[idx(r, k)]; };
        if (r.len >= 3) {
          gl = 3.0 * at(0) - 3.0 * at(1) + at(2);
          gr = 3.0 * at(r.len - 1) - 3.0 * at(r.len - 2) + at(r.len - 3);
        } else {
          gl = 2.0 * at(0) - at(r.len - 1);
          gr = 2.0 * at(r.len - 1) - at(0);
        }
      }
      for (std::size_t k = 0; k < r.len; ++k) {
        const std::size_t i = idx(r, k);
        const double wl = (r.ring || k > 0) ? g_.w[left_of(idx(r, k))] : gl;
        const double wr = (r.ring || k + 1 < r.len) ? g_.w[idx(r, k + 1)] : gr;
        const double w = g_.w[i];
        const double wx = (wr - wl) / (2.0 * h);
        const double wxx = (wr - 2.0 * w + wl) / (h * h);
        const double rate = (4.0 * w * wxx - 2.0 * wx * wx) / (4.0 * w + wx * wx) - 2.0 * (c_.n - 1);
        next[i] = w + dt * rate;
      }
    }
    g_.w.swap(next);
    t_ += dt;
  }

  // Kills pinched, receded and vanished nodes. Returns true when the
  // topology changed.
  bool post_step(Flow& f) {
    const std::vector<char> before = g_.alive;
    const std::vector<Run> old_runs = runs_;
    std::vector<std::size_t> pinched;
    for (const auto& r : old_runs) {
      for (std::size_t k = 0; k < r.len; ++k) {
        const std::size_t i = idx(r, k);
        const bool edge = !r.ring && (k == 0 || k + 1 == r.len);
        if (edge) {
          if (g_.w[i] <= 0.0) g_.alive[i] = 0;
          continue;
        }
        // Next to a tip a vanishing node means the tip recedes, not a pinch.
        if (!r.ring && (k == 1 || k + 2 == r.len)) {
          if (g_.w[i] <= 0.0) {
            g_.alive[i] = 0;
            g_.alive[k == 1 ? idx(r, 0) : idx(r, r.len - 1)] = 0;
          }
          continue;
        }
        const double wl = g_.w[left_of(idx(r, k))];
        const double wr = g_.w[idx(r, k + 1)];
        if (g_.w[i] <= 0.0 || (g_.w[i] <= thr_ && g_.w[i] <= wl && g_.w[i] <= wr)) {
          g_.alive[i] = 0;
          pinched.push_back(i);
        }
      }
    }
    bool changed = !pinched.empty();
    for (std::size_t i : pinched) {
      // Nodes near the pinched one that are already below the threshold go too.
      for (int dir : {-1, 1}) {
        std::size_t j = i;
        for (int s = 0; s < 3; ++s) {
          j = (j + g_.w.size() + dir) % g_.w.size();
          if (!g_.periodic && ((dir < 0 && j == g_.w.size() - 1) || (dir > 0 && j == 0))) break;
          if (g_.alive[j] && g_.w[j] <= thr_) g_.alive[j] = 0;
        }
      }
    }
    if (!pinched.empty()) record_pinches(f, pinched, before);

    runs_ = find_runs(g_.alive, g_.periodic);
    for (auto& r : runs_) {
      // Inherit the bulb history of the run this one came from.
      for (const auto& o : old_runs) {
        bool inside = o.ring;
        for (std::size_t k = 0; !inside && k < o.len; ++k) inside = idx(o, k) == r.first;
        if (!inside) continue;
        std::size_t lo = r.first;
        std::size_t hi = idx(r, r.len - 1);
        const double xa = g_.x(lo);
        const double xb = g_.x(hi);
        for (const auto& tv : o.bulb) r.bulb.push_back(tv);
        r.bulb_x = o.bulb_x;
        if (o.len != r.len && xa <= xb && (o.bulb_x < xa - g_.h || o.bulb_x > xb + g_.h)) {
          r.bulb.clear();
        }
        break;
      }
    }
    std::vector<Run> keep;
    for (auto& r : runs_) {
      std::size_t where = r.first;
      const double m = run_max(r, &where);
      if (r.len >= 3 && m > thr_) {
        keep.push_back(std::move(r));
        continue;
      }
      changed = true;
      for (std::size_t k = 0; k < r.len; ++k) g_.alive[idx(r, k)] = 0;
      // Fragments split off a receding tip carry no history of their own.
      if (r.bulb.empty()) continue;
      const double t0 = extrapolate_zero(r.bulb, std::pow(4.0 * g_.h, 2), t_ + std::max(m, 0.0) / (2.0 * c_.n));
      PinchRecord p;
      p.kind = PinchKind::extinction;
      Vec x = Vec::Zero(c_.n + 1);
      x[0] = r.bulb.empty() ? g_.x(where) : r.bulb_x;
      p.location = {x, std::max(t0, t_)};
      f.pinches.push_back(p);
    }
    runs_ = std::move(keep);
    if (runs_.size() != old_runs.size()) changed = true;
    for (std::size_t i = 0; i < g_.w.size(); ++i) {
      if (!g_.alive[i]) g_.w[i] = 0.0;
    }
    return changed;
  }

  void record_pinches(Flow& f, const std::vector<std::size_t>& pinched, const std::vector<char>&) {
    std::vector<std::size_t> sorted = pinched;
    std::sort(sorted.begin(), sorted.end());
    // One record per cluster of adjacent pinched nodes.
    for (std::size_t s = 0; s < sorted.size();) {
      std::size_t e = s;
      while (e + 1 < sorted.size() && sorted[e + 1] <= sorted[e] + 3) ++e;
      std::size_t best = sorted[s];
      for (std::size_t k = s; k <= e; ++k) {
        if (g_.w[sorted[k]] < g_.w[best]) best = sorted[k];
      }
      double x = g_.x(best);
      NeckTrack* track = nullptr;
      for (auto& tr : tracks_) {
        if (std::abs(tr.x - x) <= 5.0 * g_.h && (!track || std::abs(tr.x - x) < std::abs(track->x - x))) {
          track = &tr;
        }
      }
      double t0 = t_;
      if (track) {
        t0 = std::max(t_ - 1e-12, extrapolate_zero(track->hist, std::pow(3.0 * g_.h, 2), t_));
        x = track->x;
        track->hist.clear();
      }
      PinchRecord p;
      p.kind = PinchKind::neck;
      Vec loc = Vec::Zero(c_.n + 1);
      loc[0] = x;
      p.location = {loc, t0};
      f.pinches.push_back(p);
      s = e + 1;
    }
  }

  void record_tracks() {
    for (std::size_t i : necks()) {
      // Sub-grid neck position from the parabola through the three nodes.
      const std::size_t n = g_.w.size();
      const double wl = g_.w[(i + n - 1) % n];
      const double wr = g_.w[(i + 1) % n];
      const double den = wl - 2.0 * g_.w[i] + wr;
      const double shift = den > 0.0 ? std::clamp(0.5 * (wl - wr) / den, -0.5, 0.5) : 0.0;
      const double x = g_.x(i) + shift * g_.h;
      NeckTrack* track = nullptr;
      for (auto& tr : tracks_) {
        if (std::abs(tr.x - x) <= 5.0 * g_.h) track = &tr;
      }
      if (!track) {
        tracks_.push_back({x, {}});
        track = &tracks_.back();
      }
      track->x = x;
      if (track->hist.empty() || g_.w[i] <= 0.99 * track->hist.back().second) {
        track->hist.emplace_back(t_, g_.w[i]);
      }
    }
    for (auto& r : runs_) {
      std::size_t where = r.first;
      const double m = run_max(r, &where);
      r.bulb_x = g_.x(where);
      if (r.bulb.empty() || m <= 0.99 * r.bulb.back().second) r.bulb.emplace_back(t_, m);
    }
  }

  bool dropped() const {
    const double keep = 1.0 - c_.drop_fraction;
    double neck = std::numeric_limits<double>::infinity();
    for (std::size_t i : necks()) neck = std::min(neck, g_.w[i]);
    double bulb = std::numeric_limits<double>::infinity();
    for (const auto& r : runs_) bulb = std::min(bulb, run_max(r));
    return (std::isfinite(snap_neck_) && neck <= keep * snap_neck_) ||
           (std::isfinite(snap_bulb_) && bulb <= keep * snap_bulb_);
  }

  void snapshot(Flow& f) {
    std::vector<ProfileCurve> curves;
    const double h = g_.h;
    for (const auto& r : runs_) {
      ProfileCurve c;
      const auto at = [&](std::size_t k) { return g_.w[idx(r, k)]; };
      // Unwrapped coordinates for runs crossing the periodic seam.
      const auto xk = [&](std::size_t k) { return g_.x(r.first) + h * static_cast<double>(k); };
      auto tip = [&](std::size_t k0, std::size_t k1, std::size_t k2) {
        const double slope = r.len >= 3 ? (-3.0 * at(k0) + 4.0 * at(k1) - at(k2)) / (2.0 * h)
                                        : (at(k1) - at(k0)) / h;
        return slope > 0.0 ? std::clamp(at(k0) / slope, 0.0, h) : h;
      };
      if (!r.ring) {
        const std::size_t k2 = std::min<std::size_t>(2, r.len - 1);
        c.points.emplace_back(xk(0) - tip(0, std::min<std::size_t>(1, r.len - 1), k2), 0.0);
      }
      for (std::size_t k = 0; k < r.len; ++k) c.points.emplace_back(xk(k), std::sqrt(std::max(at(k), 0.0)));
      if (!r.ring) {
        const std::size_t l = r.len - 1;
        const double d = tip(l, l >= 1 ? l - 1 : 0, l >= 2 ? l - 2 : 0);
        c.points.emplace_back(xk(l) + d, 0.0);
      }
      curves.push_back(std::move(c));
    }
    FlowSnapshot s;
    s.time = t_;
    s.surface = WeightedHypersurface::revolution(c_.n, std::move(curves));
    s.spacing = h;
    s.graph = g_;
    f.snapshots.push_back(std::move(s));
    snap_neck_ = std::numeric_limits<double>::infinity();
    for (std::size_t i : necks()) snap_neck_ = std::min(snap_neck_, g_.w[i]);
    snap_bulb_ = std::numeric_limits<double>::infinity();
    for (const auto& r : runs_) snap_bulb_ = std::min(snap_bulb_, run_max(r));
  }

  RotsymControls c_;
  GraphProfile g_;
  std::vector<Run> runs_;
  std::vector<NeckTrack> tracks_;
  double t_ = 0.0;
  double u_ref_ = 0.0;
  double thr_ = 0.0;
  double snap_neck_ = std::numeric_limits<double>::infinity();
  double snap_bulb_ = std::numeric_limits<double>::infinity();
};

}  // namespace

Flow rotsym_mcf_run(const std::function<double(double)>& u0, double a, double b,
                    const RotsymControls& controls) {
  return GraphSolver(u0, a, b, controls).run();
}

std::function<double(double)> dumbbell_profile(double bulb, double neck, double gap) {
  if (!(bulb > 0.0 && neck > 0.0 && gap > 0.0) || neck >= bulb) {
    throw InvalidArgument("dumbbell needs 0 < neck < bulb and gap > 0");
  }
  return [=](double x) {
    const double ax = std::abs(x);
    if (ax >= gap) {
      const double w = bulb * bulb - (ax - gap) * (ax - gap);
      return w > 0.0 ? std::sqrt(w) : 0.0;
    }
    const double s2 = (x / gap) * (x / gap);
    return std::sqrt(neck * neck + (bulb * bulb - neck * neck) * (2.0 * s2 - s2 * s2));
  };
}

ProfileCurve torus_profile(double r_center, double rho, std::size_t points, double x_center) {
  if (!(rho > 0.0) || !(r_center > rho)) throw InvalidArgument("torus needs 0 < rho < r_center");
  if (points < 8) throw InvalidArgument("torus profile needs at least 8 points");
  ProfileCurve c;
  c.closed = true;
  for (std::size_t i = 0; i < points; ++i) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(points);
    c.points.emplace_back(x_center + rho * std::cos(th), r_center + rho * std::sin(th));
  }
  return c;
}

namespace {

std::vector<Eigen::Vector2d> resample_closed(const std::vector<Eigen::Vector2d>& p, std::size_t count) {
  const std::size_t m = p.size();
  std::vector<double> cum(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) cum[i + 1] = cum[i] + (p[(i + 1) % m] - p[i]).norm();
  const double total = cum[m];
  std::vector<Eigen::Vector2d> out;
  out.reserve(count);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double s = total * static_cast<double>(k) / static_cast<double>(count);
    while (seg + 1 < m && cum[seg + 1] < s) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double u = len > 0.0 ? (s - cum[seg]) / len : 0.0;
    out.push_back(p[seg] + u * (p[(seg + 1) % m] - p[seg]));
  }
  return out;
}

double diameter(const std::vector<Eigen::Vector2d>& p) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) d = std::max(d, (p[i] - p[j]).squaredNorm());
  }
  return std::sqrt(d);
}

}  // namespace

Flow rotsym_torus_run(const ProfileCurve& initial, const TorusControls& c) {
  if (!initial.closed || initial.points.size() < 8) throw InvalidArgument("torus run needs a closed profile");
  if (c.points < 8 || !(c.cfl > 0.0) || c.n < 1) throw InvalidArgument("invalid torus controls");
  for (const auto& p : initial.points) {
    if (!(p.y() > 0.0)) throw InvalidArgument("profile must stay off the rotation axis");
  }
  Flow f;
  f.n = c.n;
  f.kind = FlowKind::torus;
  auto pts = resample_closed(initial.points, c.points);
  auto make_snapshot = [&](double t, const std::vector<Eigen::Vector2d>& q) {
    FlowSnapshot s;
    s.time = t;
    s.surface = WeightedHypersurface::revolution(c.n, {ProfileCurve{q, true}});
    double seg = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) seg += (q[(i + 1) % q.size()] - q[i]).norm();
    s.spacing = seg / static_cast<double>(q.size());
    f.snapshots.push_back(std::move(s));
  };
  make_snapshot(0.0, pts);
  f.lambda0 = entropy(f.snapshots.front().surface).value;

  const double diam0 = diameter(pts);
  double t = 0.0;
  double next_snap = c.snapshot_interval;
  double snap_rho2 = diam0 * diam0 / 4.0;
  struct Sample {
    double t, rho2, x, r;
  };
  std::vector<Sample> hist;
  const std::size_t m = pts.size();
  std::vector<Eigen::Vector2d> vel(m);
  bool collapsed = false;
  for (std::size_t step = 0;; ++step) {
    if (step >= c.max_steps) {
      f.status = RunStatus::unresolved;
      f.note = "step limit reached";
      break;
    }
    if (t >= c.t_end) break;
    double min_seg = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const Eigen::Vector2d& a = pts[(i + m - 1) % m];
      const Eigen::Vector2d& b = pts[i];
      const Eigen::Vector2d& d = pts[(i + 1) % m];
      min_seg = std::min(min_seg, (d - b).norm());
      // Curvature vector from the circle through three consecutive points.
      const Eigen::Vector2d ab = a - b;
      const Eigen::Vector2d db = d - b;
      const double cross = ab.x() * db.y() - ab.y() * db.x();
      Eigen::Vector2d kvec = Eigen::Vector2d::Zero();
      if (std::abs(cross) > 1e-300) {
        const double a2 = ab.squaredNorm();
        const double d2 = db.squaredNorm();
        const Eigen::Vector2d center(
            (db.y() * a2 - ab.y() * d2) / (2.0 * cross), (ab.x() * d2 - db.x() * a2) / (2.0 * cross));
        kvec = center / center.squaredNorm();
      }
      Eigen::Vector2d tangent = (d - a).normalized();
      const Eigen::Vector2d normal(-tangent.y(), tangent.x());
      vel[i] = kvec - (c.n - 1) * normal.y() / b.y() * normal;
    }
    double dt = c.cfl * min_seg * min_seg;
    dt = std::min(dt, c.t_end - t);
    bool hit_axis = false;
    for (std::size_t i = 0; i < m; ++i) hit_axis = hit_axis || !(pts[i].y() + dt * vel[i].y() > 0.0);
    if (hit_axis) {
      // Keep the last admissible curve; the step would cross the axis.
      f.status = RunStatus::unresolved;
      f.note = "profile reached the rotation axis at t = " + std::to_string(t + dt);
      break;
    }
    for (std::size_t i = 0; i < m; ++i) pts[i] += dt * vel[i];
    t += dt;
    pts = resample_closed(pts, m);
    const double diam = diameter(pts);
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (const auto& p : pts) centroid += p;
    centroid /= static_cast<double>(m);
    const double rho2 = diam * diam / 4.0;
    if (hist.empty() || rho2 <= 0.99 * hist.back().rho2) hist.push_back({t, rho2, centroid.x(), centroid.y()});
    if (t >= next_snap || rho2 <= 0.9 * snap_rho2) {
      make_snapshot(t, pts);
      snap_rho2 = rho2;
      while (next_snap <= t) next_snap += c.snapshot_interval;
    }
    if (diam < c.collapse_fraction * diam0) {
      collapsed = true;
      break;
    }
  }
  f.t_end = t;
  if (f.snapshots.back().time != t) make_snapshot(t, pts);
  if (collapsed) {
    std::vector<TimeValue> r2;
    for (const auto& s : hist) r2.emplace_back(s.t, s.rho2);
    const double t0 = std::max(t, extrapolate_zero(r2, 0.0, t));
    // Linear extrapolation of the profile centroid to t0.
    const std::size_t k = std::min<std::size_t>(6, hist.size());
    double xs = 0.0, rs = 0.0, ts = 0.0;
    for (std::size_t i = hist.size() - k; i < hist.size(); ++i) {
      xs += hist[i].x;
      rs += hist[i].r;
      ts += hist[i].t;
    }
    xs /= k;
    rs /= k;
    ts /= k;
    double stt = 0.0, stx = 0.0, str = 0.0;
    for (std::size_t i = hist.size() - k; i < hist.size(); ++i) {
      stt += (hist[i].t - ts) * (hist[i].t - ts);
      stx += (hist[i].t - ts) * (hist[i].x - xs);
      str += (hist[i].t - ts) * (hist[i].r - rs);
    }
    const double bx = stt > 0.0 ? stx / stt : 0.0;
    const double br = stt > 0.0 ? str / stt : 0.0;
    PinchRecord p;
    p.kind = PinchKind::circle;
    Vec loc = Vec::Zero(c.n + 1);
    loc[0] = xs + bx * (t0 - ts);
    loc[1] = rs + br * (t0 - ts);
    p.location = {loc, t0};
    p.circle_radius = loc[1];
    f.pinches.push_back(p);
    FlowSnapshot s;
    s.time = t0;
    s.surface = WeightedHypersurface::revolution(c.n, {});
    f.snapshots.push_back(std::move(s));
    f.t_end = t0;
  }
  return f;
}

}  // namespace mcfsing
