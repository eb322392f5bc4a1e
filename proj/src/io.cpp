#include "mcfsing/io.hpp"

#include "mcfsing/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace mcfsing {

namespace fs = std::filesystem;

namespace {

// JSON has no infinities; they travel as strings.
Json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double get_num(const Json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw InvalidArgument("expected a number, got '" + s + "'");
  }
  if (!j.is_number()) throw InvalidArgument("expected a number");
  return j.get<double>();
}

Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

Vec vec_from(const Json& j) {
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = get_num(j[i]);
  return v;
}

Json mat_json(const Mat& m) {
  Json cols = Json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) cols.push_back(vec_json(m.col(c)));
  return cols;
}

Mat mat_from(const Json& j, Eigen::Index rows) {
  Mat m(rows, static_cast<Eigen::Index>(j.size()));
  for (std::size_t c = 0; c < j.size(); ++c) m.col(static_cast<Eigen::Index>(c)) = vec_from(j[c]);
  return m;
}

Json vec_json(const std::vector<double>& v) {
  Json a = Json::array();
  for (double d : v) a.push_back(num(d));
  return a;
}

std::vector<double> dvec_from(const Json& j) {
  std::vector<double> out;
  for (const auto& e : j) out.push_back(get_num(e));
  return out;
}

const char* kind_name(PinchKind k) {
  switch (k) {
    case PinchKind::neck: return "neck";
    case PinchKind::extinction: return "extinction";
    case PinchKind::circle: return "circle";
  }
  return "neck";
}

PinchKind kind_from(const std::string& s) {
  if (s == "neck") return PinchKind::neck;
  if (s == "extinction") return PinchKind::extinction;
  if (s == "circle") return PinchKind::circle;
  throw InvalidArgument("unknown pinch kind '" + s + "'");
}

const char* flow_kind_name(FlowKind k) {
  switch (k) {
    case FlowKind::analytic: return "analytic";
    case FlowKind::rotational: return "rotational";
    case FlowKind::torus: return "torus";
  }
  return "analytic";
}

FlowKind flow_kind_from(const std::string& s) {
  if (s == "analytic") return FlowKind::analytic;
  if (s == "rotational") return FlowKind::rotational;
  if (s == "torus") return FlowKind::torus;
  throw InvalidArgument("unknown flow kind '" + s + "'");
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InvalidArgument(std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace

std::string dump(const Json& j) { return j.dump(1) + "\n"; }

void write_text_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    if (!out.flush()) throw Error("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json to_json(const SpaceTimePoint& p) { return Json{{"x", vec_json(p.x)}, {"t", num(p.t)}}; }

SpaceTimePoint point_from_json(const Json& j) { return {vec_from(field(j, "x")), get_num(field(j, "t"))}; }

Json to_json(const PointCloud& cloud) {
  Json pts = Json::array();
  for (const auto& p : cloud) pts.push_back(to_json(p));
  Json j{{"points", pts}};
  if (cloud.labels()) j["labels"] = *cloud.labels();
  return j;
}

PointCloud cloud_from_json(const Json& j) {
  std::vector<SpaceTimePoint> pts;
  for (const auto& p : field(j, "points")) pts.push_back(point_from_json(p));
  std::optional<std::vector<int>> labels;
  if (j.contains("labels")) labels = j.at("labels").get<std::vector<int>>();
  return PointCloud(std::move(pts), std::move(labels));
}

Json to_json(const TimeSlicePlane& plane) {
  return Json{{"base", to_json(plane.base())}, {"directions", mat_json(plane.directions())}};
}

TimeSlicePlane plane_from_json(const Json& j) {
  const auto base = point_from_json(field(j, "base"));
  const auto& dirs = field(j, "directions");
  if (dirs.empty()) return TimeSlicePlane::point(base);
  return TimeSlicePlane(base, mat_from(dirs, base.x.size()));
}

Json to_json(const WeightedHypersurface& s) {
  Json j{{"n", s.n()}};
  std::visit(
      [&](const auto& sh) {
        using T = std::decay_t<decltype(sh)>;
        if constexpr (std::is_same_v<T, SphereShape>) {
          j["type"] = "sphere";
          j["center"] = vec_json(sh.center);
          j["radius"] = num(sh.radius);
        } else if constexpr (std::is_same_v<T, CylinderShape>) {
          j["type"] = "cylinder";
          j["base"] = vec_json(sh.base);
          j["axis"] = mat_json(sh.axis);
          j["radius"] = num(sh.radius);
          j["half_length"] = num(sh.half_length);
        } else if constexpr (std::is_same_v<T, PlaneShape>) {
          j["type"] = "plane";
          j["base"] = vec_json(sh.base);
          j["normal"] = vec_json(sh.normal);
        } else if constexpr (std::is_same_v<T, RevolutionShape>) {
          j["type"] = "revolution";
          Json curves = Json::array();
          for (const auto& c : sh.curves) {
            Json xs = Json::array();
            Json rs = Json::array();
            for (const auto& p : c.points) {
              xs.push_back(p.x());
              rs.push_back(p.y());
            }
            curves.push_back(Json{{"closed", c.closed}, {"x", xs}, {"r", rs}});
          }
          j["curves"] = curves;
        } else {
          j["type"] = "sampled";
          Json pts = Json::array();
          for (const auto& p : sh.points) pts.push_back(vec_json(p));
          j["points"] = pts;
          j["weights"] = vec_json(sh.weights);
        }
      },
      s.shape());
  return j;
}

WeightedHypersurface surface_from_json(const Json& j) {
  const int n = field(j, "n").get<int>();
  const auto type = field(j, "type").get<std::string>();
  if (type == "sphere") {
    return {n, SphereShape{vec_from(field(j, "center")), get_num(field(j, "radius"))}};
  }
  if (type == "cylinder") {
    const Vec base = vec_from(field(j, "base"));
    return {n, CylinderShape{base, mat_from(field(j, "axis"), base.size()), get_num(field(j, "radius")),
                             get_num(field(j, "half_length"))}};
  }
  if (type == "plane") return {n, PlaneShape{vec_from(field(j, "base")), vec_from(field(j, "normal"))}};
  if (type == "revolution") {
    RevolutionShape r;
    for (const auto& c : field(j, "curves")) {
      ProfileCurve pc;
      pc.closed = field(c, "closed").get<bool>();
      const auto xs = dvec_from(field(c, "x"));
      const auto rs = dvec_from(field(c, "r"));
      if (xs.size() != rs.size()) throw InvalidArgument("profile coordinate lengths differ");
      for (std::size_t i = 0; i < xs.size(); ++i) pc.points.emplace_back(xs[i], rs[i]);
      r.curves.push_back(std::move(pc));
    }
    return {n, r};
  }
  if (type == "sampled") {
    SampledShape s;
    for (const auto& p : field(j, "points")) s.points.push_back(vec_from(p));
    s.weights = dvec_from(field(j, "weights"));
    return {n, s};
  }
  throw InvalidArgument("unknown surface type '" + type + "'");
}

Json to_json(const SingularEvent& e) {
  Json d{{"value", num(e.density.value)},
         {"residual", num(e.density.residual)},
         {"monotone", e.density.monotone},
         {"flagged", e.density.flagged},
         {"tau", vec_json(e.density.tau)},
         {"f", vec_json(e.density.f)}};
  return Json{{"location", to_json(e.location)},
              {"source", kind_name(e.source)},
              {"classified", e.classified},
              {"j", e.j},
              {"density", d},
              {"axis", to_json(e.axis)},
              {"eta_s", vec_json(e.eta_s)},
              {"eta", vec_json(e.eta)}};
}

SingularEvent event_from_json(const Json& j) {
  SingularEvent e;
  e.location = point_from_json(field(j, "location"));
  e.source = kind_from(field(j, "source").get<std::string>());
  e.classified = field(j, "classified").get<bool>();
  e.j = field(j, "j").get<int>();
  const auto& d = field(j, "density");
  e.density.value = get_num(field(d, "value"));
  e.density.residual = get_num(field(d, "residual"));
  e.density.monotone = field(d, "monotone").get<bool>();
  e.density.flagged = field(d, "flagged").get<bool>();
  e.density.tau = dvec_from(field(d, "tau"));
  e.density.f = dvec_from(field(d, "f"));
  e.axis = plane_from_json(field(j, "axis"));
  e.eta_s = dvec_from(field(j, "eta_s"));
  e.eta = dvec_from(field(j, "eta"));
  return e;
}

void write_flow_archive(const fs::path& dir, const Flow& flow, const std::vector<SingularEvent>* events) {
  Json meta{{"n", flow.n},
            {"kind", flow_kind_name(flow.kind)},
            {"status", flow.status == RunStatus::resolved ? "resolved" : "unresolved"},
            {"note", flow.note},
            {"lambda0", num(flow.lambda0)},
            {"t_begin", num(flow.t_begin)},
            {"t_end", num(flow.t_end)}};
  if (flow.analytic) {
    meta["analytic"] = Json{{"kind", flow.analytic->kind},
                            {"n", flow.analytic->n},
                            {"j", flow.analytic->j},
                            {"r0", num(flow.analytic->r0)}};
  }
  Json pinches = Json::array();
  for (const auto& p : flow.pinches) {
    pinches.push_back(Json{{"kind", kind_name(p.kind)},
                           {"location", to_json(p.location)},
                           {"circle_radius", num(p.circle_radius)}});
  }
  meta["pinches"] = pinches;
  Json snaps = Json::array();
  for (const auto& s : flow.snapshots) {
    snaps.push_back(Json{{"time", num(s.time)},
                         {"spacing", num(s.spacing)},
                         {"surface", to_json(s.surface)}});
  }
  write_text_atomic(dir / "flow.json", dump(meta));
  write_text_atomic(dir / "snapshots.json", snaps.dump() + "\n");
  if (events) {
    Json ev = Json::array();
    for (const auto& e : *events) ev.push_back(to_json(e));
    write_text_atomic(dir / "events.json", dump(ev));
  }
}

Flow read_flow_archive(const fs::path& dir) {
  const Json meta = Json::parse(read_text(dir / "flow.json"));
  Flow f;
  f.n = field(meta, "n").get<int>();
  f.kind = flow_kind_from(field(meta, "kind").get<std::string>());
  f.status = field(meta, "status").get<std::string>() == "resolved" ? RunStatus::resolved
                                                                    : RunStatus::unresolved;
  f.note = field(meta, "note").get<std::string>();
  f.lambda0 = get_num(field(meta, "lambda0"));
  f.t_begin = get_num(field(meta, "t_begin"));
  f.t_end = get_num(field(meta, "t_end"));
  if (meta.contains("analytic")) {
    const auto& a = meta.at("analytic");
    f.analytic = AnalyticSpec{field(a, "kind").get<std::string>(), field(a, "n").get<int>(),
                              field(a, "j").get<int>(), get_num(field(a, "r0"))};
  }
  for (const auto& p : field(meta, "pinches")) {
    PinchRecord r;
    r.kind = kind_from(field(p, "kind").get<std::string>());
    r.location = point_from_json(field(p, "location"));
    r.circle_radius = get_num(field(p, "circle_radius"));
    f.pinches.push_back(r);
  }
  const Json snaps = Json::parse(read_text(dir / "snapshots.json"));
  for (const auto& s : snaps) {
    FlowSnapshot fs_;
    fs_.time = get_num(field(s, "time"));
    fs_.spacing = get_num(field(s, "spacing"));
    fs_.surface = surface_from_json(field(s, "surface"));
    f.snapshots.push_back(std::move(fs_));
  }
  return f;
}

std::vector<SingularEvent> read_events(const fs::path& dir) {
  const Json j = Json::parse(read_text(dir / "events.json"));
  std::vector<SingularEvent> out;
  for (const auto& e : j) out.push_back(event_from_json(e));
  return out;
}

std::string to_csv(const CsvTable& table) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < table.header.size(); ++i) os << (i ? "," : "") << table.header[i];
  os << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw InvalidArgument("csv row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  return os.str();
}

void write_csv(const fs::path& path, const CsvTable& table) { write_text_atomic(path, to_csv(table)); }

}  // namespace mcfsing
