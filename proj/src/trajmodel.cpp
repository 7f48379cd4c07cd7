#include "lfforge/trajmodel.hpp"

#include "lfforge/csv.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace lfforge {

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string_view strip_zeros(std::string_view s) {
  while (s.size() > 1 && s.front() == '0') s.remove_prefix(1);
  return s;
}

constexpr double kTimeEps = 1e-9;

struct RawRow {
  double t, x, y;
  std::optional<double> v_long, v_lat, a_long, a_lat, length, width;
};

struct RawVehicle {
  VehicleClass cls;
  std::vector<RawRow> rows;
  bool class_conflict = false;
};

// Linear interpolation of one optional channel at time t between rows a and b.
std::optional<double> lerp(const std::optional<double>& a, const std::optional<double>& b,
                           double w) {
  if (!a || !b) return std::nullopt;
  return *a + w * (*b - *a);
}

}  // namespace

bool id_less(std::string_view a, std::string_view b) {
  if (all_digits(a) && all_digits(b)) {
    const auto sa = strip_zeros(a), sb = strip_zeros(b);
    if (sa.size() != sb.size()) return sa.size() < sb.size();
    if (sa != sb) return sa < sb;
  }
  return a < b;
}

double lateral_overlap(double lv_y, double lv_width, double sv_y, double sv_width) {
  const double right = std::min(lv_y + 0.5 * lv_width, sv_y + 0.5 * sv_width);
  const double left = std::max(lv_y - 0.5 * lv_width, sv_y - 0.5 * sv_width);
  return std::max(0.0, right - left);
}

InteractionSample interaction_at(const Vehicle& lv, const TrajectoryPoint& lvp, const Vehicle& sv,
                                 const TrajectoryPoint& svp) {
  InteractionSample s;
  s.t = svp.t;
  s.gap_long = (lvp.x_long - lv.length) - svp.x_long;
  s.gap_lat = svp.y_lat - lvp.y_lat;
  s.overlap = lateral_overlap(lvp.y_lat, lv.width, svp.y_lat, sv.width);
  s.rel_vel = lvp.v_long - svp.v_long;
  s.sv_speed = svp.v_long;
  s.lv_speed = lvp.v_long;
  s.sv_accel = svp.a_long;
  s.sv_lat_speed = svp.v_lat;
  s.lv_x = lvp.x_long;
  s.sv_x = svp.x_long;
  return s;
}

std::vector<InteractionSample> interaction_series(const Vehicle& lv, const Vehicle& sv,
                                                  FrameWindow window, double dt) {
  std::vector<InteractionSample> out;
  if (window.empty()) return out;
  out.reserve(static_cast<std::size_t>(window.size()));
  for (auto f = window.first; f <= window.last; ++f) {
    if (!lv.covers(f) || !sv.covers(f)) {
      std::ostringstream msg;
      msg << "window not covered at t=" << static_cast<double>(f) * dt << " s (vehicle "
          << (lv.covers(f) ? sv.id : lv.id) << ")";
      throw DataError(msg.str());
    }
    out.push_back(interaction_at(lv, lv.at_frame(f), sv, sv.at_frame(f)));
  }
  return out;
}

std::vector<InteractionSample> interaction_series(const Vehicle& lv, const Vehicle& sv, double t0,
                                                  double t1, double dt) {
  const auto f0 = static_cast<std::int64_t>(std::llround(t0 / dt));
  const auto f1 = static_cast<std::int64_t>(std::llround(t1 / dt));
  return interaction_series(lv, sv, FrameWindow{f0, f1}, dt);
}

Eigen::VectorXd column(std::span<const InteractionSample> samples,
                       double InteractionSample::*field) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = samples[i].*field;
  return out;
}

ColumnMapping ColumnMapping::canonical() {
  ColumnMapping m;
  m.v_long = "v_long";
  m.v_lat = "v_lat";
  m.a_long = "a_long";
  m.a_lat = "a_lat";
  m.length = "length";
  m.width = "width";
  return m;
}

std::map<VehicleClass, Dimensions> default_dimensions() {
  return {{VehicleClass::TW, {1.8, 0.6}},
          {VehicleClass::CAR, {4.0, 1.8}},
          {VehicleClass::HV, {10.0, 2.5}},
          {VehicleClass::LCV, {5.5, 2.0}},
          {VehicleClass::AUTO, {2.8, 1.4}}};
}

Eigen::VectorXd finite_difference(const Eigen::VectorXd& values, double dt) {
  const Eigen::Index n = values.size();
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  if (n < 2) return d;
  d(0) = (values(1) - values(0)) / dt;
  d(n - 1) = (values(n - 1) - values(n - 2)) / dt;
  for (Eigen::Index i = 1; i + 1 < n; ++i) d(i) = (values(i + 1) - values(i - 1)) / (2.0 * dt);
  return d;
}

IngestResult ingest(std::istream& source, const IngestOptions& options) {
  if (!(options.dt > 0)) throw ConfigError("dt must be positive");
  const ColumnMapping& m = options.mapping;
  csv::Reader reader(source);

  auto required = [&](const std::string& name, const char* role) {
    auto idx = reader.column(name);
    if (!idx) throw ConfigError(std::string("mapped column '") + name + "' for " + role +
                                " not found in CSV header");
    return *idx;
  };
  auto optional_col = [&](const std::optional<std::string>& name,
                          const char* role) -> std::optional<std::size_t> {
    if (!name) return std::nullopt;
    auto idx = reader.column(*name);
    if (!idx) throw ConfigError(std::string("mapped column '") + *name + "' for " + role +
                                " not found in CSV header");
    return idx;
  };
  const auto c_id = required(m.id, "id");
  const auto c_cls = required(m.cls, "class");
  const auto c_t = required(m.t, "t");
  const auto c_x = required(m.x_long, "x_long");
  const auto c_y = required(m.y_lat, "y_lat");
  const auto c_vl = optional_col(m.v_long, "v_long");
  const auto c_vt = optional_col(m.v_lat, "v_lat");
  const auto c_al = optional_col(m.a_long, "a_long");
  const auto c_at = optional_col(m.a_lat, "a_lat");
  const auto c_len = optional_col(m.length, "length");
  const auto c_wid = optional_col(m.width, "width");

  IngestResult result;
  std::map<std::string, RawVehicle> raw;
  std::vector<std::string> f;
  while (reader.next(f)) {
    auto field = [&](std::size_t i) -> std::string_view {
      return i < f.size() ? std::string_view(f[i]) : std::string_view{};
    };
    auto bad = [&](std::string msg) {
      result.record_errors.push_back({reader.line(), std::move(msg)});
    };
    const std::string id(field(c_id));
    if (id.empty()) {
      bad("empty vehicle id");
      continue;
    }
    const auto cls = parse_vehicle_class(field(c_cls));
    if (!cls) {
      bad("unknown class '" + std::string(field(c_cls)) + "'");
      continue;
    }
    const auto t = csv::parse_double(field(c_t));
    const auto x = csv::parse_double(field(c_x));
    const auto y = csv::parse_double(field(c_y));
    if (!t || !x || !y) {
      bad("non-numeric t/x_long/y_lat");
      continue;
    }
    RawRow row{*t, *x, *y, {}, {}, {}, {}, {}, {}};
    auto opt = [&](const std::optional<std::size_t>& c) -> std::optional<double> {
      if (!c) return std::nullopt;
      return csv::parse_double(field(*c));
    };
    row.v_long = opt(c_vl);
    row.v_lat = opt(c_vt);
    row.a_long = opt(c_al);
    row.a_lat = opt(c_at);
    row.length = opt(c_len);
    row.width = opt(c_wid);
    if ((c_vl && !row.v_long) || (c_vt && !row.v_lat) || (c_al && !row.a_long) ||
        (c_at && !row.a_lat)) {
      bad("non-numeric kinematic field");
      continue;
    }
    auto [it, inserted] = raw.try_emplace(id, RawVehicle{*cls, {}, false});
    if (!inserted && it->second.cls != *cls) it->second.class_conflict = true;
    it->second.rows.push_back(row);
  }

  const double dt = options.dt;
  for (auto& [id, rv] : raw) {
    auto fail = [&](std::string msg) { result.vehicle_errors.push_back({id, std::move(msg)}); };
    if (rv.class_conflict) {
      fail("rows disagree on vehicle class");
      continue;
    }
    auto& rows = rv.rows;
    std::stable_sort(rows.begin(), rows.end(),
                     [](const RawRow& a, const RawRow& b) { return a.t < b.t; });
    // Exact duplicates collapse; conflicting rows at one timestamp are an error.
    std::vector<RawRow> uniq;
    bool conflict = false;
    for (const auto& r : rows) {
      if (!uniq.empty() && std::abs(r.t - uniq.back().t) < kTimeEps) {
        const auto& u = uniq.back();
        if (r.x != u.x || r.y != u.y || r.v_long != u.v_long || r.v_lat != u.v_lat) {
          conflict = true;
          break;
        }
        continue;
      }
      uniq.push_back(r);
    }
    if (conflict) {
      fail("non-monotonic timestamps: conflicting rows share a timestamp");
      continue;
    }

    const auto f0 = static_cast<std::int64_t>(std::ceil(uniq.front().t / dt - kTimeEps));
    const auto f1 = static_cast<std::int64_t>(std::floor(uniq.back().t / dt + kTimeEps));
    if (f1 < f0) {
      fail("trajectory does not span a grid instant");
      continue;
    }

    Vehicle v;
    v.id = id;
    v.cls = rv.cls;
    const auto dims = options.default_dims.count(rv.cls) ? options.default_dims.at(rv.cls)
                                                         : default_dimensions().at(rv.cls);
    v.length = uniq.front().length.value_or(dims.length);
    v.width = uniq.front().width.value_or(dims.width);
    if (!(v.length > 0) || !(v.width > 0) || !std::isfinite(v.length) || !std::isfinite(v.width)) {
      fail("non-positive vehicle dimensions");
      continue;
    }
    v.first_frame = f0;

    const std::size_t n = static_cast<std::size_t>(f1 - f0 + 1);
    Eigen::VectorXd xs(n), ys(n);
    std::vector<std::optional<double>> vl(n), vt(n), al(n), at(n);
    std::size_t seg = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(f0 + static_cast<std::int64_t>(i)) * dt;
      while (seg + 1 < uniq.size() && uniq[seg + 1].t < t - kTimeEps) ++seg;
      const RawRow& a = uniq[seg];
      const RawRow& b = uniq[std::min(seg + 1, uniq.size() - 1)];
      double w = 0;
      if (b.t - a.t > kTimeEps) w = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);
      const auto idx = static_cast<Eigen::Index>(i);
      xs(idx) = a.x + w * (b.x - a.x);
      ys(idx) = a.y + w * (b.y - a.y);
      vl[i] = lerp(a.v_long, b.v_long, w);
      vt[i] = lerp(a.v_lat, b.v_lat, w);
      al[i] = lerp(a.a_long, b.a_long, w);
      at[i] = lerp(a.a_lat, b.a_lat, w);
    }

    auto channel = [&](const std::vector<std::optional<double>>& given, bool present,
                       const Eigen::VectorXd& integrand) -> Eigen::VectorXd {
      if (present) {
        Eigen::VectorXd out(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) out(static_cast<Eigen::Index>(i)) = *given[i];
        return out;
      }
      return finite_difference(integrand, dt);
    };
    const Eigen::VectorXd v_long = channel(vl, c_vl.has_value(), xs);
    const Eigen::VectorXd v_lat = channel(vt, c_vt.has_value(), ys);
    const Eigen::VectorXd a_long = channel(al, c_al.has_value(), v_long);
    const Eigen::VectorXd a_lat = channel(at, c_at.has_value(), v_lat);

    v.points.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto idx = static_cast<Eigen::Index>(i);
      auto& p = v.points[i];
      p.t = static_cast<double>(f0 + static_cast<std::int64_t>(i)) * dt;
      p.x_long = xs(idx);
      p.y_lat = ys(idx);
      p.v_long = std::max(0.0, v_long(idx));
      p.v_lat = v_lat(idx);
      p.a_long = a_long(idx);
      p.a_lat = a_lat(idx);
    }
    result.vehicles.push_back(std::move(v));
  }
  std::sort(result.vehicles.begin(), result.vehicles.end(),
            [](const Vehicle& a, const Vehicle& b) { return id_less(a.id, b.id); });
  return result;
}

void write_trajectories_csv(std::ostream& out, std::span<const Vehicle> vehicles) {
  csv::write_row(out, {"vehicle_id", "class", "t", "x_long", "y_lat", "v_long", "v_lat", "a_long",
                       "a_lat", "length", "width"});
  using csv::format_double;
  for (const auto& v : vehicles) {
    const std::string cls(to_string(v.cls));
    for (const auto& p : v.points) {
      csv::write_row(out, {v.id, cls, format_double(p.t), format_double(p.x_long),
                           format_double(p.y_lat), format_double(p.v_long), format_double(p.v_lat),
                           format_double(p.a_long), format_double(p.a_lat),
                           format_double(v.length), format_double(v.width)});
    }
  }
}

}  // namespace lfforge
