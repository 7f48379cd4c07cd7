#include "lfforge/synthgen.hpp"

#include "lfforge/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <random>

namespace lfforge::synth {

namespace {

constexpr std::pair<Label, std::string_view> kLabelNames[] = {
    {Label::FOLLOWING, "FOLLOWING"},         {Label::OVERTAKING, "OVERTAKING"},
    {Label::TAILGATING, "TAILGATING"},       {Label::APPROACH_ONLY, "APPROACH_ONLY"},
    {Label::DIVERGE_ONLY, "DIVERGE_ONLY"},   {Label::INDEPENDENT, "INDEPENDENT"},
};

constexpr double kPi = std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Draws are built directly on the engine output so sequences do not depend on
// the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(Range r) { return r.lo + (r.hi - r.lo) * uniform(); }
  double normal() {
    double u1 = uniform();
    while (u1 <= 0) u1 = uniform();
    return std::sqrt(-2 * std::log(u1)) * std::cos(2 * kPi * uniform());
  }
  double sign() { return uniform() < 0.5 ? -1.0 : 1.0; }

 private:
  std::mt19937_64 engine_;
};

// Smooth speed change over [ts, ts + d]: a step of size dv, or a bump that
// returns to the starting speed.
struct SpeedEvent {
  double ts = 0, d = 1, dv = 0;
  bool bump = false;
  double accel(double t) const {
    const double u = (t - ts) / d;
    if (u < 0 || u > 1) return 0;
    return bump ? dv * kPi / d * std::sin(2 * kPi * u) : dv * kPi / (2 * d) * std::sin(kPi * u);
  }
  double speed_change(double t) const {
    const double u = std::clamp((t - ts) / d, 0.0, 1.0);
    return bump ? dv * 0.5 * (1 - std::cos(2 * kPi * u)) : dv * 0.5 * (1 - std::cos(kPi * u));
  }
};

// Speed tracking of v0 + events with gain 0.5 1/s, so noise cannot make the
// speed wander off the reference profile.
double tracking_accel(const std::vector<SpeedEvent>& ev, double v0, double t, double v) {
  double a = 0, ref = v0;
  for (const auto& e : ev) {
    a += e.accel(t);
    ref += e.speed_change(t);
  }
  return a + 0.5 * (ref - v);
}

// Ornstein-Uhlenbeck acceleration noise with a 1 s time constant.
class AccelNoise {
 public:
  AccelNoise(double sigma, double h) : sigma_(sigma), h_(h) {}
  double next(Rng& rng) {
    value_ += -value_ * h_ + sigma_ * std::sqrt(2 * h_) * rng.normal();
    return value_;
  }

 private:
  double sigma_, h_, value_ = 0;
};

struct Lateral {
  double base = 0, amp = 0, omega = 0, phase = 0, drift = 0, drift_time = 1;
  double y(double t) const {
    const double u = std::clamp(t / drift_time, 0.0, 1.0);
    return base + amp * std::sin(omega * t + phase) + drift * 0.5 * (1 - std::cos(kPi * u));
  }
  double v(double t) const {
    const double dv = t < drift_time ? drift * 0.5 * kPi / drift_time * std::sin(kPi * t / drift_time) : 0;
    return amp * omega * std::cos(omega * t + phase) + dv;
  }
  double a(double t) const {
    const double da =
        t < drift_time ? drift * 0.5 * kPi * kPi / (drift_time * drift_time) * std::cos(kPi * t / drift_time) : 0;
    return -amp * omega * omega * std::sin(omega * t + phase) + da;
  }
};

struct Kinematics {
  std::vector<double> x, v, a;  // per substep, including the initial state
};

// Acceleration at substep k given the history up to k; the LV law runs first,
// so an SV law may read lv.a[k]. Accelerations are held over the substep.
using AccelLaw = std::function<double(std::size_t k, double t, const Kinematics& lv, const Kinematics& sv)>;

struct Scene {
  double duration = 30;
  double lv_x0 = 0, lv_v0 = 0, sv_x0 = 0, sv_v0 = 0;
  AccelLaw lv_accel, sv_accel;
  Lateral lv_lat, sv_lat;
};

Vehicle make_vehicle(std::string id, const Kinematics& k, const Lateral& lat, double dt, int substeps,
                     std::size_t frames) {
  const auto dims = default_dimensions().at(VehicleClass::CAR);
  Vehicle veh;
  veh.id = std::move(id);
  veh.cls = VehicleClass::CAR;
  veh.length = dims.length;
  veh.width = dims.width;
  veh.first_frame = 0;
  veh.points.reserve(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t s = f * static_cast<std::size_t>(substeps);
    const double t = static_cast<double>(f) * dt;
    veh.points.push_back({t, k.x[s], lat.y(t), k.v[s], lat.v(t), k.a[s], lat.a(t)});
  }
  return veh;
}

SynthPair simulate(const Scene& sc, std::size_t lane, const SynthConfig& cfg) {
  const double h = cfg.dt / cfg.substeps;
  const auto frames = static_cast<std::size_t>(std::floor(sc.duration / cfg.dt + 1e-9)) + 1;
  const std::size_t steps = (frames - 1) * static_cast<std::size_t>(cfg.substeps);
  Kinematics lv, sv;
  for (auto* k : {&lv, &sv}) {
    k->x.reserve(steps + 1);
    k->v.reserve(steps + 1);
    k->a.reserve(steps + 1);
  }
  lv.x.push_back(sc.lv_x0);
  lv.v.push_back(sc.lv_v0);
  sv.x.push_back(sc.sv_x0);
  sv.v.push_back(sc.sv_v0);
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * h;
    const double al = sc.lv_accel(k, t, lv, sv);
    lv.a.push_back(al);
    const double as = sc.sv_accel(k, t, lv, sv);
    sv.a.push_back(as);
    if (k == steps) break;
    lv.x.push_back(lv.x[k] + lv.v[k] * h + 0.5 * al * h * h);
    lv.v.push_back(lv.v[k] + al * h);
    sv.x.push_back(sv.x[k] + sv.v[k] * h + 0.5 * as * h * h);
    sv.v.push_back(sv.v[k] + as * h);
  }
  SynthPair p;
  p.lv = make_vehicle(std::to_string(2 * lane + 1), lv, sc.lv_lat, cfg.dt, cfg.substeps, frames);
  p.sv = make_vehicle(std::to_string(2 * lane + 2), sv, sc.sv_lat, cfg.dt, cfg.substeps, frames);
  return p;
}

double gap_at(std::size_t k, const Kinematics& lv, const Kinematics& sv, double lv_length) {
  return lv.x[k] - lv_length - sv.x[k];
}

Lateral sway(Rng& rng, double base, double amp) {
  Lateral l;
  l.base = base;
  l.amp = amp * rng.uniform();
  l.omega = 2 * kPi / rng.uniform({12, 25});
  l.phase = 2 * kPi * rng.uniform();
  return l;
}

}  // namespace

std::string_view to_string(Label l) {
  for (const auto& [label, name] : kLabelNames)
    if (label == l) return name;
  return "?";
}

std::optional<Label> parse_label(std::string_view s) {
  for (const auto& [label, name] : kLabelNames)
    if (name == s) return label;
  return std::nullopt;
}

void SynthConfig::validate() const {
  auto check = [](Range r, const char* name, bool positive = true) {
    if (!(r.lo <= r.hi) || (positive && !(r.lo > 0)))
      throw ConfigError(std::string("synth.") + name + " must be a positive, non-inverted range");
  };
  if (!(dt > 0) || substeps < 1) throw ConfigError("synth.dt and synth.substeps must be positive");
  check(cruise_kmh, "cruise_kmh");
  check(duration, "duration");
  check(follow_reaction, "follow_reaction");
  check(follow_rel_gain, "follow_rel_gain");
  check(follow_gap_gain, "follow_gap_gain");
  check(follow_event_dv, "follow_event_dv");
  check(overtake_rel_speed, "overtake_rel_speed");
  check(overtake_gap_start, "overtake_gap_start");
  check(overtake_gap_end, "overtake_gap_end");
  check(tailgate_kmh, "tailgate_kmh");
  check(tailgate_gap, "tailgate_gap");
  check(monotone_far_gap, "monotone_far_gap");
  check(monotone_near_gap, "monotone_near_gap");
  check(independent_dv, "independent_dv");
  if (duration.lo < 27) throw ConfigError("synth.duration must allow at least 27 s scenes");
  if (follow_reaction.hi > 1.5) throw ConfigError("synth.follow_reaction above 1.5 s is not following");
  if (follow_event_dv.hi >= 2.5) throw ConfigError("synth.follow_event_dv must stay below 2.5 m/s");
  if (overtake_gap_start.hi > 30) throw ConfigError("synth.overtake_gap_start exceeds the pairing gap");
  if ((overtake_gap_start.lo - overtake_gap_end.hi) / overtake_rel_speed.hi < 5.5)
    throw ConfigError("synth overtaking ranges give manoeuvres shorter than 5.5 s");
  if (!(overtake_lateral_end > 1.5 && overtake_lateral_end < 1.8))
    throw ConfigError("synth.overtake_lateral_end must be in (1.5, 1.8) m");
  if (tailgate_gap.hi >= 2.0) throw ConfigError("synth.tailgate_gap must stay below 2 m");
  if (tailgate_kmh.lo < 40) throw ConfigError("synth.tailgate_kmh must be at least 40 km/h");
  if (monotone_far_gap.lo - monotone_near_gap.hi <= 12)
    throw ConfigError("synth monotone gap ranges must span more than 12 m");
  if (monotone_far_gap.hi > 28) throw ConfigError("synth.monotone_far_gap exceeds 28 m");
  if (independent_dv.hi >= 2.0) throw ConfigError("synth.independent_dv must stay below 2 m/s");
  if (!(independent_separation >= 4)) throw ConfigError("synth.independent_separation must be >= 4 s");
  if (!(accel_noise >= 0 && accel_noise <= 0.05)) throw ConfigError("synth.accel_noise must be in [0, 0.05]");
}

SynthPair gen_pair(Label label, const fd::FDParams& fd, std::uint64_t seed, std::size_t lane,
                   const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(seed);
  const double h = cfg.dt / cfg.substeps;
  const double len = default_dimensions().at(VehicleClass::CAR).length;
  const double base_y = static_cast<double>(lane) * cfg.lane_spacing;
  const double v0 = kmh_to_ms(rng.uniform(cfg.cruise_kmh));
  auto desired = [&fd](double v) { return fd::desirable_gap(fd, ms_to_kmh(std::max(0.0, v))); };

  Scene sc;
  sc.duration = std::round(rng.uniform(cfg.duration) / cfg.dt) * cfg.dt;
  sc.lv_v0 = v0;
  sc.sv_v0 = v0;
  sc.lv_lat = sway(rng, base_y, 0.15);
  sc.sv_lat = sway(rng, base_y + rng.uniform({-0.4, 0.4}), 0.15);
  auto lv_noise = std::make_shared<AccelNoise>(cfg.accel_noise, h);
  auto sv_noise = std::make_shared<AccelNoise>(cfg.accel_noise, h);
  auto rng_lv = std::make_shared<Rng>(seed ^ 0x5bd1e995ULL);
  auto rng_sv = std::make_shared<Rng>(seed ^ 0x27d4eb2fULL);
  double gap0 = 0;

  // Delayed linear response: a(t) = c1 rv(t - tau) + c2 (gap(t - tau) - target(v(t - tau))).
  auto follower = [&](double c1, double c2, double tau, std::function<double(double)> target) -> AccelLaw {
    const auto lag = static_cast<std::size_t>(std::llround(tau / h));
    return [=](std::size_t k, double, const Kinematics& l, const Kinematics& s) {
      const std::size_t j = k >= lag ? k - lag : 0;
      return c1 * (l.v[j] - s.v[j]) + c2 * (gap_at(j, l, s, len) - target(s.v[j])) + sv_noise->next(*rng_sv);
    };
  };
  auto lv_events = [&](std::vector<SpeedEvent> ev) -> AccelLaw {
    const double base = sc.lv_v0;
    return [=](std::size_t k, double t, const Kinematics& l, const Kinematics&) {
      return tracking_accel(ev, base, t, l.v[k]) + lv_noise->next(*rng_lv);
    };
  };

  switch (label) {
    case Label::FOLLOWING: {
      std::vector<SpeedEvent> ev;
      double v = v0;
      const double lo = kmh_to_ms(cfg.cruise_kmh.lo), hi = kmh_to_ms(cfg.cruise_kmh.hi);
      for (double ts = rng.uniform({5, 7});;) {
        SpeedEvent e{ts, rng.uniform({3, 5}), rng.uniform(cfg.follow_event_dv), false};
        if (e.ts + e.d > sc.duration - 9) break;
        if (v + e.dv > hi || (v - e.dv >= lo && rng.uniform() < 0.5)) e.dv = -e.dv;
        v += e.dv;
        ev.push_back(e);
        ts = e.ts + e.d + rng.uniform({3, 6});
      }
      sc.lv_accel = lv_events(ev);
      gap0 = desired(v0) * rng.uniform({0.95, 1.05});
      sc.sv_accel = follower(rng.uniform(cfg.follow_rel_gain), rng.uniform(cfg.follow_gap_gain),
                             rng.uniform(cfg.follow_reaction), desired);
      break;
    }
    case Label::OVERTAKING: {
      const double dv = rng.uniform(cfg.overtake_rel_speed);
      gap0 = rng.uniform(cfg.overtake_gap_start);
      const double gap_end = rng.uniform(cfg.overtake_gap_end);
      sc.duration = std::floor((gap0 - gap_end) / dv / cfg.dt) * cfg.dt;
      sc.sv_v0 = v0 + dv;
      sc.lv_accel = lv_events({});
      // The SV copies the LV accelerations, so the closing speed stays exactly dv.
      sc.sv_accel = [](std::size_t k, double, const Kinematics& l, const Kinematics&) { return l.a[k]; };
      sc.sv_lat = sc.lv_lat;
      sc.sv_lat.base += 0.2;
      sc.sv_lat.drift = cfg.overtake_lateral_end - 0.2;
      sc.sv_lat.drift_time = sc.duration;
      break;
    }
    case Label::TAILGATING: {
      const double v = kmh_to_ms(rng.uniform(cfg.tailgate_kmh));
      sc.lv_v0 = sc.sv_v0 = v;
      const double target = rng.uniform(cfg.tailgate_gap);
      gap0 = target;
      sc.lv_accel = lv_events({});
      sc.sv_accel = follower(0.8, 0.3, 0.3, [target](double) { return target; });
      break;
    }
    case Label::APPROACH_ONLY:
    case Label::DIVERGE_ONLY: {
      const double far = rng.uniform(cfg.monotone_far_gap);
      const double near = rng.uniform(cfg.monotone_near_gap);
      const double base_dv = (far - near) / sc.duration;
      const double period = rng.uniform({8, 15});
      const double phase = 2 * kPi * rng.uniform();
      const double sgn = label == Label::APPROACH_ONLY ? 1.0 : -1.0;
      // Closing speed base_dv (1 + 0.3 sin): never changes sign.
      auto extra = [=](double t) { return sgn * base_dv * (1 + 0.3 * std::sin(2 * kPi * t / period + phase)); };
      auto extra_rate = [=](double t) {
        return sgn * base_dv * 0.3 * 2 * kPi / period * std::cos(2 * kPi * t / period + phase);
      };
      gap0 = label == Label::APPROACH_ONLY ? far : near;
      sc.sv_v0 = v0 + extra(0);
      sc.lv_accel = lv_events({});
      sc.sv_accel = [extra_rate](std::size_t k, double t, const Kinematics& l, const Kinematics&) {
        return l.a[k] + extra_rate(t);
      };
      break;
    }
    case Label::INDEPENDENT: {
      SpeedEvent le{rng.uniform({5, 8}), rng.uniform({3, 4}), rng.sign() * rng.uniform(cfg.independent_dv), true};
      const double sd = rng.uniform({3, 4});
      const double earliest = le.ts + le.d + cfg.independent_separation;
      const double latest = std::max(earliest, sc.duration - 5 - sd);
      SpeedEvent se{rng.uniform({earliest, latest}), sd, rng.sign() * rng.uniform(cfg.independent_dv), true};
      sc.sv_v0 = v0 + rng.uniform({-0.05, 0.05});
      gap0 = desired(v0);
      sc.lv_accel = lv_events({le});
      const double sv_base = sc.sv_v0;
      sc.sv_accel = [se, sv_base, sv_noise, rng_sv](std::size_t k, double t, const Kinematics&,
                                                    const Kinematics& s) {
        return tracking_accel({se}, sv_base, t, s.v[k]) + sv_noise->next(*rng_sv);
      };
      break;
    }
  }
  sc.sv_x0 = 0;
  sc.lv_x0 = gap0 + len;
  auto p = simulate(sc, lane, cfg);
  p.label = label;
  return p;
}

Suite gen_suite(const std::map<Label, std::size_t>& counts, std::uint64_t seed, const fd::FDParams& fd,
                const SynthConfig& cfg) {
  cfg.validate();
  std::vector<Label> plan;
  for (auto l : kAllLabels) {
    const auto it = counts.find(l);
    if (it != counts.end()) plan.insert(plan.end(), it->second, l);
  }
  std::vector<SynthPair> pairs(plan.size());
  parallel_for(plan.size(), [&](std::size_t k) {
    pairs[k] = gen_pair(plan[k], fd, splitmix64(seed ^ splitmix64(k)), k, cfg);
  });
  Suite s;
  s.vehicles.reserve(2 * pairs.size());
  for (auto& p : pairs) {
    s.truth.push_back({p.lv.id, p.sv.id, p.label});
    s.vehicles.push_back(std::move(p.lv));
    s.vehicles.push_back(std::move(p.sv));
  }
  std::sort(s.vehicles.begin(), s.vehicles.end(),
            [](const Vehicle& a, const Vehicle& b) { return id_less(a.id, b.id); });
  return s;
}

// Independent re-check: recomputes gaps and speeds from the raw points.
std::vector<std::string> validate_pair(const Vehicle& lv, const Vehicle& sv, Label label,
                                       const fd::FDParams& fd, double dt) {
  std::vector<std::string> bad;
  if (lv.first_frame != sv.first_frame || lv.points.size() != sv.points.size()) {
    bad.emplace_back("vehicles do not share a time span");
    return bad;
  }
  const std::size_t n = lv.points.size();
  std::vector<double> gap(n), rv(n), lat(n), vs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = lv.points[i];
    const auto& b = sv.points[i];
    gap[i] = a.x_long - lv.length - b.x_long;
    rv[i] = a.v_long - b.v_long;
    lat[i] = b.y_lat - a.y_lat;
    vs[i] = b.v_long;
    const double half = 0.5 * (lv.width + sv.width);
    if (std::abs(lat[i]) >= half) {
      bad.emplace_back("no lateral overlap at t=" + std::to_string(a.t));
      break;
    }
  }
  const auto [gmin_it, gmax_it] = std::minmax_element(gap.begin(), gap.end());
  const double range = *gmax_it - *gmin_it;
  if (*gmin_it <= 0 || *gmax_it > 30) bad.emplace_back("gap outside (0, 30] m");
  if ((static_cast<double>(n) - 1) * dt < 5 - 1e-9) bad.emplace_back("shorter than 5 s");
  auto all = [&](auto pred) {
    for (std::size_t i = 0; i < n; ++i)
      if (!pred(i)) return false;
    return true;
  };
  auto monotone = [&](int dir) {
    for (std::size_t i = 1; i < n; ++i)
      if (dir * (gap[i] - gap[i - 1]) <= 0) return false;
    return true;
  };

  switch (label) {
    case Label::FOLLOWING: {
      if (!all([&](std::size_t i) {
            const double s = 1000.0 * (fd.w_kmh + vs[i] * 3.6) / (fd.w_kmh * fd.jam_density);
            return gap[i] > 0.25 * s && gap[i] < 4.0 * s;
          }))
        bad.emplace_back("gap leaves the FD band");
      if (!all([&](std::size_t i) { return std::abs(rv[i]) < 2.5; })) bad.emplace_back("|rel_vel| >= 2.5 m/s");
      if (!all([&](std::size_t i) { return std::abs(lat[i]) < 1.5; })) bad.emplace_back("|gap_lat| >= 1.5 m");
      if (range > 10) bad.emplace_back("gap range above 10 m");
      // Lag of the best speed-change cross-correlation.
      std::vector<double> al(n - 1), as(n - 1);
      for (std::size_t i = 0; i + 1 < n; ++i) {
        al[i] = lv.points[i + 1].v_long - lv.points[i].v_long;
        as[i] = sv.points[i + 1].v_long - sv.points[i].v_long;
      }
      std::size_t best = 0;
      double best_c = -1e300;
      for (std::size_t lag = 0; lag * dt <= 4.0 + 1e-9; ++lag) {
        double c = 0;
        for (std::size_t i = 0; i + lag < al.size(); ++i) c += al[i] * as[i + lag];
        if (c > best_c) best_c = c, best = lag;
      }
      if (static_cast<double>(best) * dt > 1.5 + 1e-9) bad.emplace_back("speed response lag above 1.5 s");
      break;
    }
    case Label::OVERTAKING:
      if (!all([&](std::size_t i) { return rv[i] < 0; })) bad.emplace_back("SV not faster than LV");
      if (!monotone(-1)) bad.emplace_back("gap not shrinking");
      if (std::abs(lat.back()) <= 1.5) bad.emplace_back("no lateral drift past 1.5 m");
      break;
    case Label::TAILGATING:
      if (!all([&](std::size_t i) { return gap[i] < 2; })) bad.emplace_back("gap not below 2 m");
      if (!all([&](std::size_t i) { return vs[i] * 3.6 >= 40; })) bad.emplace_back("speed below 40 km/h");
      break;
    case Label::APPROACH_ONLY:
    case Label::DIVERGE_ONLY: {
      const int dir = label == Label::APPROACH_ONLY ? -1 : 1;
      if (!monotone(dir)) bad.emplace_back("gap not monotone");
      if (!(range > 10)) bad.emplace_back("gap range not above 10 m");
      if (!all([&](std::size_t i) { return dir * rv[i] > 0; })) bad.emplace_back("rel_vel changes sign");
      break;
    }
    case Label::INDEPENDENT: {
      constexpr double kActive = 0.2;  // m/s^2
      std::vector<double> lt, st;
      for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(lv.points[i].a_long) > kActive) lt.push_back(lv.points[i].t);
        if (std::abs(sv.points[i].a_long) > kActive) st.push_back(sv.points[i].t);
      }
      if (lt.empty() || st.empty()) bad.emplace_back("missing speed event");
      const bool close = std::any_of(lt.begin(), lt.end(), [&](double a) {
        return std::any_of(st.begin(), st.end(), [a](double b) { return std::abs(a - b) <= 2.0; });
      });
      if (close) bad.emplace_back("speed events within 2 s");
      if (range > 10) bad.emplace_back("gap range above 10 m");
      break;
    }
  }
  return bad;
}

}  // namespace lfforge::synth
