#include "lfforge/config.hpp"

#include "lfforge/json_schema.hpp"
#include "lfforge_schemas.hpp"

#include <cstdio>
#include <fstream>

namespace lfforge::config {

namespace {

using nlohmann::json;

template <typename T>
void read(const json& obj, const char* key, T& target) {
  if (auto it = obj.find(key); it != obj.end()) target = it->get<T>();
}

template <typename T>
void read(const json& obj, const char* key, std::optional<T>& target) {
  if (auto it = obj.find(key); it != obj.end()) target = it->get<T>();
}

// Runs a semantic check and reports its failure at `path`.
template <typename Fn>
void at_path(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const SchemaError&) {
    throw;
  } catch (const ConfigError& e) {
    throw SchemaError(path, e.what());
  }
}

filters::ThresholdConfig read_thresholds(const json& obj, filters::ThresholdConfig cfg, const std::string& path) {
  read(obj, "rel_vel_abs_max", cfg.rel_vel_abs_max);
  read(obj, "lat_gap_abs_max", cfg.lat_gap_abs_max);
  read(obj, "tailgate_gap", cfg.tailgate_gap);
  read(obj, "far_gap", cfg.far_gap);
  read(obj, "gap_range_max", cfg.gap_range_max);
  read(obj, "sign_change_ratio_min", cfg.sign_change_ratio_min);
  read(obj, "pct_low", cfg.pct_low);
  read(obj, "pct_high", cfg.pct_high);
  read(obj, "speed_bin_width_kmh", cfg.speed_bin_width_kmh);
  read(obj, "gap_bin_width", cfg.gap_bin_width);
  read(obj, "fd_band_low", cfg.fd_band_low);
  read(obj, "fd_band_high", cfg.fd_band_high);
  read(obj, "high_speed_kmh", cfg.high_speed_kmh);
  read(obj, "moderate_low_kmh", cfg.moderate_low_kmh);
  read(obj, "moderate_high_kmh", cfg.moderate_high_kmh);
  if (auto it = obj.find("stage1_gate"); it != obj.end())
    at_path(path + "/stage1_gate", [&] { cfg.stage1_gate = filters::parse_reasons(it->get<std::string>()); });
  at_path(path, [&] { cfg.validate(); });
  return cfg;
}

bool valid_category(const std::string& key) {
  const auto dash = key.find('-');
  if (dash == std::string::npos) return false;
  return parse_vehicle_class(std::string_view(key).substr(0, dash)) &&
         parse_vehicle_class(std::string_view(key).substr(dash + 1));
}

synth::Range read_range(const json& v) { return {v.at(0).get<double>(), v.at(1).get<double>()}; }

}  // namespace

void RunConfig::use_preset(std::string_view name) {
  preset = std::string(name);
  stages = filters::preset(name);
}

const json& runconfig_schema() {
  static const json s = json::parse(schemas::kRunConfig);
  return s;
}
const json& pair_dossier_schema() {
  static const json s = json::parse(schemas::kPairDossier);
  return s;
}
const json& review_decision_schema() {
  static const json s = json::parse(schemas::kReviewDecision);
  return s;
}

RunConfig from_json(const json& doc, const std::filesystem::path& base_dir) {
  if (const auto violations = schema::validate(doc, runconfig_schema()); !violations.empty())
    throw SchemaError(violations.front().path, violations.front().message);

  RunConfig c;
  c.document = doc;
  read(doc, "dt", c.dt);
  c.ingest.dt = c.dt;
  c.synth.generator.dt = c.dt;
  if (auto it = doc.find("output_dir"); it != doc.end()) c.output_dir = (base_dir / it->get<std::string>()).lexically_normal();
  else c.output_dir = (base_dir / "out").lexically_normal();

  if (auto in = doc.find("ingest"); in != doc.end()) {
    if (auto it = in->find("source"); it != in->end()) c.ingest_source = (base_dir / it->get<std::string>()).lexically_normal();
    if (auto m = in->find("mapping"); m != in->end()) {
      auto& map = c.ingest.mapping;
      read(*m, "vehicle_id", map.id);
      read(*m, "class", map.cls);
      read(*m, "t", map.t);
      read(*m, "x_long", map.x_long);
      read(*m, "y_lat", map.y_lat);
      read(*m, "v_long", map.v_long);
      read(*m, "v_lat", map.v_lat);
      read(*m, "a_long", map.a_long);
      read(*m, "a_lat", map.a_lat);
      read(*m, "length", map.length);
      read(*m, "width", map.width);
    }
    if (auto d = in->find("default_dimensions"); d != in->end())
      for (const auto& [cls, dims] : d->items())
        c.ingest.default_dims[*parse_vehicle_class(cls)] = {dims.at("length").get<double>(),
                                                             dims.at("width").get<double>()};
  }

  if (auto f = doc.find("fd"); f != doc.end()) {
    if (auto p = f->find("params"); p != f->end())
      for (const auto& [cls, v] : p->items()) {
        const auto vc = *parse_vehicle_class(cls);
        fd::FDParams params{vc, v.at("w_kmh").get<double>(), v.at("jam_density").get<double>()};
        at_path("/fd/params/" + cls, [&] { params.validate(); });
        c.fd[vc] = params;
      }
    read(*f, "table_speeds_kmh", c.table_speeds_kmh);
  }
  if (c.table_speeds_kmh.empty()) c.table_speeds_kmh = fd::reference_gap_table().speeds_kmh;

  if (auto p = doc.find("pairing"); p != doc.end()) {
    read(*p, "max_gap", c.pairing.max_gap);
    read(*p, "require_overlap", c.pairing.require_overlap);
    read(*p, "min_duration", c.pairing.min_duration);
  }
  at_path("/pairing", [&] { c.pairing.validate(); });

  if (auto t = doc.find("thresholds"); t != doc.end()) {
    if (auto d = t->find("defaults"); d != t->end())
      c.thresholds.defaults = read_thresholds(*d, {}, "/thresholds/defaults");
    if (auto pc = t->find("per_category"); pc != t->end())
      for (const auto& [key, v] : pc->items()) {
        const std::string path = "/thresholds/per_category/" + key;
        if (!valid_category(key)) throw SchemaError(path, "category must look like CAR-TW");
        c.thresholds.per_category[key] = read_thresholds(v, c.thresholds.defaults, path);
      }
  }

  if (auto w = doc.find("wavelet"); w != doc.end()) {
    read(*w, "scales", c.wavelet.scales);
    read(*w, "max_lag", c.wavelet.max_lag);
    read(*w, "min_matches", c.wavelet.min_matches);
    read(*w, "prominence_frac", c.wavelet.prominence_frac);
    read(*w, "symmetric_lag", c.wavelet.symmetric_lag);
    if (auto it = w->find("signal"); it != w->end()) c.wavelet.signal = wavelet::parse_signal(it->get<std::string>());
  }
  at_path("/wavelet", [&] { c.wavelet.validate(); });

  c.use_preset("approach4");
  if (auto f = doc.find("filter"); f != doc.end()) {
    if (auto it = f->find("preset"); it != f->end()) c.use_preset(it->get<std::string>());
    if (auto it = f->find("stages"); it != f->end()) {
      c.preset = "custom";
      c.stages.clear();
      for (std::size_t i = 0; i < it->size(); ++i)
        at_path("/filter/stages/" + std::to_string(i),
                [&] { c.stages.push_back(filters::parse_stage((*it)[i].get<std::string>())); });
    }
  }

  if (auto e = doc.find("eval"); e != doc.end()) {
    read(*e, "tau", c.eval.tau);
    read(*e, "k", c.eval.k);
    read(*e, "seed", c.eval.seed);
  }
  {
    const double steps = c.eval.tau / c.dt;
    if (std::abs(steps - std::round(steps)) > 1e-9) throw SchemaError("/eval/tau", "tau must be a multiple of dt");
  }

  for (auto l : synth::kAllLabels) c.synth.counts[l] = 50;
  if (auto s = doc.find("synth"); s != doc.end()) {
    read(*s, "seed", c.synth.seed);
    if (auto counts = s->find("counts"); counts != s->end())
      for (const auto& [label, n] : counts->items()) c.synth.counts[*synth::parse_label(label)] = n.get<std::size_t>();
    if (auto it = s->find("cruise_kmh"); it != s->end()) c.synth.generator.cruise_kmh = read_range(*it);
    if (auto it = s->find("duration"); it != s->end()) c.synth.generator.duration = read_range(*it);
    read(*s, "accel_noise", c.synth.generator.accel_noise);
  }
  at_path("/synth", [&] { c.synth.generator.validate(); });

  if (auto d = doc.find("dossier"); d != doc.end()) read(*d, "oblique_reference_speed", c.oblique_reference_speed);
  return c;
}

RunConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("", "cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("config is not valid JSON: ") + e.what());
  }
  return from_json(doc, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string config_hash(const json& doc) { return hex64(fnv1a(doc.dump())); }

}  // namespace lfforge::config
