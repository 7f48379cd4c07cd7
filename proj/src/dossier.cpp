#include "lfforge/dossier.hpp"

#include "lfforge/stats.hpp"

namespace lfforge::dossier {

namespace {

using nlohmann::json;

json to_array(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json span_json(const FrameWindow& w, double dt) {
  return {{"t0", static_cast<double>(w.first) * dt},
          {"t1", static_cast<double>(w.last) * dt},
          {"first_frame", w.first},
          {"last_frame", w.last}};
}

json five_number(const Eigen::VectorXd& v) {
  const auto f = stats::five_number_summary(v);
  return {{"min", f.min}, {"q1", f.q1}, {"median", f.median}, {"q3", f.q3}, {"max", f.max}};
}

template <typename T>
json or_null(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

bool is_flagged(const filters::PairLedger& ledger) {
  return !ledger.flags.empty() || ledger.status != filters::PairStatus::Retained;
}

json build_dossier(const DossierInputs& in) {
  const auto& pair = *in.base;
  const auto& led = *in.ledger;
  const auto& s = pair.samples;
  const auto n = static_cast<Eigen::Index>(s.size());
  if (n == 0) throw DataError("pair " + pair.id + " has no samples");

  const Eigen::VectorXd t = column(s, &InteractionSample::t);
  const Eigen::VectorXd lv_x = column(s, &InteractionSample::lv_x);
  const Eigen::VectorXd sv_x = column(s, &InteractionSample::sv_x);
  const Eigen::VectorXd sv_speed = column(s, &InteractionSample::sv_speed);
  Eigen::VectorXd lv_y(n), sv_y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lv_y(i) = pair.lv->at_frame(pair.window.first + i).y_lat;
    sv_y(i) = pair.sv->at_frame(pair.window.first + i).y_lat;
  }

  json d;
  d["schema_version"] = 1;
  d["pair_id"] = pair.id;
  d["lv_id"] = pair.lv->id;
  d["sv_id"] = pair.sv->id;
  d["category"] = pair.category();
  d["dt"] = in.dt;
  d["window"] = span_json(pair.window, in.dt);
  d["retained_window"] = in.retained ? span_json(in.retained->window, in.dt) : json(nullptr);

  json trail = json::array();
  for (const auto& tr : led.trims)
    trail.push_back({{"stage", tr.stage},
                     {"event", "trim"},
                     {"before", span_json(tr.before, in.dt)},
                     {"after", span_json(tr.after, in.dt)}});
  if (led.status == filters::PairStatus::Removed)
    trail.push_back({{"stage", led.removed_stage}, {"event", "remove"}, {"reason", led.removed_reason}});
  d["verdict"] = {{"status", std::string(filters::to_string(led.status))},
                  {"removed_stage", led.removed_stage.empty() ? json(nullptr) : json(led.removed_stage)},
                  {"removed_reason", led.removed_reason.empty() ? json(nullptr) : json(led.removed_reason)},
                  {"gap_range", or_null(led.gap_range)},
                  {"sign_change_ratio", or_null(led.sign_change_ratio)},
                  {"wavelet_matches", or_null(led.wavelet_matches)},
                  {"trail", trail}};

  json series;
  series["t"] = to_array(t);
  series["gap_long"] = to_array(column(s, &InteractionSample::gap_long));
  series["gap_lat"] = to_array(column(s, &InteractionSample::gap_lat));
  series["rel_vel"] = to_array(column(s, &InteractionSample::rel_vel));
  series["sv_speed"] = to_array(sv_speed);
  series["lv_speed"] = to_array(column(s, &InteractionSample::lv_speed));
  series["sv_accel"] = to_array(column(s, &InteractionSample::sv_accel));
  series["lv_x"] = to_array(lv_x);
  series["sv_x"] = to_array(sv_x);
  series["lv_y"] = to_array(lv_y);
  series["sv_y"] = to_array(sv_y);
  d["series"] = std::move(series);

  const double v0 = in.oblique_reference_speed.value_or(sv_speed.mean());
  const auto wa = wavelet::analyze_pair(pair, in.dt, in.wavelet);
  json matches = json::array();
  for (const auto& [a, b] : wa.match.pairs) matches.push_back({a, b});
  d["derived"] = {{"oblique_reference_speed", v0},
                  {"lv_oblique", to_array(oblique_series(lv_x, t, v0, t(0)).matrix())},
                  {"sv_oblique", to_array(oblique_series(sv_x, t, v0, t(0)).matrix())},
                  {"lv_energy", to_array(wa.lv.energy)},
                  {"sv_energy", to_array(wa.sv.energy)},
                  {"lv_peaks_t", wa.lv.peak_times()},
                  {"sv_peaks_t", wa.sv.peak_times()},
                  {"wavelet_pairs", matches},
                  {"wavelet_too_short", wa.too_short}};

  d["summaries"] = {{"rel_vel", five_number(column(s, &InteractionSample::rel_vel))},
                    {"gap_long", five_number(column(s, &InteractionSample::gap_long))},
                    {"gap_lat", five_number(column(s, &InteractionSample::gap_lat))},
                    {"sv_speed", five_number(sv_speed)}};

  json flags = json::array();
  for (const auto& f : led.flags) flags.push_back({{"t", f.t}, {"reasons", filters::reason_names(f.reasons)}});
  d["flags"] = std::move(flags);
  return d;
}

}  // namespace lfforge::dossier
