#include "lfforge/cli.hpp"

#include "lfforge/config.hpp"
#include "lfforge/csv.hpp"
#include "lfforge/dossier.hpp"
#include "lfforge/evalmod.hpp"
#include "lfforge/fdgap.hpp"
#include "lfforge/filters.hpp"
#include "lfforge/pairing.hpp"
#include "lfforge/parallel.hpp"
#include "lfforge/review.hpp"
#include "lfforge/synthgen.hpp"
#include "lfforge/trajmodel.hpp"
#include "lfforge/wavecorr.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace lfforge::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";
constexpr const char* kTrajectories = "trajectories.csv";
constexpr const char* kRetained = "retained_pairs.csv";
constexpr const char* kFilterSummary = "filter_summary.csv";

struct Context {
  const Options& opts;
  config::RunConfig cfg;
  fs::path out_dir;
  std::ostream& log;
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  std::uint64_t seed = 0;
};

std::string file_hash(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return config::hex64(config::fnv1a(ss.str()));
}

std::string display_path(const Context& ctx, const fs::path& p) {
  const auto rel = p.lexically_relative(ctx.out_dir);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return p.filename().generic_string();
}

fs::path require(Context& ctx, const fs::path& p, const std::string& producer) {
  if (!fs::exists(p))
    throw MissingArtifact("missing input " + p.string() + " (run `lf-forge " + producer + "` first)");
  ctx.inputs.push_back(p);
  return p;
}

void emit(Context& ctx, const fs::path& rel, const std::function<void(std::ostream&)>& writer) {
  const auto path = ctx.out_dir / rel;
  fs::create_directories(path.parent_path());
  csv::write_file_atomic(path, writer);
  ctx.outputs.push_back(path);
}

void emit_json(Context& ctx, const fs::path& rel, const json& doc) {
  emit(ctx, rel, [&](std::ostream& o) { o << doc.dump(2) << '\n'; });
}

std::string fmt(double v) { return csv::format_double(v); }

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : "NA"; }

// p-values to 4 decimals, with anything below 5e-5 shown as 0.
std::string fmt_p(double p) {
  if (std::isnan(p)) return "NA";
  if (p < 5e-5) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", p);
  return buf;
}

std::vector<Vehicle> load_vehicles(Context& ctx) {
  const auto path = require(ctx, ctx.out_dir / kTrajectories, "ingest");
  std::ifstream in(path);
  IngestOptions opt;
  opt.mapping = ColumnMapping::canonical();
  opt.dt = ctx.cfg.dt;
  auto res = ingest(in, opt);
  if (!res.record_errors.empty() || !res.vehicle_errors.empty())
    throw DataError(path.string() + " is not a clean grid-normalized file; re-run ingest");
  return std::move(res.vehicles);
}

filters::PipelineInputs pipeline_inputs(const config::RunConfig& cfg) {
  filters::PipelineInputs in;
  in.thresholds = cfg.thresholds;
  in.fd = cfg.fd;
  in.wavelet = cfg.wavelet;
  in.dt = cfg.dt;
  in.min_duration = cfg.pairing.min_duration;
  return in;
}

std::map<std::string, const Vehicle*> index_vehicles(const std::vector<Vehicle>& vehicles) {
  std::map<std::string, const Vehicle*> m;
  for (const auto& v : vehicles) m[v.id] = &v;
  return m;
}

json span_json(const FrameWindow& w, double dt) {
  return {{"t0", static_cast<double>(w.first) * dt},
          {"t1", static_cast<double>(w.last) * dt},
          {"first_frame", w.first},
          {"last_frame", w.last}};
}

std::vector<review::RetainedEntry> retained_entries(const std::vector<CandidatePair>& pairs) {
  std::vector<review::RetainedEntry> out;
  for (const auto& p : pairs) out.push_back({p.id, p.lv->id, p.sv->id, p.category(), p.window});
  return out;
}

// ---------------------------------------------------------------------------

void cmd_ingest(Context& ctx) {
  if (!ctx.cfg.ingest_source) throw config::SchemaError("/ingest/source", "required for ingest");
  const auto src = *ctx.cfg.ingest_source;
  if (!fs::exists(src)) throw MissingArtifact("missing input " + src.string());
  ctx.inputs.push_back(src);
  std::ifstream in(src);
  const auto res = ingest(in, ctx.cfg.ingest);
  emit(ctx, kTrajectories, [&](std::ostream& o) { write_trajectories_csv(o, res.vehicles); });
  emit(ctx, "ingest_errors.csv", [&](std::ostream& o) {
    csv::write_row(o, {"kind", "line", "vehicle_id", "message"});
    for (const auto& e : res.record_errors) csv::write_row(o, {"record", std::to_string(e.line), "", e.message});
    for (const auto& e : res.vehicle_errors) csv::write_row(o, {"vehicle", "", e.vehicle_id, e.message});
  });
  ctx.log << "ingest: " << res.vehicles.size() << " vehicles, " << res.record_errors.size()
          << " record errors, " << res.vehicle_errors.size() << " vehicle errors\n";
}

void cmd_thresholds(Context& ctx) {
  std::vector<fd::FDParams> params;
  for (auto c : kAllClasses) {
    const auto it = ctx.cfg.fd.find(c);
    if (it == ctx.cfg.fd.end()) throw config::SchemaError("/fd/params", "no parameters for " + std::string(to_string(c)));
    params.push_back(it->second);
  }
  const auto table = fd::gap_threshold_table(params, ctx.cfg.table_speeds_kmh);
  emit(ctx, "thresholds.csv", [&](std::ostream& o) {
    std::vector<std::string> head{"speed_kmph"};
    for (auto c : table.classes) head.emplace_back(to_string(c));
    csv::write_row(o, head);
    for (std::size_t r = 0; r < table.speeds_kmh.size(); ++r) {
      std::vector<std::string> row{fmt(table.speeds_kmh[r])};
      for (Eigen::Index c = 0; c < table.gaps.cols(); ++c) row.push_back(fmt(table.gaps(static_cast<Eigen::Index>(r), c)));
      csv::write_row(o, row);
    }
  });
  emit(ctx, "fd_params.csv", [&](std::ostream& o) {
    csv::write_row(o, {"class", "w_kmh", "jam_density_veh_per_km", "gap_intercept_m", "gap_slope_m_per_kmh"});
    for (const auto& p : params)
      csv::write_row(o, {std::string(to_string(p.cls)), fmt(p.w_kmh), fmt(p.jam_density),
                         fmt(fd::desirable_gap(p, 0.0)), fmt(fd::gap_slope(p))});
  });
  ctx.log << "thresholds: " << table.speeds_kmh.size() << " speeds x " << table.classes.size() << " classes\n";
}

void cmd_pairs(Context& ctx) {
  const auto vehicles = load_vehicles(ctx);
  PairingDiagnostics diag;
  const auto pairs = extract_pairs(vehicles, ctx.cfg.pairing, ctx.cfg.dt, &diag);
  emit(ctx, "pairs.csv", [&](std::ostream& o) {
    csv::write_row(o, {"pair_id", "lv_id", "sv_id", "category", "t0", "t1", "n_samples"});
    for (const auto& p : pairs)
      csv::write_row(o, {p.id, p.lv->id, p.sv->id, p.category(), fmt(p.t0()), fmt(p.t1()),
                         std::to_string(p.samples.size())});
  });
  emit(ctx, "pair_summary.csv", [&](std::ostream& o) {
    csv::write_row(o, {"sv_class", "lv_class", "category", "pairs", "points", "asymmetry", "modelable"});
    for (const auto& s : summarize_pairs(pairs))
      csv::write_row(o, {std::string(to_string(s.sv_class)), std::string(to_string(s.lv_class)), s.label(),
                         std::to_string(s.pairs), std::to_string(s.points), std::string(to_string(s.asym)),
                         s.modelable ? "yes" : "no"});
  });
  ctx.log << "pairs: " << pairs.size() << " base pairs, " << diag.interpenetration_instants
          << " interpenetration instants\n";
}

json ledger_json(const filters::FilterOutcome& out, const Context& ctx) {
  json stages = json::array();
  for (const auto& s : ctx.cfg.stages) stages.push_back(s.name);
  json pairs = json::array();
  for (const auto& p : out.pairs) {
    json trims = json::array();
    for (const auto& t : p.trims)
      trims.push_back({{"stage", t.stage}, {"before", span_json(t.before, ctx.cfg.dt)}, {"after", span_json(t.after, ctx.cfg.dt)}});
    json flags = json::array();
    for (const auto& f : p.flags) flags.push_back({{"t", f.t}, {"reasons", filters::reason_names(f.reasons)}});
    pairs.push_back({{"pair_id", p.pair_id},
                     {"category", p.category},
                     {"status", std::string(filters::to_string(p.status))},
                     {"removed_stage", p.removed_stage.empty() ? json(nullptr) : json(p.removed_stage)},
                     {"removed_reason", p.removed_reason.empty() ? json(nullptr) : json(p.removed_reason)},
                     {"trims", trims},
                     {"flags", flags},
                     {"gap_range", p.gap_range ? json(*p.gap_range) : json(nullptr)},
                     {"sign_change_ratio", p.sign_change_ratio ? json(*p.sign_change_ratio) : json(nullptr)},
                     {"wavelet_matches", p.wavelet_matches ? json(*p.wavelet_matches) : json(nullptr)}});
  }
  return {{"preset", ctx.cfg.preset}, {"stages", stages}, {"pairs", pairs}};
}

void cmd_filter(Context& ctx) {
  const auto vehicles = load_vehicles(ctx);
  const auto pairs = extract_pairs(vehicles, ctx.cfg.pairing, ctx.cfg.dt);
  const auto out = filters::run_pipeline(pairs, ctx.cfg.stages, pipeline_inputs(ctx.cfg));
  emit_json(ctx, "filter_ledger.json", ledger_json(out, ctx));
  emit(ctx, kFilterSummary, [&](std::ostream& o) {
    csv::write_row(o, {"stage", "category", "pairs_in", "pairs_out", "points_in", "points_out", "points_removed_pct"});
    auto row = [&](const std::string& stage, const std::string& cat, const filters::StageCount& c) {
      const double pct = c.points_in ? 100.0 * static_cast<double>(c.points_in - c.points_out) / static_cast<double>(c.points_in) : 0.0;
      csv::write_row(o, {stage, cat, std::to_string(c.pairs_in), std::to_string(c.pairs_out),
                         std::to_string(c.points_in), std::to_string(c.points_out), fmt(pct)});
    };
    for (const auto& s : out.stages) {
      row(s.stage, "ALL", s.total);
      for (const auto& [cat, c] : s.by_category) row(s.stage, cat, c);
    }
  });
  const auto entries = retained_entries(out.survivors);
  emit(ctx, kRetained, [&](std::ostream& o) { review::write_retained_csv(o, entries, ctx.cfg.dt); });
  ctx.log << "filter (" << ctx.cfg.preset << "): " << out.survivors.size() << " of " << pairs.size()
          << " pairs retained\n";
}

void cmd_wavelet(Context& ctx) {
  const auto vehicles = load_vehicles(ctx);
  const auto pairs = extract_pairs(vehicles, ctx.cfg.pairing, ctx.cfg.dt);
  std::vector<wavelet::PairAnalysis> res(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) { res[i] = wavelet::analyze_pair(pairs[i], ctx.cfg.dt, ctx.cfg.wavelet); });
  json items = json::array();
  std::size_t matched = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& r = res[i];
    json m = json::array();
    for (const auto& [a, b] : r.match.pairs) m.push_back({a, b});
    matched += r.match.matched;
    items.push_back({{"pair_id", pairs[i].id},
                     {"category", pairs[i].category()},
                     {"t0", pairs[i].t0()},
                     {"dt", ctx.cfg.dt},
                     {"too_short", r.too_short},
                     {"match_count", r.match.count},
                     {"matched", r.match.matched},
                     {"matches", m},
                     {"lv_peaks_t", r.lv.peak_times()},
                     {"sv_peaks_t", r.sv.peak_times()},
                     {"lv_energy", std::vector<double>(r.lv.energy.data(), r.lv.energy.data() + r.lv.energy.size())},
                     {"sv_energy", std::vector<double>(r.sv.energy.data(), r.sv.energy.data() + r.sv.energy.size())}});
  }
  const auto& w = ctx.cfg.wavelet;
  json cfg = {{"scales", w.scales},           {"max_lag", w.max_lag},
              {"min_matches", w.min_matches}, {"prominence_frac", w.prominence_frac},
              {"symmetric_lag", w.symmetric_lag}, {"signal", std::string(wavelet::to_string(w.signal))}};
  emit_json(ctx, "wavelet.json", {{"config", cfg}, {"pairs", items}});
  ctx.log << "wavelet: " << matched << " of " << pairs.size() << " pairs matched\n";
}

struct CategoryEval {
  VehicleClass sv, lv;
  std::string category;
  eval::KFoldReport before, after;
  eval::Improvement improvement;
  eval::Histogram retained_hist, removed_hist;
};

void cmd_eval(Context& ctx) {
  const auto vehicles = load_vehicles(ctx);
  const auto base = extract_pairs(vehicles, ctx.cfg.pairing, ctx.cfg.dt);
  std::ifstream rin(require(ctx, ctx.out_dir / kRetained, "filter"));
  const auto entries = review::read_retained_csv(rin);
  const auto vidx = index_vehicles(vehicles);
  std::vector<CandidatePair> kept;
  for (const auto& e : entries) {
    const auto lv = vidx.find(e.lv_id), sv = vidx.find(e.sv_id);
    if (lv == vidx.end() || sv == vidx.end()) throw DataError("retained pair " + e.pair_id + " names unknown vehicles");
    auto p = make_pair(*lv->second, *sv->second, e.window, ctx.cfg.dt);
    p.id = e.pair_id;
    kept.push_back(std::move(p));
  }

  const auto& ev = ctx.cfg.eval;
  std::vector<CategoryEval> results;
  std::vector<std::pair<std::string, std::string>> skipped;
  for (const auto& s : summarize_pairs(base)) {
    const auto cat = s.label();
    std::vector<CandidatePair> b, a;
    for (const auto& p : base)
      if (p.category() == cat) b.push_back(p);
    for (const auto& p : kept)
      if (p.category() == cat) a.push_back(p);
    if (b.size() < static_cast<std::size_t>(ev.k) || a.size() < static_cast<std::size_t>(ev.k)) {
      skipped.emplace_back(cat, "fewer pairs than folds (" + std::to_string(b.size()) + " before, " +
                                    std::to_string(a.size()) + " after)");
      continue;
    }
    CategoryEval ce{s.sv_class, s.lv_class, cat, {}, {}, {}, {}, {}};
    const auto db = eval::build_dataset(b, ev.tau, ctx.cfg.dt);
    const auto da = eval::build_dataset(a, ev.tau, ctx.cfg.dt);
    try {
      ce.before = eval::kfold_eval(db, ev.k, ev.seed);
      ce.after = eval::kfold_eval(da, ev.k, ev.seed);
    } catch (const DataError& e) {
      skipped.emplace_back(cat, e.what());
      continue;
    }
    std::size_t base_points = 0, kept_points = 0;
    for (const auto& p : b) base_points += p.samples.size();
    for (const auto& p : a) kept_points += p.samples.size();
    ce.improvement = eval::improvement_report(ce.before.mean_train, ce.after.mean_train,
                                              1.0 - static_cast<double>(kept_points) / static_cast<double>(base_points));

    // Weight diagnostic: base-model weights of rows that survived versus rows that did not.
    const auto fit = eval::fit_ols(db);
    const auto w = eval::wlr_weights(fit.residuals);
    std::map<std::string, FrameWindow> kept_window;
    for (const auto& p : a) kept_window[p.id] = p.window;
    std::vector<double> wk, wr;
    const auto lag = static_cast<std::int64_t>(std::llround(ev.tau / ctx.cfg.dt));
    std::vector<std::int64_t> row_frame;
    for (const auto& p : b)
      for (std::size_t i = 0; i + static_cast<std::size_t>(lag) < p.samples.size(); ++i)
        row_frame.push_back(p.window.first + static_cast<std::int64_t>(i));
    for (Eigen::Index r = 0; r < db.rows(); ++r) {
      const auto& id = db.pair_ids[db.pair_of[static_cast<std::size_t>(r)]];
      const auto it = kept_window.find(id);
      const auto f = row_frame[static_cast<std::size_t>(r)];
      const bool in = it != kept_window.end() && f >= it->second.first && f + lag <= it->second.last;
      (in ? wk : wr).push_back(w(r));
    }
    ce.retained_hist = eval::weight_histogram(Eigen::Map<Eigen::VectorXd>(wk.data(), static_cast<Eigen::Index>(wk.size())));
    ce.removed_hist = eval::weight_histogram(Eigen::Map<Eigen::VectorXd>(wr.data(), static_cast<Eigen::Index>(wr.size())));
    results.push_back(std::move(ce));
  }

  auto metric_cells = [](const eval::Metrics& m) {
    return std::vector<std::string>{std::to_string(m.n), fmt(m.r2), fmt(m.adj_r2), fmt(m.mae), fmt(m.rmse), fmt(m.nrmse)};
  };
  emit(ctx, "eval_metrics.csv", [&](std::ostream& o) {
    csv::write_row(o, {"sv_class", "category", "sample", "split", "n", "r2", "adj_r2", "mae", "rmse", "nrmse"});
    for (const auto& ce : results)
      for (const auto& [label, rep] : {std::pair{"before", &ce.before}, std::pair{"after", &ce.after}})
        for (const auto& [split, m] : {std::pair{"train", &rep->mean_train}, std::pair{"test", &rep->mean_test}}) {
          std::vector<std::string> row{std::string(to_string(ce.sv)), ce.category, label, split};
          for (auto& c : metric_cells(*m)) row.push_back(c);
          csv::write_row(o, row);
        }
  });
  emit(ctx, "eval_improvement.csv", [&](std::ostream& o) {
    csv::write_row(o, {"sv_class", "category", "r2_pct", "adj_r2_pct", "mae_pct", "rmse_pct", "nrmse_pct",
                       "outliers_removed_pct"});
    for (const auto& ce : results) {
      const auto& im = ce.improvement;
      csv::write_row(o, {std::string(to_string(ce.sv)), ce.category, fmt_opt(im.r2), fmt_opt(im.adj_r2),
                         fmt_opt(im.mae), fmt_opt(im.rmse), fmt_opt(im.nrmse), fmt(im.outliers_removed_pct)});
    }
  });
  emit(ctx, "eval_coefficients.csv", [&](std::ostream& o) {
    std::vector<std::string> head{"sv_class", "category", "sample", "selection", "fold", "r2", "adj_r2", "mae", "rmse", "nrmse"};
    for (const char* n : eval::kCoefficientNames) head.push_back(std::string("coef_") + n);
    for (const char* n : eval::kCoefficientNames) head.push_back(std::string("p_") + n);
    csv::write_row(o, head);
    for (const auto& ce : results)
      for (const auto& [label, rep] : {std::pair{"before", &ce.before}, std::pair{"after", &ce.after}})
        for (const auto& [sel, fold] : {std::pair{"best_r2", rep->best_by_r2}, std::pair{"worst_r2", rep->worst_by_r2},
                                        std::pair{"best_nrmse", rep->best_by_nrmse},
                                        std::pair{"worst_nrmse", rep->worst_by_nrmse}}) {
          const auto& f = rep->folds[fold];
          std::vector<std::string> row{std::string(to_string(ce.sv)), ce.category, label, sel, std::to_string(fold + 1)};
          for (auto& c : metric_cells(f.test)) row.push_back(c);
          row.erase(row.begin() + 5);  // n is implied by the fold
          for (int j = 0; j < 4; ++j) row.push_back(fmt(f.fit.beta(j)));
          for (int j = 0; j < 4; ++j) row.push_back(fmt_p(f.fit.p_value(j)));
          csv::write_row(o, row);
        }
  });
  emit(ctx, "weight_histogram.csv", [&](std::ostream& o) {
    csv::write_row(o, {"category", "set", "bin_lo", "bin_hi", "count"});
    for (const auto& ce : results)
      for (const auto& [set, h] : {std::pair{"retained", &ce.retained_hist}, std::pair{"removed", &ce.removed_hist}})
        for (std::size_t i = 0; i < h->counts.size(); ++i)
          csv::write_row(o, {ce.category, set, fmt(static_cast<double>(i) * h->bin_width),
                             i + 1 == h->counts.size() ? "inf" : fmt(static_cast<double>(i + 1) * h->bin_width),
                             std::to_string(h->counts[i])});
  });
  emit(ctx, "eval_skipped.csv", [&](std::ostream& o) {
    csv::write_row(o, {"category", "reason"});
    for (const auto& [c, r] : skipped) csv::write_row(o, {c, r});
  });
  ctx.log << "eval: " << results.size() << " categories evaluated, " << skipped.size() << " skipped\n";
}

void cmd_dossier(Context& ctx) {
  const auto vehicles = load_vehicles(ctx);
  const auto pairs = extract_pairs(vehicles, ctx.cfg.pairing, ctx.cfg.dt);
  const auto out = filters::run_pipeline(pairs, ctx.cfg.stages, pipeline_inputs(ctx.cfg));
  std::map<std::string, const CandidatePair*> survivors;
  for (const auto& p : out.survivors) survivors[p.id] = &p;

  const auto dir = ctx.out_dir / "dossiers";
  if (fs::exists(dir))
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".json") fs::remove(e.path());

  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (ctx.opts.all || dossier::is_flagged(out.pairs[i])) chosen.push_back(i);
  std::vector<json> docs(chosen.size());
  parallel_for(chosen.size(), [&](std::size_t k) {
    const auto i = chosen[k];
    const auto s = survivors.find(pairs[i].id);
    dossier::DossierInputs in{&pairs[i], &out.pairs[i], s == survivors.end() ? nullptr : s->second,
                              ctx.cfg.dt, ctx.cfg.wavelet, ctx.cfg.oblique_reference_speed};
    docs[k] = dossier::build_dossier(in);
  });
  json index = json::array();
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    const auto i = chosen[k];
    const std::string file = pairs[i].id + ".json";
    emit_json(ctx, fs::path("dossiers") / file, docs[k]);
    index.push_back({{"pair_id", pairs[i].id},
                     {"category", pairs[i].category()},
                     {"status", std::string(filters::to_string(out.pairs[i].status))},
                     {"flag_count", out.pairs[i].flags.size()},
                     {"file", file}});
  }
  emit_json(ctx, fs::path("dossiers") / "index.json", index);
  ctx.log << "dossier: " << chosen.size() << " of " << pairs.size() << " pairs exported\n";
}

void cmd_review_apply(Context& ctx) {
  if (!ctx.opts.decisions) throw config::SchemaError("", "review apply needs --decisions <file>");
  const auto dpath = *ctx.opts.decisions;
  if (!fs::exists(dpath)) throw MissingArtifact("missing decisions file " + dpath.string());
  ctx.inputs.push_back(dpath);
  const auto vehicles = load_vehicles(ctx);
  const auto pairs = extract_pairs(vehicles, ctx.cfg.pairing, ctx.cfg.dt);
  std::map<std::string, FrameWindow> base_windows;
  for (const auto& p : pairs) base_windows[p.id] = p.window;

  json doc;
  {
    std::ifstream in(dpath);
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw config::SchemaError("", std::string("decisions are not valid JSON: ") + e.what());
    }
  }
  const auto decisions = review::parse_decisions(doc, base_windows, ctx.cfg.dt);
  std::ifstream rin(require(ctx, ctx.out_dir / kRetained, "filter"));
  auto entries = review::read_retained_csv(rin);
  rin.close();
  const auto before = entries.size();
  const auto res = review::apply(std::move(entries), decisions, ctx.cfg.dt, ctx.cfg.pairing.min_duration);
  emit(ctx, kRetained, [&](std::ostream& o) { review::write_retained_csv(o, res.retained, ctx.cfg.dt); });
  json log = json::array();
  for (const auto& l : res.log)
    log.push_back({{"pair_id", l.pair_id}, {"action", l.action}, {"outcome", l.outcome}, {"note", l.note}});
  emit_json(ctx, "review_log.json", log);
  ctx.log << "review apply: " << decisions.size() << " decisions, retained " << before << " -> "
          << res.retained.size() << " pairs\n";
}

void cmd_synth(Context& ctx) {
  const auto& s = ctx.cfg.synth;
  const auto fd_it = ctx.cfg.fd.find(VehicleClass::CAR);
  const auto suite = synth::gen_suite(s.counts, ctx.seed, fd_it->second, s.generator);
  emit(ctx, "synth_trajectories.csv", [&](std::ostream& o) { write_trajectories_csv(o, suite.vehicles); });
  json labels = json::array();
  const auto vidx = index_vehicles(suite.vehicles);
  std::size_t invalid = 0;
  for (const auto& g : suite.truth) {
    labels.push_back({{"lv_id", g.lv_id}, {"sv_id", g.sv_id}, {"label", std::string(synth::to_string(g.label))}});
    invalid += !synth::validate_pair(*vidx.at(g.lv_id), *vidx.at(g.sv_id), g.label, fd_it->second, ctx.cfg.dt).empty();
  }
  emit_json(ctx, "synth_labels.json", labels);
  ctx.log << "synth: " << suite.truth.size() << " pairs, " << invalid << " failed validation\n";
  if (invalid) throw DataError(std::to_string(invalid) + " generated pairs violate their label constraints");
}

std::string csv_as_markdown(const fs::path& p) {
  std::ifstream in(p);
  csv::Reader r(in);
  std::ostringstream md;
  const auto& h = r.header();
  md << "|";
  for (const auto& c : h) md << ' ' << c << " |";
  md << "\n|";
  for (std::size_t i = 0; i < h.size(); ++i) md << " --- |";
  md << '\n';
  std::vector<std::string> f;
  while (r.next(f)) {
    md << "|";
    for (const auto& c : f) md << ' ' << c << " |";
    md << '\n';
  }
  return md.str();
}

void cmd_report(Context& ctx) {
  require(ctx, ctx.out_dir / kFilterSummary, "filter");
  const std::vector<std::pair<std::string, std::string>> tables = {
      {"thresholds.csv", "Desirable gap by speed and class (m)"},
      {"pair_summary.csv", "Base leader-follower pairs"},
      {kFilterSummary, "Filtering stages"},
      {"eval_metrics.csv", "Regression performance (5-fold means)"},
      {"eval_improvement.csv", "Improvement after filtering (%)"},
      {"eval_coefficients.csv", "Best and worst folds"},
  };
  std::ostringstream md;
  md << "# lf-forge report\n\n";
  md << "- config hash: `" << config::config_hash(ctx.cfg.document) << "`\n";
  md << "- preset: `" << ctx.cfg.preset << "`\n";
  md << "- seed: " << ctx.seed << "\n\n";
  for (const auto& [file, title] : tables) {
    const auto p = ctx.out_dir / file;
    if (!fs::exists(p)) continue;
    ctx.inputs.push_back(p);
    md << "## " << title << "\n\nSource: [" << file << "](" << file << ")\n\n" << csv_as_markdown(p) << '\n';
  }
  md << "## Artifacts\n\n";
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(ctx.out_dir)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".csv" || ext == ".json") && e.path().filename() != "report.md")
      names.insert(e.path().filename().generic_string());
  }
  if (fs::exists(ctx.out_dir / "dossiers")) names.insert("dossiers/index.json");
  for (const auto& n : names) md << "- [" << n << "](" << n << ")\n";
  const auto text = md.str();
  emit(ctx, "report.md", [&](std::ostream& o) { o << text; });
  ctx.log << "report: " << (ctx.out_dir / "report.md").string() << '\n';
}

void write_manifest(Context& ctx, const std::string& command) {
  json inputs = json::array(), outputs = json::array();
  for (const auto& p : ctx.inputs) inputs.push_back({{"path", display_path(ctx, p)}, {"fnv1a", file_hash(p)}});
  for (const auto& p : ctx.outputs) outputs.push_back({{"path", display_path(ctx, p)}, {"fnv1a", file_hash(p)}});
  json m = {{"tool", "lf-forge"},
            {"version", kVersion},
            {"subcommand", command},
            {"config_hash", config::config_hash(ctx.cfg.document)},
            {"seed", ctx.seed},
            {"preset", ctx.cfg.preset},
            {"inputs", inputs},
            {"outputs", outputs}};
  std::string name = command;
  std::replace(name.begin(), name.end(), '-', '_');
  const auto path = ctx.out_dir / ("manifest_" + name + ".json");
  csv::write_file_atomic(path, [&](std::ostream& o) { o << m.dump(2) << '\n'; });
}

const std::map<std::string, void (*)(Context&)>& commands() {
  static const std::map<std::string, void (*)(Context&)> m = {
      {"ingest", cmd_ingest},   {"thresholds", cmd_thresholds}, {"pairs", cmd_pairs},
      {"filter", cmd_filter},   {"wavelet", cmd_wavelet},       {"eval", cmd_eval},
      {"dossier", cmd_dossier}, {"review-apply", cmd_review_apply}, {"synth", cmd_synth},
      {"report", cmd_report}};
  return m;
}

}  // namespace

int run(const Options& options, std::ostream& out, std::ostream& err) {
  const auto cmd = commands().find(options.command);
  if (cmd == commands().end()) {
    err << "error: unknown subcommand '" << options.command << "'\n";
    return kExitConfig;
  }
  try {
    auto cfg = config::load(options.config);
    if (options.preset) {
      try {
        cfg.use_preset(*options.preset);
      } catch (const ConfigError& e) {
        throw config::SchemaError("/filter/preset", e.what());
      }
    }
    if (options.seed) cfg.eval.seed = cfg.synth.seed = *options.seed;
    Context ctx{options, std::move(cfg), {}, out, {}, {}, 0};
    ctx.out_dir = options.out ? *options.out : ctx.cfg.output_dir;
    ctx.seed = options.command == "synth" ? ctx.cfg.synth.seed : ctx.cfg.eval.seed;
    fs::create_directories(ctx.out_dir);
    cmd->second(ctx);
    write_manifest(ctx, options.command);
    return kExitOk;
  } catch (const config::SchemaError& e) {
    err << "config error at " << e.what() << '\n';
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const MissingArtifact& e) {
    err << "error: " << e.what() << '\n';
    return kExitMissingInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace lfforge::cli
