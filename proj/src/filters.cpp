#include "lfforge/filters.hpp"

#include "lfforge/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace lfforge::filters {

namespace {

constexpr std::pair<Reason, std::string_view> kReasonNames[] = {
    {GAP_BELOW_P5, "GAP_BELOW_P5"},
    {GAP_ABOVE_P95, "GAP_ABOVE_P95"},
    {SPEED_ABOVE_WHISKER, "SPEED_ABOVE_WHISKER"},
    {SPEED_BELOW_WHISKER, "SPEED_BELOW_WHISKER"},
    {REL_VEL_EXCESS, "REL_VEL_EXCESS"},
    {LAT_GAP_EXCESS, "LAT_GAP_EXCESS"},
    {TAILGATE, "TAILGATE"},
    {FAR_GAP, "FAR_GAP"},
    {FD_BAND, "FD_BAND"},
};

long bin_of(double value, double width) { return static_cast<long>(std::floor(value / width)); }

std::map<long, BinPercentiles> binned_percentiles(const std::vector<double>& keys,
                                                  const std::vector<double>& values, double width,
                                                  double pct_low, double pct_high) {
  std::map<long, std::vector<double>> bins;
  for (std::size_t i = 0; i < keys.size(); ++i) bins[bin_of(keys[i], width)].push_back(values[i]);
  std::map<long, BinPercentiles> out;
  for (auto& [b, vals] : bins) {
    const auto sorted = stats::sorted_copy(stats::to_vector(vals));
    out[b] = {stats::percentile_sorted(sorted, pct_low), stats::percentile_sorted(sorted, pct_high),
              vals.size()};
  }
  return out;
}

std::size_t count_points(const std::vector<CandidatePair>& pairs, const std::vector<std::size_t>& idx) {
  std::size_t n = 0;
  for (auto i : idx) n += pairs[i].samples.size();
  return n;
}

}  // namespace

std::vector<std::string> reason_names(ReasonMask mask) {
  std::vector<std::string> out;
  for (const auto& [bit, name] : kReasonNames)
    if (mask & bit) out.emplace_back(name);
  return out;
}

ReasonMask parse_reasons(std::string_view spec) {
  if (spec == "all") return kAllReasons;
  if (spec == "percentile") return kPercentileReasons;
  if (spec == "kinematic") return kKinematicReasons;
  if (spec == "fd") return FD_BAND;
  ReasonMask mask = 0;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const auto end = std::min(spec.find('+', start), spec.size());
    const auto token = spec.substr(start, end - start);
    bool found = false;
    for (const auto& [bit, name] : kReasonNames)
      if (name == token) {
        mask |= bit;
        found = true;
      }
    if (!found) throw ConfigError("unknown stage-1 reason '" + std::string(token) + "'");
    start = end + 1;
  }
  return mask;
}

void ThresholdConfig::validate() const {
  if (!(0 < pct_low && pct_low < pct_high && pct_high < 100))
    throw ConfigError("thresholds require 0 < pct_low < pct_high < 100");
  for (double v : {rel_vel_abs_max, lat_gap_abs_max, tailgate_gap, far_gap, gap_range_max,
                   speed_bin_width_kmh, fd_band_high})
    if (!(v > 0)) throw ConfigError("threshold lengths and speeds must be positive");
  if (gap_bin_width && !(*gap_bin_width > 0)) throw ConfigError("gap_bin_width must be positive");
  if (!(fd_band_low >= 0 && fd_band_low < fd_band_high)) throw ConfigError("invalid fd_band");
  if (!(sign_change_ratio_min >= 0 && sign_change_ratio_min <= 1))
    throw ConfigError("sign_change_ratio_min must be in [0, 1]");
}

const ThresholdConfig& ThresholdSet::for_category(const std::string& category) const {
  const auto it = per_category.find(category);
  return it == per_category.end() ? defaults : it->second;
}

long CategoryStats::speed_bin(double speed_kmh) const { return bin_of(speed_kmh, speed_bin_width_kmh); }
long CategoryStats::gap_bin(double gap) const { return bin_of(gap, gap_bin_width); }

CategoryStats category_stats(std::span<const InteractionSample> samples, const ThresholdConfig& cfg,
                             double gap_bin_width) {
  if (samples.size() < 2) throw DataError("category statistics need at least two samples");
  if (!(gap_bin_width > 0)) throw ConfigError("gap bin width must be positive");
  std::vector<double> speed(samples.size()), gap(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    speed[i] = ms_to_kmh(samples[i].sv_speed);
    gap[i] = samples[i].gap_long;
  }
  CategoryStats s;
  s.speed_bin_width_kmh = cfg.speed_bin_width_kmh;
  s.gap_bin_width = gap_bin_width;
  s.speed_kmh = stats::five_number_summary(stats::to_vector(speed));
  s.speed_whiskers = stats::tukey_whiskers(s.speed_kmh);
  s.gap = stats::five_number_summary(stats::to_vector(gap));
  s.gap_whiskers = stats::tukey_whiskers(s.gap);
  s.gap_by_speed_bin = binned_percentiles(speed, gap, cfg.speed_bin_width_kmh, cfg.pct_low, cfg.pct_high);
  s.speed_by_gap_bin = binned_percentiles(gap, speed, gap_bin_width, cfg.pct_low, cfg.pct_high);
  return s;
}

std::vector<ReasonMask> flag_stage1(const CandidatePair& pair, const CategoryStats& stats,
                                    const ThresholdConfig& cfg, const fd::FDParams& sv_fd) {
  const double high_speed = cfg.high_speed_kmh.value_or(stats.speed_kmh.q3);
  const double moderate_lo = cfg.moderate_low_kmh.value_or(stats.speed_kmh.q1);
  const double moderate_hi = cfg.moderate_high_kmh.value_or(stats.speed_kmh.q3);
  std::vector<ReasonMask> out(pair.samples.size(), 0);
  for (std::size_t i = 0; i < pair.samples.size(); ++i) {
    const auto& s = pair.samples[i];
    const double v = ms_to_kmh(s.sv_speed);
    ReasonMask m = 0;
    if (auto it = stats.gap_by_speed_bin.find(stats.speed_bin(v)); it != stats.gap_by_speed_bin.end()) {
      if (s.gap_long < it->second.low) m |= GAP_BELOW_P5;
      if (s.gap_long > it->second.high) m |= GAP_ABOVE_P95;
    }
    if (v > stats.speed_whiskers.upper) m |= SPEED_ABOVE_WHISKER;
    if (v < stats.speed_whiskers.lower) m |= SPEED_BELOW_WHISKER;
    if (std::abs(s.rel_vel) > cfg.rel_vel_abs_max) m |= REL_VEL_EXCESS;
    if (std::abs(s.gap_lat) > cfg.lat_gap_abs_max) m |= LAT_GAP_EXCESS;
    if (s.gap_long < cfg.tailgate_gap && v > high_speed) m |= TAILGATE;
    if (s.gap_long > cfg.far_gap && v >= moderate_lo && v <= moderate_hi) m |= FAR_GAP;
    const double desired = fd::desirable_gap(sv_fd, std::max(0.0, v));
    if (s.gap_long < cfg.fd_band_low * desired || s.gap_long > cfg.fd_band_high * desired)
      m |= FD_BAND;
    out[i] = m;
  }
  return out;
}

TrimResult trim_pair(const CandidatePair& pair, const std::vector<bool>& flagged,
                     double min_duration, double dt) {
  const std::size_t n = pair.samples.size();
  if (flagged.size() != n) throw std::invalid_argument("flag vector does not match pair length");
  TrimResult r;
  std::size_t first = 0;
  while (first < n && flagged[first]) ++first;
  std::size_t end = n;
  while (end > first && flagged[end - 1]) --end;
  r.removed_front = first;
  r.removed_back = n - end;
  if (end <= first || static_cast<double>(end - first - 1) * dt < min_duration - 1e-9) return r;
  CandidatePair out;
  out.id = pair.id;
  out.lv = pair.lv;
  out.sv = pair.sv;
  out.window = {pair.window.first + static_cast<std::int64_t>(first),
                pair.window.first + static_cast<std::int64_t>(end) - 1};
  out.samples.assign(pair.samples.begin() + static_cast<std::ptrdiff_t>(first),
                     pair.samples.begin() + static_cast<std::ptrdiff_t>(end));
  r.pair = std::move(out);
  return r;
}

double gap_range(const CandidatePair& pair) {
  return gap_range(column(pair.samples, &InteractionSample::gap_long));
}

double sign_change_ratio(const CandidatePair& pair) {
  return sign_change_ratio(column(pair.samples, &InteractionSample::rel_vel));
}

Stage2Verdict flag_stage2(const CandidatePair& pair, const ThresholdConfig& cfg) {
  Stage2Verdict v;
  v.gap_range = gap_range(pair);
  v.sign_change_ratio = sign_change_ratio(pair);
  v.remove = v.gap_range > cfg.gap_range_max && v.sign_change_ratio < cfg.sign_change_ratio_min;
  return v;
}

StageDescriptor parse_stage(std::string_view text) {
  StageDescriptor d;
  d.name = std::string(text);
  const auto colon = text.find(':');
  const auto head = text.substr(0, colon);
  const auto arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (head == "stage1") {
    d.kind = StageKind::Stage1;
    if (!arg.empty()) d.gate = parse_reasons(arg);
  } else if (head == "stage2" && arg.empty()) {
    d.kind = StageKind::Stage2;
  } else if (head == "wavelet") {
    d.kind = StageKind::Wavelet;
    if (!arg.empty()) {
      try {
        d.min_matches = std::stoi(std::string(arg));
      } catch (const std::exception&) {
        throw ConfigError("bad wavelet stage argument '" + std::string(arg) + "'");
      }
      if (*d.min_matches < 1) throw ConfigError("wavelet min matches must be >= 1");
    }
  } else {
    throw ConfigError("unknown stage descriptor '" + std::string(text) + "'");
  }
  return d;
}

std::vector<StageDescriptor> preset(std::string_view name) {
  std::vector<std::string_view> names;
  if (name == "approach4") {
    names = {"stage1", "stage2", "wavelet"};
  } else if (name == "approach1") {
    names = {"stage1:percentile", "stage1:kinematic", "stage2", "stage1:fd", "wavelet:3"};
  } else if (name == "approach2") {
    names = {"stage1:kinematic", "stage2", "wavelet"};
  } else if (name == "approach3") {
    names = {"stage1:kinematic", "wavelet", "stage2"};
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "'");
  }
  std::vector<StageDescriptor> out;
  for (auto n : names) out.push_back(parse_stage(n));
  return out;
}

std::string_view to_string(PairStatus s) {
  switch (s) {
    case PairStatus::Retained: return "retained";
    case PairStatus::Trimmed: return "trimmed";
    case PairStatus::Removed: return "removed";
  }
  return "?";
}

FilterOutcome run_pipeline(std::vector<CandidatePair> pairs, std::span<const StageDescriptor> stages,
                           const PipelineInputs& in) {
  in.thresholds.defaults.validate();
  for (const auto& [cat, cfg] : in.thresholds.per_category) cfg.validate();

  FilterOutcome out;
  out.pairs.resize(pairs.size());
  std::vector<std::map<double, ReasonMask>> flag_acc(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out.pairs[i].pair_id = pairs[i].id;
    out.pairs[i].category = pairs[i].category();
  }
  std::vector<std::size_t> alive(pairs.size());
  for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;

  for (std::size_t si = 0; si < stages.size(); ++si) {
    const auto& stage = stages[si];
    const std::string stage_label = std::to_string(si + 1) + ":" + stage.name;
    StageSummary summary;
    summary.stage = stage_label;
    summary.total.pairs_in = alive.size();
    summary.total.points_in = count_points(pairs, alive);
    for (auto i : alive) {
      auto& c = summary.by_category[out.pairs[i].category];
      c.pairs_in += 1;
      c.points_in += pairs[i].samples.size();
    }

    std::vector<bool> removed(pairs.size(), false);
    auto remove = [&](std::size_t i, std::string reason) {
      removed[i] = true;
      out.pairs[i].status = PairStatus::Removed;
      out.pairs[i].removed_stage = stage_label;
      out.pairs[i].removed_reason = std::move(reason);
    };

    switch (stage.kind) {
      case StageKind::Stage1: {
        std::map<std::string, std::vector<std::size_t>> by_cat;
        for (auto i : alive) by_cat[out.pairs[i].category].push_back(i);
        for (const auto& [cat, members] : by_cat) {
          const auto& cfg = in.thresholds.for_category(cat);
          const VehicleClass sv_cls = pairs[members.front()].sv->cls;
          const auto fd_it = in.fd.find(sv_cls);
          if (fd_it == in.fd.end())
            throw ConfigError("no FD parameters for class " + std::string(to_string(sv_cls)));
          const auto& sv_fd = fd_it->second;
          const double gap_bin =
              cfg.gap_bin_width.value_or(fd::gap_slope(sv_fd) * cfg.speed_bin_width_kmh);
          std::vector<InteractionSample> pooled;
          for (auto i : members)
            pooled.insert(pooled.end(), pairs[i].samples.begin(), pairs[i].samples.end());
          const auto st = category_stats(pooled, cfg, gap_bin);
          const ReasonMask gate = stage.gate.value_or(cfg.stage1_gate);

          std::vector<std::vector<ReasonMask>> flags(members.size());
          std::vector<TrimResult> trims(members.size());
          parallel_for(members.size(), [&](std::size_t k) {
            const auto& p = pairs[members[k]];
            flags[k] = flag_stage1(p, st, cfg, sv_fd);
            std::vector<bool> gated(flags[k].size());
            for (std::size_t j = 0; j < gated.size(); ++j) gated[j] = (flags[k][j] & gate) != 0;
            trims[k] = trim_pair(p, gated, in.min_duration, in.dt);
          });
          for (std::size_t k = 0; k < members.size(); ++k) {
            const auto i = members[k];
            for (std::size_t j = 0; j < flags[k].size(); ++j)
              if (flags[k][j]) flag_acc[i][pairs[i].samples[j].t] |= flags[k][j];
            if (!trims[k].pair) {
              remove(i, "TRIMMED_TOO_SHORT");
              continue;
            }
            if (trims[k].removed_front || trims[k].removed_back) {
              out.pairs[i].trims.push_back({stage_label, pairs[i].window, trims[k].pair->window});
              out.pairs[i].status = PairStatus::Trimmed;
              pairs[i] = std::move(*trims[k].pair);
            }
          }
        }
        break;
      }
      case StageKind::Stage2: {
        std::vector<Stage2Verdict> verdicts(alive.size());
        parallel_for(alive.size(), [&](std::size_t k) {
          const auto i = alive[k];
          verdicts[k] = flag_stage2(pairs[i], in.thresholds.for_category(out.pairs[i].category));
        });
        for (std::size_t k = 0; k < alive.size(); ++k) {
          const auto i = alive[k];
          out.pairs[i].gap_range = verdicts[k].gap_range;
          out.pairs[i].sign_change_ratio = verdicts[k].sign_change_ratio;
          if (verdicts[k].remove) remove(i, "APPROACH_DIVERGE");
        }
        break;
      }
      case StageKind::Wavelet: {
        auto cfg = in.wavelet;
        if (stage.min_matches) cfg.min_matches = *stage.min_matches;
        std::vector<wavelet::PairAnalysis> results(alive.size());
        parallel_for(alive.size(), [&](std::size_t k) {
          results[k] = wavelet::analyze_pair(pairs[alive[k]], in.dt, cfg);
        });
        for (std::size_t k = 0; k < alive.size(); ++k) {
          const auto i = alive[k];
          out.pairs[i].wavelet_matches = results[k].match.count;
          if (results[k].too_short)
            remove(i, "WAVELET_TOO_SHORT");
          else if (!results[k].match.matched)
            remove(i, "WAVELET_NO_MATCH");
        }
        break;
      }
    }

    std::vector<std::size_t> next;
    for (auto i : alive)
      if (!removed[i]) next.push_back(i);
    alive = std::move(next);
    summary.total.pairs_out = alive.size();
    summary.total.points_out = count_points(pairs, alive);
    for (auto i : alive) {
      auto& c = summary.by_category[out.pairs[i].category];
      c.pairs_out += 1;
      c.points_out += pairs[i].samples.size();
    }
    out.stages.push_back(std::move(summary));
  }

  for (std::size_t i = 0; i < pairs.size(); ++i)
    for (const auto& [t, m] : flag_acc[i]) out.pairs[i].flags.push_back({t, m});
  for (auto i : alive) out.survivors.push_back(std::move(pairs[i]));
  return out;
}

}  // namespace lfforge::filters
