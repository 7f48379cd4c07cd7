#include "lfforge/pairing.hpp"

#include "lfforge/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

namespace lfforge {

void PairingCriteria::validate() const {
  if (!(max_gap > 0)) throw ConfigError("pairing.max_gap must be positive");
  if (!(min_duration > 0)) throw ConfigError("pairing.min_duration must be positive");
}

std::optional<std::string> resolve_leader(const VehicleState& sv,
                                          std::span<const VehicleState> frame,
                                          const PairingCriteria& criteria,
                                          bool* interpenetration) {
  if (interpenetration) *interpenetration = false;
  const Vehicle* best = nullptr;
  double best_gap = std::numeric_limits<double>::infinity();
  for (const auto& cand : frame) {
    if (cand.vehicle == sv.vehicle) continue;
    const double overlap = lateral_overlap(cand.point->y_lat, cand.vehicle->width, sv.point->y_lat,
                                           sv.vehicle->width);
    const double gap = (cand.point->x_long - cand.vehicle->length) - sv.point->x_long;
    if (gap < 0) {
      if (overlap > 0 && cand.point->x_long > sv.point->x_long) {
        if (interpenetration) *interpenetration = true;
        return std::nullopt;
      }
      continue;
    }
    if (criteria.require_overlap && !(overlap > 0)) continue;
    if (gap > criteria.max_gap) continue;
    if (gap < best_gap || (gap == best_gap && id_less(cand.vehicle->id, best->id))) {
      best = cand.vehicle;
      best_gap = gap;
    }
  }
  if (!best) return std::nullopt;
  return best->id;
}

std::string make_pair_id(const Vehicle& lv, const Vehicle& sv, std::int64_t first_frame) {
  return lv.id + "-" + sv.id + "-" + std::to_string(first_frame);
}

CandidatePair make_pair(const Vehicle& lv, const Vehicle& sv, FrameWindow window, double dt) {
  CandidatePair p;
  p.id = make_pair_id(lv, sv, window.first);
  p.lv = &lv;
  p.sv = &sv;
  p.window = window;
  p.samples = interaction_series(lv, sv, window, dt);
  return p;
}

std::vector<CandidatePair> extract_pairs(std::span<const Vehicle> vehicles,
                                         const PairingCriteria& criteria, double dt,
                                         PairingDiagnostics* diagnostics) {
  criteria.validate();
  std::vector<CandidatePair> out;
  if (vehicles.empty()) return out;

  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  for (const auto& v : vehicles) {
    if (v.points.empty()) continue;
    lo = std::min(lo, v.first_frame);
    hi = std::max(hi, v.last_frame());
  }
  if (lo > hi) return out;
  std::vector<std::vector<VehicleState>> frames(static_cast<std::size_t>(hi - lo + 1));
  std::map<std::string, const Vehicle*> by_id;
  for (const auto& v : vehicles) {
    by_id[v.id] = &v;
    for (auto f = v.first_frame; f <= v.last_frame(); ++f)
      frames[static_cast<std::size_t>(f - lo)].push_back({&v, &v.at_frame(f)});
  }

  // Minimum samples per run: (n - 1) dt >= min_duration.
  const auto min_samples =
      static_cast<std::size_t>(std::ceil(criteria.min_duration / dt - 1e-9)) + 1;

  std::vector<std::vector<CandidatePair>> per_sv(vehicles.size());
  std::atomic<std::size_t> interpenetrations{0};
  parallel_for(vehicles.size(), [&](std::size_t i) {
    const Vehicle& sv = vehicles[i];
    std::optional<std::string> current;
    std::int64_t run_start = 0;
    auto close_run = [&](std::int64_t end_frame) {
      if (!current) return;
      const auto n = static_cast<std::size_t>(end_frame - run_start + 1);
      if (n >= min_samples)
        per_sv[i].push_back(make_pair(*by_id.at(*current), sv, {run_start, end_frame}, dt));
      current.reset();
    };
    for (auto f = sv.first_frame; f <= sv.last_frame(); ++f) {
      const VehicleState self{&sv, &sv.at_frame(f)};
      bool bad = false;
      auto leader = resolve_leader(self, frames[static_cast<std::size_t>(f - lo)], criteria, &bad);
      if (bad) interpenetrations.fetch_add(1, std::memory_order_relaxed);
      if (leader != current) {
        close_run(f - 1);
        if (leader) {
          current = std::move(leader);
          run_start = f;
        }
      }
    }
    close_run(sv.last_frame());
  });

  for (auto& v : per_sv)
    for (auto& p : v) out.push_back(std::move(p));
  std::sort(out.begin(), out.end(), [](const CandidatePair& a, const CandidatePair& b) {
    if (a.sv->id != b.sv->id) return id_less(a.sv->id, b.sv->id);
    return a.window.first < b.window.first;
  });
  if (diagnostics) diagnostics->interpenetration_instants = interpenetrations.load();
  return out;
}

std::string_view to_string(Asymmetry a) {
  switch (a) {
    case Asymmetry::Symmetric: return "symmetric";
    case Asymmetry::Positive: return "positive";
    case Asymmetry::Negative: return "negative";
  }
  return "?";
}

Asymmetry asymmetry(VehicleClass lv, VehicleClass sv) {
  const int d = size_rank(lv) - size_rank(sv);
  if (d == 0) return Asymmetry::Symmetric;
  return d > 0 ? Asymmetry::Positive : Asymmetry::Negative;
}

std::vector<CategorySummary> summarize_pairs(std::span<const CandidatePair> pairs,
                                             std::size_t min_pairs) {
  std::map<std::pair<int, int>, CategorySummary> acc;
  for (const auto& p : pairs) {
    const auto key = std::make_pair(static_cast<int>(p.sv->cls), static_cast<int>(p.lv->cls));
    auto& s = acc[key];
    s.lv_class = p.lv->cls;
    s.sv_class = p.sv->cls;
    s.pairs += 1;
    s.points += p.samples.size();
  }
  std::vector<CategorySummary> out;
  for (auto& [key, s] : acc) {
    s.asym = asymmetry(s.lv_class, s.sv_class);
    s.modelable = s.pairs >= min_pairs;
    out.push_back(s);
  }
  return out;
}

}  // namespace lfforge
