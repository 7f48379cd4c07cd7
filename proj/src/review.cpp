#include "lfforge/review.hpp"

#include "lfforge/config.hpp"
#include "lfforge/csv.hpp"
#include "lfforge/json_schema.hpp"

#include <algorithm>
#include <charconv>

namespace lfforge::review {

namespace {

constexpr double kTimeEps = 1e-6;

std::string_view action_name(Action a) {
  switch (a) {
    case Action::Keep: return "keep";
    case Action::Remove: return "remove";
    case Action::Trim: return "trim";
  }
  return "?";
}

std::int64_t parse_int(const std::string& s, std::size_t line) {
  std::int64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw DataError("retained_pairs.csv line " + std::to_string(line) + ": bad frame '" + s + "'");
  return v;
}

}  // namespace

std::vector<Decision> parse_decisions(const nlohmann::json& doc,
                                      const std::map<std::string, FrameWindow>& base_windows, double dt) {
  if (const auto v = schema::validate(doc, config::review_decision_schema()); !v.empty())
    throw config::SchemaError(v.front().path, v.front().message);
  std::vector<Decision> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    const std::string path = "/" + std::to_string(i);
    Decision d;
    d.pair_id = item.at("pair_id").get<std::string>();
    const auto action = item.at("action").get<std::string>();
    d.action = action == "remove" ? Action::Remove : action == "trim" ? Action::Trim : Action::Keep;
    if (auto it = item.find("note"); it != item.end()) d.note = it->get<std::string>();
    const auto base = base_windows.find(d.pair_id);
    if (base == base_windows.end()) throw config::SchemaError(path + "/pair_id", "unknown pair '" + d.pair_id + "'");
    if (auto it = item.find("trim_windows"); it != item.end())
      for (const auto& w : *it) d.trim_windows.emplace_back(w[0].get<double>(), w[1].get<double>());
    if (d.action == Action::Trim && d.trim_windows.empty())
      throw config::SchemaError(path + "/trim_windows", "trim needs at least one window");
    if (d.action != Action::Trim && !d.trim_windows.empty())
      throw config::SchemaError(path + "/trim_windows", "windows are only allowed with action trim");
    const double t0 = static_cast<double>(base->second.first) * dt;
    const double t1 = static_cast<double>(base->second.last) * dt;
    for (std::size_t k = 0; k < d.trim_windows.size(); ++k) {
      const auto [a, b] = d.trim_windows[k];
      const std::string wpath = path + "/trim_windows/" + std::to_string(k);
      if (!(a < b)) throw config::SchemaError(wpath, "window must start before it ends");
      if (a < t0 - kTimeEps || b > t1 + kTimeEps) throw config::SchemaError(wpath, "window outside the pair window");
    }
    auto sorted = d.trim_windows;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 1; k < sorted.size(); ++k)
      if (sorted[k].first < sorted[k - 1].second - kTimeEps)
        throw config::SchemaError(path + "/trim_windows", "windows overlap");
    out.push_back(std::move(d));
  }
  return out;
}

ApplyResult apply(std::vector<RetainedEntry> retained, std::span<const Decision> decisions, double dt,
                  double min_duration) {
  ApplyResult r;
  std::vector<bool> dropped(retained.size(), false);
  for (const auto& d : decisions) {
    LogEntry log{d.pair_id, std::string(action_name(d.action)), "", d.note};
    const auto it = std::find_if(retained.begin(), retained.end(),
                                 [&](const RetainedEntry& e) { return e.pair_id == d.pair_id; });
    const auto idx = static_cast<std::size_t>(it - retained.begin());
    if (it == retained.end() || dropped[idx]) {
      log.outcome = "not_retained";
    } else if (d.action == Action::Keep) {
      log.outcome = "kept";
    } else if (d.action == Action::Remove) {
      dropped[idx] = true;
      log.outcome = "removed";
    } else {
      auto inside = [&](std::int64_t f) {
        const double t = static_cast<double>(f) * dt;
        return std::any_of(d.trim_windows.begin(), d.trim_windows.end(), [&](const auto& w) {
          return t >= w.first - kTimeEps && t < w.second - kTimeEps;
        });
      };
      FrameWindow best{0, -1}, cur{0, -1};
      for (std::int64_t f = it->window.first; f <= it->window.last; ++f) {
        if (inside(f)) {
          cur = {0, -1};
          continue;
        }
        if (cur.empty()) cur = {f, f};
        else cur.last = f;
        if (cur.size() > best.size()) best = cur;
      }
      if (best.empty() || static_cast<double>(best.size() - 1) * dt < min_duration - 1e-9) {
        dropped[idx] = true;
        log.outcome = "removed_too_short";
      } else {
        log.outcome = best == it->window ? "kept" : "trimmed";
        it->window = best;
      }
    }
    r.log.push_back(std::move(log));
  }
  for (std::size_t i = 0; i < retained.size(); ++i)
    if (!dropped[i]) r.retained.push_back(std::move(retained[i]));
  return r;
}

void write_retained_csv(std::ostream& out, std::span<const RetainedEntry> rows, double dt) {
  csv::write_row(out, {"pair_id", "lv_id", "sv_id", "category", "first_frame", "last_frame", "t0", "t1",
                       "n_samples"});
  for (const auto& e : rows)
    csv::write_row(out, {e.pair_id, e.lv_id, e.sv_id, e.category, std::to_string(e.window.first),
                         std::to_string(e.window.last), csv::format_double(static_cast<double>(e.window.first) * dt),
                         csv::format_double(static_cast<double>(e.window.last) * dt),
                         std::to_string(e.window.size())});
}

std::vector<RetainedEntry> read_retained_csv(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::size_t> idx;
  for (const char* name : {"pair_id", "lv_id", "sv_id", "category", "first_frame", "last_frame"}) {
    const auto c = reader.column(name);
    if (!c) throw DataError(std::string("retained_pairs.csv lacks column ") + name);
    idx.push_back(*c);
  }
  std::vector<RetainedEntry> out;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() < reader.header().size())
      throw DataError("retained_pairs.csv line " + std::to_string(reader.line()) + ": too few fields");
    out.push_back({f[idx[0]], f[idx[1]], f[idx[2]], f[idx[3]],
                   {parse_int(f[idx[4]], reader.line()), parse_int(f[idx[5]], reader.line())}});
  }
  return out;
}

}  // namespace lfforge::review
