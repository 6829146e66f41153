#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "symwsi/corpus_io.hpp"
#include "symwsi/error.hpp"

namespace symwsi {

/// item -> label
using HardLabeling = std::map<std::string, std::string>;

enum class NmiNorm { max, sqrt, arithmetic };

/// How per-target scores are combined into corpus and per-POS scores.
enum class Aggregation { arithmetic, geometric };

namespace detail {

inline double xlogx_ratio(double count, double num, double den) {
  // count/N * log(num/den), zero when count is zero
  return count > 0.0 ? count * std::log(num / den) : 0.0;
}

inline double entropy_from_counts(const std::map<std::string, std::uint64_t>& counts, std::uint64_t n) {
  double h = 0.0;
  const double dn = static_cast<double>(n);
  for (const auto& [l, c] : counts) h += xlogx_ratio(static_cast<double>(c), dn, static_cast<double>(c));
  return h / dn;
}

}  // namespace detail

/// Normalized mutual information of two hard labelings of the same items,
/// natural logs. Both single-cluster: 1. Exactly one single-cluster: 0.
inline double nmi(const HardLabeling& x, const HardLabeling& y, NmiNorm norm = NmiNorm::max) {
  if (x.empty() || y.empty()) throw Error("nmi needs non-empty labelings");
  if (x.size() != y.size()) throw Error("nmi: labelings cover different items");

  std::map<std::string, std::uint64_t> cx, cy;
  std::map<std::pair<std::string, std::string>, std::uint64_t> cxy;
  auto ix = x.begin();
  auto iy = y.begin();
  for (; ix != x.end(); ++ix, ++iy) {
    if (ix->first != iy->first) throw Error("nmi: labelings cover different items (" + ix->first + ")");
    ++cx[ix->second];
    ++cy[iy->second];
    ++cxy[{ix->second, iy->second}];
  }
  const std::uint64_t n = x.size();
  const double hx = detail::entropy_from_counts(cx, n);
  const double hy = detail::entropy_from_counts(cy, n);
  const bool x_flat = cx.size() == 1, y_flat = cy.size() == 1;
  if (x_flat && y_flat) return 1.0;
  if (x_flat || y_flat) return 0.0;

  double mi = 0.0;
  for (const auto& [xy, c] : cxy) {
    const double joint = static_cast<double>(c);
    mi += detail::xlogx_ratio(joint, static_cast<double>(n * c), static_cast<double>(cx[xy.first] * cy[xy.second]));
  }
  mi /= static_cast<double>(n);

  double denom = 0.0;
  switch (norm) {
    case NmiNorm::max: denom = std::max(hx, hy); break;
    case NmiNorm::sqrt: denom = std::sqrt(hx * hy); break;
    case NmiNorm::arithmetic: denom = 0.5 * (hx + hy); break;
  }
  if (!(denom > 0.0)) return 0.0;
  return std::clamp(mi / denom, 0.0, 1.0);
}

/// A family of possibly overlapping clusters over items 0..n-1.
struct Cover {
  std::size_t items = 0;
  std::vector<std::vector<std::size_t>> clusters;  // sorted member indices
};

namespace detail {

inline double h(std::size_t count, std::size_t n) {
  if (count == 0) return 0.0;
  const double p = static_cast<double>(count) / static_cast<double>(n);
  return -p * std::log(p);
}

inline std::size_t intersection_size(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::size_t i = 0, j = 0, c = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++c, ++i, ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return c;
}

// Mean over clusters of X of H(X_k | Y) / H(X_k), with best-match
// conditional entropy over Y and complement-dominated matches rejected.
inline double normalized_conditional_entropy(const Cover& x, const Cover& y) {
  const std::size_t n = x.items;
  const bool y_has_full = std::any_of(y.clusters.begin(), y.clusters.end(), [n](const auto& c) { return c.size() == n; });
  double total = 0.0;
  for (const auto& xk : x.clusters) {
    const std::size_t a = xk.size();
    const double hx = h(a, n) + h(n - a, n);
    if (!(hx > 0.0)) {
      // an all-items cluster carries no information; it is matched only by another all-items cluster
      total += y_has_full ? 0.0 : 1.0;
      continue;
    }
    double best = hx;
    for (const auto& yl : y.clusters) {
      const std::size_t b = yl.size();
      const std::size_t c = intersection_size(xk, yl);
      const double h11 = h(c, n), h10 = h(a - c, n), h01 = h(b - c, n), h00 = h(n - a - b + c, n);
      if (!(h11 + h00 > h01 + h10)) continue;
      const double hy = h(b, n) + h(n - b, n);
      best = std::min(best, h11 + h10 + h01 + h00 - hy);
    }
    total += std::clamp(best, 0.0, hx) / hx;
  }
  return total / static_cast<double>(x.clusters.size());
}

}  // namespace detail

/// Overlapping-cover NMI in [0, 1]: 1 - (H(X|Y)_norm + H(Y|X)_norm) / 2.
inline double overlapping_nmi(const Cover& x, const Cover& y) {
  if (x.items != y.items) throw Error("covers span different item counts");
  if (x.items == 0 || x.clusters.empty() || y.clusters.empty()) throw Error("overlapping NMI needs non-empty covers");
  const double hxy = detail::normalized_conditional_entropy(x, y);
  const double hyx = detail::normalized_conditional_entropy(y, x);
  return std::clamp(1.0 - 0.5 * (hxy + hyx), 0.0, 1.0);
}

namespace detail {

inline std::vector<std::string> item_ids(const std::map<std::string, LabelWeights>& gold,
                                         const std::map<std::string, LabelWeights>& sys) {
  if (gold.empty() || sys.empty()) throw Error("empty labeling");
  std::vector<std::string> ids;
  auto ig = gold.begin();
  auto is = sys.begin();
  if (gold.size() != sys.size()) throw Error("gold and system label different instance sets");
  for (; ig != gold.end(); ++ig, ++is) {
    if (ig->first != is->first) throw Error("gold and system label different instance sets (" + ig->first + ")");
    ids.push_back(ig->first);
  }
  return ids;
}

inline Cover binarize(const std::map<std::string, LabelWeights>& labels, double threshold) {
  Cover cover;
  cover.items = labels.size();
  std::map<std::string, std::vector<std::size_t>> members;
  std::size_t i = 0;
  for (const auto& [id, weights] : labels) {
    bool any = false;
    for (const auto& [l, w] : weights)
      if (w > threshold) {
        members[l].push_back(i);
        any = true;
      }
    if (!any) throw Error("instance " + id + " has no membership above the threshold");
    ++i;
  }
  for (auto& [l, m] : members) cover.clusters.push_back(std::move(m));
  return cover;
}

}  // namespace detail

/// Fuzzy NMI x 100 for one target. Memberships with weight above
/// `membership_threshold` count as members.
inline double fuzzy_nmi(const GoldLabeling& gold, const SenseAssignment& sys, double membership_threshold = 0.0) {
  detail::item_ids(gold.senses, sys.clusters);
  return 100.0 * overlapping_nmi(detail::binarize(gold.senses, membership_threshold),
                                 detail::binarize(sys.clusters, membership_threshold));
}

/// Fuzzy B-Cubed F1 x 100 for one target. Gold weights are normalized per
/// instance; pair agreement is sum over labels of min(w_e, w_e').
inline double fuzzy_bcubed(const GoldLabeling& gold, const SenseAssignment& sys) {
  const auto ids = detail::item_ids(gold.senses, sys.clusters);
  const std::size_t n = ids.size();

  std::vector<LabelWeights> g, s;
  g.reserve(n);
  s.reserve(n);
  for (const auto& [id, w] : gold.senses) {
    double sum = 0.0;
    for (const auto& [l, v] : w) {
      if (!(v > 0.0)) throw Error("gold weight must be positive for " + id);
      sum += v;
    }
    LabelWeights norm;
    for (const auto& [l, v] : w) norm[l] = v / sum;
    g.push_back(std::move(norm));
  }
  for (const auto& [id, w] : sys.clusters) {
    if (w.empty()) throw Error("instance " + id + " has no clusters");
    s.push_back(w);
  }

  auto overlap = [](const LabelWeights& a, const LabelWeights& b) {
    double o = 0.0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
      if (ia->first == ib->first) {
        o += std::min(ia->second, ib->second);
        ++ia, ++ib;
      } else if (ia->first < ib->first) {
        ++ia;
      } else {
        ++ib;
      }
    }
    return o;
  };

  double precision = 0.0, recall = 0.0;
  for (std::size_t e = 0; e < n; ++e) {
    double p_sum = 0.0, r_sum = 0.0;
    std::size_t p_cnt = 0, r_cnt = 0;
    for (std::size_t f = 0; f < n; ++f) {
      const double so = overlap(s[e], s[f]);
      const double go = overlap(g[e], g[f]);
      const double agree = std::min(so, go);
      if (so > 0.0) {
        p_sum += agree / so;
        ++p_cnt;
      }
      if (go > 0.0) {
        r_sum += agree / go;
        ++r_cnt;
      }
    }
    precision += p_sum / static_cast<double>(p_cnt);
    recall += r_sum / static_cast<double>(r_cnt);
  }
  precision /= static_cast<double>(n);
  recall /= static_cast<double>(n);
  if (!(precision + recall > 0.0)) return 0.0;
  return 100.0 * 2.0 * precision * recall / (precision + recall);
}

/// Geometric mean of FNMI and FBC.
inline double avg_score(double fnmi, double fbc) {
  if (fnmi < 0.0 || fbc < 0.0 || std::isnan(fnmi) || std::isnan(fbc)) throw Error("scores must be non-negative");
  return std::sqrt(fnmi * fbc);
}

struct TargetScore {
  double fnmi = 0.0;
  double fbc = 0.0;
  std::size_t instances = 0;
};

struct PosScore {
  double fnmi = 0.0;
  double fbc = 0.0;
  double avg = 0.0;
  std::size_t targets = 0;
};

struct ScoreReport {
  double fnmi = 0.0;
  double fbc = 0.0;
  double avg = 0.0;
  std::map<Target, TargetScore> per_target;
  std::map<Pos, PosScore> per_pos;
};

struct ScoreOptions {
  double membership_threshold = 0.0;
  Aggregation aggregation = Aggregation::arithmetic;
  bool restrict_to_intersection = false;
  std::set<std::string> exclude_targets;  ///< "lemma.pos" keys
};

namespace detail {

inline double combine(const std::vector<double>& v, Aggregation agg) {
  if (v.empty()) return 0.0;
  if (agg == Aggregation::arithmetic) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  }
  double s = 0.0;
  for (double x : v) {
    if (x <= 0.0) return 0.0;
    s += std::log(x);
  }
  return std::exp(s / static_cast<double>(v.size()));
}

}  // namespace detail

/// Scores a system labeling against gold, per target, per POS and overall.
/// `targets` maps every instance id to its target.
inline ScoreReport score(const GoldLabeling& gold, const SenseAssignment& sys,
                         const std::map<std::string, Target>& targets, const ScoreOptions& opts = {}) {
  std::set<std::string> ids;
  bool overlap = false;
  for (const auto& [id, w] : gold.senses) {
    if (sys.clusters.count(id)) {
      ids.insert(id);
      overlap = true;
    } else if (!opts.restrict_to_intersection) {
      throw Error("instance " + id + " is in gold but not in the system labeling");
    }
  }
  if (!overlap) throw Error("gold and system labelings share no instances");
  if (!opts.restrict_to_intersection)
    for (const auto& [id, w] : sys.clusters)
      if (!gold.senses.count(id)) throw Error("instance " + id + " is in the system labeling but not in gold");

  std::map<Target, std::pair<GoldLabeling, SenseAssignment>> groups;
  for (const auto& id : ids) {
    auto t = targets.find(id);
    if (t == targets.end()) throw Error("no target known for instance " + id);
    if (opts.exclude_targets.count(t->second.key())) continue;
    auto& [g, s] = groups[t->second];
    g.senses[id] = gold.senses.at(id);
    s.clusters[id] = sys.clusters.at(id);
  }
  if (groups.empty()) throw Error("no targets left to score");

  ScoreReport r;
  std::vector<double> all_fnmi, all_fbc;
  std::map<Pos, std::pair<std::vector<double>, std::vector<double>>> by_pos;
  for (const auto& [target, gs] : groups) {
    TargetScore ts{fuzzy_nmi(gs.first, gs.second, opts.membership_threshold), fuzzy_bcubed(gs.first, gs.second),
                   gs.first.senses.size()};
    r.per_target[target] = ts;
    all_fnmi.push_back(ts.fnmi);
    all_fbc.push_back(ts.fbc);
    by_pos[target.pos].first.push_back(ts.fnmi);
    by_pos[target.pos].second.push_back(ts.fbc);
  }
  r.fnmi = detail::combine(all_fnmi, opts.aggregation);
  r.fbc = detail::combine(all_fbc, opts.aggregation);
  r.avg = avg_score(r.fnmi, r.fbc);
  for (const auto& [pos, v] : by_pos) {
    PosScore ps;
    ps.fnmi = detail::combine(v.first, opts.aggregation);
    ps.fbc = detail::combine(v.second, opts.aggregation);
    ps.avg = avg_score(ps.fnmi, ps.fbc);
    ps.targets = v.first.size();
    r.per_pos[pos] = ps;
  }
  return r;
}

/// Line-delimited score records: one corpus line, then per POS, then per target.
inline std::string score_report_to_json_lines(const ScoreReport& r) {
  std::string out;
  nlohmann::ordered_json c;
  c["scope"] = "corpus";
  c["fnmi"] = r.fnmi;
  c["fbc"] = r.fbc;
  c["avg"] = r.avg;
  out += c.dump() + "\n";
  for (const auto& [pos, s] : r.per_pos) {
    nlohmann::ordered_json p;
    p["scope"] = "pos";
    p["pos"] = std::string(pos_name(pos));
    p["fnmi"] = s.fnmi;
    p["fbc"] = s.fbc;
    p["avg"] = s.avg;
    p["targets"] = s.targets;
    out += p.dump() + "\n";
  }
  for (const auto& [t, s] : r.per_target) {
    nlohmann::ordered_json p;
    p["scope"] = "target";
    p["target"] = t.key();
    p["fnmi"] = s.fnmi;
    p["fbc"] = s.fbc;
    p["instances"] = s.instances;
    out += p.dump() + "\n";
  }
  return out;
}

struct Stat {
  double mean = 0.0;
  double std = 0.0;
};

enum class StdKind { sample, population };

inline Stat mean_std(std::span<const double> xs, StdKind kind = StdKind::sample) {
  if (xs.empty()) throw Error("statistics of an empty sequence");
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  if (xs.size() == 1) return {m, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double dof = kind == StdKind::sample ? static_cast<double>(xs.size() - 1) : static_cast<double>(xs.size());
  return {m, std::sqrt(ss / dof)};
}

struct MetricStats {
  Stat fnmi, fbc, avg;
};

struct RunStatistics {
  std::size_t runs = 0;
  MetricStats overall;
  std::map<Pos, MetricStats> per_pos;
};

/// Mean and standard deviation of each metric across repeated runs.
inline RunStatistics aggregate_runs(std::span<const ScoreReport> reports, StdKind kind = StdKind::sample) {
  if (reports.empty()) throw Error("no reports to aggregate");
  auto collect = [&](auto&& get) {
    std::vector<double> v;
    v.reserve(reports.size());
    for (const auto& r : reports) v.push_back(get(r));
    return mean_std(v, kind);
  };
  RunStatistics rs;
  rs.runs = reports.size();
  rs.overall.fnmi = collect([](const ScoreReport& r) { return r.fnmi; });
  rs.overall.fbc = collect([](const ScoreReport& r) { return r.fbc; });
  rs.overall.avg = collect([](const ScoreReport& r) { return r.avg; });

  std::set<Pos> poses;
  for (const auto& r : reports)
    for (const auto& [p, s] : r.per_pos) poses.insert(p);
  for (Pos p : poses) {
    auto get = [p](const ScoreReport& r, auto field) {
      auto it = r.per_pos.find(p);
      return it == r.per_pos.end() ? 0.0 : it->second.*field;
    };
    auto& ms = rs.per_pos[p];
    ms.fnmi = collect([&](const ScoreReport& r) { return get(r, &PosScore::fnmi); });
    ms.fbc = collect([&](const ScoreReport& r) { return get(r, &PosScore::fbc); });
    ms.avg = collect([&](const ScoreReport& r) { return get(r, &PosScore::avg); });
  }
  return rs;
}

/// Highest-probability label, ties to the lexicographically smallest.
inline std::string argmax_label(const LabelWeights& w) {
  if (w.empty()) throw Error("argmax of an empty labeling");
  auto best = w.begin();
  for (auto it = w.begin(); it != w.end(); ++it)
    if (it->second > best->second) best = it;
  return best->first;
}

/// NMI between tense and most probable cluster, per verb target.
inline std::map<Target, double> tense_sense_nmi_per_target(std::span<const Instance> instances,
                                                           const std::map<std::string, LabelWeights>& labels,
                                                           NmiNorm norm = NmiNorm::max) {
  std::map<Target, std::pair<HardLabeling, HardLabeling>> groups;
  for (const auto& inst : instances) {
    if (inst.target.pos != Pos::verb) continue;
    if (!inst.tense) throw Error("instance " + inst.id + " has no tense");
    auto it = labels.find(inst.id);
    if (it == labels.end()) throw Error("instance " + inst.id + " has no induced senses");
    auto& [tense, sense] = groups[inst.target];
    tense[inst.id] = std::string(tense_name(*inst.tense));
    sense[inst.id] = argmax_label(it->second);
  }
  if (groups.empty()) throw Error("no verb instances for tense analysis");
  std::map<Target, double> out;
  for (const auto& [t, ts] : groups) out[t] = nmi(ts.first, ts.second, norm);
  return out;
}

/// Mean over verb targets of NMI(tense, argmax sense).
inline double tense_sense_nmi(std::span<const Instance> instances, const SenseAssignment& sys,
                              NmiNorm norm = NmiNorm::max) {
  auto per = tense_sense_nmi_per_target(instances, sys.clusters, norm);
  double s = 0.0;
  for (const auto& [t, v] : per) s += v;
  return s / static_cast<double>(per.size());
}

}  // namespace symwsi
