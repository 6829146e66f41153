#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "symwsi/corpus_io.hpp"
#include "symwsi/error.hpp"
#include "symwsi/representatives.hpp"

namespace symwsi {

struct SparseRow {
  std::vector<std::uint32_t> cols;  // strictly increasing
  std::vector<double> vals;

  std::size_t nnz() const { return cols.size(); }
};

struct RowMeta {
  std::string instance_id;
  std::size_t rep_index = 0;
};

/// n*k representatives over the sorted lemma vocabulary.
struct FeatureMatrix {
  std::vector<std::string> vocab;
  std::vector<SparseRow> rows;
  std::vector<RowMeta> meta;

  std::size_t num_rows() const { return rows.size(); }
  std::size_t num_cols() const { return vocab.size(); }
};

/// Bag-of-lemmas counts, one row per representative.
inline FeatureMatrix build_matrix(std::span<const Representative> reps) {
  if (reps.empty()) throw Error("cannot build a feature matrix from zero representatives");
  FeatureMatrix m;
  std::map<std::string, std::uint32_t> index;
  for (const auto& r : reps)
    for (const auto& w : r.words) index.emplace(w, 0);
  m.vocab.reserve(index.size());
  for (auto& [w, id] : index) {
    id = static_cast<std::uint32_t>(m.vocab.size());
    m.vocab.push_back(w);
  }

  m.rows.reserve(reps.size());
  m.meta.reserve(reps.size());
  for (const auto& r : reps) {
    if (r.words.empty()) throw Error("representative " + std::to_string(r.index) + " of " + r.instance_id + " is empty");
    std::map<std::uint32_t, double> counts;
    for (const auto& w : r.words) counts[index.at(w)] += 1.0;
    SparseRow row;
    for (const auto& [c, v] : counts) {
      row.cols.push_back(c);
      row.vals.push_back(v);
    }
    m.rows.push_back(std::move(row));
    m.meta.push_back({r.instance_id, r.index});
  }
  return m;
}

enum class Weighting { tfidf, raw };

/// Smoothed-idf TF-IDF with L2 row normalization:
///   w(t,d) = count(t,d) * (ln((1+N)/(1+df(t))) + 1)
inline FeatureMatrix tfidf(FeatureMatrix m) {
  const double n = static_cast<double>(m.rows.size());
  std::vector<double> df(m.vocab.size(), 0.0);
  for (const auto& row : m.rows)
    for (auto c : row.cols) df[c] += 1.0;
  std::vector<double> idf(df.size());
  for (std::size_t t = 0; t < df.size(); ++t) idf[t] = std::log((1.0 + n) / (1.0 + df[t])) + 1.0;

  for (auto& row : m.rows) {
    double sq = 0.0;
    for (std::size_t i = 0; i < row.nnz(); ++i) {
      row.vals[i] *= idf[row.cols[i]];
      sq += row.vals[i] * row.vals[i];
    }
    const double norm = std::sqrt(sq);
    if (norm > 0.0)
      for (auto& v : row.vals) v /= norm;
  }
  return m;
}

/// `Weighting::raw` passes counts through unchanged (TF-IDF ablation).
inline FeatureMatrix apply_weighting(FeatureMatrix m, Weighting w) {
  return w == Weighting::tfidf ? tfidf(std::move(m)) : m;
}

/// 1 - cos(u, v), clamped to [0, 2].
inline double cosine_distance(const SparseRow& u, double norm_u, const SparseRow& v, double norm_v) {
  double dot = 0.0;
  std::size_t i = 0, j = 0;
  while (i < u.nnz() && j < v.nnz()) {
    if (u.cols[i] == v.cols[j]) {
      dot += u.vals[i++] * v.vals[j++];
    } else if (u.cols[i] < v.cols[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return std::clamp(1.0 - dot / (norm_u * norm_v), 0.0, 2.0);
}

inline double l2_norm(const SparseRow& r) {
  double s = 0.0;
  for (double v : r.vals) s += v * v;
  return std::sqrt(s);
}

/// Dense symmetric pairwise cosine distances, row-major n*n.
inline std::vector<double> pairwise_cosine(const FeatureMatrix& m) {
  const std::size_t n = m.num_rows();
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    norms[i] = l2_norm(m.rows[i]);
    if (!(norms[i] > 0.0)) throw Error("feature row " + std::to_string(i) + " is all zero");
  }
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = cosine_distance(m.rows[i], norms[i], m.rows[j], norms[j]);
  return d;
}

struct HardClustering {
  std::vector<std::size_t> labels;
  std::size_t num_clusters = 0;
};

/// Average distances closer than this are ties, resolved by creation order.
inline constexpr double kLinkageTieTolerance = 1e-12;

/// One agglomeration step. Clusters are named by creation order: rows are
/// 0..n-1 and the s-th merge creates cluster n+s.
struct Merge {
  std::size_t first = 0;   // smaller creation id
  std::size_t second = 0;
  double distance = 0.0;
};

struct Dendrogram {
  std::size_t leaves = 0;
  std::vector<Merge> merges;

  /// Applies merges until max(c, 1) clusters remain (all rows if fewer than c).
  /// Labels are renumbered by first occurrence over rows.
  HardClustering cut(std::size_t c) const {
    if (c < 1) throw Error("cluster count must be at least 1");
    const std::size_t steps = leaves > c ? leaves - c : 0;
    if (steps > merges.size()) throw Error("dendrogram is too shallow for " + std::to_string(c) + " clusters");

    std::vector<std::size_t> parent(leaves + steps);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (std::size_t s = 0; s < steps; ++s) {
      parent[find(merges[s].first)] = leaves + s;
      parent[find(merges[s].second)] = leaves + s;
    }

    HardClustering h;
    h.labels.resize(leaves);
    std::map<std::size_t, std::size_t> renumber;
    for (std::size_t i = 0; i < leaves; ++i) {
      auto [it, inserted] = renumber.emplace(find(i), renumber.size());
      h.labels[i] = it->second;
    }
    h.num_clusters = renumber.size();
    return h;
  }
};

namespace detail {

// Strict "a is a better merge than b": smaller distance, ties (within
// tolerance) by the lexicographically smaller creation-id pair.
struct MergeKey {
  double distance;
  std::size_t lo, hi;
};

inline bool better(const MergeKey& a, const MergeKey& b) {
  if (std::abs(a.distance - b.distance) > kLinkageTieTolerance) return a.distance < b.distance;
  if (a.lo != b.lo) return a.lo < b.lo;
  return a.hi < b.hi;
}

}  // namespace detail

/// UPGMA agglomeration over a precomputed n*n distance matrix: the distance
/// between two clusters is the unweighted mean of all cross-pair row
/// distances. Stops once `min_clusters` clusters remain.
inline Dendrogram average_linkage(std::vector<double> dist, std::size_t n, std::size_t min_clusters = 1) {
  if (dist.size() != n * n) throw Error("distance matrix has wrong size");
  Dendrogram dg;
  dg.leaves = n;
  if (n == 0) return dg;
  min_clusters = std::max<std::size_t>(min_clusters, 1);

  // dist[i*n+j] holds the *sum* of cross-pair distances between slots i and j.
  std::vector<double> size(n, 1.0);
  std::vector<std::size_t> creation(n);
  std::iota(creation.begin(), creation.end(), std::size_t{0});
  std::vector<char> active(n, 1);
  std::vector<std::size_t> nn(n, n);

  auto key = [&](std::size_t i, std::size_t j) {
    return detail::MergeKey{dist[i * n + j] / (size[i] * size[j]), std::min(creation[i], creation[j]),
                            std::max(creation[i], creation[j])};
  };
  auto refresh = [&](std::size_t i) {
    nn[i] = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !active[j]) continue;
      if (nn[i] == n || detail::better(key(i, j), key(i, nn[i]))) nn[i] = j;
    }
  };
  for (std::size_t i = 0; i < n; ++i) refresh(i);

  std::size_t remaining = n;
  std::size_t next_id = n;
  while (remaining > min_clusters) {
    std::size_t a = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      if (a == n || detail::better(key(i, nn[i]), key(a, nn[a]))) a = i;
    }
    const std::size_t b = nn[a];
    const auto k = key(a, b);
    dg.merges.push_back({k.lo, k.hi, k.distance});

    for (std::size_t j = 0; j < n; ++j) {
      if (!active[j] || j == a || j == b) continue;
      dist[a * n + j] = dist[j * n + a] = dist[a * n + j] + dist[b * n + j];
    }
    active[b] = 0;
    size[a] += size[b];
    creation[a] = next_id++;
    --remaining;

    refresh(a);
    for (std::size_t j = 0; j < n; ++j) {
      if (!active[j] || j == a) continue;
      if (nn[j] == a || nn[j] == b) {
        refresh(j);
      } else if (detail::better(key(j, a), key(j, nn[j]))) {
        nn[j] = a;
      }
    }
  }
  return dg;
}

inline Dendrogram average_linkage(const FeatureMatrix& m, std::size_t min_clusters = 1) {
  return average_linkage(pairwise_cosine(m), m.num_rows(), min_clusters);
}

/// Agglomerative clustering (cosine distance, average linkage) into `c` clusters.
inline HardClustering agglomerative_cluster(const FeatureMatrix& m, std::size_t c = 7) {
  if (c < 1) throw Error("cluster count must be at least 1");
  return average_linkage(m, c).cut(c);
}

/// p(instance, cluster) = share of the instance's k representatives in that cluster.
inline SenseAssignment induce_soft(const HardClustering& h, std::span<const RowMeta> meta, std::size_t k,
                                   std::string_view label_prefix = "c") {
  if (h.labels.size() != meta.size()) throw Error("clustering and row metadata differ in length");
  std::map<std::string, std::map<std::size_t, std::size_t>> counts;
  std::map<std::string, std::size_t> rows;
  for (std::size_t i = 0; i < meta.size(); ++i) {
    ++counts[meta[i].instance_id][h.labels[i]];
    ++rows[meta[i].instance_id];
  }
  SenseAssignment a;
  for (const auto& [id, per_cluster] : counts) {
    if (rows[id] != k)
      throw Error("instance " + id + " has " + std::to_string(rows[id]) + " representatives, expected " + std::to_string(k));
    auto& out = a.clusters[id];
    for (const auto& [label, cnt] : per_cluster)
      out[std::string(label_prefix) + std::to_string(label)] = static_cast<double>(cnt) / static_cast<double>(k);
  }
  return a;
}

/// Debug dump line: {"instance_id", "rep_index", "cluster"}.
inline std::string cluster_to_json_line(const RowMeta& meta, std::size_t cluster) {
  nlohmann::ordered_json rec;
  rec["instance_id"] = meta.instance_id;
  rec["rep_index"] = meta.rep_index;
  rec["cluster"] = cluster;
  return rec.dump();
}

}  // namespace symwsi
