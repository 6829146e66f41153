#pragma once

// End-to-end sense induction: queries -> substitutes -> representatives ->
// clustering -> soft assignment, plus the multi-run, ablation and
// cluster-count sweep drivers built on top of it.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "symwsi/backend.hpp"
#include "symwsi/clustering.hpp"
#include "symwsi/corpus_io.hpp"
#include "symwsi/error.hpp"
#include "symwsi/evaluation.hpp"
#include "symwsi/lemmatizer.hpp"
#include "symwsi/parallel.hpp"
#include "symwsi/representatives.hpp"
#include "symwsi/substitutes.hpp"

namespace symwsi {

struct PipelineConfig {
  bool use_pattern = true;
  bool use_lemmatization = true;
  bool use_tfidf = true;
  std::size_t cutoff = 50;
  std::size_t k = 20;
  std::size_t ell = 4;
  std::size_t clusters = 7;
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  std::string conjunction = "and";
  std::size_t threads = 0;  ///< 0 = hardware concurrency
  bool collect_debug = false;

  void validate() const {
    if (cutoff < 1 || k < 1 || ell < 1 || runs < 1) throw Error("cutoff, k, l and runs must all be at least 1");
    if (clusters < 1) throw Error("cluster count must be at least 1");
    if (conjunction.empty() && use_pattern) throw Error("pattern mode needs a conjunction");
  }

  SamplingConfig sampling(std::uint64_t run_seed) const { return {k, ell, run_seed}; }
};

inline const Lemmatizer& default_lemmatizer() {
  static const RuleLemmatizer lemmatizer;
  return lemmatizer;
}

/// Post-processed substitutes for every instance of one target.
struct TargetDistributions {
  Target target;
  std::vector<Instance> instances;
  std::vector<SubstituteDistribution> fwd;
  std::vector<SubstituteDistribution> bwd;
};

/// Queries the backend for every instance. Depends on the pattern,
/// lemmatization and cutoff settings only, so it can be shared across seeds.
inline std::vector<TargetDistributions> compute_distributions(const std::map<Target, std::vector<Instance>>& groups,
                                                              const LMBackend& backend, const PipelineConfig& cfg,
                                                              const Lemmatizer& lemmatizer = default_lemmatizer()) {
  cfg.validate();
  static const NullLemmatizer no_lemmas;
  const Lemmatizer& lem = cfg.use_lemmatization ? lemmatizer : static_cast<const Lemmatizer&>(no_lemmas);

  std::vector<TargetDistributions> out;
  out.reserve(groups.size());
  for (const auto& [target, insts] : groups) {
    if (insts.empty()) throw Error("target " + target.key() + " has no instances");
    out.push_back({target, insts, {}, {}});
  }
  parallel_for(out.size(), cfg.threads, [&](std::size_t t) {
    auto& td = out[t];
    td.fwd.reserve(td.instances.size());
    td.bwd.reserve(td.instances.size());
    for (const auto& inst : td.instances) {
      auto [fq, bq] = build_queries(inst, cfg.use_pattern, cfg.conjunction);
      td.fwd.push_back(postprocess(backend.predict(fq), lem, cfg.cutoff));
      td.bwd.push_back(postprocess(backend.predict(bq), lem, cfg.cutoff));
    }
  });
  return out;
}

/// Representatives and merge tree for one target under one seed.
struct TargetClustering {
  Target target;
  std::vector<RowMeta> meta;
  Dendrogram dendrogram;
  std::vector<Representative> reps;  // kept only with collect_debug
};

inline TargetClustering cluster_target(const TargetDistributions& td, const PipelineConfig& cfg, std::uint64_t run_seed,
                                       std::size_t min_clusters) {
  std::vector<Representative> reps;
  reps.reserve(td.instances.size() * cfg.k);
  const auto sc = cfg.sampling(run_seed);
  for (std::size_t i = 0; i < td.instances.size(); ++i) {
    auto r = sample_representatives(td.fwd[i], td.bwd[i], sc);
    std::move(r.begin(), r.end(), std::back_inserter(reps));
  }
  auto matrix = apply_weighting(build_matrix(reps), cfg.use_tfidf ? Weighting::tfidf : Weighting::raw);
  TargetClustering tc{td.target, std::move(matrix.meta), average_linkage(matrix, min_clusters), {}};
  if (cfg.collect_debug) tc.reps = std::move(reps);
  return tc;
}

inline std::vector<TargetClustering> cluster_targets(const std::vector<TargetDistributions>& dists,
                                                     const PipelineConfig& cfg, std::uint64_t run_seed,
                                                     std::size_t min_clusters) {
  std::vector<TargetClustering> out(dists.size());
  parallel_for(dists.size(), cfg.threads,
               [&](std::size_t t) { out[t] = cluster_target(dists[t], cfg, run_seed, min_clusters); });
  return out;
}

struct InductionResult {
  SenseAssignment assignment;
  std::map<std::string, Target> targets;
  // debug dumps, filled only with collect_debug
  std::vector<Representative> representatives;
  std::vector<std::pair<RowMeta, std::size_t>> row_clusters;

  std::string key_file() const { return write_key_file(assignment, targets); }
};

/// Cuts each target's tree at `clusters` and converts to soft assignments.
inline InductionResult assemble(const std::vector<TargetClustering>& clusterings, std::size_t clusters, std::size_t k,
                                bool collect_debug) {
  InductionResult res;
  for (const auto& tc : clusterings) {
    auto hard = tc.dendrogram.cut(clusters);
    auto soft = induce_soft(hard, tc.meta, k);
    for (auto& [id, probs] : soft.clusters) {
      res.targets.emplace(id, tc.target);
      res.assignment.clusters.emplace(id, std::move(probs));
    }
    if (collect_debug) {
      res.representatives.insert(res.representatives.end(), tc.reps.begin(), tc.reps.end());
      for (std::size_t i = 0; i < tc.meta.size(); ++i) res.row_clusters.emplace_back(tc.meta[i], hard.labels[i]);
    }
  }
  return res;
}

/// Full induction for one seed (`cfg.seed`). Targets are processed in
/// sorted lemma.pos order; results do not depend on `cfg.threads`.
inline InductionResult induce(const PipelineConfig& cfg, const std::vector<Instance>& instances,
                              const LMBackend& backend, const Lemmatizer& lemmatizer = default_lemmatizer()) {
  cfg.validate();
  if (instances.empty()) throw Error("no instances to induce senses for");
  Dataset ds{instances, {}};
  auto dists = compute_distributions(ds.by_target(), backend, cfg, lemmatizer);
  return assemble(cluster_targets(dists, cfg, cfg.seed, cfg.clusters), cfg.clusters, cfg.k, cfg.collect_debug);
}

/// Seeds used by the repeated-run protocol: seed, seed+1, ..., seed+runs-1.
inline std::vector<std::uint64_t> run_seeds(const PipelineConfig& cfg) {
  std::vector<std::uint64_t> s(cfg.runs);
  for (std::size_t r = 0; r < cfg.runs; ++r) s[r] = cfg.seed + r;
  return s;
}

inline void require_gold(const Dataset& ds) {
  for (const auto& inst : ds.instances)
    if (!ds.gold.senses.count(inst.id)) throw Error("instance " + inst.id + " has no gold senses");
}

struct ProtocolResult {
  std::vector<ScoreReport> reports;
  RunStatistics stats;
  std::optional<Stat> tense_nmi;  ///< present when every verb instance has a tense
};

namespace detail {

inline bool has_tense_data(const Dataset& ds) {
  bool any_verb = false;
  for (const auto& inst : ds.instances) {
    if (inst.target.pos != Pos::verb) continue;
    any_verb = true;
    if (!inst.tense) return false;
  }
  return any_verb;
}

inline ProtocolResult run_protocol_on(const std::vector<TargetDistributions>& dists, const Dataset& ds,
                                      const PipelineConfig& cfg, std::size_t clusters, const ScoreOptions& sopts,
                                      NmiNorm norm) {
  ProtocolResult pr;
  const auto targets = ds.targets();
  const bool tense = has_tense_data(ds);
  std::vector<double> tense_values;
  for (auto s : run_seeds(cfg)) {
    auto res = assemble(cluster_targets(dists, cfg, s, clusters), clusters, cfg.k, false);
    pr.reports.push_back(score(ds.gold, res.assignment, targets, sopts));
    if (tense) tense_values.push_back(tense_sense_nmi(ds.instances, res.assignment, norm));
  }
  pr.stats = aggregate_runs(pr.reports);
  if (tense) pr.tense_nmi = mean_std(tense_values);
  return pr;
}

}  // namespace detail

/// Induces and scores `cfg.runs` times with consecutive seeds.
inline ProtocolResult run_protocol(const PipelineConfig& cfg, const Dataset& ds, const LMBackend& backend,
                                   const ScoreOptions& sopts = {}, NmiNorm norm = NmiNorm::max,
                                   const Lemmatizer& lemmatizer = default_lemmatizer()) {
  cfg.validate();
  require_gold(ds);
  auto dists = compute_distributions(ds.by_target(), backend, cfg, lemmatizer);
  return detail::run_protocol_on(dists, ds, cfg, cfg.clusters, sopts, norm);
}

struct AblationVariant {
  std::string name;
  bool pattern;
  bool lemmatization;
  bool tfidf;
};

inline const std::vector<AblationVariant>& ablation_variants() {
  static const std::vector<AblationVariant> v{
      {"full", true, true, true},
      {"w/o SP", false, true, true},
      {"w/o LEM", true, false, true},
      {"w/o TFIDF", true, true, false},
      {"w/o LEM and SP", false, false, true},
      {"w/o ALL", false, false, false},
  };
  return v;
}

struct AblationRow {
  AblationVariant variant;
  ProtocolResult result;
};

inline std::vector<AblationRow> ablate(const PipelineConfig& cfg, const Dataset& ds, const LMBackend& backend,
                                       const ScoreOptions& sopts = {}, NmiNorm norm = NmiNorm::max,
                                       const Lemmatizer& lemmatizer = default_lemmatizer()) {
  cfg.validate();
  require_gold(ds);
  const auto groups = ds.by_target();
  std::map<std::pair<bool, bool>, std::vector<TargetDistributions>> cache;
  std::vector<AblationRow> rows;
  for (const auto& v : ablation_variants()) {
    PipelineConfig c = cfg;
    c.use_pattern = v.pattern;
    c.use_lemmatization = v.lemmatization;
    c.use_tfidf = v.tfidf;
    auto key = std::make_pair(v.pattern, v.lemmatization);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, compute_distributions(groups, backend, c, lemmatizer)).first;
    rows.push_back({v, detail::run_protocol_on(it->second, ds, c, c.clusters, sopts, norm)});
  }
  return rows;
}

struct SweepPoint {
  std::size_t clusters = 0;
  MetricStats stats;
};

/// One induce+score per cluster count in [from, to], averaged over runs.
/// Each seed's merge tree is built once and cut at every count.
inline std::vector<SweepPoint> sweep_clusters(const PipelineConfig& cfg, const Dataset& ds, const LMBackend& backend,
                                              std::size_t from = 4, std::size_t to = 15,
                                              const ScoreOptions& sopts = {},
                                              const Lemmatizer& lemmatizer = default_lemmatizer()) {
  cfg.validate();
  if (from < 1 || to < from) throw Error("cluster range must satisfy 1 <= from <= to");
  require_gold(ds);
  auto dists = compute_distributions(ds.by_target(), backend, cfg, lemmatizer);
  const auto targets = ds.targets();

  std::map<std::size_t, std::vector<ScoreReport>> reports;
  for (auto s : run_seeds(cfg)) {
    auto trees = cluster_targets(dists, cfg, s, from);
    for (std::size_t c = from; c <= to; ++c)
      reports[c].push_back(score(ds.gold, assemble(trees, c, cfg.k, false).assignment, targets, sopts));
  }
  std::vector<SweepPoint> out;
  for (const auto& [c, reps] : reports) out.push_back({c, aggregate_runs(reps).overall});
  return out;
}

/// Query records for an external LM bridge, one per instance and direction
/// (and per pattern mode when `both_modes`), in sorted target order.
inline std::string export_queries(const std::vector<Instance>& instances, const PipelineConfig& cfg,
                                  bool both_modes = false) {
  Dataset ds{instances, {}};
  std::vector<bool> modes = both_modes ? std::vector<bool>{true, false} : std::vector<bool>{cfg.use_pattern};
  std::string out;
  for (const auto& [target, insts] : ds.by_target())
    for (const auto& inst : insts)
      for (bool mode : modes) {
        auto [f, b] = build_queries(inst, mode, cfg.conjunction);
        out += query_to_json_line(f) + "\n";
        out += query_to_json_line(b) + "\n";
      }
  return out;
}

}  // namespace symwsi
