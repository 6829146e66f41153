// symwsi: word sense induction from directional substitute distributions.
//
//   symwsi induce --instances data.jsonl --distributions subs.jsonl --out senses.key
//   symwsi evaluate --key senses.key --gold gold.key --per-pos
//   symwsi ablate --instances data.jsonl --backend ngram --corpus corpus.txt --runs 30
//   symwsi sweep-clusters --instances data.jsonl --distributions subs.jsonl --from 4 --to 15
//   symwsi export-queries --instances data.jsonl --out queries.jsonl
//   symwsi make-synthetic --out-dir synth/

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include "symwsi/symwsi.hpp"

namespace {

using namespace symwsi;

struct Options {
  // inputs
  std::string instances;
  std::string gold;
  std::string backend = "file";
  std::string distributions;
  std::string corpus;
  int order = 3;
  std::string lemma_table;
  std::string out;

  // pipeline
  PipelineConfig cfg;
  bool no_sp = false, no_lem = false, no_tfidf = false;

  // scoring
  bool per_pos = false;
  bool json = false;
  bool intersection = false;
  std::vector<std::string> exclude;
  std::string aggregation = "arithmetic";
  double threshold = 0.0;
  std::string nmi_norm = "max";

  // command specific
  std::string key;
  std::string dump_reps, dump_clusters;
  std::size_t from = 4, to = 15;
  bool both_modes = false;
  std::string out_dir = ".";
  std::size_t per_sense = 50, corpus_sentences = 2000;
  std::string pseudoword = "guitarsalmon";
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return in;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out.flush()) throw Error("failed writing " + path);
}

PipelineConfig pipeline_config(const Options& o) {
  PipelineConfig c = o.cfg;
  c.use_pattern = !o.no_sp;
  c.use_lemmatization = !o.no_lem;
  c.use_tfidf = !o.no_tfidf;
  c.validate();
  return c;
}

ScoreOptions score_options(const Options& o) {
  ScoreOptions s;
  s.membership_threshold = o.threshold;
  s.aggregation = o.aggregation == "geometric" ? Aggregation::geometric : Aggregation::arithmetic;
  s.restrict_to_intersection = o.intersection;
  s.exclude_targets.insert(o.exclude.begin(), o.exclude.end());
  return s;
}

NmiNorm nmi_norm(const Options& o) {
  if (o.nmi_norm == "sqrt") return NmiNorm::sqrt;
  if (o.nmi_norm == "arithmetic") return NmiNorm::arithmetic;
  return NmiNorm::max;
}

std::unique_ptr<LMBackend> make_backend(const Options& o) {
  if (o.backend == "ngram") {
    if (o.corpus.empty()) throw Error("--backend ngram needs --corpus");
    auto lm = NgramBackend::train(read_corpus(o.corpus), {o.order, 0.01, 100});
    return std::make_unique<NgramBackend>(std::move(lm));
  }
  if (o.distributions.empty()) throw Error("--backend file needs --distributions");
  return std::make_unique<FileBackend>(FileBackend::load(o.distributions));
}

std::unique_ptr<Lemmatizer> make_lemmatizer(const Options& o) {
  if (o.lemma_table.empty()) return std::make_unique<RuleLemmatizer>();
  return std::make_unique<RuleLemmatizer>(load_exception_table(o.lemma_table));
}

// Instances, with gold taken from --gold (a key file) when given.
Dataset load_dataset(const Options& o, bool need_gold) {
  if (o.instances.empty()) throw Error("--instances is required");
  auto in = open_in(o.instances);
  Dataset ds = parse_instances(in);
  if (ds.instances.empty()) throw Error(o.instances + " contains no instances");
  if (!o.gold.empty()) {
    auto gin = open_in(o.gold);
    ds.gold = read_key_file(gin).as_gold();
  }
  if (need_gold) require_gold(ds);
  return ds;
}

std::string fixed(double v, int prec = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

std::string mean_pm_std(const Stat& s) { return fixed(s.mean) + " +/- " + fixed(s.std); }

void cmd_induce(const Options& o) {
  auto cfg = pipeline_config(o);
  cfg.collect_debug = !o.dump_reps.empty() || !o.dump_clusters.empty();
  auto ds = load_dataset(o, false);
  auto backend = make_backend(o);
  auto lem = make_lemmatizer(o);
  auto res = induce(cfg, ds.instances, *backend, *lem);
  // everything is computed before anything is written
  const std::string key = res.key_file();
  std::string reps, rows;
  for (const auto& r : res.representatives) reps += representative_to_json_line(r) + "\n";
  for (const auto& [meta, c] : res.row_clusters) rows += cluster_to_json_line(meta, c) + "\n";
  emit(o.out, key);
  if (!o.dump_reps.empty()) emit(o.dump_reps, reps);
  if (!o.dump_clusters.empty()) emit(o.dump_clusters, rows);
}

std::string score_table(const ScoreReport& r, bool per_pos) {
  std::string t = pad("scope", 12) + pad("FNMI", 9) + pad("FBC", 9) + "AVG\n";
  auto row = [&](const std::string& name, double a, double b, double c) {
    t += pad(name, 12) + pad(fixed(a), 9) + pad(fixed(b), 9) + fixed(c) + "\n";
  };
  if (per_pos)
    for (const auto& [p, s] : r.per_pos) row(std::string(pos_name(p)), s.fnmi, s.fbc, s.avg);
  row("all", r.fnmi, r.fbc, r.avg);
  return t;
}

void cmd_evaluate(const Options& o) {
  auto kin = open_in(o.key);
  auto sys = read_key_file(kin);
  GoldLabeling gold;
  std::map<std::string, Target> targets = sys.targets;
  if (!o.gold.empty()) {
    auto gin = open_in(o.gold);
    auto g = read_key_file(gin);
    gold = g.as_gold();
    for (const auto& [id, t] : g.targets) targets[id] = t;
  } else if (!o.instances.empty()) {
    auto ds = load_dataset(o, true);
    gold = ds.gold;
    for (const auto& [id, t] : ds.targets()) targets[id] = t;
  } else {
    throw Error("evaluate needs --gold or --instances with gold senses");
  }
  auto report = score(gold, sys.as_assignment(), targets, score_options(o));
  emit(o.out, o.json ? score_report_to_json_lines(report) : score_table(report, o.per_pos));
}

void cmd_ablate(const Options& o) {
  auto cfg = pipeline_config(o);
  auto ds = load_dataset(o, true);
  auto backend = make_backend(o);
  auto lem = make_lemmatizer(o);
  auto rows = ablate(cfg, ds, *backend, score_options(o), nmi_norm(o), *lem);

  std::string text;
  if (o.json) {
    for (const auto& row : rows) {
      const auto& st = row.result.stats;
      nlohmann::ordered_json rec;
      rec["variant"] = row.variant.name;
      rec["runs"] = st.runs;
      auto put = [](nlohmann::ordered_json& j, const MetricStats& m) {
        j["fnmi_mean"] = m.fnmi.mean;
        j["fnmi_std"] = m.fnmi.std;
        j["fbc_mean"] = m.fbc.mean;
        j["fbc_std"] = m.fbc.std;
        j["avg_mean"] = m.avg.mean;
        j["avg_std"] = m.avg.std;
      };
      put(rec, st.overall);
      for (const auto& [p, m] : st.per_pos) put(rec["per_pos"][std::string(pos_name(p))], m);
      if (row.result.tense_nmi) {
        rec["tense_nmi_mean"] = row.result.tense_nmi->mean;
        rec["tense_nmi_std"] = row.result.tense_nmi->std;
      }
      text += rec.dump() + "\n";
    }
  } else {
    std::vector<Pos> poses;
    for (const auto& [p, m] : rows.front().result.stats.per_pos) poses.push_back(p);
    const bool tense = rows.front().result.tense_nmi.has_value();
    text = pad("variant", 17);
    for (Pos p : poses) text += pad(std::string(pos_name(p)), 18);
    text += tense ? pad("all", 18) + "tense-NMI\n" : "all\n";
    for (const auto& row : rows) {
      const auto& st = row.result.stats;
      text += pad(row.variant.name, 17);
      for (Pos p : poses) text += pad(mean_pm_std(st.per_pos.at(p).avg), 18);
      if (tense) {
        text += pad(mean_pm_std(st.overall.avg), 18) + fixed(row.result.tense_nmi->mean, 3) + " +/- " +
                fixed(row.result.tense_nmi->std, 3) + "\n";
      } else {
        text += mean_pm_std(st.overall.avg) + "\n";
      }
    }
    text += "AVG per POS, mean +/- sample std over " + std::to_string(cfg.runs) + " run(s)\n";
  }
  emit(o.out, text);
}

void cmd_sweep(const Options& o) {
  auto cfg = pipeline_config(o);
  auto ds = load_dataset(o, true);
  auto backend = make_backend(o);
  auto lem = make_lemmatizer(o);
  auto points = sweep_clusters(cfg, ds, *backend, o.from, o.to, score_options(o), *lem);
  std::string text;
  if (!o.json) text = pad("clusters", 10) + pad("AVG", 18) + pad("FNMI", 9) + "FBC\n";
  for (const auto& p : points) {
    if (o.json) {
      nlohmann::ordered_json rec;
      rec["clusters"] = p.clusters;
      rec["avg_mean"] = p.stats.avg.mean;
      rec["avg_std"] = p.stats.avg.std;
      rec["fnmi_mean"] = p.stats.fnmi.mean;
      rec["fbc_mean"] = p.stats.fbc.mean;
      text += rec.dump() + "\n";
    } else {
      text += pad(std::to_string(p.clusters), 10) + pad(mean_pm_std(p.stats.avg), 18) + pad(fixed(p.stats.fnmi.mean), 9) +
              fixed(p.stats.fbc.mean) + "\n";
    }
  }
  emit(o.out, text);
}

void cmd_export(const Options& o) {
  auto cfg = pipeline_config(o);
  auto ds = load_dataset(o, false);
  emit(o.out, export_queries(ds.instances, cfg, o.both_modes));
}

void cmd_make_synthetic(const Options& o) {
  SyntheticOptions so;
  so.instances_per_sense = o.per_sense;
  so.corpus_sentences = o.corpus_sentences;
  so.seed = o.cfg.seed;
  so.pseudoword = o.pseudoword;
  auto data = make_synthetic(so);

  std::string instances, corpus;
  for (const auto& inst : data.dataset.instances)
    instances += instance_to_json_line(inst, &data.dataset.gold.senses.at(inst.id)) + "\n";
  for (const auto& s : data.corpus) {
    std::string line;
    for (const auto& w : s) line += (line.empty() ? "" : " ") + w;
    corpus += line + "\n";
  }
  const std::filesystem::path dir(o.out_dir);
  std::filesystem::create_directories(dir);
  emit((dir / "instances.jsonl").string(), instances);
  emit((dir / "corpus.txt").string(), corpus);
  emit((dir / "gold.key").string(), write_key_file(data.dataset.gold, data.dataset.targets()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Word sense induction from directional substitute distributions"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  Options o;

  auto* inputs = "Inputs";
  app.add_option("--instances", o.instances, "Instances as JSON lines")->group(inputs);
  app.add_option("--gold", o.gold, "Gold senses as a key file")->group(inputs);
  app.add_option("--backend", o.backend, "Substitute source")->check(CLI::IsMember({"file", "ngram"}))->group(inputs);
  app.add_option("--distributions", o.distributions, "Precomputed distributions (file backend)")->group(inputs);
  app.add_option("--corpus", o.corpus, "Training text, one tokenized sentence per line (ngram backend)")->group(inputs);
  app.add_option("--order", o.order, "n-gram order (ngram backend)")->check(CLI::Range(2, 10))->group(inputs);
  app.add_option("--lemma-table", o.lemma_table, "Replacement irregular-form table (TSV)")->group(inputs);
  app.add_option("--out", o.out, "Output path (default: stdout)");

  auto* pipe = "Pipeline";
  app.add_option("--seed", o.cfg.seed, "Base seed; runs use seed, seed+1, ...")->group(pipe);
  app.add_option("--runs", o.cfg.runs, "Repeated runs per configuration")->group(pipe);
  app.add_option("--clusters", o.cfg.clusters, "Clusters per target")->group(pipe);
  app.add_option("--cutoff", o.cfg.cutoff, "Substitutes kept per distribution")->group(pipe);
  app.add_option("--k", o.cfg.k, "Representatives per instance")->group(pipe);
  app.add_option("--l", o.cfg.ell, "Draws per direction per representative")->group(pipe);
  app.add_option("--conjunction", o.cfg.conjunction, "Pattern conjunction")->group(pipe);
  app.add_option("--threads", o.cfg.threads, "Worker threads (0 = all cores)")->group(pipe);
  app.add_flag("--no-sp", o.no_sp, "Query with plain context instead of the symmetric pattern")->group(pipe);
  app.add_flag("--no-lem", o.no_lem, "Skip lemmatization of substitutes")->group(pipe);
  app.add_flag("--no-tfidf", o.no_tfidf, "Cluster raw counts")->group(pipe);

  auto* scoring = "Scoring";
  app.add_flag("--per-pos", o.per_pos, "Add per-POS rows")->group(scoring);
  app.add_flag("--json", o.json, "Line-delimited JSON instead of a table")->group(scoring);
  app.add_flag("--intersection", o.intersection, "Score only instances present in both labelings")->group(scoring);
  app.add_option("--exclude", o.exclude, "Target keys (lemma.pos) to leave out")->group(scoring);
  app.add_option("--aggregation", o.aggregation, "Per-target to corpus aggregation")
      ->check(CLI::IsMember({"arithmetic", "geometric"}))
      ->group(scoring);
  app.add_option("--threshold", o.threshold, "FNMI membership threshold")->group(scoring);
  app.add_option("--nmi-norm", o.nmi_norm, "NMI normalization for the tense analysis")
      ->check(CLI::IsMember({"max", "sqrt", "arithmetic"}))
      ->group(scoring);

  auto* induce_cmd = app.add_subcommand("induce", "Induce senses and write a key file");
  induce_cmd->add_option("--dump-reps", o.dump_reps, "Write sampled representatives as JSON lines");
  induce_cmd->add_option("--dump-clusters", o.dump_clusters, "Write representative cluster ids as JSON lines");

  auto* eval_cmd = app.add_subcommand("evaluate", "Score a key file against gold senses");
  eval_cmd->add_option("--key", o.key, "System key file")->required();

  auto* ablate_cmd = app.add_subcommand("ablate", "Run the SP/LEM/TF-IDF ablation grid");
  auto* sweep_cmd = app.add_subcommand("sweep-clusters", "Score a range of cluster counts");
  sweep_cmd->add_option("--from", o.from, "Smallest cluster count")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--to", o.to, "Largest cluster count")->check(CLI::PositiveNumber);

  auto* export_cmd = app.add_subcommand("export-queries", "Write LM queries for an external bridge");
  export_cmd->add_flag("--both-modes", o.both_modes, "Emit pattern and plain-context queries");

  auto* synth_cmd = app.add_subcommand("make-synthetic", "Generate a pseudoword dataset and training corpus");
  synth_cmd->add_option("--out-dir", o.out_dir, "Directory for instances.jsonl, corpus.txt and gold.key");
  synth_cmd->add_option("--per-sense", o.per_sense, "Instances per planted sense")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--corpus-sentences", o.corpus_sentences, "Training sentences")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--pseudoword", o.pseudoword, "Artificial target word");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*induce_cmd) cmd_induce(o);
    else if (*eval_cmd) cmd_evaluate(o);
    else if (*ablate_cmd) cmd_ablate(o);
    else if (*sweep_cmd) cmd_sweep(o);
    else if (*export_cmd) cmd_export(o);
    else if (*synth_cmd) cmd_make_synthetic(o);
  } catch (const ParseError& e) {
    std::cerr << "symwsi: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "symwsi: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
