#include "tools_commands.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "ortho/corpus.hpp"
#include "ortho/error.hpp"
#include "ortho/evaluation.hpp"
#include "ortho/levenshtein.hpp"
#include "ortho/manifest.hpp"
#include "ortho/memoryless.hpp"
#include "ortho/negatives.hpp"
#include "ortho/neural.hpp"
#include "ortho/rng.hpp"
#include "ortho/training.hpp"

namespace fs = std::filesystem;

namespace ortho::cli {

namespace {

// Outputs go to a fresh or explicitly forced directory; inputs are never
// touched.
void prepare_out_dir(const fs::path& out, bool force) {
  if (fs::exists(out) && !fs::is_directory(out))
    throw UsageError("output path exists and is not a directory: " + out.string());
  if (fs::exists(out) && !fs::is_empty(out) && !force)
    throw UsageError("output directory not empty (use --force): " + out.string());
  fs::create_directories(out);
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw DataError("write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

struct CommonOpts {
  std::string out;
  bool force = false;
  std::uint64_t seed = 0;
  bool preserve_case = false;

  NormalizePolicy policy() const { return {.lowercase = !preserve_case}; }
};

struct TrainOpts {
  std::size_t emb_size = 256;
  std::size_t layers = 2;
  std::size_t batch_size = 512;
  std::size_t val_freq = 50;
  std::size_t patience = 10;
  std::size_t max_epochs = 100;
  double learning_rate = 1e-3;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--emb-size", emb_size, "contextual embedding size (even)");
    cmd->add_option("--layers", layers, "encoder GRU layers");
    cmd->add_option("--batch-size", batch_size, "training batch size");
    cmd->add_option("--val-freq", val_freq, "batches between validations");
    cmd->add_option("--patience", patience, "validations without improvement before stopping");
    cmd->add_option("--max-epochs", max_epochs, "epoch cap");
    cmd->add_option("--lr", learning_rate, "optimizer step size");
  }

  TrainConfig to_config(std::uint64_t seed) const {
    TrainConfig cfg;
    cfg.batch_size = batch_size;
    cfg.validation_frequency = val_freq;
    cfg.patience = patience;
    cfg.max_epochs = max_epochs;
    cfg.seed = seed;
    cfg.d_emb = emb_size;
    cfg.layers = layers;
    cfg.learning_rate = learning_rate;
    return cfg;
  }

  void note(RunManifest& m) const {
    m.add_config("emb_size", std::to_string(emb_size));
    m.add_config("layers", std::to_string(layers));
    m.add_config("batch_size", std::to_string(batch_size));
    m.add_config("val_freq", std::to_string(val_freq));
    m.add_config("patience", std::to_string(patience));
    m.add_config("max_epochs", std::to_string(max_epochs));
    m.add_config("lr", fmt("%.9g", learning_rate));
  }
};

RunManifest base_manifest(const std::string& command, std::uint64_t seed) {
  RunManifest m;
  m.command = command;
  m.seed = seed;
  m.timestamp = current_timestamp();
  return m;
}

std::string histogram_table(const LdHistogram& h) {
  std::ostringstream out;
  out << "bucket\tcount\tpercent\n";
  for (std::size_t k = 0; k < 4; ++k) {
    out << LdHistogram::kBucketNames[k] << "\t" << h.counts[k] << "\t" << fmt("%.1f", h.percentages[k])
        << "\n";
  }
  out << "total\t" << h.total << "\t100.0\n";
  out << "ld0_excluded\t" << h.ld_zero << "\t-\n";
  return out.str();
}

std::string histogram_csv(const LdHistogram& h) {
  std::ostringstream out;
  out << "bucket,count,percent\n";
  for (std::size_t k = 0; k < 4; ++k)
    out << LdHistogram::kBucketNames[k] << "," << h.counts[k] << "," << fmt("%.1f", h.percentages[k])
        << "\n";
  out << "ld0_excluded," << h.ld_zero << ",\n";
  return out.str();
}

Alphabet alphabet_for_training(std::span<const TokenPair> pairs, const NegativeSet* train_negs,
                               const NegativeSet* val_negs) {
  std::vector<char32_t> symbols;
  auto add_token = [&](const Token& t) {
    for (char32_t c : t.chars()) symbols.push_back(c);
  };
  for (const TokenPair& p : pairs) {
    add_token(p.variant);
    add_token(p.standard);
  }
  for (const NegativeSet* set : {train_negs, val_negs}) {
    if (!set) continue;
    for (const NegativeRow& r : set->rows) {
      add_token(r.variant);
      add_token(r.candidate);
    }
  }
  return Alphabet::from_symbols(std::move(symbols));
}

// ---------------------------------------------------------------------------
// characterize

int cmd_characterize(const std::string& corpus, const std::string& format_name,
                     const CommonOpts& common) {
  PairFormat format = parse_pair_format(format_name);
  LoadedPairs loaded = load_pairs(corpus, format, common.policy());
  LdHistogram h = ld_histogram(loaded.pairs);
  std::cout << histogram_table(h);
  std::cout << "pairs\t" << loaded.pairs.size() << "\nrejects\t" << loaded.rejects.size() << "\n";
  if (!common.out.empty()) {
    prepare_out_dir(common.out, common.force);
    write_text(fs::path(common.out) / "characterize.csv", histogram_csv(h));
    write_rejects(fs::path(common.out) / "rejects.tsv", loaded.rejects);
    RunManifest m = base_manifest("characterize", common.seed);
    m.add_config("format", format_name);
    m.add_config("preserve_case", common.preserve_case ? "1" : "0");
    m.add_input(corpus);
    m.write(common.out);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// extract

int cmd_extract(const std::string& text_path, const std::string& lexicon_path,
                const CommonOpts& common) {
  Lexicon lexicon = Lexicon::load(lexicon_path);
  std::string text = read_file(text_path);
  std::vector<Candidate> candidates = extract_candidates(text, lexicon);
  prepare_out_dir(common.out, common.force);
  std::ostringstream tsv;
  tsv << "candidate\tsentence\n";
  for (const Candidate& c : candidates) tsv << c.token << "\t" << c.sentence << "\n";
  write_text(fs::path(common.out) / "candidates.tsv", tsv.str());
  RunManifest m = base_manifest("extract", common.seed);
  m.add_input(text_path);
  m.add_input(lexicon_path);
  m.write(common.out);
  std::cout << "candidates\t" << candidates.size() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// gen-negatives

int cmd_gen_negatives(const std::string& corpus, const std::string& format_name,
                      const std::string& lexicon_path, const std::string& strategy_name,
                      std::size_t n, const CommonOpts& common) {
  PairFormat format = parse_pair_format(format_name);
  LoadedPairs loaded = load_pairs(corpus, format, common.policy());
  Lexicon lexicon = Lexicon::load(lexicon_path, "", common.policy());
  NegativeStrategy strategy{parse_strategy(strategy_name), n, common.seed};
  NegativeSet set = generate_negatives(loaded.pairs, lexicon, strategy);
  prepare_out_dir(common.out, common.force);
  set.write_tsv(fs::path(common.out) / "negatives.tsv");
  std::vector<NegativeLdRow> stat{{strategy_name, n, set.avg_ld}};
  write_text(fs::path(common.out) / "negative_stats.csv", negative_ld_report_csv(stat));
  RunManifest m = base_manifest("gen-negatives", common.seed);
  m.add_config("format", format_name);
  m.add_config("preserve_case", common.preserve_case ? "1" : "0");
  m.add_config("strategy", strategy_name);
  m.add_config("n", std::to_string(n));
  m.add_input(corpus);
  m.add_input(lexicon_path);
  m.write(common.out);
  std::cout << "negatives\t" << set.rows.size() << "\navg_ld\t" << fmt("%.6f", set.avg_ld) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// split

SplitSpec parse_split_spec(const std::string& fractions, const std::string& group,
                           std::uint64_t seed) {
  SplitSpec spec;
  spec.seed = seed;
  if (!fractions.empty()) {
    double f[3];
    if (std::sscanf(fractions.c_str(), "%lf,%lf,%lf", &f[0], &f[1], &f[2]) != 3)
      throw UsageError("--fractions expects three comma-separated numbers, e.g. 0.8,0.1,0.1");
    spec.train = f[0];
    spec.val = f[1];
    spec.test = f[2];
  }
  if (group == "pair") spec.group = SplitSpec::Group::Pair;
  else if (group == "variant-type") spec.group = SplitSpec::Group::VariantType;
  else throw UsageError("--group must be pair or variant-type");
  return spec;
}

int cmd_split(const std::string& corpus, const std::string& format_name,
              const std::string& fractions, const std::string& group, const CommonOpts& common) {
  PairFormat format = parse_pair_format(format_name);
  LoadedPairs loaded = load_pairs(corpus, format, common.policy());
  SplitSpec spec = parse_split_spec(fractions, group, common.seed);
  SplitResult r = split_pairs(loaded.pairs, spec);
  prepare_out_dir(common.out, common.force);
  write_pairs(fs::path(common.out) / "train.tsv", r.train);
  write_pairs(fs::path(common.out) / "val.tsv", r.val);
  write_pairs(fs::path(common.out) / "test.tsv", r.test);
  write_rejects(fs::path(common.out) / "rejects.tsv", loaded.rejects);
  RunManifest m = base_manifest("split", common.seed);
  m.add_config("format", format_name);
  m.add_config("preserve_case", common.preserve_case ? "1" : "0");
  m.add_config("fractions", fractions.empty() ? "0.8,0.1,0.1" : fractions);
  m.add_config("group", group);
  m.add_input(corpus);
  m.write(common.out);
  std::cout << "train\t" << r.train.size() << "\nval\t" << r.val.size() << "\ntest\t"
            << r.test.size() << "\nrejects\t" << loaded.rejects.size() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

int cmd_train(const std::string& train_pairs, const std::string& train_negs,
              const std::string& val_pairs, const std::string& val_negs,
              const std::string& format_name, const TrainOpts& topts, const CommonOpts& common) {
  PairFormat format = parse_pair_format(format_name);
  LoadedPairs train_loaded = load_pairs(train_pairs, format, common.policy());
  LoadedPairs val_loaded = load_pairs(val_pairs, format, common.policy());
  NegativeSet train_set = NegativeSet::load_tsv(train_negs);
  NegativeSet val_set = NegativeSet::load_tsv(val_negs);

  std::vector<TokenPair> all_pairs = train_loaded.pairs;
  all_pairs.insert(all_pairs.end(), val_loaded.pairs.begin(), val_loaded.pairs.end());
  Alphabet alphabet = alphabet_for_training(all_pairs, &train_set, &val_set);

  TrainConfig cfg = topts.to_config(common.seed);
  NeuralEditModel model =
      NeuralEditModel::init(alphabet, {.d_emb = cfg.d_emb, .layers = cfg.layers}, cfg.seed);
  TrainResult result = train(std::move(model), make_labeled_rows(train_loaded.pairs, &train_set),
                             make_labeled_rows(val_loaded.pairs, &val_set), cfg);

  prepare_out_dir(common.out, common.force);
  result.model.save(fs::path(common.out) / "model.nedm");
  result.report.write_history_csv(fs::path(common.out) / "history.csv");
  result.report.write_summary(fs::path(common.out) / "summary.json");
  RunManifest m = base_manifest("train", common.seed);
  m.add_config("format", format_name);
  topts.note(m);
  m.add_input(train_pairs);
  m.add_input(train_negs);
  m.add_input(val_pairs);
  m.add_input(val_negs);
  m.write(common.out);
  std::cout << "best_val_f1\t" << fmt("%.6f", result.report.best_val_f1()) << "\nthreshold\t"
            << fmt("%.6f", result.model.threshold()) << "\nstop_reason\t"
            << result.report.stop_reason << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

int cmd_evaluate(const std::string& model_path, const std::string& test_pairs,
                 const std::string& test_negs, const std::string& format_name,
                 const CommonOpts& common) {
  NeuralEditModel model = NeuralEditModel::load(model_path);
  LoadedPairs loaded = load_pairs(test_pairs, parse_pair_format(format_name), common.policy());
  NegativeSet negs = NegativeSet::load_tsv(test_negs);
  EvalReport report = classify_pairs(model, make_labeled_rows(loaded.pairs, &negs));
  prepare_out_dir(common.out, common.force);
  write_text(fs::path(common.out) / "eval_summary.csv", eval_summary_csv(report));
  RunManifest m = base_manifest("evaluate", common.seed);
  m.add_config("format", format_name);
  m.add_input(model_path);
  m.add_input(test_pairs);
  m.add_input(test_negs);
  m.write(common.out);
  std::cout << eval_summary_csv(report);
  return 0;
}

// ---------------------------------------------------------------------------
// rank

int cmd_rank(const std::string& model_path, const std::string& test_pairs,
             const std::string& lexicon_path, const std::string& format_name,
             const CommonOpts& common) {
  NeuralEditModel model = NeuralEditModel::load(model_path);
  LoadedPairs loaded = load_pairs(test_pairs, parse_pair_format(format_name), common.policy());
  Lexicon lexicon = Lexicon::load(lexicon_path, "", common.policy());
  EvalReport report = rank_against_lexicon(model, loaded.pairs, lexicon);
  prepare_out_dir(common.out, common.force);
  write_ranks_tsv(fs::path(common.out) / "ranks.tsv", *report.ranking);
  write_text(fs::path(common.out) / "rank_summary.csv", eval_summary_csv(report));
  RunManifest m = base_manifest("rank", common.seed);
  m.add_config("format", format_name);
  m.add_input(model_path);
  m.add_input(test_pairs);
  m.add_input(lexicon_path);
  m.write(common.out);
  std::cout << eval_summary_csv(report);
  return 0;
}

// ---------------------------------------------------------------------------
// sweep + report

struct CellResult {
  std::string strategy;
  std::size_t n = 0;
  bool ok = false;
  std::string error;
  int error_code = 0;
  double f1 = 0.0, mrr = 0.0, train_avg_ld = 0.0;
};

std::string cell_dir_name(const std::string& strategy, std::size_t n) {
  return "cell_" + strategy + "_" + std::to_string(n);
}

std::string cell_summary_csv(const CellResult& c) {
  std::ostringstream out;
  out << "strategy,n,f1,mrr,train_avg_ld\n";
  out << c.strategy << "," << c.n << "," << fmt("%.6f", c.f1) << "," << fmt("%.6f", c.mrr) << ","
      << fmt("%.6f", c.train_avg_ld) << "\n";
  return out.str();
}

void run_sweep_cell(const SplitResult& split, const Lexicon& lexicon, const Alphabet& alphabet,
                    const TrainOpts& topts, std::uint64_t base_seed, const fs::path& out_root,
                    CellResult& cell) {
  std::uint64_t cell_seed =
      derive_seed(base_seed, "cell-" + cell.strategy, static_cast<std::uint64_t>(cell.n));
  StrategyKind kind = parse_strategy(cell.strategy);
  NegativeSet train_negs =
      generate_negatives(split.train, lexicon, {kind, cell.n, derive_seed(cell_seed, "neg-train")});
  NegativeSet val_negs =
      generate_negatives(split.val, lexicon, {kind, cell.n, derive_seed(cell_seed, "neg-val")});
  NegativeSet test_negs =
      generate_negatives(split.test, lexicon, {kind, cell.n, derive_seed(cell_seed, "neg-test")});

  TrainConfig cfg = topts.to_config(cell_seed);
  NeuralEditModel model =
      NeuralEditModel::init(alphabet, {.d_emb = cfg.d_emb, .layers = cfg.layers}, cell_seed);
  TrainResult result = train(std::move(model), make_labeled_rows(split.train, &train_negs),
                             make_labeled_rows(split.val, &val_negs), cfg);

  EvalReport cls = classify_pairs(result.model, make_labeled_rows(split.test, &test_negs));
  EvalReport rnk = rank_against_lexicon(result.model, split.test, lexicon);

  fs::path dir = out_root / cell_dir_name(cell.strategy, cell.n);
  fs::create_directories(dir);
  result.model.save(dir / "model.nedm");
  result.report.write_history_csv(dir / "history.csv");
  result.report.write_summary(dir / "summary.json");
  train_negs.write_tsv(dir / "train_negatives.tsv");
  write_text(dir / "eval_summary.csv", eval_summary_csv(cls));
  write_ranks_tsv(dir / "ranks.tsv", *rnk.ranking);

  cell.f1 = cls.classification->f1;
  cell.mrr = rnk.ranking->mrr;
  cell.train_avg_ld = train_negs.avg_ld;
  cell.ok = true;
  write_text(dir / "cell_summary.csv", cell_summary_csv(cell));
}

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void write_aggregates(const fs::path& out_root, const std::vector<CellResult>& cells) {
  std::vector<SweepCell> table;
  std::ostringstream fig1, fig2, failures;
  fig1 << "strategy,n,mrr\n";
  fig2 << "strategy,n,avg_ld\n";
  failures << "strategy,n,error\n";
  for (const CellResult& c : cells) {
    if (!c.ok) {
      failures << c.strategy << "," << c.n << "," << c.error << "\n";
      continue;
    }
    table.push_back({c.strategy, c.n, c.f1, c.mrr});
    fig1 << c.strategy << "," << c.n << "," << fmt("%.6f", c.mrr) << "\n";
    fig2 << c.strategy << "," << c.n << "," << fmt("%.6f", c.train_avg_ld) << "\n";
  }
  write_text(out_root / "table2.csv", sweep_report_csv(table));
  write_text(out_root / "fig1_mrr_by_n.csv", fig1.str());
  write_text(out_root / "fig2_avg_ld.csv", fig2.str());
  write_text(out_root / "failures.csv", failures.str());
}

int cmd_sweep(const std::string& corpus, const std::string& format_name,
              const std::string& lexicon_path, const std::string& strategies,
              const std::string& counts, const std::string& fractions, std::size_t jobs,
              const TrainOpts& topts, const CommonOpts& common) {
  PairFormat format = parse_pair_format(format_name);
  LoadedPairs loaded = load_pairs(corpus, format, common.policy());
  Lexicon lexicon = Lexicon::load(lexicon_path, "", common.policy());
  SplitSpec spec = parse_split_spec(fractions, "variant-type", common.seed);
  SplitResult split = split_pairs(loaded.pairs, spec);

  std::vector<TokenPair> lex_pairs;
  for (const Token& t : lexicon.tokens())
    lex_pairs.push_back({t, t, std::nullopt, std::nullopt});
  std::vector<TokenPair> alphabet_src = loaded.pairs;
  alphabet_src.insert(alphabet_src.end(), lex_pairs.begin(), lex_pairs.end());
  Alphabet alphabet = alphabet_from_pairs(alphabet_src);

  std::vector<CellResult> cells;
  for (const std::string& strategy : split_csv_list(strategies)) {
    parse_strategy(strategy); // validate early
    for (const std::string& n_str : split_csv_list(counts)) {
      CellResult c;
      c.strategy = strategy;
      c.n = std::stoull(n_str);
      if (c.n < 1) throw UsageError("--counts entries must be >= 1");
      cells.push_back(std::move(c));
    }
  }
  if (cells.empty()) throw UsageError("sweep needs at least one strategy and one count");

  prepare_out_dir(common.out, common.force);
  fs::path out_root(common.out);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t idx = next.fetch_add(1);
      if (idx >= cells.size()) return;
      CellResult& cell = cells[idx];
      try {
        run_sweep_cell(split, lexicon, alphabet, topts, common.seed, out_root, cell);
      } catch (const Error& e) {
        cell.ok = false;
        cell.error = e.what();
        cell.error_code = e.exit_code();
      } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
        cell.error_code = 3;
      }
    }
  };
  std::size_t thread_count = std::max<std::size_t>(1, std::min(jobs, cells.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < thread_count; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  write_aggregates(out_root, cells);
  RunManifest m = base_manifest("sweep", common.seed);
  m.add_config("format", format_name);
  m.add_config("strategies", strategies);
  m.add_config("counts", counts);
  m.add_config("fractions", fractions.empty() ? "0.8,0.1,0.1" : fractions);
  topts.note(m);
  m.add_input(corpus);
  m.add_input(lexicon_path);
  m.write(common.out);

  int failed_code = 0;
  for (const CellResult& c : cells) {
    std::cout << c.strategy << "\tn=" << c.n << "\t"
              << (c.ok ? "f1=" + fmt("%.4f", c.f1) + " mrr=" + fmt("%.4f", c.mrr)
                       : "FAILED: " + c.error)
              << "\n";
    if (!c.ok) failed_code = std::max(failed_code, c.error_code);
  }
  return failed_code;
}

int cmd_report(const std::string& sweep_dir, const CommonOpts& common) {
  std::vector<CellResult> cells;
  for (const auto& entry : fs::directory_iterator(sweep_dir)) {
    if (!entry.is_directory()) continue;
    fs::path summary = entry.path() / "cell_summary.csv";
    if (!fs::exists(summary)) continue;
    std::ifstream in(summary);
    std::string header, row;
    if (!std::getline(in, header) || !std::getline(in, row)) continue;
    CellResult c;
    std::stringstream ss(row);
    std::string field;
    std::getline(ss, c.strategy, ',');
    std::getline(ss, field, ',');
    c.n = std::stoull(field);
    std::getline(ss, field, ',');
    c.f1 = std::stod(field);
    std::getline(ss, field, ',');
    c.mrr = std::stod(field);
    std::getline(ss, field, ',');
    c.train_avg_ld = std::stod(field);
    c.ok = true;
    cells.push_back(std::move(c));
  }
  if (cells.empty()) throw DataError("no cell_summary.csv files found under " + sweep_dir);
  std::sort(cells.begin(), cells.end(), [](const CellResult& a, const CellResult& b) {
    return a.strategy != b.strategy ? a.strategy < b.strategy : a.n < b.n;
  });
  prepare_out_dir(common.out, common.force);
  write_aggregates(common.out, cells);
  RunManifest m = base_manifest("report", common.seed);
  m.add_config("sweep_dir", sweep_dir);
  m.write(common.out);
  std::cout << "cells\t" << cells.size() << "\n";
  return 0;
}

} // namespace

int run(int argc, char** argv) {
  CLI::App app{"orthopair: learnable edit distance for pairing orthographic variants"};
  app.require_subcommand(1);

  std::string corpus, format = "gb-tsv", lexicon, text, strategy = "random";
  std::string train_pairs, train_negs, val_pairs, val_negs, test_pairs, test_negs, model_path;
  std::string strategies = "random,ld,mixed", counts = "10,20,30,50", fractions, group =
      "variant-type", sweep_dir;
  std::size_t n = 10, jobs = 1;
  CommonOpts common;
  TrainOpts topts;

  auto add_common = [&](CLI::App* cmd, bool out_required) {
    auto* opt = cmd->add_option("--out", common.out, "output directory");
    if (out_required) opt->required();
    cmd->add_flag("--force", common.force, "allow writing into a non-empty output directory");
    cmd->add_option("--seed", common.seed, "PRNG seed");
    cmd->add_flag("--preserve-case", common.preserve_case,
                  "keep letter case during token normalization");
  };

  CLI::App* characterize = app.add_subcommand("characterize", "LD histogram of a pair corpus");
  characterize->add_option("--corpus", corpus)->required();
  characterize->add_option("--format", format)->check(CLI::IsMember({"gb-tsv", "fce-tsv"}));
  add_common(characterize, false);

  CLI::App* extract = app.add_subcommand("extract", "candidate orthovariants from raw text");
  extract->add_option("--text", text)->required();
  extract->add_option("--lexicon", lexicon)->required();
  add_common(extract, true);

  CLI::App* gen = app.add_subcommand("gen-negatives", "known-false pairings for a corpus");
  gen->add_option("--corpus", corpus)->required();
  gen->add_option("--format", format)->check(CLI::IsMember({"gb-tsv", "fce-tsv"}));
  gen->add_option("--lexicon", lexicon)->required();
  gen->add_option("--strategy", strategy)->check(CLI::IsMember({"random", "ld", "mixed"}));
  gen->add_option("--n", n, "negatives per variant");
  add_common(gen, true);

  CLI::App* split = app.add_subcommand("split", "train/val/test partition");
  split->add_option("--corpus", corpus)->required();
  split->add_option("--format", format)->check(CLI::IsMember({"gb-tsv", "fce-tsv"}));
  split->add_option("--fractions", fractions, "train,val,test (default 0.8,0.1,0.1)");
  split->add_option("--group", group)->check(CLI::IsMember({"pair", "variant-type"}));
  add_common(split, true);

  CLI::App* train_cmd = app.add_subcommand("train", "train a neural edit distance model");
  train_cmd->add_option("--train-pairs", train_pairs)->required();
  train_cmd->add_option("--train-negatives", train_negs)->required();
  train_cmd->add_option("--val-pairs", val_pairs)->required();
  train_cmd->add_option("--val-negatives", val_negs)->required();
  train_cmd->add_option("--format", format)->check(CLI::IsMember({"gb-tsv", "fce-tsv"}));
  topts.add_flags(train_cmd);
  add_common(train_cmd, true);

  CLI::App* evaluate = app.add_subcommand("evaluate", "pair classification F1 on a test set");
  evaluate->add_option("--model", model_path)->required();
  evaluate->add_option("--test-pairs", test_pairs)->required();
  evaluate->add_option("--test-negatives", test_negs)->required();
  evaluate->add_option("--format", format)->check(CLI::IsMember({"gb-tsv", "fce-tsv"}));
  add_common(evaluate, true);

  CLI::App* rank = app.add_subcommand("rank", "full-lexicon ranking with MRR");
  rank->add_option("--model", model_path)->required();
  rank->add_option("--test-pairs", test_pairs)->required();
  rank->add_option("--lexicon", lexicon)->required();
  rank->add_option("--format", format)->check(CLI::IsMember({"gb-tsv", "fce-tsv"}));
  add_common(rank, true);

  CLI::App* sweep = app.add_subcommand("sweep", "train and evaluate a strategy-by-count grid");
  sweep->add_option("--corpus", corpus)->required();
  sweep->add_option("--format", format)->check(CLI::IsMember({"gb-tsv", "fce-tsv"}));
  sweep->add_option("--lexicon", lexicon)->required();
  sweep->add_option("--strategies", strategies, "comma-separated subset of random,ld,mixed");
  sweep->add_option("--counts", counts, "comma-separated negative counts");
  sweep->add_option("--fractions", fractions, "train,val,test (default 0.8,0.1,0.1)");
  sweep->add_option("--jobs", jobs, "parallel cell workers");
  topts.add_flags(sweep);
  add_common(sweep, true);

  CLI::App* report = app.add_subcommand("report", "re-aggregate per-cell sweep outputs");
  report->add_option("--sweep-dir", sweep_dir)->required();
  add_common(report, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(characterize)) return cmd_characterize(corpus, format, common);
    if (app.got_subcommand(extract)) return cmd_extract(text, lexicon, common);
    if (app.got_subcommand(gen)) return cmd_gen_negatives(corpus, format, lexicon, strategy, n, common);
    if (app.got_subcommand(split)) return cmd_split(corpus, format, fractions, group, common);
    if (app.got_subcommand(train_cmd))
      return cmd_train(train_pairs, train_negs, val_pairs, val_negs, format, topts, common);
    if (app.got_subcommand(evaluate))
      return cmd_evaluate(model_path, test_pairs, test_negs, format, common);
    if (app.got_subcommand(rank)) return cmd_rank(model_path, test_pairs, lexicon, format, common);
    if (app.got_subcommand(sweep))
      return cmd_sweep(corpus, format, lexicon, strategies, counts, fractions, jobs, topts, common);
    if (app.got_subcommand(report)) return cmd_report(sweep_dir, common);
    throw UsageError("no subcommand given");
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 3;
  }
}

} // namespace ortho::cli
