// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one [PASS]/[FAIL] line per criterion (plus [SKIP]/[INFO] for the
// conditional and diagnostic items). Exits nonzero when a gating criterion
// fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ortho/corpus.hpp"
#include "ortho/error.hpp"
#include "ortho/evaluation.hpp"
#include "ortho/lattice.hpp"
#include "ortho/levenshtein.hpp"
#include "ortho/memoryless.hpp"
#include "ortho/negatives.hpp"
#include "ortho/neural.hpp"
#include "ortho/rng.hpp"
#include "ortho/token.hpp"
#include "ortho/training.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;
using namespace ortho;
namespace ot = ortho::testing;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Runner {
  bool all_ok = true;
  void report(int id, bool ok, const std::string& what, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", ok ? "PASS" : "FAIL", id, what.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!ok) all_ok = false;
  }
  void skip(int id, const std::string& what, const std::string& why) {
    std::printf("[SKIP] criterion %2d: %s (%s)\n", id, what.c_str(), why.c_str());
    std::fflush(stdout);
  }
  void info(int id, const std::string& what, const std::string& detail) {
    std::printf("[INFO] criterion %2d: %s (%s)\n", id, what.c_str(), detail.c_str());
    std::fflush(stdout);
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

struct CliResult {
  int exit_code;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  std::string cmd = std::string("SOURCE_DATE_EPOCH=1700000000 ") + ORTHO_CLI_PATH + " " + args +
                    " 2>&1";
  std::array<char, 4096> buf{};
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {127, "popen failed"};
  while (fgets(buf.data(), buf.size(), pipe)) out += buf.data();
  int status = pclose(pipe);
  return {WEXITSTATUS(status), out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

bool dirs_byte_identical(const fs::path& a, const fs::path& b, std::string& detail) {
  std::vector<std::string> names;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) names.push_back(fs::relative(e.path(), a).string());
  std::sort(names.begin(), names.end());
  for (const std::string& name : names) {
    if (!fs::exists(b / name)) {
      detail = name + " missing in rerun";
      return false;
    }
    if (slurp(a / name) != slurp(b / name)) {
      detail = name + " differs";
      return false;
    }
  }
  return true;
}

std::vector<std::u32string> all_strings_up_to(std::size_t max_len, std::u32string_view alphabet) {
  std::vector<std::u32string> out{U""};
  std::vector<std::u32string> frontier{U""};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<std::u32string> next;
    for (const std::u32string& s : frontier)
      for (char32_t c : alphabet) {
        next.push_back(s + c);
        out.push_back(next.back());
      }
    frontier = std::move(next);
  }
  return out;
}

// shared synthetic corpus for criteria 8 and 9
struct SynthSetup {
  Lexicon lexicon;          // the full 1,000-word ranking lexicon
  std::vector<TokenPair> corpus; // 500 perturbed words
};

SynthSetup make_synth() {
  Lexicon lexicon = Lexicon::load(fs::path(ORTHO_DATA_DIR) / "brown_1k.txt", "brown");
  std::vector<TokenPair> corpus = ot::synth_corpus(
      lexicon, 500,
      {ot::PerturbRule::VowelShiftForward, ot::PerturbRule::ApostropheElision,
       ot::PerturbRule::ConsonantDoubling},
      20240817, 2);
  return {std::move(lexicon), std::move(corpus)};
}

std::string gb_tsv_of(const std::vector<TokenPair>& pairs) {
  std::ostringstream out;
  out << "variant\tstandard\tcontext\tsource_id\n";
  for (const TokenPair& p : pairs)
    out << p.variant.str() << "\t" << p.standard.str() << "\t\t\n";
  return out.str();
}

} // namespace

// ---------------------------------------------------------------------------

static void criterion_1(Runner& r) {
  auto start = Clock::now();
  std::vector<std::u32string> strings = all_strings_up_to(5, U"abc");
  std::size_t pairs = 0, mismatches = 0;
  for (const std::u32string& a : strings) {
    for (const std::u32string& b : strings) {
      ++pairs;
      if (levenshtein(std::u32string_view(a), std::u32string_view(b)) !=
          ot::lev_recursive_oracle(a, b))
        ++mismatches;
    }
  }
  double secs = seconds_since(start);
  r.report(1, mismatches == 0 && secs < 10.0, "Levenshtein DP equals exhaustive recursive oracle",
           std::to_string(pairs) + " pairs, " + std::to_string(mismatches) + " mismatches, " +
               fmt("%.2f", secs) + " s");
}

static void criterion_2(Runner& r) {
  Rng rng(777);
  double worst = 0.0;
  std::size_t grids = 0;
  for (std::size_t m = 0; m <= 3; ++m) {
    for (std::size_t n = 0; n <= 3; ++n) {
      if (m == 0 && n == 0) continue;
      for (int rep = 0; rep < 20; ++rep) {
        CostGrid g = ot::random_per_cell_grid(m, n, rng);
        double delta = std::abs(std::exp(forward_backward(g).loglik) - ot::path_sum_linear(g));
        worst = std::max(worst, delta);
        ++grids;
      }
    }
  }
  r.report(2, worst <= 1e-9, "lattice likelihood equals path-enumeration sum",
           std::to_string(grids) + " grids, worst |delta| = " + fmt("%.2e", worst));
}

static void criterion_3(Runner& r) {
  Alphabet alphabet = Alphabet::from_symbols({U'a', U'b', U'c', U'd', U'e'});
  NeuralEditModel model = NeuralEditModel::init(alphabet, {.d_emb = 8, .layers = 2}, 99);
  std::vector<LabeledPair> batch{
      {Token::from_chars(U"abc"), Token::from_chars(U"abd"), true},
      {Token::from_chars(U"ba"), Token::from_chars(U"ecd"), false},
  };
  const double step = 1e-5, tol = 1e-4;
  std::size_t checked = 0, failed = 0;
  double worst = 0.0;
  const LossWeights component_sets[4] = {
      {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}};
  for (const LossWeights& w : component_sets) {
    std::vector<LatticeResult> frozen = batch_lattices(model, batch);
    NeuralGradients grads = NeuralGradients::zeros_like(model);
    loss_and_gradients(model, batch, grads, w);
    auto value = [&]() {
      LossBreakdown lb = loss_with_posteriors(model, batch, frozen);
      return w.em * lb.em_loss + w.bce * lb.bce_loss + w.nonmatch * lb.nonmatch_nll;
    };
    auto params = model.named_parameters();
    std::vector<Tensor*> gs = grads.tensors();
    for (std::size_t t = 0; t < params.size(); ++t) {
      std::span<double> flat = params[t].second->flat();
      std::span<const double> gflat = gs[t]->flat();
      for (std::size_t k = 0; k < flat.size(); ++k) {
        double saved = flat[k];
        flat[k] = saved + step;
        double up = value();
        flat[k] = saved - step;
        double down = value();
        flat[k] = saved;
        double numeric = (up - down) / (2.0 * step);
        double rel = std::abs(gflat[k] - numeric) /
                     std::max({std::abs(gflat[k]), std::abs(numeric), 1e-5});
        worst = std::max(worst, rel);
        ++checked;
        if (rel >= tol) ++failed;
      }
    }
  }
  r.report(3, failed == 0,
           "analytic gradients match central finite differences for every component",
           std::to_string(checked) + " parameter checks, worst rel err = " + fmt("%.2e", worst));
}

static void criterion_4(Runner& r) {
  Rng rng(404);
  std::vector<TokenPair> pairs;
  while (pairs.size() < 50) {
    std::u32string a, b;
    std::size_t la = 1 + rng.below(6), lb = 1 + rng.below(6);
    for (std::size_t k = 0; k < la; ++k) a.push_back(U'a' + static_cast<char32_t>(rng.below(5)));
    for (std::size_t k = 0; k < lb; ++k) b.push_back(U'a' + static_cast<char32_t>(rng.below(5)));
    pairs.push_back({Token::from_chars(a), Token::from_chars(b), std::nullopt, std::nullopt});
  }
  Alphabet alphabet = alphabet_from_pairs(pairs);
  MemorylessEditModel model = em_fit_memoryless(pairs, alphabet, 10, 1e-6);
  double worst_drop = 0.0;
  for (std::size_t k = 1; k < model.loglik_history().size(); ++k)
    worst_drop = std::max(worst_drop, model.loglik_history()[k - 1] - model.loglik_history()[k]);
  r.report(4, model.loglik_history().size() == 10 && worst_drop <= 1e-10,
           "EM log-likelihood non-decreasing over 10 iterations",
           "worst per-step drop = " + fmt("%.2e", worst_drop));
}

static void criterion_5(Runner& r) {
  Alphabet alphabet = Alphabet::from_symbols({U'a', U'b', U'c', U'd', U'e', U'f'});
  NeuralEditModel model = NeuralEditModel::init(alphabet, {.d_emb = 8, .layers = 2}, 31);
  // force constant logits: the scorer then equals the memoryless joint model
  // del(a) = q_del Ps(a), ins(b) = q_ins Pt(b), sub(a,b) = q_sub Ps(a) Pt(b)
  model.head_w1.fill(0.0);
  model.head_b1.fill(0.0);
  model.head_w2.fill(0.0);
  model.emit_src_w.fill(0.0);
  model.emit_tgt_w.fill(0.0);
  model.head_b2(0) = 0.2;
  model.head_b2(1) = -0.4;
  model.head_b2(2) = 0.7;
  Rng bias_rng(606);
  for (double& v : model.emit_src_b.flat()) v = bias_rng.uniform(-1.0, 1.0);
  for (double& v : model.emit_tgt_b.flat()) v = bias_rng.uniform(-1.0, 1.0);

  const std::size_t asz = alphabet.size();
  double zmax = std::max({model.head_b2(0), model.head_b2(1), model.head_b2(2)});
  double denom = std::exp(model.head_b2(0) - zmax) + std::exp(model.head_b2(1) - zmax) +
                 std::exp(model.head_b2(2) - zmax);
  double q[3];
  for (int k = 0; k < 3; ++k) q[k] = std::exp(model.head_b2(k) - zmax) / denom;
  auto softmax_bias = [&](const Tensor& bias) {
    std::vector<double> p(asz);
    double bmax = -1e300, bden = 0.0;
    for (std::size_t c = 0; c < asz; ++c) bmax = std::max(bmax, bias(c));
    for (std::size_t c = 0; c < asz; ++c) bden += std::exp(bias(c) - bmax);
    for (std::size_t c = 0; c < asz; ++c) p[c] = std::exp(bias(c) - bmax) / bden;
    return p;
  };
  std::vector<double> ps = softmax_bias(model.emit_src_b), pt = softmax_bias(model.emit_tgt_b);
  MemorylessEditModel memoryless = MemorylessEditModel::uniform(alphabet);
  for (std::size_t a = 0; a < asz; ++a) {
    memoryless.del_table()(a) = std::log(q[0] * ps[a]);
    memoryless.ins_table()(a) = std::log(q[1] * pt[a]);
    for (std::size_t b = 0; b < asz; ++b)
      memoryless.sub_table()(a, b) = std::log(q[2] * ps[a] * pt[b]);
  }

  std::vector<TokenPair> pairs{
      {Token::from_chars(U"abc"), Token::from_chars(U"abd"), std::nullopt, std::nullopt},
      {Token::from_chars(U"fee"), Token::from_chars(U"fa"), std::nullopt, std::nullopt},
      {Token::from_chars(U"a"), Token::from_chars(U"a"), std::nullopt, std::nullopt},
      {Token::from_chars(U"dead"), Token::from_chars(U"beef"), std::nullopt, std::nullopt},
  };
  double worst = 0.0;
  Tensor neural_sub(asz, asz), neural_del(asz), neural_ins(asz);
  for (const TokenPair& p : pairs) {
    CostGrid ng = model.score_grid(p.variant, p.standard);
    CostGrid mg =
        memoryless.cost_grid(p.variant, p.standard, MemorylessEditModel::GridMode::Joint);
    LatticeResult nl = forward_backward(ng);
    LatticeResult ml = forward_backward(mg);
    std::vector<std::size_t> ai = alphabet.encode(p.variant), bi = alphabet.encode(p.standard);
    for (std::size_t i = 0; i <= ng.m; ++i) {
      for (std::size_t j = 0; j <= ng.n; ++j) {
        worst = std::max(worst, std::abs(nl.post_del(i, j) - ml.post_del(i, j)));
        worst = std::max(worst, std::abs(nl.post_ins(i, j) - ml.post_ins(i, j)));
        worst = std::max(worst, std::abs(nl.post_sub(i, j) - ml.post_sub(i, j)));
        if (i >= 1) neural_del(ai[i - 1]) += nl.post_del(i, j);
        if (j >= 1) neural_ins(bi[j - 1]) += nl.post_ins(i, j);
        if (i >= 1 && j >= 1) neural_sub(ai[i - 1], bi[j - 1]) += nl.post_sub(i, j);
      }
    }
  }
  // accumulated E-step counts from the memoryless machinery match the counts
  // gathered from the neural grids
  EditCounts counts = em_expected_counts(memoryless, pairs, MemorylessEditModel::GridMode::Joint);
  for (std::size_t i = 0; i < asz; ++i) {
    worst = std::max(worst, std::abs(counts.del(i) - neural_del(i)));
    worst = std::max(worst, std::abs(counts.ins(i) - neural_ins(i)));
    for (std::size_t j = 0; j < asz; ++j)
      worst = std::max(worst, std::abs(counts.sub(i, j) - neural_sub(i, j)));
  }
  r.report(5, worst <= 1e-8,
           "constant-logit neural posteriors match the memoryless E-step",
           "worst |delta| = " + fmt("%.2e", worst));
}

static void criterion_6(Runner& r) {
  Rng rng(2025);
  std::size_t beaten = 0;
  for (int set = 0; set < 200; ++set) {
    std::size_t n = 3 + rng.below(50);
    std::vector<std::pair<double, bool>> scores;
    bool any_pos = false;
    for (std::size_t k = 0; k < n; ++k) {
      bool label = rng.below(2) == 0;
      any_pos |= label;
      scores.emplace_back(rng.next_double(), label);
    }
    if (!any_pos) scores.emplace_back(0.5, true);
    Calibration c = calibrate_threshold(scores);
    for (int g = 0; g <= 1000; ++g) {
      if (f1_at_threshold(scores, static_cast<double>(g) / 1000.0) > c.f1 + 1e-12) {
        ++beaten;
        break;
      }
    }
  }
  r.report(6, beaten == 0, "calibrated threshold never beaten by a 1e-3 grid scan",
           "200 random score sets, beaten on " + std::to_string(beaten));
}

static void criterion_7(Runner& r) {
  auto start = Clock::now();
  // the characterize path over a fixture with the reference bucket counts
  fs::path dir = fs::temp_directory_path() / "ortho_accept_c7";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ostringstream tsv;
  tsv << "variant\tstandard\tcontext\tsource_id\n";
  int quotas[4] = {438, 289, 172, 101};
  const char* suffixes[4] = {"baaa", "bbaa", "bbba", "bbbb"};
  int serial = 0;
  for (int bucket = 0; bucket < 4; ++bucket) {
    for (int k = 0; k < quotas[bucket]; ++k) {
      std::string prefix;
      int id = serial++;
      for (int d = 0; d < 4; ++d) {
        prefix.push_back(static_cast<char>('c' + id % 20));
        id /= 20;
      }
      tsv << prefix + suffixes[bucket] << "\t" << prefix + "aaaa" << "\tctx\ts\n";
    }
  }
  write_file(dir / "gb_shaped.tsv", tsv.str());
  LoadedPairs loaded = load_pairs(dir / "gb_shaped.tsv", PairFormat::GbTsv);
  LdHistogram h = ld_histogram(loaded.pairs);
  const double expect[4] = {43.8, 28.9, 17.2, 10.1};
  double worst = 0.0;
  for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(h.percentages[k] - expect[k]));
  bool fixture_ok = worst <= 0.1;
  double secs = seconds_since(start);
  fs::remove_all(dir);

  const char* gb_env = std::getenv("ORTHO_GB_CORPUS");
  if (gb_env == nullptr) {
    r.report(7, fixture_ok && secs < 30.0,
             "characterize reproduces the reference LD distribution (fixture route)",
             "worst bucket delta = " + fmt("%.2f", worst) + " pp, " + fmt("%.2f", secs) +
                 " s; public corpus file not present, set ORTHO_GB_CORPUS to check it");
    return;
  }
  LoadedPairs gb = load_pairs(gb_env, PairFormat::GbTsv);
  LdHistogram gh = ld_histogram(gb.pairs);
  double gworst = 0.0;
  for (int k = 0; k < 4; ++k) gworst = std::max(gworst, std::abs(gh.percentages[k] - expect[k]));
  secs = seconds_since(start);
  r.report(7, fixture_ok && gworst <= 0.1 && secs < 30.0,
           "characterize reproduces the reference LD distribution on the corpus file",
           "worst bucket delta = " + fmt("%.2f", gworst) + " pp, " + fmt("%.2f", secs) + " s");
}

static void criterion_8(Runner& r, const SynthSetup& synth) {
  auto start = Clock::now();
  SplitSpec spec;
  spec.seed = 7;
  SplitResult split = split_pairs(synth.corpus, spec);

  std::uint64_t seed = 11;
  NegativeSet train_negs =
      generate_negatives(split.train, synth.lexicon, {StrategyKind::Random, 10, seed});
  NegativeSet val_negs =
      generate_negatives(split.val, synth.lexicon, {StrategyKind::Random, 10, seed + 1});
  NegativeSet test_negs =
      generate_negatives(split.test, synth.lexicon, {StrategyKind::Random, 10, seed + 2});

  std::vector<TokenPair> alphabet_src = synth.corpus;
  for (const Token& t : synth.lexicon.tokens())
    alphabet_src.push_back({t, t, std::nullopt, std::nullopt});
  Alphabet alphabet = alphabet_from_pairs(alphabet_src);

  TrainConfig cfg;
  cfg.batch_size = 128;
  cfg.validation_frequency = 10;
  cfg.patience = 10;
  cfg.max_epochs = 40;
  cfg.seed = seed;
  cfg.d_emb = 32;
  cfg.layers = 2;
  cfg.learning_rate = 2e-3;
  NeuralEditModel model = NeuralEditModel::init(alphabet, {.d_emb = 32, .layers = 2}, seed);
  TrainResult result = train(std::move(model), make_labeled_rows(split.train, &train_negs),
                             make_labeled_rows(split.val, &val_negs), cfg);

  EvalReport cls = classify_pairs(result.model, make_labeled_rows(split.test, &test_negs));
  EvalReport rnk = rank_against_lexicon(result.model, split.test, synth.lexicon);
  double secs = seconds_since(start);
  double f1 = cls.classification->f1;
  double mrr = rnk.ranking->mrr;
  r.report(8, f1 >= 0.85 && mrr >= 0.5 && secs < 600.0,
           "end-to-end synthetic run reaches F1 >= 0.85 and MRR >= 0.5",
           "F1 = " + fmt("%.3f", f1) + ", MRR = " + fmt("%.3f", mrr) + ", " +
               std::to_string(split.test.size()) + " test queries vs " +
               std::to_string(synth.lexicon.size()) + " candidates, " + fmt("%.1f", secs) + " s");
}

static void criterion_9(Runner& r, const SynthSetup& synth) {
  NegativeSet rnd = generate_negatives(synth.corpus, synth.lexicon, {StrategyKind::Random, 20, 5});
  NegativeSet mix = generate_negatives(synth.corpus, synth.lexicon, {StrategyKind::Mixed, 20, 5});
  NegativeSet ld = generate_negatives(synth.corpus, synth.lexicon, {StrategyKind::Ld, 20, 5});
  bool ok = rnd.avg_ld > mix.avg_ld && mix.avg_ld > ld.avg_ld;
  r.report(9, ok, "negative-sample average LD ordering: random > mixed > ld",
           "random = " + fmt("%.2f", rnd.avg_ld) + ", mixed = " + fmt("%.2f", mix.avg_ld) +
               ", ld = " + fmt("%.2f", ld.avg_ld));
}

static void criterion_10(Runner& r, const SynthSetup& synth) {
  fs::path dir = fs::temp_directory_path() / "ortho_accept_c10";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_file(dir / "corpus.tsv", gb_tsv_of(synth.corpus));
  std::string lex = (fs::path(ORTHO_DATA_DIR) / "brown_1k.txt").string();
  std::string detail;
  bool ok = true;

  auto rerun_and_compare = [&](const std::string& name, const std::string& args) {
    if (!ok) return;
    CliResult r1 = run_cli(args + " --out " + (dir / (name + "_1")).string());
    CliResult r2 = run_cli(args + " --out " + (dir / (name + "_2")).string());
    if (r1.exit_code != 0 || r2.exit_code != 0) {
      ok = false;
      detail = name + " run failed";
      return;
    }
    std::string why;
    if (!dirs_byte_identical(dir / (name + "_1"), dir / (name + "_2"), why)) {
      ok = false;
      detail = name + ": " + why;
    }
  };

  rerun_and_compare("characterize",
                    "characterize --corpus " + (dir / "corpus.tsv").string() + " --format gb-tsv");
  rerun_and_compare("split", "split --corpus " + (dir / "corpus.tsv").string() +
                                 " --format gb-tsv --seed 21");
  rerun_and_compare("negatives", "gen-negatives --corpus " + (dir / "corpus.tsv").string() +
                                     " --format gb-tsv --lexicon " + lex +
                                     " --strategy mixed --n 6 --seed 22");
  // a small training run, covering model serialization determinism
  if (ok) {
    std::string train_args =
        "train --train-pairs " + (dir / "split_1" / "train.tsv").string() + " --train-negatives " +
        (dir / "negatives_1" / "negatives.tsv").string() + " --val-pairs " +
        (dir / "split_1" / "val.tsv").string() + " --val-negatives " +
        (dir / "negatives_1" / "negatives.tsv").string() +
        " --emb-size 8 --layers 1 --batch-size 64 --val-freq 4 --patience 2 --max-epochs 3 --seed 23";
    rerun_and_compare("train", train_args);
  }
  r.report(10, ok, "reruns with identical manifests are byte-identical",
           ok ? "characterize, split, gen-negatives, train all identical" : detail);
  fs::remove_all(dir);
}

static void criterion_11(Runner& r) {
  fs::path dir = fs::temp_directory_path() / "ortho_accept_c11";
  fs::remove_all(dir);
  fs::create_directories(dir);
  Lexicon lexicon = Lexicon::load(fs::path(ORTHO_DATA_DIR) / "brown_1k.txt", "brown");
  std::vector<TokenPair> corpus = ot::synth_two_system_corpus(lexicon, 300, 515);
  write_file(dir / "two_system.tsv", gb_tsv_of(corpus));
  std::string lex = (fs::path(ORTHO_DATA_DIR) / "brown_1k.txt").string();

  CliResult res = run_cli("sweep --corpus " + (dir / "two_system.tsv").string() +
                          " --format gb-tsv --lexicon " + lex +
                          " --strategies random,ld,mixed --counts 10 --seed 33 --emb-size 16 "
                          "--layers 1 --batch-size 64 --val-freq 10 --patience 8 --max-epochs 40 "
                          "--lr 0.003 --jobs 2 --out " +
                          (dir / "sweep").string());
  if (res.exit_code != 0) {
    r.report(11, false, "two-system sweep emits MRR per strategy", "sweep failed: " + res.output);
    return;
  }
  std::string table = slurp(dir / "sweep" / "table2.csv");
  std::map<std::string, double> mrr;
  std::istringstream in(table);
  std::string line;
  std::getline(in, line); // header
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string strategy, n, f1, m;
    std::getline(ss, strategy, ',');
    std::getline(ss, n, ',');
    std::getline(ss, f1, ',');
    std::getline(ss, m, ',');
    if (!strategy.empty() && !m.empty()) mrr[strategy] = std::stod(m);
  }
  bool emitted = mrr.count("random") && mrr.count("ld") && mrr.count("mixed");
  r.report(11, emitted, "two-system sweep emits MRR per strategy",
           emitted ? "mrr: random = " + fmt("%.3f", mrr["random"]) +
                         ", mixed = " + fmt("%.3f", mrr["mixed"]) +
                         ", ld = " + fmt("%.3f", mrr["ld"])
                   : "table2.csv incomplete");
  if (emitted) {
    // diagnostic only: the published experiments found the mixed strategy
    // strongest on the multi-system literary corpus
    r.info(11, "mixed-vs-random comparison (non-gating)",
           mrr["mixed"] > mrr["random"] ? "mixed > random on this synthetic corpus"
                                        : "mixed <= random on this synthetic corpus");
  }
  fs::remove_all(dir);
}

int main() {
  Runner runner;
  std::printf("orthopair acceptance suite\n");
  criterion_1(runner);
  criterion_2(runner);
  criterion_3(runner);
  criterion_4(runner);
  criterion_5(runner);
  criterion_6(runner);
  criterion_7(runner);
  SynthSetup synth = make_synth();
  criterion_8(runner, synth);
  criterion_9(runner, synth);
  criterion_10(runner, synth);
  criterion_11(runner);
  std::printf(runner.all_ok ? "all gating criteria passed\n" : "GATING FAILURES PRESENT\n");
  return runner.all_ok ? 0 : 1;
}
