// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "gradient_cases.hpp"
#include "kstt/eval.hpp"
#include "kstt/model.hpp"
#include "kstt/ops.hpp"
#include "kstt/pipeline.hpp"
#include "kstt/synth.hpp"
#include "kstt/time_encoder.hpp"
#include "kstt/trainer.hpp"

using namespace kstt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  std::function<Outcome()> run;
};

std::string fmt(const char* pattern, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// 1. Analytic vs central-difference gradients, every op and the joint loss.
Outcome gradient_fidelity() {
  const auto start = Clock::now();
  double worst = 0.0;
  std::string where;
  std::size_t checks = 0, kinks = 0;
  double worst_kink = 0.0;
  auto record = [&](const testing::GradCheckResult& r, const std::string& name) {
    ++checks;
    kinks += r.kink_entries;
    worst_kink = std::max(worst_kink, r.max_kink_relative_error);
    if (r.max_relative_error > worst) {
      worst = r.max_relative_error;
      where = name + " " + r.worst;
    }
  };
  for (const auto& c : testing::op_gradient_cases()) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      auto p = c.make(seed);
      record(testing::check_gradients(p.f, p.inputs), c.name + " seed " + std::to_string(seed));
    }
  }
  for (auto enc : {TimeEncoding::None, TimeEncoding::Bucket, TimeEncoding::Time2Vec, TimeEncoding::Mercer}) {
    for (std::size_t length = 1; length <= 5; ++length) {
      for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto p = testing::end_to_end_problem(seed, length, enc);
        record(testing::check_gradients(p.f, p.inputs),
               "end-to-end " + to_string(enc) + " length " + std::to_string(length) + " seed " + std::to_string(seed));
      }
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-4 && elapsed < 120.0,
          std::to_string(checks) + " checks at h=1e-5, max rel err " + fmt("%.2e", worst) + " at " + where + "; " +
              std::to_string(kinks) + " entries with a kink inside the stencil, rechecked at h=1e-6/1e-7 " +
              fmt("(max %.2e)", worst_kink) + ", " + fmt("%.1f s", elapsed)};
}

// 2. Metrics vs a brute-force rank count.
Outcome metric_oracle() {
  std::mt19937_64 rng(2024);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 2 + rng() % 49;
    const std::size_t k = 1 + rng() % std::min<std::size_t>(20, m);
    const std::size_t n = 1 + rng() % 30;
    std::vector<std::vector<std::size_t>> rankings;
    std::vector<std::size_t> targets;
    double hits = 0.0, reciprocal = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      std::vector<double> scores(m);
      for (auto& v : scores) v = static_cast<double>(rng() % 7);  // frequent ties
      const std::size_t target = rng() % m;
      std::size_t rank = 1;
      for (std::size_t i = 0; i < m; ++i)
        rank += scores[i] > scores[target] || (scores[i] == scores[target] && i < target);
      if (rank <= k) {
        hits += 1.0;
        reciprocal += 1.0 / static_cast<double>(rank);
      }
      rankings.push_back(top_k(scores, k));
      targets.push_back(target);
    }
    const double nd = static_cast<double>(n);
    if (recall_at_k(rankings, targets, k) != hits / nd) ++mismatches;
    if (mrr_at_k(rankings, targets, k) != reciprocal / nd) ++mismatches;
  }
  return {mismatches == 0, "1000 instances, " + std::to_string(mismatches) + " mismatches"};
}

// 3. The planted successor is learned at lr 0.001 within 200 epochs.
Outcome markov_learnability() {
  const auto start = Clock::now();
  const auto corpus = make_markov_corpus(MarkovCorpusConfig{});
  const auto data = prepare_dataset(corpus.sessions, corpus.attributes, 0.2);
  KsttModel model(data.graph, ModelConfig{}, 42);
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.lr = 0.001;
  Trainer trainer(model, cfg);
  double best = 0.0;
  std::size_t reached = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs && reached == 0; ++epoch) {
    trainer.kg_epoch();
    trainer.rec_epoch(data.train_samples);
    best = std::max(best, evaluate(model, data.test_samples, 1).recall_at_k);
    if (best >= 0.95) reached = epoch;
  }
  const double elapsed = seconds_since(start);
  return {reached > 0 && elapsed < 300.0,
          fmt("Recall@1 %.4f on %.0f held-out prefixes", best, static_cast<double>(data.test_samples.size())) +
              (reached ? " at epoch " + std::to_string(reached) : " after 200 epochs") + fmt(", %.1f s", elapsed)};
}

struct SmallRun {
  ModelConfig model;
  TrainConfig train;
};

SmallRun small_run(std::uint64_t seed) {
  SmallRun r;
  r.model.dim = 32;
  r.model.heads = 2;
  r.train.epochs = 40;
  r.train.rec_batch = 32;
  r.train.kg_batch = 128;
  r.train.seed = seed;
  return r;
}

double recall_at_5(const Dataset& data, SmallRun run, std::uint64_t seed) {
  KsttModel model(data.graph, run.model, seed);
  Trainer trainer(model, run.train);
  trainer.train(data.train_samples);
  return evaluate(model, data.test_samples, 5).recall_at_k;
}

// 4. Gap-dependent successors: bucket encoder vs no time encoder.
Outcome temporal_signal() {
  double with_tbe = 0.0, without = 0.0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TemporalCorpusConfig c;
    c.seed = seed;
    const auto corpus = make_temporal_corpus(c);
    const auto data = prepare_dataset(corpus.sessions, corpus.attributes, 0.2);
    SmallRun run = small_run(seed);
    run.model.time_encoder = TimeEncoding::Bucket;
    const double a = recall_at_5(data, run, seed);
    run.model.time_encoder = TimeEncoding::None;
    const double b = recall_at_5(data, run, seed);
    with_tbe += a / 5;
    without += b / 5;
    per_seed += fmt(" %.3f/%.3f", a, b);
  }
  return {with_tbe - without >= 0.05,
          fmt("Recall@5 tbe %.4f vs none %.4f (margin %.4f); per seed:", with_tbe, without, with_tbe - without) +
              per_seed};
}

// 5. Attribute-sharing successors: attribute edges vs sequential edges only.
Outcome knowledge_signal() {
  double with_kg = 0.0, without = 0.0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    KnowledgeCorpusConfig c;
    c.seed = seed;
    const auto corpus = make_knowledge_corpus(c);
    SmallRun run = small_run(seed);
    run.model.time_encoder = TimeEncoding::None;
    const double a = recall_at_5(prepare_dataset(corpus.sessions, corpus.attributes, 0.3, true), run, seed);
    const double b = recall_at_5(prepare_dataset(corpus.sessions, corpus.attributes, 0.3, false), run, seed);
    with_kg += a / 5;
    without += b / 5;
    per_seed += fmt(" %.3f/%.3f", a, b);
  }
  return {with_kg > without,
          fmt("Recall@5 with attributes %.4f vs sequential only %.4f; per seed:", with_kg, without) + per_seed};
}

// 6. True triplets score below corrupted ones after 300 KG-phase steps.
Outcome transr_separation() {
  std::mt19937_64 rng(6);
  std::vector<Session> sessions;
  for (int s = 0; s < 12; ++s) {
    Session session{"s" + std::to_string(s), {}};
    for (int i = 0; i < 4; ++i) session.events.push_back({synthetic_item_name(rng() % 15), s * 100 + i});
    sessions.push_back(session);
  }
  Catalog catalog = Catalog::from_sessions(sessions);
  AttributeMap attrs;
  for (const auto& item : catalog.names()) attrs[item] = {{"cat", "c" + std::to_string(std::stoi(item.substr(1)) % 5)}};
  auto graph = std::make_shared<const KnowledgeGraph>(build_graph(catalog, sessions, attrs));
  ModelConfig mc;
  mc.dim = 16;
  mc.heads = 2;
  mc.time_encoder = TimeEncoding::None;
  KsttModel model(graph, mc, 6);
  TrainConfig tc;
  tc.kg_batch = graph->triplets().size();  // one Adam step per pass
  Trainer trainer(model, tc);
  for (int step = 0; step < 300; ++step) trainer.kg_epoch();

  std::mt19937_64 draw(60);
  double pos = 0.0, neg = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Triplet& t = graph->triplets()[draw() % graph->triplets().size()];
    const Triplet corrupted = negative_sample(t, *graph, draw);
    pos += transr_score(t.head, t.relation, t.tail, model.kg()).item() / 100;
    neg += transr_score(corrupted.head, corrupted.relation, corrupted.tail, model.kg()).item() / 100;
  }
  return {neg - pos > 0.0,
          fmt("%.0f entities, mean score true %.4f vs corrupted %.4f", static_cast<double>(graph->num_entities()), pos,
              neg)};
}

// 7. Closed-form buckets, bounded periodic T2V parts, MTE translation invariance.
Outcome encoder_contracts() {
  std::size_t bucket_errors = 0;
  for (std::int64_t delta = 1; delta <= 1'000'000; ++delta) {
    const auto expected = std::min<std::size_t>(31, static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(delta)))));
    bucket_errors += time_bucket(static_cast<double>(delta), 32) != expected;
  }
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5, 5), gap(0, 1e7);
  double t2v_max = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Tensor w = testing::random_tensor({16}, rng, -5, 5), b = testing::random_tensor({16}, rng, -5, 5);
    std::vector<double> deltas(8);
    for (auto& d : deltas) d = gap(rng);
    Tensor out = encode_t2v(deltas, w, b);
    for (std::size_t r = 0; r < out.rows(); ++r)
      for (std::size_t c = 1; c < out.cols(); ++c) t2v_max = std::max(t2v_max, std::abs(out.at(r, c)));
  }
  double mte_err = 0.0;
  // Invariance needs the cos and sin slots of a harmonic to share their
  // coefficient, as at initialization (c = 1/d).
  std::uniform_real_distribution<double> when(0, 5e5), shift(-2e5, 2e5), period(0.05, 7), coef(0.01, 1);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor periods = Tensor::vector({period(rng), period(rng), period(rng)});
    Tensor c = Tensor::zeros({3, 7});
    for (std::size_t m = 0; m < 3; ++m) {
      c.at(m, 0) = coef(rng);
      for (std::size_t j = 1; j < 7; j += 2) c.at(m, j) = c.at(m, j + 1) = coef(rng);
    }
    const double t1 = when(rng), t2 = when(rng), s = shift(rng);
    const std::vector<double> a{t1, t2}, b{t1 + s, t2 + s};
    Tensor ea = encode_mte(a, periods, c), eb = encode_mte(b, periods, c);
    double ipa = 0, ipb = 0;
    for (std::size_t j = 0; j < ea.cols(); ++j) {
      ipa += ea.at(0, j) * ea.at(1, j);
      ipb += eb.at(0, j) * eb.at(1, j);
    }
    mte_err = std::max(mte_err, std::abs(ipa - ipb) / std::max(1.0, std::abs(ipa)));
  }
  return {bucket_errors == 0 && t2v_max <= 1.0 && mte_err <= 1e-9,
          "bucket mismatches " + std::to_string(bucket_errors) + " on 1..1e6" +
              fmt(", max |T2V periodic| %.6f, max MTE inner-product drift %.2e", t2v_max, mte_err)};
}

// 8. Fixed-seed runs repeat their loss log; evaluation leaves parameters alone.
Outcome determinism() {
  const auto corpus = make_markov_corpus(MarkovCorpusConfig{.items = 20, .sessions = 40});
  const auto data = prepare_dataset(corpus.sessions, corpus.attributes, 0.2);
  auto run = [&] {
    SmallRun r = small_run(5);
    r.train.epochs = 3;
    KsttModel model(data.graph, r.model, 5);
    Trainer trainer(model, r.train);
    auto log = trainer.train(data.train_samples);
    const auto before = model.params().checksum();
    evaluate(model, data.test_samples, 20);
    const bool pure = model.params().checksum() == before;
    return std::make_tuple(log, before, pure);
  };
  const auto [log_a, sum_a, pure_a] = run();
  const auto [log_b, sum_b, pure_b] = run();
  bool same = log_a.size() == log_b.size() && sum_a == sum_b;
  for (std::size_t i = 0; same && i < log_a.size(); ++i)
    same = log_a[i].kg_loss == log_b[i].kg_loss && log_a[i].rec_loss == log_b[i].rec_loss;
  return {same && pure_a && pure_b, std::string("epoch logs ") + (same ? "identical" : "differ") +
                                        ", evaluation " + (pure_a && pure_b ? "pure" : "changed parameters")};
}

}  // namespace

// An optional argument names a file that receives a copy of the report.
int main(int argc, char** argv) {
  std::FILE* report = argc > 1 ? std::fopen(argv[1], "w") : nullptr;
  const std::vector<Criterion> criteria{
      {"gradient fidelity", gradient_fidelity},
      {"metric oracle equivalence", metric_oracle},
      {"markov learnability", markov_learnability},
      {"temporal signal recovery", temporal_signal},
      {"knowledge signal recovery", knowledge_signal},
      {"TransR separation", transr_separation},
      {"encoder unit contracts", encoder_contracts},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    for (std::FILE* out : {stdout, report}) {
      if (!out) continue;
      std::fprintf(out, "%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name.c_str(), o.detail.c_str());
      std::fflush(out);
    }
  }
  if (report) std::fclose(report);
  return failures == 0 ? 0 : 1;
}
