#include "kstt/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include "kstt/checkpoint.hpp"
#include "kstt/config.hpp"
#include "kstt/errors.hpp"
#include "kstt/eval.hpp"
#include "kstt/io.hpp"
#include "kstt/model.hpp"
#include "kstt/ops.hpp"
#include "kstt/pipeline.hpp"
#include "kstt/synth.hpp"
#include "kstt/trainer.hpp"

namespace kstt {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> k;
  std::string checkpoint = "kstt.ckpt";
  std::string out;
  std::string input = "-";
  std::optional<std::int64_t> at;
  std::string kind = "markov";
  bool baselines = false;
};

RunConfig load_config(const Options& opt) {
  RunConfig config = RunConfig::load(opt.config);
  if (opt.seed) config.train.seed = *opt.seed;
  if (opt.k) config.k = *opt.k;
  config.validate();
  if (config.sessions.empty()) throw ConfigError("config does not name a sessions file");
  return config;
}

Dataset load_dataset(const RunConfig& config, std::ostream& err) {
  IngestSummary summary;
  auto sessions = load_sessions(config.sessions, config.model.max_session_length, &summary);
  AttributeMap attributes;
  if (!config.attributes.empty()) attributes = load_attributes(config.attributes, nullptr, &summary);
  err << "ingest: rows=" << summary.rows << " sessions=" << summary.sessions
      << " dropped_short=" << summary.dropped_short << " truncated=" << summary.truncated
      << " attribute_rows=" << summary.attribute_rows << " duplicate_attributes=" << summary.duplicate_attributes
      << '\n';
  Dataset data = prepare_dataset(sessions, attributes, config.test_fraction, config.kg_attributes);
  err << "dataset: items=" << data.catalog.size() << " entities=" << data.graph->num_entities()
      << " triplets=" << data.graph->triplets().size() << " train_samples=" << data.train_samples.size()
      << " test_samples=" << data.test_samples.size()
      << " attributes_for_unseen_items=" << data.dropped_attribute_items << '\n';
  return data;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write '" + path.string() + "'");
  return out;
}

int cmd_build_kg(const Options& opt, std::ostream& out, std::ostream& err) {
  const RunConfig config = load_config(opt);
  const Dataset data = load_dataset(config, err);
  if (opt.out.empty()) {
    write_triplets(out, *data.graph);
  } else {
    auto file = open_output(opt.out);
    write_triplets(file, *data.graph);
  }
  return kExitOk;
}

int cmd_train(const Options& opt, std::ostream& out, std::ostream& err) {
  const RunConfig config = load_config(opt);
  const Dataset data = load_dataset(config, err);
  KsttModel model(data.graph, config.model, config.train.seed);
  Trainer trainer(model, config.train);
  std::ofstream log_file;
  if (!opt.out.empty()) log_file = open_output(opt.out);
  out << "epoch\tkg_loss\trec_loss\twall_seconds\n";
  if (log_file.is_open()) log_file << "epoch\tkg_loss\trec_loss\twall_seconds\n";
  trainer.train(data.train_samples, [&](const EpochLog& entry) {
    write_epoch_log_line(out, entry);
    if (log_file.is_open()) {
      write_epoch_log_line(log_file, entry);
      log_file.flush();
    }
    if (config.checkpoint_every > 0 && entry.epoch % config.checkpoint_every == 0) {
      save_checkpoint(opt.checkpoint + ".epoch" + std::to_string(entry.epoch), model.params());
    }
  });
  save_checkpoint(opt.checkpoint, model.params());
  if (!data.test_samples.empty()) err << "test: " << evaluate(model, data.test_samples, config.k).record() << '\n';
  return kExitOk;
}

int cmd_eval(const Options& opt, std::ostream& out, std::ostream& err) {
  const RunConfig config = load_config(opt);
  const Dataset data = load_dataset(config, err);
  KsttModel model(data.graph, config.model, config.train.seed);
  load_checkpoint(opt.checkpoint, model.params());
  if (data.test_samples.empty()) throw IngestionError("no evaluation samples in the test split");
  const MetricReport report = evaluate(model, data.test_samples, config.k);
  out << report.record() << '\n';
  if (opt.baselines) {
    PopularityBaselines baselines(data.train_sessions, data.catalog);
    out << "POP " << evaluate(baselines.pop(), data.test_samples, config.k).record() << '\n';
    out << "S-POP " << evaluate(baselines.session_pop(), data.test_samples, config.k).record() << '\n';
  }
  if (!opt.out.empty()) {
    auto file = open_output(opt.out);
    file << report.tsv() << '\n';
  }
  return kExitOk;
}

int cmd_predict(const Options& opt, std::ostream& out, std::ostream& err) {
  const RunConfig config = load_config(opt);
  const Dataset data = load_dataset(config, err);
  KsttModel model(data.graph, config.model, config.train.seed);
  load_checkpoint(opt.checkpoint, model.params());

  std::vector<Session> input;
  if (opt.input == "-") {
    input = parse_sessions(std::cin, config.model.max_session_length, nullptr, 1);
  } else {
    std::ifstream file(opt.input);
    if (!file) throw IngestionError("cannot open input file '" + opt.input + "'");
    input = parse_sessions(file, config.model.max_session_length, nullptr, 1);
  }
  if (input.empty()) throw IngestionError("input holds no session");
  const Session& session = input.front();
  std::vector<std::size_t> items;
  std::vector<std::int64_t> times;
  for (const auto& click : session.events) {
    auto index = data.catalog.find(click.item);
    if (!index) throw LookupError("item '" + click.item + "' has no embedding (not in the training catalog)");
    items.push_back(*index);
    times.push_back(click.timestamp);
  }
  const std::int64_t t_hat = opt.at.value_or(times.back());
  const Tensor embeddings = model.item_embeddings();
  const Tensor probabilities =
      softmax(predict_scores(model.encode_session(items, times, t_hat, embeddings), embeddings));
  const auto ranked = top_k(probabilities.data(), config.k);
  out << "rank\titem\tprobability\n";
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    out << r + 1 << '\t' << data.catalog.name(ranked[r]) << '\t' << probabilities.at(ranked[r]) << '\n';
  }
  return kExitOk;
}

int cmd_gen_synth(const Options& opt, std::ostream& out, std::ostream&) {
  if (opt.out.empty()) throw ConfigError("gen-synth needs --out <directory>");
  SyntheticCorpus corpus;
  std::string extra;
  if (opt.kind == "markov") {
    MarkovCorpusConfig c;
    if (opt.seed) c.seed = *opt.seed;
    corpus = make_markov_corpus(c);
    extra = "time_encoder=none\n";
  } else if (opt.kind == "temporal") {
    TemporalCorpusConfig c;
    if (opt.seed) c.seed = *opt.seed;
    corpus = make_temporal_corpus(c);
    extra = "time_encoder=tbe\n";
  } else if (opt.kind == "knowledge") {
    KnowledgeCorpusConfig c;
    if (opt.seed) c.seed = *opt.seed;
    corpus = make_knowledge_corpus(c);
    extra = "time_encoder=none\n";
  } else {
    throw ConfigError("unknown corpus kind '" + opt.kind + "' (expected markov|temporal|knowledge)");
  }
  const fs::path dir(opt.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IngestionError("cannot create directory '" + dir.string() + "': " + ec.message());
  {
    auto file = open_output(dir / "sessions.csv");
    write_sessions(file, corpus.sessions);
  }
  {
    auto file = open_output(dir / "attributes.csv");
    write_attributes(file, corpus.attributes);
  }
  {
    auto file = open_output(dir / "config.txt");
    file << "# synthetic " << opt.kind << " corpus\n"
         << "sessions=sessions.csv\nattributes=attributes.csv\n"
         << "dim=20\nheads=2\nlayers=1\nrec_batch=32\nkg_batch=128\nepochs=40\nlr=0.001\ndropout=0.0\nk=20\n"
         << extra;
  }
  out << "wrote " << corpus.sessions.size() << " sessions to " << (dir / "sessions.csv").string() << '\n';
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Knowledge-enhanced session recommender with a temporal transformer", "kstt"};
  app.require_subcommand(1);
  Options opt;

  auto add_config = [&](CLI::App* sub) { sub->add_option("--config", opt.config, "key=value config file")->required(); };
  auto add_k = [&](CLI::App* sub) { sub->add_option("--k", opt.k, "ranking cutoff (overrides config k)"); };

  auto* build = app.add_subcommand("build-kg", "ingest data, build the knowledge graph, dump triplets as TSV");
  add_config(build);
  build->add_option("--out", opt.out, "triplet TSV path (default: stdout)");

  auto* train = app.add_subcommand("train", "two-phase training; writes a checkpoint and the epoch log");
  add_config(train);
  train->add_option("--seed", opt.seed, "overrides config seed");
  train->add_option("--checkpoint", opt.checkpoint, "checkpoint output path")->capture_default_str();
  train->add_option("--out", opt.out, "epoch log TSV path");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  add_config(eval);
  eval->add_option("--checkpoint", opt.checkpoint, "checkpoint path")->required();
  add_k(eval);
  eval->add_option("--out", opt.out, "metric report TSV path");
  eval->add_flag("--baselines", opt.baselines, "also report POP and S-POP");

  auto* predict = app.add_subcommand("predict", "rank the catalog for one session");
  add_config(predict);
  predict->add_option("--checkpoint", opt.checkpoint, "checkpoint path")->required();
  add_k(predict);
  predict->add_option("--input", opt.input, "session CSV (session_id,timestamp,item_id); '-' for stdin")
      ->capture_default_str();
  predict->add_option("--at", opt.at, "prediction time in epoch seconds (default: last click)");

  auto* synth = app.add_subcommand("gen-synth", "write a synthetic corpus with a matching config");
  synth->add_option("--kind", opt.kind, "markov|temporal|knowledge")->capture_default_str();
  synth->add_option("--out", opt.out, "output directory")->required();
  synth->add_option("--seed", opt.seed, "generator seed");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (build->parsed()) return cmd_build_kg(opt, out, err);
    if (train->parsed()) return cmd_train(opt, out, err);
    if (eval->parsed()) return cmd_eval(opt, out, err);
    if (predict->parsed()) return cmd_predict(opt, out, err);
    if (synth->parsed()) return cmd_gen_synth(opt, out, err);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IngestionError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const LookupError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const SamplingError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const ContractError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace kstt
