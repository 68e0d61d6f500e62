#include "cli.hpp"

#include <filesystem>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "semrte/aspects.hpp"
#include "semrte/checkpoint.hpp"
#include "semrte/common.hpp"
#include "semrte/corpus.hpp"
#include "semrte/evaluator.hpp"
#include "semrte/experiment.hpp"
#include "semrte/fixtures.hpp"
#include "semrte/rng.hpp"
#include "semrte/srl_metrics.hpp"
#include "semrte/trainer.hpp"

namespace semrte::cli {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Run configuration

namespace {

template <typename V>
void take(const json& j, const char* key, V& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<V>();
  } catch (const json::exception&) {
    throw std::invalid_argument(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

std::vector<std::string> run_config_keys() {
  return {"train_pairs", "val_pairs", "aspects", "output_dir", "val_ratio", "chunk_size",
          "ablate_semantics", "learning_rate", "weight_decay", "batch_size", "max_length", "epochs",
          "seed", "beta1", "beta2", "epsilon", "max_grad_norm", "d_model", "layers", "heads",
          "ffn_dim", "dropout", "label_embed_dim", "gru_hidden", "sem_proj_dim", "cnn_kernel_width",
          "num_aspects"};
}

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed config JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("config JSON must be an object");
  const auto keys = run_config_keys();
  const std::set<std::string> known(keys.begin(), keys.end());
  std::string unknown;
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) unknown += (unknown.empty() ? "" : ", ") + k;
  }
  if (!unknown.empty()) throw std::invalid_argument("unknown config keys: " + unknown);

  RunConfig c;
  take(j, "train_pairs", c.train_pairs);
  take(j, "val_pairs", c.val_pairs);
  take(j, "aspects", c.aspects);
  take(j, "output_dir", c.output_dir);
  take(j, "val_ratio", c.val_ratio);
  take(j, "chunk_size", c.chunk_size);
  take(j, "ablate_semantics", c.ablate_semantics);
  take(j, "learning_rate", c.train.learning_rate);
  take(j, "weight_decay", c.train.weight_decay);
  take(j, "batch_size", c.train.batch_size);
  take(j, "max_length", c.train.max_length);
  take(j, "epochs", c.train.epochs);
  take(j, "seed", c.train.seed);
  take(j, "beta1", c.train.beta1);
  take(j, "beta2", c.train.beta2);
  take(j, "epsilon", c.train.epsilon);
  take(j, "max_grad_norm", c.train.max_grad_norm);
  take(j, "d_model", c.encoder.d_model);
  take(j, "layers", c.encoder.layers);
  take(j, "heads", c.encoder.heads);
  take(j, "ffn_dim", c.encoder.ffn_dim);
  take(j, "dropout", c.encoder.dropout);
  take(j, "label_embed_dim", c.fusion.label_embed_dim);
  take(j, "gru_hidden", c.fusion.gru_hidden);
  take(j, "sem_proj_dim", c.fusion.sem_proj_dim);
  take(j, "cnn_kernel_width", c.fusion.cnn_kernel_width);
  take(j, "num_aspects", c.fusion.num_aspects);
  return c;
}

std::string run_config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["train_pairs"] = c.train_pairs;
  j["val_pairs"] = c.val_pairs;
  j["aspects"] = c.aspects;
  j["output_dir"] = c.output_dir;
  j["val_ratio"] = c.val_ratio;
  j["chunk_size"] = c.chunk_size;
  j["ablate_semantics"] = c.ablate_semantics;
  j["learning_rate"] = c.train.learning_rate;
  j["weight_decay"] = c.train.weight_decay;
  j["batch_size"] = c.train.batch_size;
  j["max_length"] = c.train.max_length;
  j["epochs"] = c.train.epochs;
  j["seed"] = c.train.seed;
  j["beta1"] = c.train.beta1;
  j["beta2"] = c.train.beta2;
  j["epsilon"] = c.train.epsilon;
  j["max_grad_norm"] = c.train.max_grad_norm;
  j["d_model"] = c.encoder.d_model;
  j["layers"] = c.encoder.layers;
  j["heads"] = c.encoder.heads;
  j["ffn_dim"] = c.encoder.ffn_dim;
  j["dropout"] = c.encoder.dropout;
  j["label_embed_dim"] = c.fusion.label_embed_dim;
  j["gru_hidden"] = c.fusion.gru_hidden;
  j["sem_proj_dim"] = c.fusion.sem_proj_dim;
  j["cnn_kernel_width"] = c.fusion.cnn_kernel_width;
  j["num_aspects"] = c.fusion.num_aspects;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Helpers

namespace {

std::vector<PremisePair> load_pairs(const std::string& path) { return parse_pairs(read_file(path)); }

AspectIndex load_aspects(const std::string& path) {
  const auto sets = parse_aspect_sets(read_file(path));
  return index_aspects(sets);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory '" + dir + "': " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument("");
      out.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad integer '" + item + "' in list '" + text + "'");
    }
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::string predictions_jsonl(std::span<const Prediction> preds) {
  std::string out;
  for (const auto& p : preds) {
    nlohmann::ordered_json j;
    j["id"] = p.id;
    j["predicted"] = std::string(to_string(p.predicted));
    j["gold"] = std::string(to_string(p.gold));
    j["lang"] = std::string(to_string(p.lang));
    j["predicates1"] = p.predicates1;
    j["predicates2"] = p.predicates2;
    out += j.dump() + "\n";
  }
  return out;
}

std::function<void(const EpochRecord&)> epoch_printer(std::ostream& err, const std::string& tag) {
  return [&err, tag](const EpochRecord& r) {
    err << tag << "epoch " << r.epoch << " loss " << r.train_loss << " val_acc " << format_percent(r.val_accuracy)
        << " val_f1 " << format_percent(r.val_f1) << " (" << r.steps << " steps)\n";
  };
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_srl_eval(const std::string& gold_path, const std::string& pred_path, const std::string& out_path,
                 std::ostream& out) {
  const auto gold = parse_conll(read_file(gold_path));
  const auto pred = parse_conll(read_file(pred_path));
  if (gold.size() != pred.size()) {
    throw DataError("gold has " + std::to_string(gold.size()) + " sentences but prediction has " +
                    std::to_string(pred.size()));
  }
  std::vector<std::vector<Span>> gs, ps;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].tokens.size() != pred[i].tokens.size()) {
      throw DataError("sentence " + std::to_string(i + 1) + " ('" + gold[i].sentence_id + "') has " +
                      std::to_string(gold[i].tokens.size()) + " gold tokens but " +
                      std::to_string(pred[i].tokens.size()) + " predicted");
    }
    gs.push_back(extract_spans(gold[i].labels));
    ps.push_back(extract_spans(pred[i].labels));
  }
  const PRF prf = span_prf(gs, ps);
  out << "precision " << format_percent(prf.precision) << "  recall " << format_percent(prf.recall) << "  f1 "
      << format_percent(prf.f1) << "  (tp " << prf.tp << ", fp " << prf.fp << ", fn " << prf.fn << ")\n";
  if (!out_path.empty()) write_file(out_path, prf_to_json(prf) + "\n");
  return kOk;
}

int cmd_srl_aggregate(const std::vector<std::string>& paths, const std::string& out_path, std::ostream& out) {
  std::vector<PRF> folds;
  for (const auto& p : paths) folds.push_back(prf_from_json(read_file(p)));
  const PRF avg = aggregate_folds(folds);
  out << "Fold     Precision  Recall  F1-score\n";
  char line[128];
  for (std::size_t i = 0; i < folds.size(); ++i) {
    std::snprintf(line, sizeof line, "%-7zu  %9s  %6s  %8s\n", i + 1, format_percent(folds[i].precision).c_str(),
                  format_percent(folds[i].recall).c_str(), format_percent(folds[i].f1).c_str());
    out << line;
  }
  std::snprintf(line, sizeof line, "%-7s  %9s  %6s  %8s\n", "Average", format_percent(avg.precision).c_str(),
                format_percent(avg.recall).c_str(), format_percent(avg.f1).c_str());
  out << line;
  if (!out_path.empty()) write_file(out_path, prf_to_json(avg) + "\n");
  return kOk;
}

int cmd_merge_aspects(const std::vector<std::string>& pred_paths, const std::string& tokens_path, int m,
                      const std::string& out_path, std::ostream& out) {
  std::vector<PredictedSequence> seqs;
  for (std::size_t k = 0; k < pred_paths.size(); ++k) {
    const auto sentences = parse_conll(read_file(pred_paths[k]));
    const auto preds = predictions_from_conll(sentences, static_cast<int>(k));
    seqs.insert(seqs.end(), preds.begin(), preds.end());
  }
  const auto tokens = parse_sentence_tokens(read_file(tokens_path));
  MergeStats stats;
  const auto merged = merge_aspects(seqs, tokens, m, &stats);
  write_file(out_path, serialize_aspect_sets(merged));
  out << "input sequences     " << stats.input_sequences << "\n"
      << "removed duplicates  " << stats.removed_duplicates << "\n"
      << "removed multi-verb  " << stats.removed_multi_verb << "\n"
      << "fallback sentences  " << stats.fallback_sentences << "\n"
      << "sentences written   " << merged.size() << "\n";
  return kOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.train_pairs.empty()) throw std::invalid_argument("train: no training pairs given (train_pairs)");
  if (cfg.aspects.empty()) throw std::invalid_argument("train: no aspect file given (aspects)");
  cfg.train.validate();
  cfg.encoder.validate();
  cfg.fusion.validate();
  auto pairs = load_pairs(cfg.train_pairs);
  std::vector<PremisePair> train_set, val_set;
  if (!cfg.val_pairs.empty()) {
    train_set = std::move(pairs);
    val_set = load_pairs(cfg.val_pairs);
  } else {
    std::tie(train_set, val_set) = split_train_val(pairs, 1.0 - cfg.val_ratio, cfg.train.seed + seed_offset::kSplit);
  }
  const AspectIndex aspects = load_aspects(cfg.aspects);
  ensure_dir(cfg.output_dir);
  write_file(join_path(cfg.output_dir, "config.json"), run_config_to_json(cfg));

  ExperimentConfig ec;
  ec.encoder = cfg.encoder;
  ec.fusion = cfg.fusion;
  ec.train = cfg.train;
  ec.chunk_size = cfg.chunk_size;
  ec.ablate_semantics = cfg.ablate_semantics;
  TrainOptions opts;
  opts.checkpoint_path = join_path(cfg.output_dir, "model.ckpt");
  opts.on_epoch = epoch_printer(err, "");
  const auto result = run_experiment(train_set, val_set, {}, aspects, ec, opts);
  write_file(join_path(cfg.output_dir, "train_log.jsonl"), train_log_to_jsonl(result.log));
  out << "trained on " << train_set.size() << " pairs, validated on " << val_set.size() << "; best epoch "
      << result.log.best_epoch << "\n"
      << "checkpoint " << result.log.checkpoint_path << "\n";
  return kOk;
}

struct EvalArgs {
  std::string checkpoint;
  std::string pairs;
  std::string aspects;
  std::string out_dir = "eval";
  std::string name = "model";
  std::string sweep;
  std::string train_pairs;
  std::string val_pairs;
  double val_ratio = 0.1;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const SubwordVocab vocab(ck.meta.vocab_pieces, ck.meta.chunk_size);
  if (vocab.size() != ck.meta.vocab_size || vocab.size() != ck.model.encoder.vocab_size()) {
    throw DataError("checkpoint vocabulary has " + std::to_string(vocab.size()) + " ids but the model expects " +
                    std::to_string(ck.model.encoder.vocab_size()));
  }
  const LabelInventory inventory = LabelInventory::from_tags(ck.meta.label_tags);
  const auto pairs = load_pairs(a.pairs);
  const AspectIndex aspects = load_aspects(a.aspects);
  const auto examples = encode_pairs(pairs, aspects, vocab, inventory, ck.meta.fusion.num_aspects,
                                     ck.meta.encoder.max_length, ck.meta.ablate_semantics);
  const auto preds = predict(ck.model, examples);
  MetricReport report = build_report(a.name, preds);

  if (!a.sweep.empty()) {
    const auto ms = parse_int_list(a.sweep);
    if (a.train_pairs.empty()) throw std::invalid_argument("--sweep needs --train-pairs to retrain per m");
    auto train_all = load_pairs(a.train_pairs);
    std::vector<PremisePair> train_set, val_set;
    if (!a.val_pairs.empty()) {
      train_set = std::move(train_all);
      val_set = load_pairs(a.val_pairs);
    } else {
      std::tie(train_set, val_set) =
          split_train_val(train_all, 1.0 - a.val_ratio, ck.meta.train.seed + seed_offset::kSplit);
    }
    SweepRunner runner = [&](int m) {
      ExperimentConfig ec;
      ec.encoder = ck.meta.encoder;
      ec.fusion = ck.meta.fusion;
      ec.fusion.num_aspects = m;
      ec.train = ck.meta.train;
      ec.chunk_size = ck.meta.chunk_size;
      ec.ablate_semantics = ck.meta.ablate_semantics;
      TrainOptions opts;
      opts.on_epoch = epoch_printer(err, "[m=" + std::to_string(m) + "] ");
      return run_experiment(train_set, val_set, pairs, aspects, ec, opts).test_predictions;
    };
    report.sweep = aspect_sweep(runner, ms);
  }

  ensure_dir(a.out_dir);
  write_file(join_path(a.out_dir, "report.json"), report_to_json(report));
  write_file(join_path(a.out_dir, "predictions.jsonl"), predictions_jsonl(preds));
  const std::span<const MetricReport> one(&report, 1);
  std::string text = format_overall_table(one) + "\n" + format_language_table(one) + "\n" +
                     "Error rate by gold label (%)\n" + format_label_error_table(one);
  if (!report.sweep.empty()) text += "\nF1 by number of aspects m\n" + format_sweep_table(one);
  write_file(join_path(a.out_dir, "report.txt"), text);
  out << text;
  return kOk;
}

int cmd_compare(const std::string& a_path, const std::string& b_path, const std::string& out_path,
                std::ostream& out) {
  const auto a = flat_report_from_json(read_file(a_path));
  const auto b = flat_report_from_json(read_file(b_path));
  const auto deltas = compare_runs(a, b);
  out << format_delta_table(deltas);
  if (!out_path.empty()) write_file(out_path, deltas_to_json(deltas));
  return kOk;
}

int cmd_gen_fixture(const std::string& kind_name, const std::string& dir, std::uint64_t seed,
                    const FixtureSizes& sizes, std::ostream& out) {
  const FixtureKind kind = parse_fixture_kind(kind_name);
  const Fixture fx = generate_fixture(kind, sizes, seed);
  ensure_dir(dir);
  ensure_dir(join_path(dir, "srl"));
  write_file(join_path(dir, "train.jsonl"), serialize_pairs(fx.train));
  write_file(join_path(dir, "val.jsonl"), serialize_pairs(fx.val));
  write_file(join_path(dir, "test.jsonl"), serialize_pairs(fx.test));
  write_file(join_path(dir, "tokens.jsonl"), serialize_sentence_tokens(fx.sentences));
  write_file(join_path(dir, "aspects.jsonl"), serialize_aspect_sets(fx.aspects));
  for (std::size_t k = 0; k < fx.model_outputs.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "model_%02zu.conll", k);
    write_file(join_path(join_path(dir, "srl"), name), serialize_conll(fx.model_outputs[k]));
  }
  out << to_string(kind) << " fixture: " << fx.train.size() << " train, " << fx.val.size() << " val, "
      << fx.test.size() << " test pairs written to " << dir << "\n";
  return kOk;
}

}  // namespace

// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semantics-aware textual entailment toolkit"};
  app.require_subcommand(1);

  // srl-eval
  std::string gold, pred, srl_out;
  auto* srl_eval = app.add_subcommand("srl-eval", "Span-level P/R/F1 of a CoNLL prediction file");
  srl_eval->add_option("--gold", gold, "Gold CoNLL file")->required();
  srl_eval->add_option("--pred", pred, "Predicted CoNLL file")->required();
  srl_eval->add_option("--out", srl_out, "Write the scores as JSON");

  // srl-aggregate
  std::vector<std::string> fold_files;
  std::string agg_out;
  auto* srl_agg = app.add_subcommand("srl-aggregate", "Average per-fold scores from srl-eval");
  srl_agg->add_option("folds", fold_files, "Per-fold JSON files")->required();
  srl_agg->add_option("--out", agg_out, "Write the average as JSON");

  // merge-aspects
  std::vector<std::string> merge_preds;
  std::string merge_tokens, merge_out;
  int merge_m = 2;
  auto* merge = app.add_subcommand("merge-aspects", "Merge ensemble SRL outputs into per-sentence aspect sets");
  merge->add_option("--pred", merge_preds, "CoNLL prediction file, one per model")->required();
  merge->add_option("--tokens", merge_tokens, "Sentence tokens JSONL")->required();
  merge->add_option("--m", merge_m, "Aspects kept per sentence")->check(CLI::Range(1, 5));
  merge->add_option("--out", merge_out, "Output aspect JSONL")->required();

  // train
  std::string config_path;
  RunConfig flags;
  bool ablate = false;
  int m_flag = 0;
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--config", config_path, "Flat JSON run configuration");
  auto* o_train = train_cmd->add_option("--train-pairs", flags.train_pairs, "Training pairs JSONL");
  auto* o_val = train_cmd->add_option("--val-pairs", flags.val_pairs, "Validation pairs JSONL");
  auto* o_aspects = train_cmd->add_option("--aspects", flags.aspects, "Aspect sets JSONL");
  auto* o_outdir = train_cmd->add_option("--out-dir", flags.output_dir, "Output directory");
  auto* o_seed = train_cmd->add_option("--seed", flags.train.seed, "Run seed");
  auto* o_epochs = train_cmd->add_option("--epochs", flags.train.epochs, "Epochs");
  auto* o_lr = train_cmd->add_option("--lr", flags.train.learning_rate, "Learning rate");
  auto* o_bs = train_cmd->add_option("--batch-size", flags.train.batch_size, "Batch size");
  auto* o_len = train_cmd->add_option("--max-length", flags.train.max_length, "Max subword length");
  auto* o_m = train_cmd->add_option("--m", m_flag, "Aspects per sentence")->check(CLI::Range(1, 5));
  auto* o_ablate = train_cmd->add_flag("--ablate-semantics", ablate, "Replace aspects by all-O rows");

  // eval
  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "Score a checkpoint and write metric reports");
  eval_cmd->add_option("--checkpoint", ea.checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--pairs", ea.pairs, "Pairs to evaluate")->required();
  eval_cmd->add_option("--aspects", ea.aspects, "Aspect sets JSONL")->required();
  eval_cmd->add_option("--out-dir", ea.out_dir, "Output directory");
  eval_cmd->add_option("--name", ea.name, "Model name used in tables");
  eval_cmd->add_option("--sweep", ea.sweep, "Comma-separated m values to retrain and score, e.g. 1,2,3,4,5");
  eval_cmd->add_option("--train-pairs", ea.train_pairs, "Training pairs for --sweep");
  eval_cmd->add_option("--val-pairs", ea.val_pairs, "Validation pairs for --sweep");
  eval_cmd->add_option("--val-ratio", ea.val_ratio, "Validation share when --val-pairs is absent");

  // compare
  std::string cmp_a, cmp_b, cmp_out;
  auto* compare = app.add_subcommand("compare", "Metric deltas between two reports (b - a)");
  compare->add_option("--a", cmp_a, "Baseline report.json")->required();
  compare->add_option("--b", cmp_b, "Other report.json")->required();
  compare->add_option("--out", cmp_out, "Write deltas as JSON");

  // gen-fixture
  std::string fx_kind = "separable", fx_dir = "fixture";
  std::uint64_t fx_seed = 0;
  FixtureSizes fx_sizes;
  auto* gen = app.add_subcommand("gen-fixture", "Write a synthetic corpus");
  gen->add_option("--kind", fx_kind, "separable or aspect-signal");
  gen->add_option("--out-dir", fx_dir, "Output directory");
  gen->add_option("--seed", fx_seed, "Generator seed");
  gen->add_option("--train", fx_sizes.train, "Training pairs");
  gen->add_option("--val", fx_sizes.val, "Validation pairs");
  gen->add_option("--test", fx_sizes.test, "Test pairs");

  std::vector<std::string> argv_store{"semrte"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*srl_eval) return cmd_srl_eval(gold, pred, srl_out, out);
    if (*srl_agg) return cmd_srl_aggregate(fold_files, agg_out, out);
    if (*merge) return cmd_merge_aspects(merge_preds, merge_tokens, merge_m, merge_out, out);
    if (*train_cmd) {
      RunConfig cfg;
      if (!config_path.empty()) cfg = parse_run_config(read_file(config_path));
      if (o_train->count()) cfg.train_pairs = flags.train_pairs;
      if (o_val->count()) cfg.val_pairs = flags.val_pairs;
      if (o_aspects->count()) cfg.aspects = flags.aspects;
      if (o_outdir->count()) cfg.output_dir = flags.output_dir;
      if (o_seed->count()) cfg.train.seed = flags.train.seed;
      if (o_epochs->count()) cfg.train.epochs = flags.train.epochs;
      if (o_lr->count()) cfg.train.learning_rate = flags.train.learning_rate;
      if (o_bs->count()) cfg.train.batch_size = flags.train.batch_size;
      if (o_len->count()) cfg.train.max_length = flags.train.max_length;
      if (o_m->count()) cfg.fusion.num_aspects = m_flag;
      if (o_ablate->count()) cfg.ablate_semantics = ablate;
      return cmd_train(cfg, out, err);
    }
    if (*eval_cmd) return cmd_eval(ea, out, err);
    if (*compare) return cmd_compare(cmp_a, cmp_b, cmp_out, out);
    if (*gen) return cmd_gen_fixture(fx_kind, fx_dir, fx_seed, fx_sizes, out);
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

}  // namespace semrte::cli
