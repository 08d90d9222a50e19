#include "seqtag/commands.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "seqtag/char_lm.hpp"
#include "seqtag/embedding_stack.hpp"
#include "seqtag/eval.hpp"
#include "seqtag/formats.hpp"
#include "seqtag/manifest.hpp"
#include "seqtag/skipgram.hpp"
#include "seqtag/splits.hpp"
#include "seqtag/tagger.hpp"
#include "seqtag/utf8.hpp"

namespace seqtag::cli {

namespace fs = std::filesystem;

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_paths(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(fs::absolute(item).lexically_normal().string());
  }
  if (out.empty()) throw Error("empty path list");
  return out;
}

corpus::TypeAliasTable aliases_from(const RunConfig& config) {
  if (const auto path = config.get_optional("aliases"))
    return corpus::load_alias_table_file(*path);
  return {};
}

std::vector<corpus::Document> load_documents(const std::string& path, const std::string& from,
                                             const RunConfig& config, Diag* diag) {
  if (from == "jsonl") return corpus::read_harmonized_file(path);
  std::ifstream in(path);
  if (!in) throw Error("cannot open: " + path);
  if (from == "pubtator") return corpus::parse_pubtator(in, aliases_from(config), diag);
  if (from == "conll") {
    const auto scheme = config.get_string("conll_scheme") == "iob2"
                            ? corpus::ConllScheme::IOB2
                            : corpus::ConllScheme::IOBES;
    return corpus::parse_conll(in, scheme, aliases_from(config), diag);
  }
  throw Error("unknown input format: " + from);
}

std::string corpus_name_from(const RunConfig& config, const std::string& input_path) {
  if (const auto name = config.get_optional("name")) return *name;
  return fs::path(input_path).stem().string();
}

// Simple deterministic worker pool: slot i of the output belongs to item
// i regardless of scheduling.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  workers = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  }
  for (std::thread& t : pool) t.join();
}

// ---------------------------------------------------------------------------

RunOutcome run_convert(const RunConfig& config, Diag* diag) {
  RunOutcome outcome;
  const std::string in_path = config.get_string("in");
  const std::string from = config.get_string("from");
  outcome.inputs.push_back(in_path);
  if (config.has("aliases")) outcome.inputs.push_back(config.get_string("aliases"));

  std::vector<corpus::Document> docs = load_documents(in_path, from, config, diag);
  const corpus::Split split = corpus::split_from_string(config.get_string("split"));
  for (corpus::Document& d : docs)
    if (d.split == corpus::Split::Unassigned) d.split = split;
  for (const corpus::Document& d : docs) corpus::validate_document(d);

  const fs::path out_dir = config.get_string("out");
  fs::create_directories(out_dir);
  const std::string name = corpus_name_from(config, in_path);

  if (config.get_string("to") == "jsonl") {
    const std::string out_path = (out_dir / (name + ".jsonl")).string();
    corpus::write_harmonized_file(docs, out_path);
    outcome.outputs.push_back(out_path);
  } else {
    if (!config.has("entity_type"))
      throw Error("convert --to conll requires --entity-type");
    const auto etype = corpus::entity_type_from_string(config.get_string("entity_type"));
    for (corpus::Document& d : docs) corpus::ensure_tokenized(d);
    const std::string out_path = (out_dir / (name + ".conll")).string();
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error("cannot write: " + out_path);
    corpus::write_conll_corpus(docs, etype, out, diag);
    outcome.outputs.push_back(out_path);
  }
  outcome.summary = "converted " + std::to_string(docs.size()) + " documents";
  return outcome;
}

RunOutcome run_stats(const RunConfig& config, Diag* diag) {
  RunOutcome outcome;
  const std::string in_path = config.get_string("in");
  outcome.inputs.push_back(in_path);

  corpus::Corpus c;
  c.name = corpus_name_from(config, in_path);
  c.documents = load_documents(in_path, config.get_string("from"), config, diag);
  for (corpus::Document& d : c.documents) corpus::ensure_tokenized(d);
  const corpus::CorpusStats stats = corpus::corpus_stats(c);
  const std::string table = corpus::render_stats_table({{c.name, stats}});

  const fs::path out_dir = config.get_string("out");
  fs::create_directories(out_dir);
  const std::string out_path = (out_dir / "stats.txt").string();
  std::ofstream out(out_path, std::ios::binary);
  out << table;
  if (!out) throw Error("cannot write: " + out_path);
  outcome.outputs.push_back(out_path);
  outcome.summary = table;
  return outcome;
}

RunOutcome run_train_lm(const RunConfig& config) {
  RunOutcome outcome;
  const std::string corpus_path = config.get_string("corpus");
  outcome.inputs.push_back(corpus_path);
  const std::string text = read_text_file(corpus_path);

  emb::CharLmConfig lm_config;
  lm_config.hidden = config.get_int("hidden");
  lm_config.embed_dim = config.get_int("embed_dim");
  lm_config.seq_len = config.get_int("seq_len");
  lm_config.batch_size = config.get_int("batch_size");
  lm_config.n_splits = config.get_int("n_splits");
  lm_config.passes = config.get_int("passes");
  lm_config.lr = config.get_double("lr");
  lm_config.anneal_factor = config.get_double("anneal_factor");
  lm_config.patience = config.get_int("patience");
  lm_config.min_lr = config.get_double("min_lr");
  lm_config.clip_norm = config.get_double("clip_norm");
  lm_config.min_char_freq = static_cast<std::size_t>(config.get_int("min_char_freq"));

  const fs::path out_dir = config.get_string("out");
  fs::create_directories(out_dir);
  const std::string direction = config.get_string("direction");
  std::ostringstream summary;

  auto train_one = [&](emb::LmDirection dir, const std::string& file_name) {
    num::Rng rng = num::Rng(config.get_uint64("seed")).child("char-lm-" + to_string(dir));
    emb::CharLmTrainReport report;
    const emb::CharLmModel model = emb::train_char_lm(text, dir, lm_config, rng, &report);
    const std::string out_path = (out_dir / file_name).string();
    model.save_file(out_path);
    outcome.outputs.push_back(out_path);
    summary << to_string(dir) << " LM: best validation loss "
            << report.best_validation_loss << " nats/char over "
            << report.validation_losses.size() << " splits\n";
  };
  if (direction == "forward" || direction == "both")
    train_one(emb::LmDirection::Forward, "charlm_fwd.bin");
  if (direction == "backward" || direction == "both")
    train_one(emb::LmDirection::Backward, "charlm_bwd.bin");

  outcome.summary = summary.str();
  return outcome;
}

RunOutcome run_train_embed(const RunConfig& config, Diag* diag) {
  RunOutcome outcome;
  const std::string in_path = config.get_string("in");
  outcome.inputs.push_back(in_path);

  // Sentences of tokens, via the harmonized corpus or raw text.
  std::vector<std::vector<std::string>> sentences;
  auto add_document_sentences = [&](corpus::Document& doc) {
    corpus::ensure_tokenized(doc);
    std::vector<std::vector<std::string>> per_sentence(doc.sentences.size());
    for (const corpus::Token& t : doc.tokens)
      per_sentence[static_cast<std::size_t>(t.sentence_idx)].push_back(t.text);
    for (auto& s : per_sentence)
      if (!s.empty()) sentences.push_back(std::move(s));
  };
  if (config.get_string("from") == "jsonl") {
    std::vector<corpus::Document> docs = corpus::read_harmonized_file(in_path);
    for (corpus::Document& d : docs) add_document_sentences(d);
  } else {
    corpus::Document doc;
    doc.text = read_text_file(in_path);
    add_document_sentences(doc);
  }
  (void)diag;

  emb::SkipgramConfig sg_config;
  sg_config.dim = config.get_int("dim");
  sg_config.window = config.get_int("window");
  sg_config.negatives = config.get_int("negatives");
  sg_config.epochs = config.get_int("epochs");
  sg_config.lr = config.get_double("lr");
  sg_config.min_count = static_cast<std::size_t>(config.get_int("min_count"));
  sg_config.ngram_min = config.get_int("ngram_min");
  sg_config.ngram_max = config.get_int("ngram_max");
  sg_config.buckets = config.get_int("buckets");
  sg_config.subsample = config.get_double("subsample");

  num::Rng rng = num::Rng(config.get_uint64("seed")).child("skipgram");
  const emb::SkipgramModel model = emb::train_skipgram(sentences, sg_config, rng);

  const fs::path out_dir = config.get_string("out");
  fs::create_directories(out_dir);
  const std::string out_path = (out_dir / "skipgram.bin").string();
  model.save_file(out_path);
  outcome.outputs.push_back(out_path);
  outcome.summary = "skip-gram model: " + std::to_string(model.vocab().size()) +
                    " words, dim " + std::to_string(model.dim());
  return outcome;
}

emb::EmbeddingStack stack_from(const RunConfig& config, std::vector<std::string>& inputs) {
  std::vector<emb::EmbeddingSource> sources;
  if (const auto p = config.get_optional("charlm_fwd")) sources.push_back({"char-lm", *p});
  if (const auto p = config.get_optional("charlm_bwd")) sources.push_back({"char-lm", *p});
  if (const auto p = config.get_optional("skipgram")) sources.push_back({"skipgram", *p});
  if (const auto p = config.get_optional("vectors")) sources.push_back({"word-vectors", *p});
  if (sources.empty())
    throw Error("train-tagger needs at least one embedding source "
                "(charlm_fwd/charlm_bwd/skipgram/vectors)");
  for (const auto& s : sources) inputs.push_back(s.path);
  return emb::EmbeddingStack::from_sources(sources);
}

RunOutcome run_train_tagger(const RunConfig& config, Diag* diag) {
  RunOutcome outcome;
  std::vector<corpus::Corpus> train_corpora, dev_corpora;
  for (const std::string& path : split_paths(config.get_string("train"))) {
    outcome.inputs.push_back(path);
    train_corpora.push_back(
        {fs::path(path).stem().string(), corpus::read_harmonized_file(path), {}});
  }
  for (const std::string& path : split_paths(config.get_string("dev"))) {
    outcome.inputs.push_back(path);
    dev_corpora.push_back(
        {fs::path(path).stem().string(), corpus::read_harmonized_file(path), {}});
  }

  // HUNER policy over the files' split fields: train and test portions
  // train, dev portions validate.
  corpus::SplitSets train_sets = corpus::build_splits_from_fields(train_corpora);
  corpus::SplitSets dev_sets = corpus::build_splits_from_fields(dev_corpora);
  std::vector<corpus::Document> dev_docs = std::move(dev_sets.dev);
  if (dev_docs.empty()) {
    // Dev files whose documents are all marked train still act as the
    // dev set when given through --dev.
    dev_docs = std::move(dev_sets.train);
  }

  const auto etype = corpus::entity_type_from_string(config.get_string("entity_type"));
  emb::EmbeddingStack stack = stack_from(config, outcome.inputs);

  tagger::TrainConfig train_config;
  train_config.epochs = config.get_int("epochs");
  train_config.batch_size = config.get_int("batch_size");
  train_config.lr = config.get_double("lr");
  train_config.dropout = config.get_double("dropout");
  train_config.patience = config.get_int("patience");
  train_config.anneal_factor = config.get_double("anneal_factor");
  train_config.min_lr = config.get_double("min_lr");
  train_config.hidden = config.get_int("hidden");
  train_config.seed = config.get_uint64("seed");
  train_config.crf_mask = config.get_bool("crf_mask");
  train_config.strict_spans = config.get_bool("strict_spans");
  if (const auto p = config.get_optional("init_model")) {
    train_config.init_checkpoint = *p;
    outcome.inputs.push_back(*p);
  }

  tagger::TrainReport report;
  const tagger::TaggerModel model = tagger::train_tagger(
      train_sets.train, dev_docs, etype, std::move(stack), train_config, &report, diag);

  const fs::path out_dir = config.get_string("out");
  fs::create_directories(out_dir);
  const std::string model_path =
      (out_dir / ("tagger_" + corpus::to_string(etype) + ".bin")).string();
  model.save_file(model_path);
  outcome.outputs.push_back(model_path);

  const std::string log_path = (out_dir / "train_log.txt").string();
  {
    std::ofstream log(log_path, std::ios::binary);
    log << "epoch\ttrain_loss\tdev_metric\tlr\timproved\n";
    for (const tagger::EpochRecord& e : report.epochs)
      log << e.epoch << "\t" << e.train_loss << "\t" << e.dev_metric << "\t" << e.lr << "\t"
          << (e.improved ? 1 : 0) << "\n";
    if (!log) throw Error("cannot write: " + log_path);
  }
  outcome.outputs.push_back(log_path);

  std::ostringstream summary;
  summary << "trained " << corpus::to_string(etype) << " tagger on "
          << train_sets.train.size() << " documents; best dev "
          << (report.used_loss_fallback ? "loss-selected model" : "F1 ")
          << (report.used_loss_fallback ? std::string()
                                        : std::to_string(model.best_dev_f1))
          << " at epoch " << model.best_epoch;
  outcome.summary = summary.str();
  return outcome;
}

RunOutcome run_predict(const RunConfig& config, Diag* diag) {
  RunOutcome outcome;
  const std::string model_path = config.get_string("model");
  const std::string in_path = config.get_string("in");
  outcome.inputs.push_back(model_path);
  outcome.inputs.push_back(in_path);

  const tagger::TaggerModel model = tagger::TaggerModel::load_file(model_path);
  for (const emb::EmbeddingSource& src : model.embeddings.sources())
    outcome.inputs.push_back(src.path);

  std::vector<corpus::Document> docs;
  if (config.get_string("from") == "jsonl") {
    docs = corpus::read_harmonized_file(in_path);
  } else {
    corpus::Document doc;
    doc.id = fs::path(in_path).stem().string();
    doc.text = read_text_file(in_path);
    docs.push_back(std::move(doc));
  }
  (void)diag;

  std::vector<std::vector<corpus::EntitySpan>> predictions(docs.size());
  parallel_for(docs.size(), config.get_int("workers"), [&](std::size_t i) {
    predictions[i] = tagger::predict_document(model, docs[i]);
  });

  const fs::path out_dir = config.get_string("out");
  fs::create_directories(out_dir);
  const std::string out_path = (out_dir / "predictions.jsonl").string();
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error("cannot write: " + out_path);
  std::size_t total = 0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    nlohmann::ordered_json obj;
    obj["id"] = docs[i].id;
    obj["annotations"] = nlohmann::ordered_json::array();
    for (const corpus::EntitySpan& s : predictions[i]) {
      nlohmann::ordered_json ann;
      ann["start"] = s.start;
      ann["end"] = s.end;
      ann["type"] = corpus::to_string(s.etype);
      ann["text"] = s.surface;
      obj["annotations"].push_back(std::move(ann));
      ++total;
    }
    out << obj.dump() << "\n";
  }
  if (!out) throw Error("cannot write: " + out_path);
  outcome.outputs.push_back(out_path);
  outcome.summary = "predicted " + std::to_string(total) + " spans over " +
                    std::to_string(docs.size()) + " documents";
  return outcome;
}

std::map<std::string, std::vector<corpus::EntitySpan>> read_predictions_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open predictions: " + path);
  std::map<std::string, std::vector<corpus::EntitySpan>> predictions;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const nlohmann::json obj = nlohmann::json::parse(line);
      std::vector<corpus::EntitySpan>& spans = predictions[obj.at("id").get<std::string>()];
      for (const auto& ann : obj.at("annotations")) {
        corpus::EntitySpan s;
        s.start = ann.at("start").get<std::size_t>();
        s.end = ann.at("end").get<std::size_t>();
        s.etype = corpus::entity_type_from_string(ann.at("type").get<std::string>());
        s.surface = ann.value("text", "");
        spans.push_back(std::move(s));
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error("predictions " + path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return predictions;
}

RunOutcome run_evaluate(const RunConfig& config) {
  RunOutcome outcome;
  const std::string gold_path = config.get_string("gold");
  const std::string pred_path = config.get_string("pred");
  outcome.inputs.push_back(gold_path);
  outcome.inputs.push_back(pred_path);

  corpus::Corpus gold;
  gold.name = fs::path(gold_path).stem().string();
  gold.documents = corpus::read_harmonized_file(gold_path);
  const auto etype = corpus::entity_type_from_string(config.get_string("entity_type"));
  gold.entity_types_annotated = {etype};
  const auto predictions = read_predictions_file(pred_path);
  const auto mode = eval::match_mode_from_string(config.get_string("mode"));

  const std::vector<eval::EvalResult> results =
      eval::evaluate_corpus(gold, predictions, mode);

  const fs::path out_dir = config.get_string("out");
  fs::create_directories(out_dir);
  const std::string table = eval::render_results_table(results);
  const std::string txt_path = (out_dir / "report.txt").string();
  const std::string csv_path = (out_dir / "report.csv").string();
  {
    std::ofstream out(txt_path, std::ios::binary);
    out << table;
    if (!out) throw Error("cannot write: " + txt_path);
  }
  {
    std::ofstream out(csv_path, std::ios::binary);
    out << eval::results_csv(results);
    if (!out) throw Error("cannot write: " + csv_path);
  }
  outcome.outputs.push_back(txt_path);
  outcome.outputs.push_back(csv_path);
  outcome.summary = table;
  return outcome;
}

RunOutcome run_compare(const RunConfig& config) {
  RunOutcome outcome;
  const std::string measured_path = config.get_string("measured");
  const std::string reference_path = config.get_string("reference");
  outcome.inputs.push_back(measured_path);
  outcome.inputs.push_back(reference_path);

  std::ifstream measured_in(measured_path);
  if (!measured_in) throw Error("cannot open measured results: " + measured_path);
  const std::vector<eval::EvalResult> measured = eval::parse_results_csv(measured_in);
  const eval::ReferenceScores reference = eval::ReferenceScores::load_file(reference_path);

  const std::vector<eval::ComparisonRow> rows =
      eval::compare_to_reference(measured, reference);
  const std::string table = eval::render_comparison_table(rows);

  const fs::path out_dir = config.get_string("out");
  fs::create_directories(out_dir);
  const std::string out_path = (out_dir / "comparison.txt").string();
  std::ofstream out(out_path, std::ios::binary);
  out << table;
  if (!out) throw Error("cannot write: " + out_path);
  outcome.outputs.push_back(out_path);
  outcome.summary = table;
  return outcome;
}

}  // namespace

RunOutcome run_command(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  Diag diag;
  RunOutcome outcome;
  if (config.command() == "convert") {
    outcome = run_convert(config, &diag);
  } else if (config.command() == "stats") {
    outcome = run_stats(config, &diag);
  } else if (config.command() == "train-lm") {
    outcome = run_train_lm(config);
  } else if (config.command() == "train-embed") {
    outcome = run_train_embed(config, &diag);
  } else if (config.command() == "train-tagger") {
    outcome = run_train_tagger(config, &diag);
  } else if (config.command() == "predict") {
    outcome = run_predict(config, &diag);
  } else if (config.command() == "evaluate") {
    outcome = run_evaluate(config);
  } else if (config.command() == "compare") {
    outcome = run_compare(config);
  } else {
    throw Error("unknown command: '" + config.command() + "'");
  }

  for (const std::string& w : diag.warnings) std::cerr << "warning: " << w << "\n";

  RunManifest manifest;
  manifest.command = config.command();
  manifest.config = config.values();
  manifest.inputs = outcome.inputs;
  manifest.outputs = outcome.outputs;
  manifest.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const fs::path out_dir = config.get_string("out");
  fs::create_directories(out_dir);
  const std::string manifest_path = (out_dir / "manifest.json").string();
  manifest.write_file(manifest_path);
  outcome.outputs.push_back(manifest_path);
  return outcome;
}

}  // namespace seqtag::cli
