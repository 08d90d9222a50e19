#include "seqtag/tagger.hpp"

#include <algorithm>
#include <limits>

#include "seqtag/eval.hpp"
#include "seqtag/model_io.hpp"
#include "seqtag/text.hpp"
#include "seqtag/utf8.hpp"

namespace seqtag::tagger {

void TrainConfig::validate() const {
  if (epochs <= 0) throw Error("train config: epochs must be positive");
  if (batch_size <= 0) throw Error("train config: batch_size must be positive");
  if (lr <= 0.0) throw Error("train config: lr must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw Error("train config: dropout must be in [0, 1)");
  if (patience < 0) throw Error("train config: patience must be non-negative");
  if (hidden <= 0) throw Error("train config: hidden must be positive");
}

namespace {

// One training/evaluation sentence with frozen embeddings.
struct SentenceInstance {
  std::size_t doc_index = 0;
  std::size_t sentence_start = 0;  // absolute offset of the sentence
  std::vector<corpus::Token> abs_tokens;
  std::vector<num::Vector> features;
  std::vector<int> gold;  // label indices, training sentences only
};

std::vector<corpus::Token> relative_tokens(const std::vector<corpus::Token>& tokens,
                                           std::size_t sentence_start) {
  std::vector<corpus::Token> rel = tokens;
  for (corpus::Token& t : rel) {
    t.start -= sentence_start;
    t.end -= sentence_start;
  }
  return rel;
}

// Builds per-sentence instances for one document. Annotation offsets are
// clipped into the sentence before IOBES encoding.
void build_instances(const corpus::Document& doc, std::size_t doc_index,
                     corpus::EntityType etype, const emb::EmbeddingStack& stack,
                     bool with_gold, bool strict, const LabelScheme& scheme, Diag* diag,
                     std::vector<SentenceInstance>& out) {
  const std::u32string text = utf8::decode(doc.text);
  std::vector<corpus::EntitySpan> anns;
  for (const corpus::EntitySpan& s : doc.annotations)
    if (s.etype == etype) anns.push_back(s);
  anns = corpus::resolve_overlaps(std::move(anns), diag);

  for (std::size_t si = 0; si < doc.sentences.size(); ++si) {
    const corpus::SentenceSpan sent = doc.sentences[si];
    std::vector<corpus::Token> sent_tokens;
    for (const corpus::Token& t : doc.tokens)
      if (t.sentence_idx == static_cast<int>(si)) sent_tokens.push_back(t);
    if (sent_tokens.empty()) continue;

    SentenceInstance inst;
    inst.doc_index = doc_index;
    inst.sentence_start = sent.start;
    inst.abs_tokens = sent_tokens;
    const std::u32string sent_text = text.substr(sent.start, sent.end - sent.start);
    const std::vector<corpus::Token> rel = relative_tokens(sent_tokens, sent.start);
    inst.features = stack.embed(sent_text, rel);

    if (with_gold) {
      std::vector<corpus::EntitySpan> rel_anns;
      for (const corpus::EntitySpan& s : anns) {
        if (s.end <= sent.start || s.start >= sent.end) continue;
        corpus::EntitySpan r = s;
        r.start = std::max(s.start, sent.start) - sent.start;
        r.end = std::min(s.end, sent.end) - sent.start;
        rel_anns.push_back(std::move(r));
      }
      const std::vector<corpus::IobesLabel> labels =
          corpus::encode_iobes(rel, rel_anns, etype, diag, strict);
      for (const corpus::IobesLabel& l : labels) inst.gold.push_back(scheme.index_of(l));
    }
    out.push_back(std::move(inst));
  }
}

struct TaggerParams {
  BiLstmParams bilstm;
  CrfParams crf;
};

struct TaggerGrads {
  BiLstmGrads bilstm;
  Matrix crf_transitions;
  Matrix emission_w;
  Vector emission_b;

  static TaggerGrads zeros_like(const TaggerParams& p) {
    TaggerGrads g;
    g.bilstm = BiLstmGrads::zeros_like(p.bilstm);
    g.crf_transitions = Matrix::Zero(p.crf.transitions.rows(), p.crf.transitions.cols());
    g.emission_w = Matrix::Zero(p.crf.emission_w.rows(), p.crf.emission_w.cols());
    g.emission_b = Vector::Zero(p.crf.emission_b.size());
    return g;
  }
};

// Forward + backward for one sentence; gradients accumulate. Returns the
// sentence NLL.
double sentence_loss_and_grads(const TaggerParams& params, const SentenceInstance& inst,
                               double dropout_p, num::Rng* rng, bool training,
                               TaggerGrads& grads) {
  BiLstmCache cache;
  const std::vector<num::Vector> encoded =
      bilstm_encode(params.bilstm, inst.features, dropout_p, rng, training, &cache);
  const Matrix emissions = crf_emissions(params.crf, encoded);

  CrfGradients crf_grads;
  const double loss = crf_nll_and_gradients(params.crf, emissions, inst.gold, crf_grads);

  // Masked transition cells carry -inf; their marginals are zero but the
  // indicator subtraction can leave a -1 on a structurally impossible
  // cell only if the gold path itself were invalid, which encode_iobes
  // rules out. Accumulate as-is.
  grads.crf_transitions += crf_grads.transitions;

  const std::size_t T = inst.features.size();
  std::vector<num::Vector> d_encoded(T);
  for (std::size_t t = 0; t < T; ++t) {
    const num::Vector d_em = crf_grads.emissions.row(static_cast<Eigen::Index>(t)).transpose();
    grads.emission_w.noalias() += d_em * encoded[t].transpose();
    grads.emission_b += d_em;
    d_encoded[t] = params.crf.emission_w.transpose() * d_em;
  }
  bilstm_backward(params.bilstm, cache, d_encoded, grads.bilstm);
  return loss;
}

void apply_update(TaggerParams& params, const TaggerGrads& grads, double lr, double scale) {
  const double step = lr * scale;
  params.bilstm.forward.W -= step * grads.bilstm.forward.W;
  params.bilstm.forward.U -= step * grads.bilstm.forward.U;
  params.bilstm.forward.b -= step * grads.bilstm.forward.b;
  params.bilstm.backward.W -= step * grads.bilstm.backward.W;
  params.bilstm.backward.U -= step * grads.bilstm.backward.U;
  params.bilstm.backward.b -= step * grads.bilstm.backward.b;
  // -inf mask cells stay -inf: x - 0*g is only finite for finite x, so
  // skip masked entries explicitly.
  for (Eigen::Index r = 0; r < params.crf.transitions.rows(); ++r)
    for (Eigen::Index c = 0; c < params.crf.transitions.cols(); ++c)
      if (std::isfinite(params.crf.transitions(r, c)))
        params.crf.transitions(r, c) -= step * grads.crf_transitions(r, c);
  params.crf.emission_w -= step * grads.emission_w;
  params.crf.emission_b -= step * grads.emission_b;
}

std::vector<int> predict_labels(const TaggerParams& params,
                                const std::vector<num::Vector>& features) {
  const std::vector<num::Vector> encoded = bilstm_encode(params.bilstm, features);
  const Matrix emissions = crf_emissions(params.crf, encoded);
  return viterbi_decode(params.crf, emissions).labels;
}

}  // namespace

TaggerModel train_tagger(const std::vector<corpus::Document>& train_set,
                         const std::vector<corpus::Document>& dev_set,
                         corpus::EntityType etype, emb::EmbeddingStack stack,
                         const TrainConfig& config, TrainReport* report, Diag* diag) {
  config.validate();
  if (train_set.empty()) throw Error("train_tagger: empty training set");
  if (dev_set.empty()) throw Error("train_tagger: empty dev set");
  if (stack.empty()) throw Error("train_tagger: embedding stack is empty");

  LabelScheme scheme;
  scheme.etype = etype;

  // Tokenize and featurize once; embeddings are frozen during training.
  std::vector<corpus::Document> train_docs = train_set;
  std::vector<corpus::Document> dev_docs = dev_set;
  for (corpus::Document& d : train_docs) corpus::ensure_tokenized(d);
  for (corpus::Document& d : dev_docs) corpus::ensure_tokenized(d);

  std::vector<SentenceInstance> train_instances;
  for (std::size_t i = 0; i < train_docs.size(); ++i)
    build_instances(train_docs[i], i, etype, stack, /*with_gold=*/true, config.strict_spans,
                    scheme, diag, train_instances);
  if (train_instances.empty()) throw Error("train_tagger: no usable training sentences");

  std::vector<SentenceInstance> dev_instances;
  for (std::size_t i = 0; i < dev_docs.size(); ++i)
    build_instances(dev_docs[i], i, etype, stack, /*with_gold=*/true, config.strict_spans,
                    scheme, diag, dev_instances);

  // Token-snapped gold spans per dev document, for exact span F1.
  std::vector<std::vector<corpus::EntitySpan>> dev_gold(dev_docs.size());
  std::size_t dev_entity_count = 0;
  for (const SentenceInstance& inst : dev_instances) {
    std::vector<corpus::IobesLabel> labels;
    for (int g : inst.gold) labels.push_back(scheme.label_of(g));
    const std::u32string text = utf8::decode(dev_docs[inst.doc_index].text);
    for (corpus::EntitySpan& s : corpus::decode_iobes(labels, inst.abs_tokens, text)) {
      ++dev_entity_count;
      dev_gold[inst.doc_index].push_back(std::move(s));
    }
  }
  const bool loss_fallback = dev_entity_count == 0;
  if (loss_fallback)
    emit_warning(diag,
                 "dev set has no entities for this type; model selection falls back to the "
                 "dev loss");

  const int feature_dim = stack.total_dim();
  num::Rng rng(config.seed);
  TaggerParams params;
  if (config.init_checkpoint) {
    const TaggerModel init = TaggerModel::load_file_with_stack(*config.init_checkpoint,
                                                               emb::EmbeddingStack{});
    if (init.bilstm.input_dim() != feature_dim)
      throw Error("init checkpoint expects embedding dim " +
                  std::to_string(init.bilstm.input_dim()) + " but the stack provides " +
                  std::to_string(feature_dim));
    if (init.bilstm.hidden_dim() != config.hidden)
      throw Error("init checkpoint hidden size " + std::to_string(init.bilstm.hidden_dim()) +
                  " does not match configured hidden " + std::to_string(config.hidden));
    params.bilstm = init.bilstm;
    params.crf = init.crf;
  } else {
    num::Rng init_rng = rng.child("tagger-init");
    params.bilstm = BiLstmParams::glorot(feature_dim, config.hidden, init_rng);
    num::Rng crf_rng = init_rng.child("crf");
    params.crf = CrfParams::glorot(LabelScheme::kNumLabels, 2 * config.hidden, crf_rng);
  }
  if (config.crf_mask) params.crf.apply_iobes_mask();

  num::PlateauScheduler scheduler(
      {config.lr, config.anneal_factor, config.patience, config.min_lr});
  double lr = config.lr;
  num::Rng shuffle_rng = rng.child("shuffle");
  num::Rng dropout_rng = rng.child("dropout");

  std::vector<std::size_t> order(train_instances.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TaggerParams best_params = params;
  double best_metric = -std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  TrainReport local_report;
  local_report.used_loss_fallback = loss_fallback;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    // Deterministic Fisher-Yates shuffle.
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = shuffle_rng.uniform_index(i);
      std::swap(order[i - 1], order[j]);
    }

    double epoch_loss = 0.0;
    std::size_t batch_begin = 0;
    while (batch_begin < order.size()) {
      const std::size_t batch_end =
          std::min(order.size(), batch_begin + static_cast<std::size_t>(config.batch_size));
      TaggerGrads grads = TaggerGrads::zeros_like(params);
      for (std::size_t k = batch_begin; k < batch_end; ++k) {
        epoch_loss += sentence_loss_and_grads(params, train_instances[order[k]],
                                              config.dropout, &dropout_rng,
                                              /*training=*/true, grads);
      }
      apply_update(params, grads, lr, 1.0 / static_cast<double>(batch_end - batch_begin));
      batch_begin = batch_end;
    }
    epoch_loss /= static_cast<double>(train_instances.size());

    // Dev evaluation with dropout off.
    double metric;
    if (loss_fallback) {
      double dev_loss = 0.0;
      for (const SentenceInstance& inst : dev_instances) {
        const std::vector<num::Vector> encoded = bilstm_encode(params.bilstm, inst.features);
        const Matrix emissions = crf_emissions(params.crf, encoded);
        CrfGradients unused;
        dev_loss += crf_nll_and_gradients(params.crf, emissions, inst.gold, unused);
      }
      metric = dev_instances.empty() ? 0.0 : -dev_loss / dev_instances.size();
    } else {
      std::size_t tp = 0, fp = 0, fn = 0;
      std::vector<std::vector<corpus::EntitySpan>> dev_pred(dev_docs.size());
      for (const SentenceInstance& inst : dev_instances) {
        const std::vector<int> labels = predict_labels(params, inst.features);
        std::vector<corpus::IobesLabel> iobes;
        for (int l : labels) iobes.push_back(scheme.label_of(l));
        const std::u32string text = utf8::decode(dev_docs[inst.doc_index].text);
        for (corpus::EntitySpan& s : corpus::decode_iobes(iobes, inst.abs_tokens, text))
          dev_pred[inst.doc_index].push_back(std::move(s));
      }
      for (std::size_t d = 0; d < dev_docs.size(); ++d) {
        const eval::MatchCounts counts =
            eval::match_spans(dev_gold[d], dev_pred[d], eval::MatchMode::Exact);
        tp += counts.tp;
        fp += counts.fp;
        fn += counts.fn;
      }
      metric = eval::prf1(tp, fp, fn).f1;
    }

    if (metric > best_metric) {
      best_metric = metric;
      best_params = params;
      best_epoch = epoch;
    }
    lr = scheduler.report(metric, /*higher_is_better=*/true);
    local_report.epochs.push_back(
        {epoch, epoch_loss, metric, lr, scheduler.last_improved()});
  }

  TaggerModel model;
  model.etype = etype;
  model.scheme = scheme;
  model.embeddings = std::move(stack);
  model.bilstm = std::move(best_params.bilstm);
  model.crf = std::move(best_params.crf);
  model.crf_masked = config.crf_mask;
  model.seed = config.seed;
  model.best_dev_f1 = loss_fallback ? 0.0 : best_metric;
  model.best_epoch = best_epoch;
  if (report) *report = std::move(local_report);
  return model;
}

std::vector<corpus::EntitySpan> predict_document(const TaggerModel& model,
                                                 const corpus::Document& document) {
  const std::u32string text = utf8::decode(document.text);
  if (text.empty()) return {};
  const std::vector<corpus::SentenceSpan> sentences = corpus::split_sentences(text);
  const std::vector<corpus::Token> tokens = corpus::tokenize(text, sentences);

  TaggerParams params{model.bilstm, model.crf};
  std::vector<corpus::EntitySpan> spans;
  for (std::size_t si = 0; si < sentences.size(); ++si) {
    std::vector<corpus::Token> sent_tokens;
    for (const corpus::Token& t : tokens)
      if (t.sentence_idx == static_cast<int>(si)) sent_tokens.push_back(t);
    if (sent_tokens.empty()) continue;
    const corpus::SentenceSpan sent = sentences[si];
    const std::u32string sent_text = text.substr(sent.start, sent.end - sent.start);
    const std::vector<num::Vector> features =
        model.embeddings.embed(sent_text, relative_tokens(sent_tokens, sent.start));
    const std::vector<int> labels = predict_labels(params, features);
    std::vector<corpus::IobesLabel> iobes;
    for (int l : labels) iobes.push_back(model.scheme.label_of(l));
    for (corpus::EntitySpan& s : corpus::decode_iobes(iobes, sent_tokens, text))
      spans.push_back(std::move(s));
  }
  std::sort(spans.begin(), spans.end(), [](const corpus::EntitySpan& a,
                                           const corpus::EntitySpan& b) {
    return std::tie(a.start, a.end) < std::tie(b.start, b.end);
  });
  return spans;
}

void TaggerModel::save_file(const std::string& path) const {
  io::ModelWriter writer("tagger");
  writer.meta()["entity_type"] = corpus::to_string(etype);
  writer.meta()["hidden"] = bilstm.hidden_dim();
  writer.meta()["feature_dim"] = bilstm.input_dim();
  writer.meta()["crf_masked"] = crf_masked;
  writer.meta()["seed"] = seed;
  writer.meta()["best_dev_f1"] = best_dev_f1;
  writer.meta()["best_epoch"] = best_epoch;
  writer.meta()["labels"] = scheme.label_strings();
  nlohmann::ordered_json sources = nlohmann::ordered_json::array();
  for (const emb::EmbeddingSource& src : embeddings.sources()) {
    nlohmann::ordered_json s;
    s["kind"] = src.kind;
    s["path"] = src.path;
    sources.push_back(std::move(s));
  }
  writer.meta()["embeddings"] = std::move(sources);
  writer.add_block("bilstm_fwd_w", bilstm.forward.W);
  writer.add_block("bilstm_fwd_u", bilstm.forward.U);
  writer.add_block("bilstm_fwd_b", bilstm.forward.b);
  writer.add_block("bilstm_bwd_w", bilstm.backward.W);
  writer.add_block("bilstm_bwd_u", bilstm.backward.U);
  writer.add_block("bilstm_bwd_b", bilstm.backward.b);
  writer.add_block("crf_transitions", crf.transitions);
  writer.add_block("emission_w", crf.emission_w);
  writer.add_block("emission_b", crf.emission_b);
  writer.save_file(path);
}

namespace {

TaggerModel load_tagger_impl(const std::string& path, std::optional<emb::EmbeddingStack> stack) {
  std::string buffer;
  io::ModelReader reader = io::ModelReader::open(path, &buffer);
  if (reader.model_type() != "tagger")
    throw Error(path + " is not a tagger model (type '" + reader.model_type() + "')");
  TaggerModel model;
  model.etype = corpus::entity_type_from_string(
      reader.meta().at("entity_type").get<std::string>());
  model.scheme.etype = model.etype;
  model.crf_masked = reader.meta().value("crf_masked", false);
  model.seed = reader.meta().value("seed", std::uint64_t{0});
  model.best_dev_f1 = reader.meta().value("best_dev_f1", 0.0);
  model.best_epoch = reader.meta().value("best_epoch", -1);
  model.bilstm.forward.W = reader.matrix("bilstm_fwd_w");
  model.bilstm.forward.U = reader.matrix("bilstm_fwd_u");
  model.bilstm.forward.b = reader.vector("bilstm_fwd_b");
  model.bilstm.backward.W = reader.matrix("bilstm_bwd_w");
  model.bilstm.backward.U = reader.matrix("bilstm_bwd_u");
  model.bilstm.backward.b = reader.vector("bilstm_bwd_b");
  model.crf.transitions = reader.matrix("crf_transitions");
  model.crf.emission_w = reader.matrix("emission_w");
  model.crf.emission_b = reader.vector("emission_b");

  if (stack) {
    model.embeddings = std::move(*stack);
  } else {
    std::vector<emb::EmbeddingSource> sources;
    for (const auto& s : reader.meta().at("embeddings"))
      sources.push_back({s.at("kind").get<std::string>(), s.at("path").get<std::string>()});
    model.embeddings = emb::EmbeddingStack::from_sources(sources);
  }
  if (!model.embeddings.empty() && model.embeddings.total_dim() != model.bilstm.input_dim())
    throw Error("embedding stack dimension " + std::to_string(model.embeddings.total_dim()) +
                " does not match checkpoint feature dim " +
                std::to_string(model.bilstm.input_dim()));
  return model;
}

}  // namespace

TaggerModel TaggerModel::load_file(const std::string& path) {
  return load_tagger_impl(path, std::nullopt);
}

TaggerModel TaggerModel::load_file_with_stack(const std::string& path,
                                              emb::EmbeddingStack stack) {
  return load_tagger_impl(path, std::move(stack));
}

}  // namespace seqtag::tagger
