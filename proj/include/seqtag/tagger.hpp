#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "seqtag/bilstm.hpp"
#include "seqtag/crf.hpp"
#include "seqtag/embedding_stack.hpp"

namespace seqtag::tagger {

struct TrainConfig {
  int epochs = 200;
  int batch_size = 32;
  double lr = 0.1;
  double dropout = 0.5;
  int patience = 3;
  double anneal_factor = 0.5;
  double min_lr = 1e-4;
  int hidden = 256;
  std::uint64_t seed = 0;
  std::optional<std::string> init_checkpoint;
  bool crf_mask = false;      // -inf mask for invalid IOBES transitions
  bool strict_spans = false;  // drop misaligned annotations instead of snapping

  void validate() const;
};

struct TaggerModel {
  corpus::EntityType etype = corpus::EntityType::Gene;
  LabelScheme scheme;
  emb::EmbeddingStack embeddings;
  BiLstmParams bilstm;
  CrfParams crf;
  bool crf_masked = false;

  // Training metadata carried in the checkpoint.
  std::uint64_t seed = 0;
  double best_dev_f1 = 0.0;
  int best_epoch = -1;

  void save_file(const std::string& path) const;
  static TaggerModel load_file(const std::string& path);
  // Loads architecture and weights but resolves the embedding stack from
  // the given sources instead of the stored ones.
  static TaggerModel load_file_with_stack(const std::string& path, emb::EmbeddingStack stack);
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;   // mean per-sentence NLL
  double dev_metric = 0.0;   // micro-F1, or -dev loss in the fallback case
  double lr = 0.0;
  bool improved = false;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  bool used_loss_fallback = false;  // dev had no entities
};

// Minibatch SGD on summed per-sentence CRF NLL with plateau annealing on
// dev micro-F1 (exact token-span matching); the best-scoring parameters
// are retained. init_checkpoint starts from a stored model instead of
// random initialization.
TaggerModel train_tagger(const std::vector<corpus::Document>& train_set,
                         const std::vector<corpus::Document>& dev_set,
                         corpus::EntityType etype, emb::EmbeddingStack stack,
                         const TrainConfig& config, TrainReport* report = nullptr,
                         Diag* diag = nullptr);

// Runs the model's own preprocessing (sentence splitting, tokenization)
// on raw text and returns character-offset spans. Deterministic and
// idempotent; dropout is off.
std::vector<corpus::EntitySpan> predict_document(const TaggerModel& model,
                                                 const corpus::Document& document);

}  // namespace seqtag::tagger
