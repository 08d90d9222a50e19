#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seqtag/document.hpp"

namespace seqtag::eval {

enum class MatchMode { Exact, OneCharTolerance, AnyOverlap };

std::string to_string(MatchMode mode);
MatchMode match_mode_from_string(const std::string& s);

struct MatchCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (gold idx, pred idx)
};

// Greedy one-to-one matching of same-type spans: exact matches are taken
// first, then gold spans left-to-right pick the first unmatched
// prediction the mode accepts. OneCharTolerance accepts exact matches or
// exactly one boundary off by exactly one character; AnyOverlap accepts
// intersecting intervals.
MatchCounts match_spans(const std::vector<corpus::EntitySpan>& gold,
                        const std::vector<corpus::EntitySpan>& pred, MatchMode mode);

struct Prf1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Zero-denominator convention: a ratio with denominator 0 is 0.
Prf1 prf1(std::size_t tp, std::size_t fp, std::size_t fn);

struct EvalResult {
  std::string corpus;
  corpus::EntityType etype = corpus::EntityType::Gene;
  MatchMode mode = MatchMode::Exact;
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

// Micro-aggregation over documents: counts are pooled before computing
// precision/recall/F1. Documents without predictions contribute their
// gold spans as false negatives. Predictions for unknown ids are errors.
std::vector<EvalResult> evaluate_corpus(
    const corpus::Corpus& gold_corpus,
    const std::map<std::string, std::vector<corpus::EntitySpan>>& predictions, MatchMode mode);

// Levenshtein distance over Unicode scalar values.
std::size_t levenshtein(const std::u32string& a, const std::u32string& b);

struct Alignment {
  std::size_t start = 0;
  std::size_t end = 0;
  double distance = 0.0;  // normalized edit distance of the chosen window
};

// Re-anchors a detokenized entity string in the original text: exact
// substring occurrences win at distance 0 (nearest the hint, then
// leftmost); otherwise the window of length len+-2 minimizing normalized
// edit distance, rejected above 0.3.
std::optional<Alignment> fuzzy_align(const std::string& entity_string,
                                     const std::string& original_text,
                                     std::optional<std::size_t> search_hint = std::nullopt);

// Published scores keyed by (tool, corpus, entity type); F1 on the
// 0-100 scale.
class ReferenceScores {
 public:
  void add(const std::string& tool, const std::string& corpus, corpus::EntityType etype,
           double f1);
  std::optional<double> lookup(const std::string& tool, const std::string& corpus,
                               corpus::EntityType etype) const;
  std::size_t size() const { return scores_.size(); }

  // CSV with header "tool,corpus,entity_type,f1".
  static ReferenceScores load_csv(std::istream& in);
  static ReferenceScores load_file(const std::string& path);

  struct Row {
    std::string tool, corpus;
    corpus::EntityType etype;
    double f1;
  };
  std::vector<Row> rows() const;

 private:
  std::map<std::tuple<std::string, std::string, corpus::EntityType>, double> scores_;
};

struct ComparisonRow {
  std::string tool, corpus;
  corpus::EntityType etype = corpus::EntityType::Gene;
  std::optional<double> published;  // 0-100
  std::optional<double> measured;   // 0-100
  std::optional<double> delta;      // measured - published
};

// Side-by-side published-vs-measured table; informational only. Cells
// without a counterpart stay blank.
std::vector<ComparisonRow> compare_to_reference(const std::vector<EvalResult>& results,
                                                const ReferenceScores& reference);

std::string render_comparison_table(const std::vector<ComparisonRow>& rows);
std::string render_results_table(const std::vector<EvalResult>& results);
std::string results_csv(const std::vector<EvalResult>& results);
std::vector<EvalResult> parse_results_csv(std::istream& in);

}  // namespace seqtag::eval
