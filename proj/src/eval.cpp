#include "seqtag/eval.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "seqtag/utf8.hpp"

namespace seqtag::eval {

std::string to_string(MatchMode mode) {
  switch (mode) {
    case MatchMode::Exact: return "exact";
    case MatchMode::OneCharTolerance: return "tolerant";
    case MatchMode::AnyOverlap: return "overlap";
  }
  throw Error("unreachable match mode");
}

MatchMode match_mode_from_string(const std::string& s) {
  if (s == "exact") return MatchMode::Exact;
  if (s == "tolerant") return MatchMode::OneCharTolerance;
  if (s == "overlap") return MatchMode::AnyOverlap;
  throw Error("unknown match mode: '" + s + "' (expected exact|tolerant|overlap)");
}

namespace {

bool exact_match(const corpus::EntitySpan& g, const corpus::EntitySpan& p) {
  return g.start == p.start && g.end == p.end;
}

std::size_t abs_diff(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

// Exactly one boundary differs by exactly one character; the other is
// identical. Exact matches are handled in the first pass.
bool one_char_tolerant_match(const corpus::EntitySpan& g, const corpus::EntitySpan& p) {
  const std::size_t ds = abs_diff(g.start, p.start);
  const std::size_t de = abs_diff(g.end, p.end);
  return (ds == 1 && de == 0) || (ds == 0 && de == 1);
}

bool overlap_match(const corpus::EntitySpan& g, const corpus::EntitySpan& p) {
  return g.start < p.end && p.start < g.end;
}

}  // namespace

MatchCounts match_spans(const std::vector<corpus::EntitySpan>& gold,
                        const std::vector<corpus::EntitySpan>& pred, MatchMode mode) {
  // Work over position-sorted index views so greedy order is defined.
  std::vector<std::size_t> gold_order(gold.size()), pred_order(pred.size());
  for (std::size_t i = 0; i < gold.size(); ++i) gold_order[i] = i;
  for (std::size_t i = 0; i < pred.size(); ++i) pred_order[i] = i;
  auto by_position = [](const std::vector<corpus::EntitySpan>& spans) {
    return [&spans](std::size_t a, std::size_t b) {
      return std::tie(spans[a].start, spans[a].end, a) <
             std::tie(spans[b].start, spans[b].end, b);
    };
  };
  std::sort(gold_order.begin(), gold_order.end(), by_position(gold));
  std::sort(pred_order.begin(), pred_order.end(), by_position(pred));

  std::vector<bool> gold_used(gold.size(), false), pred_used(pred.size(), false);
  MatchCounts counts;

  auto run_pass = [&](auto&& accepts) {
    for (std::size_t gi : gold_order) {
      if (gold_used[gi]) continue;
      for (std::size_t pi : pred_order) {
        if (pred_used[pi]) continue;
        if (accepts(gold[gi], pred[pi])) {
          gold_used[gi] = true;
          pred_used[pi] = true;
          counts.pairs.emplace_back(gi, pi);
          break;
        }
      }
    }
  };

  run_pass(exact_match);
  if (mode == MatchMode::OneCharTolerance) run_pass(one_char_tolerant_match);
  if (mode == MatchMode::AnyOverlap) run_pass(overlap_match);

  counts.tp = counts.pairs.size();
  counts.fp = pred.size() - counts.tp;
  counts.fn = gold.size() - counts.tp;
  return counts;
}

Prf1 prf1(std::size_t tp, std::size_t fp, std::size_t fn) {
  Prf1 out;
  out.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  out.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  out.f1 = out.precision + out.recall == 0.0
               ? 0.0
               : 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

std::vector<EvalResult> evaluate_corpus(
    const corpus::Corpus& gold_corpus,
    const std::map<std::string, std::vector<corpus::EntitySpan>>& predictions,
    MatchMode mode) {
  std::set<std::string> known_ids;
  for (const corpus::Document& doc : gold_corpus.documents) known_ids.insert(doc.id);
  for (const auto& [id, spans] : predictions)
    if (!known_ids.count(id))
      throw Error("prediction for unknown document id '" + id + "'");

  std::set<corpus::EntityType> types(gold_corpus.entity_types_annotated.begin(),
                                     gold_corpus.entity_types_annotated.end());
  if (types.empty()) {
    for (const corpus::Document& doc : gold_corpus.documents)
      for (const corpus::EntitySpan& s : doc.annotations) types.insert(s.etype);
    for (const auto& [id, spans] : predictions)
      for (const corpus::EntitySpan& s : spans) types.insert(s.etype);
  }

  static const std::vector<corpus::EntitySpan> kNoSpans;
  std::vector<EvalResult> results;
  for (corpus::EntityType etype : types) {
    EvalResult r;
    r.corpus = gold_corpus.name;
    r.etype = etype;
    r.mode = mode;
    for (const corpus::Document& doc : gold_corpus.documents) {
      const auto pit = predictions.find(doc.id);
      const std::vector<corpus::EntitySpan>& doc_preds =
          pit == predictions.end() ? kNoSpans : pit->second;
      std::vector<corpus::EntitySpan> gold_t, pred_t;
      for (const corpus::EntitySpan& s : doc.annotations)
        if (s.etype == etype) gold_t.push_back(s);
      for (const corpus::EntitySpan& s : doc_preds)
        if (s.etype == etype) pred_t.push_back(s);
      const MatchCounts counts = match_spans(gold_t, pred_t, mode);
      r.tp += counts.tp;
      r.fp += counts.fp;
      r.fn += counts.fn;
    }
    const Prf1 scores = prf1(r.tp, r.fp, r.fn);
    r.precision = scores.precision;
    r.recall = scores.recall;
    r.f1 = scores.f1;
    results.push_back(std::move(r));
  }
  return results;
}

std::size_t levenshtein(const std::u32string& a, const std::u32string& b) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0) return m;
  if (m == 0) return n;
  std::vector<std::size_t> row(m + 1);
  for (std::size_t j = 0; j <= m; ++j) row[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t saved = row[j];
      if (a[i - 1] == b[j - 1]) {
        row[j] = diag;
      } else {
        row[j] = std::min({row[j - 1], row[j], diag}) + 1;
      }
      diag = saved;
    }
  }
  return row[m];
}

std::optional<Alignment> fuzzy_align(const std::string& entity_string,
                                     const std::string& original_text,
                                     std::optional<std::size_t> search_hint) {
  if (entity_string.empty()) throw Error("fuzzy_align: empty entity string");
  const std::u32string needle = utf8::decode(entity_string);
  const std::u32string text = utf8::decode(original_text);
  if (text.empty()) return std::nullopt;

  const std::size_t hint = search_hint.value_or(0);
  auto hint_distance = [&](std::size_t start) { return abs_diff(start, hint); };

  // Exact occurrences always win with distance 0; nearest the hint, ties
  // to the leftmost (and plain leftmost when no hint is given).
  {
    std::optional<std::size_t> best;
    for (std::size_t start = 0; start + needle.size() <= text.size(); ++start) {
      if (text.compare(start, needle.size(), needle) != 0) continue;
      if (!best || hint_distance(start) < hint_distance(*best)) best = start;
    }
    if (best) return Alignment{*best, *best + needle.size(), 0.0};
  }

  // Best window over lengths len-2 .. len+2 under normalized distance.
  std::optional<Alignment> best;
  std::size_t best_hint_dist = 0;
  const std::size_t len = needle.size();
  const std::size_t lo = len > 2 ? len - 2 : 1;
  const std::size_t hi = len + 2;
  for (std::size_t wlen = lo; wlen <= hi; ++wlen) {
    if (wlen > text.size()) break;
    for (std::size_t start = 0; start + wlen <= text.size(); ++start) {
      const std::u32string window = text.substr(start, wlen);
      const std::size_t dist = levenshtein(needle, window);
      const double norm =
          static_cast<double>(dist) / static_cast<double>(std::max(len, wlen));
      const std::size_t hd = hint_distance(start);
      if (!best || norm < best->distance ||
          (norm == best->distance && hd < best_hint_dist)) {
        best = Alignment{start, start + wlen, norm};
        best_hint_dist = hd;
      }
    }
  }
  if (!best || best->distance > 0.3) return std::nullopt;
  return best;
}

void ReferenceScores::add(const std::string& tool, const std::string& corpus,
                          corpus::EntityType etype, double f1) {
  if (f1 < 0.0 || f1 > 100.0) throw Error("reference F1 out of [0,100]: " + std::to_string(f1));
  scores_[{tool, corpus, etype}] = f1;
}

std::optional<double> ReferenceScores::lookup(const std::string& tool,
                                              const std::string& corpus,
                                              corpus::EntityType etype) const {
  const auto it = scores_.find({tool, corpus, etype});
  if (it == scores_.end()) return std::nullopt;
  return it->second;
}

ReferenceScores ReferenceScores::load_csv(std::istream& in) {
  ReferenceScores scores;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("tool,", 0) == 0) continue;  // header
    std::istringstream ss(line);
    std::string tool, corpus, etype, f1;
    if (!std::getline(ss, tool, ',') || !std::getline(ss, corpus, ',') ||
        !std::getline(ss, etype, ',') || !std::getline(ss, f1))
      throw Error("line " + std::to_string(line_no) + ": expected tool,corpus,entity_type,f1");
    try {
      scores.add(tool, corpus, corpus::entity_type_from_string(etype), std::stod(f1));
    } catch (const std::logic_error&) {
      throw Error("line " + std::to_string(line_no) + ": bad F1 value '" + f1 + "'");
    }
  }
  return scores;
}

ReferenceScores ReferenceScores::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open reference scores: " + path);
  return load_csv(in);
}

std::vector<ReferenceScores::Row> ReferenceScores::rows() const {
  std::vector<Row> out;
  for (const auto& [key, f1] : scores_)
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), f1});
  return out;
}

std::vector<ComparisonRow> compare_to_reference(const std::vector<EvalResult>& results,
                                                const ReferenceScores& reference) {
  std::vector<ComparisonRow> rows;
  for (const ReferenceScores::Row& ref : reference.rows()) {
    ComparisonRow row;
    row.tool = ref.tool;
    row.corpus = ref.corpus;
    row.etype = ref.etype;
    row.published = ref.f1;
    for (const EvalResult& r : results) {
      if (r.corpus == ref.corpus && r.etype == ref.etype) {
        row.measured = r.f1 * 100.0;
        row.delta = *row.measured - ref.f1;
        break;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string fmt_cell(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << *v;
  return os.str();
}

}  // namespace

std::string render_comparison_table(const std::vector<ComparisonRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "tool" << std::setw(14) << "corpus" << std::setw(10)
     << "type" << std::right << std::setw(11) << "published" << std::setw(10) << "measured"
     << std::setw(8) << "delta" << "\n";
  for (const ComparisonRow& row : rows) {
    os << std::left << std::setw(12) << row.tool << std::setw(14) << row.corpus
       << std::setw(10) << corpus::to_string(row.etype) << std::right << std::setw(11)
       << fmt_cell(row.published) << std::setw(10) << fmt_cell(row.measured) << std::setw(8)
       << fmt_cell(row.delta) << "\n";
  }
  return os.str();
}

std::string render_results_table(const std::vector<EvalResult>& results) {
  std::ostringstream os;
  os << std::left << std::setw(14) << "corpus" << std::setw(10) << "type" << std::setw(10)
     << "mode" << std::right << std::setw(7) << "tp" << std::setw(7) << "fp" << std::setw(7)
     << "fn" << std::setw(11) << "precision" << std::setw(9) << "recall" << std::setw(9)
     << "f1" << "\n";
  os << std::fixed << std::setprecision(4);
  for (const EvalResult& r : results) {
    os << std::left << std::setw(14) << r.corpus << std::setw(10) << corpus::to_string(r.etype)
       << std::setw(10) << to_string(r.mode) << std::right << std::setw(7) << r.tp
       << std::setw(7) << r.fp << std::setw(7) << r.fn << std::setw(11) << r.precision
       << std::setw(9) << r.recall << std::setw(9) << r.f1 << "\n";
  }
  return os.str();
}

std::string results_csv(const std::vector<EvalResult>& results) {
  std::ostringstream os;
  os << "corpus,entity_type,mode,tp,fp,fn,precision,recall,f1\n";
  os << std::setprecision(17);
  for (const EvalResult& r : results) {
    os << r.corpus << "," << corpus::to_string(r.etype) << "," << to_string(r.mode) << ","
       << r.tp << "," << r.fp << "," << r.fn << "," << r.precision << "," << r.recall << ","
       << r.f1 << "\n";
  }
  return os.str();
}

std::vector<EvalResult> parse_results_csv(std::istream& in) {
  std::vector<EvalResult> results;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("corpus,", 0) == 0) continue;
    std::istringstream ss(line);
    std::vector<std::string> fields;
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 9)
      throw Error("line " + std::to_string(line_no) + ": expected 9 CSV fields");
    try {
      EvalResult r;
      r.corpus = fields[0];
      r.etype = corpus::entity_type_from_string(fields[1]);
      r.mode = match_mode_from_string(fields[2]);
      r.tp = std::stoull(fields[3]);
      r.fp = std::stoull(fields[4]);
      r.fn = std::stoull(fields[5]);
      r.precision = std::stod(fields[6]);
      r.recall = std::stod(fields[7]);
      r.f1 = std::stod(fields[8]);
      results.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw Error("line " + std::to_string(line_no) + ": bad numeric field");
    }
  }
  return results;
}

}  // namespace seqtag::eval
