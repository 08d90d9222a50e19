#include "seqtag/text.hpp"

#include <set>

#include "seqtag/utf8.hpp"

namespace seqtag::corpus {

bool is_whitespace_char(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' ||
         c == U'\v' || c == 0x00A0;
}

namespace {

bool is_terminator(char32_t c) { return c == U'.' || c == U'?' || c == U'!'; }

bool is_upper_or_digit(char32_t c) {
  return (c >= U'A' && c <= U'Z') || (c >= U'0' && c <= U'9');
}

bool is_bracket(char32_t c) {
  return c == U'(' || c == U')' || c == U'[' || c == U']' || c == U'{' || c == U'}';
}

// ASCII graphic, neither letter nor digit. Non-ASCII never peels.
bool is_strippable_punct(char32_t c) {
  if (c < 0x21 || c > 0x7E) return false;
  if (c >= U'0' && c <= U'9') return false;
  if (c >= U'A' && c <= U'Z') return false;
  if (c >= U'a' && c <= U'z') return false;
  return true;
}

const std::set<std::string>& abbreviations() {
  static const std::set<std::string> abbrevs = [] {
    std::set<std::string> s = {"Fig.", "Figs.", "fig.",    "et al.", "al.", "e.g.",
                               "i.e.", "vs.",   "cf.",     "Dr.",    "Prof.", "No.",
                               "no.",  "ca.",   "approx.", "St."};
    for (char c = 'A'; c <= 'Z'; ++c) s.insert(std::string(1, c) + ".");
    return s;
  }();
  return abbrevs;
}

// Token ending at `last` (inclusive), i.e. text back to the previous
// whitespace.
std::size_t token_start_before(const std::u32string& text, std::size_t last) {
  std::size_t start = last;
  while (start > 0 && !is_whitespace_char(text[start - 1])) --start;
  return start;
}

bool suppressed_by_abbreviation(const std::u32string& text, std::size_t run_end) {
  const std::size_t tok_start = token_start_before(text, run_end);
  const std::string token = utf8::encode(text.substr(tok_start, run_end - tok_start + 1));
  if (abbreviations().count(token)) return true;
  // Two-word forms such as "et al.".
  std::size_t ws = tok_start;
  while (ws > 0 && is_whitespace_char(text[ws - 1])) --ws;
  if (ws == 0 || ws == tok_start) return false;
  const std::size_t prev_start = token_start_before(text, ws - 1);
  const std::string two_words =
      utf8::encode(text.substr(prev_start, ws - prev_start)) + " " + token;
  return abbreviations().count(two_words) > 0;
}

void emit_trimmed(const std::u32string& text, std::size_t begin, std::size_t end,
                  std::vector<SentenceSpan>& out) {
  while (begin < end && is_whitespace_char(text[begin])) ++begin;
  while (end > begin && is_whitespace_char(text[end - 1])) --end;
  if (begin < end) out.push_back({begin, end});
}

}  // namespace

std::vector<SentenceSpan> split_sentences(const std::u32string& text) {
  std::vector<SentenceSpan> spans;
  const std::size_t n = text.size();
  std::size_t sentence_begin = 0;
  std::size_t i = 0;
  while (i < n) {
    if (!is_terminator(text[i])) {
      ++i;
      continue;
    }
    std::size_t run_end = i;
    while (run_end + 1 < n && is_terminator(text[run_end + 1])) ++run_end;
    // Boundary requires whitespace followed by an uppercase letter or digit.
    std::size_t next = run_end + 1;
    if (next < n && is_whitespace_char(text[next])) {
      std::size_t first_non_ws = next;
      while (first_non_ws < n && is_whitespace_char(text[first_non_ws])) ++first_non_ws;
      if (first_non_ws < n && is_upper_or_digit(text[first_non_ws]) &&
          !suppressed_by_abbreviation(text, run_end)) {
        emit_trimmed(text, sentence_begin, run_end + 1, spans);
        sentence_begin = run_end + 1;
      }
    }
    i = run_end + 1;
  }
  emit_trimmed(text, sentence_begin, n, spans);
  return spans;
}

std::vector<SentenceSpan> split_sentences(std::string_view utf8_text) {
  return split_sentences(utf8::decode(utf8_text));
}

namespace {

void tokenize_segment(const std::u32string& text, std::size_t begin, std::size_t end,
                      int sentence_idx, std::vector<Token>& out) {
  auto emit = [&](std::size_t a, std::size_t b) {
    out.push_back({utf8::encode(text.substr(a, b - a)), a, b, sentence_idx});
  };
  std::size_t p = begin;
  while (p < end && is_strippable_punct(text[p])) {
    emit(p, p + 1);
    ++p;
  }
  if (p == end) return;
  std::size_t core_end = end;
  while (core_end > p + 1 && is_strippable_punct(text[core_end - 1])) --core_end;
  emit(p, core_end);
  for (std::size_t q = core_end; q < end; ++q) emit(q, q + 1);
}

}  // namespace

std::vector<Token> tokenize(const std::u32string& text,
                            const std::vector<SentenceSpan>& sentence_spans) {
  std::vector<Token> tokens;
  for (std::size_t si = 0; si < sentence_spans.size(); ++si) {
    const SentenceSpan& s = sentence_spans[si];
    if (s.end > text.size() || s.start > s.end)
      throw Error("tokenize: sentence span out of range");
    std::size_t i = s.start;
    while (i < s.end) {
      if (is_whitespace_char(text[i])) {
        ++i;
        continue;
      }
      // Whitespace-delimited chunk.
      std::size_t chunk_end = i;
      while (chunk_end < s.end && !is_whitespace_char(text[chunk_end])) ++chunk_end;
      // Brackets split the chunk unconditionally.
      std::size_t seg_begin = i;
      for (std::size_t j = i; j < chunk_end; ++j) {
        if (is_bracket(text[j])) {
          if (j > seg_begin)
            tokenize_segment(text, seg_begin, j, static_cast<int>(si), tokens);
          tokens.push_back({utf8::encode(text.substr(j, 1)), j, j + 1, static_cast<int>(si)});
          seg_begin = j + 1;
        }
      }
      if (chunk_end > seg_begin)
        tokenize_segment(text, seg_begin, chunk_end, static_cast<int>(si), tokens);
      i = chunk_end;
    }
  }
  return tokens;
}

std::vector<Token> tokenize(std::string_view utf8_text,
                            const std::vector<SentenceSpan>& sentence_spans) {
  return tokenize(utf8::decode(utf8_text), sentence_spans);
}

}  // namespace seqtag::corpus
