#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "seqtag/document.hpp"

namespace seqtag::corpus {

// Rule-based sentence splitter. A boundary is placed after a run of
// [.?!] followed by whitespace and an uppercase ASCII letter or digit,
// unless the token ending in the terminator (or its two-word form, for
// "et al.") is in a fixed abbreviation list. Spans are trimmed to
// non-whitespace ends and cover every non-whitespace character.
std::vector<SentenceSpan> split_sentences(const std::u32string& text);
std::vector<SentenceSpan> split_sentences(std::string_view utf8_text);

// Whitespace-delimited tokenizer: parentheses and brackets always become
// single-char tokens; leading and trailing punctuation is peeled off as
// separate tokens; internal hyphens, slashes and digits stay attached
// ("IL-2", "p53/p21" survive as single tokens).
std::vector<Token> tokenize(const std::u32string& text,
                            const std::vector<SentenceSpan>& sentence_spans);
std::vector<Token> tokenize(std::string_view utf8_text,
                            const std::vector<SentenceSpan>& sentence_spans);

bool is_whitespace_char(char32_t c);

}  // namespace seqtag::corpus
