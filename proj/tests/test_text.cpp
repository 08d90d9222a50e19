#include <doctest.h>

#include "seqtag/text.hpp"
#include "seqtag/utf8.hpp"

using namespace seqtag;
using corpus::SentenceSpan;
using corpus::Token;

TEST_CASE("sentence splitter spec traces") {
  CHECK(corpus::split_sentences("").empty());

  const auto two = corpus::split_sentences("A cat. B dog.");
  REQUIRE(two.size() == 2);
  CHECK(two[0] == SentenceSpan{0, 6});
  CHECK(two[1] == SentenceSpan{7, 13});

  const auto ecoli = corpus::split_sentences("E. coli grows.");
  REQUIRE(ecoli.size() == 1);
  CHECK(ecoli[0] == SentenceSpan{0, 14});
}

TEST_CASE("sentence splitter abbreviation suppression") {
  // "Fig." is followed by a digit, which would otherwise split.
  const auto fig = corpus::split_sentences("See Fig. 3 for details. Next one.");
  REQUIRE(fig.size() == 2);
  CHECK(fig[0].start == 0);
  CHECK(fig[0].end == 23);

  const auto etal = corpus::split_sentences("Reported by Smith et al. Nothing changed.");
  REQUIRE(etal.size() == 1);

  // Lowercase after the terminator never splits.
  CHECK(corpus::split_sentences("End. then more").size() == 1);
  // No whitespace after the terminator never splits.
  CHECK(corpus::split_sentences("v1.2 Release").size() == 1);
}

TEST_CASE("sentence splitter terminator runs and trailing text") {
  const auto spans = corpus::split_sentences("Really?! Yes. And then");
  REQUIRE(spans.size() == 3);
  CHECK(spans[0] == SentenceSpan{0, 8});
  CHECK(spans[1] == SentenceSpan{9, 13});
  CHECK(spans[2] == SentenceSpan{14, 22});
}

TEST_CASE("sentence spans cover every non-whitespace character") {
  const std::string text = "One two. Three (four). Dr. Smith saw p53. Whitespace   everywhere. ";
  const std::u32string u32 = utf8::decode(text);
  const auto spans = corpus::split_sentences(u32);
  std::vector<bool> covered(u32.size(), false);
  for (const auto& s : spans) {
    CHECK(s.start < s.end);
    for (std::size_t i = s.start; i < s.end; ++i) covered[i] = true;
  }
  for (std::size_t i = 0; i < u32.size(); ++i)
    if (!corpus::is_whitespace_char(u32[i])) CHECK(covered[i]);
  for (std::size_t i = 1; i < spans.size(); ++i) CHECK(spans[i - 1].end <= spans[i].start);
}

TEST_CASE("tokenizer spec traces") {
  SUBCASE("IL-2 binds.") {
    const std::string text = "IL-2 binds.";
    const auto tokens = corpus::tokenize(text, corpus::split_sentences(text));
    REQUIRE(tokens.size() == 3);
    CHECK(tokens[0] == Token{"IL-2", 0, 4, 0});
    CHECK(tokens[1] == Token{"binds", 5, 10, 0});
    CHECK(tokens[2] == Token{".", 10, 11, 0});
  }
  SUBCASE("single char") {
    const auto tokens = corpus::tokenize("x", {{0, 1}});
    REQUIRE(tokens.size() == 1);
    CHECK(tokens[0] == Token{"x", 0, 1, 0});
  }
  SUBCASE("whitespace is never tokenized") {
    const auto tokens = corpus::tokenize("a  b", {{0, 4}});
    REQUIRE(tokens.size() == 2);
    CHECK(tokens[0] == Token{"a", 0, 1, 0});
    CHECK(tokens[1] == Token{"b", 3, 4, 0});
  }
}

TEST_CASE("tokenizer keeps internal hyphens, slashes and digits attached") {
  const auto tokens = corpus::tokenize("p53/p21 and IL-2,", {{0, 17}});
  REQUIRE(tokens.size() == 4);
  CHECK(tokens[0].text == "p53/p21");
  CHECK(tokens[1].text == "and");
  CHECK(tokens[2].text == "IL-2");
  CHECK(tokens[3].text == ",");
}

TEST_CASE("tokenizer always separates parentheses and brackets") {
  const auto tokens = corpus::tokenize("(TNF)-alpha [x]", {{0, 15}});
  std::vector<std::string> texts;
  for (const auto& t : tokens) texts.push_back(t.text);
  CHECK(texts == std::vector<std::string>{"(", "TNF", ")", "-", "alpha", "[", "x", "]"});
}

TEST_CASE("tokenizer peels leading and trailing punctuation") {
  const auto tokens = corpus::tokenize("\"quote,\"", {{0, 8}});
  std::vector<std::string> texts;
  for (const auto& t : tokens) texts.push_back(t.text);
  CHECK(texts == std::vector<std::string>{"\"", "quote", ",", "\""});
}

TEST_CASE("tokenizer totality: tokens cover all non-whitespace sentence chars") {
  const std::string text = "Anti-p53 (mut.) binds IL-2/IL-7R!! See Fig. 3; et al. said so.";
  const std::u32string u32 = utf8::decode(text);
  const auto spans = corpus::split_sentences(u32);
  const auto tokens = corpus::tokenize(u32, spans);
  std::vector<int> cover(u32.size(), 0);
  for (const auto& t : tokens) {
    CHECK(t.start < t.end);
    CHECK(!t.text.empty());
    for (std::size_t i = t.start; i < t.end; ++i) ++cover[i];
  }
  for (const auto& s : spans)
    for (std::size_t i = s.start; i < s.end; ++i) {
      if (corpus::is_whitespace_char(u32[i])) {
        CHECK(cover[i] == 0);
      } else {
        CHECK(cover[i] == 1);
      }
    }
}

TEST_CASE("tokenizer offsets count unicode scalar values") {
  // Greek alpha is one scalar value but two UTF-8 bytes.
  const std::string text = "α-syn binds.";
  const auto tokens = corpus::tokenize(text, corpus::split_sentences(text));
  REQUIRE(tokens.size() == 3);
  CHECK(tokens[0].text == "α-syn");
  CHECK(tokens[0].start == 0);
  CHECK(tokens[0].end == 5);
  CHECK(tokens[1].start == 6);
}
