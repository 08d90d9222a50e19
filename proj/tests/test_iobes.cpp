#include <doctest.h>

#include "seqtag/iobes.hpp"
#include "seqtag/numerics.hpp"
#include "seqtag/text.hpp"
#include "seqtag/utf8.hpp"

using namespace seqtag;
using corpus::EntitySpan;
using corpus::EntityType;
using corpus::IobesLabel;
using corpus::IobesPrefix;
using corpus::Token;

TEST_CASE("encode_iobes spec traces") {
  SUBCASE("single-token entity gets S") {
    const std::vector<Token> tokens = {{"BRCA1", 0, 5, 0}};
    const std::vector<EntitySpan> anns = {{0, 5, EntityType::Gene, "BRCA1"}};
    const auto labels = corpus::encode_iobes(tokens, anns, EntityType::Gene);
    REQUIRE(labels.size() == 1);
    CHECK(labels[0] == IobesLabel::of(IobesPrefix::S, EntityType::Gene));
  }
  SUBCASE("two-token entity gets B and E") {
    const std::vector<Token> tokens = {{"breast", 0, 6, 0}, {"cancer", 7, 13, 0}};
    const std::vector<EntitySpan> anns = {{0, 13, EntityType::Disease, "breast cancer"}};
    const auto labels = corpus::encode_iobes(tokens, anns, EntityType::Disease);
    REQUIRE(labels.size() == 2);
    CHECK(labels[0] == IobesLabel::of(IobesPrefix::B, EntityType::Disease));
    CHECK(labels[1] == IobesLabel::of(IobesPrefix::E, EntityType::Disease));
  }
  SUBCASE("no annotations means all O") {
    const std::vector<Token> tokens = {{"a", 0, 1, 0}, {"b", 2, 3, 0}};
    const auto labels = corpus::encode_iobes(tokens, {}, EntityType::Gene);
    CHECK(labels == std::vector<IobesLabel>{IobesLabel::outside(), IobesLabel::outside()});
  }
  SUBCASE("annotation overlapping no token is skipped with a warning") {
    const std::vector<Token> tokens = {{"a", 0, 1, 0}};
    const std::vector<EntitySpan> anns = {{5, 8, EntityType::Gene, "xyz"}};
    Diag diag;
    const auto labels = corpus::encode_iobes(tokens, anns, EntityType::Gene, &diag);
    CHECK(labels[0] == IobesLabel::outside());
    CHECK(diag.warnings.size() == 1);
  }
  SUBCASE("three-token entity gets B I E") {
    const std::vector<Token> tokens = {{"x", 0, 1, 0}, {"y", 2, 3, 0}, {"z", 4, 5, 0}};
    const std::vector<EntitySpan> anns = {{0, 5, EntityType::Chemical, "x y z"}};
    const auto labels = corpus::encode_iobes(tokens, anns, EntityType::Chemical);
    CHECK(labels[0].prefix == IobesPrefix::B);
    CHECK(labels[1].prefix == IobesPrefix::I);
    CHECK(labels[2].prefix == IobesPrefix::E);
  }
}

TEST_CASE("misaligned annotations snap outward, strict mode drops them") {
  const std::vector<Token> tokens = {{"alpha", 0, 5, 0}, {"beta", 6, 10, 0}};
  const std::vector<EntitySpan> anns = {{1, 8, EntityType::Gene, "lpha be"}};
  Diag diag;
  const auto labels = corpus::encode_iobes(tokens, anns, EntityType::Gene, &diag);
  CHECK(labels[0].prefix == IobesPrefix::B);
  CHECK(labels[1].prefix == IobesPrefix::E);
  CHECK(diag.warnings.size() == 1);  // snapped

  Diag strict_diag;
  const auto strict_labels =
      corpus::encode_iobes(tokens, anns, EntityType::Gene, &strict_diag, /*strict=*/true);
  CHECK(strict_labels[0] == IobesLabel::outside());
  CHECK(strict_labels[1] == IobesLabel::outside());
  CHECK(strict_diag.warnings.size() == 1);  // dropped
}

TEST_CASE("overlap resolution keeps the longest then leftmost") {
  std::vector<EntitySpan> anns = {
      {0, 5, EntityType::Gene, "aaaaa"},
      {2, 10, EntityType::Gene, "aaabbbbb"},  // longest, wins
      {8, 12, EntityType::Gene, "bbcc"},      // clashes with the winner
      {20, 24, EntityType::Gene, "dddd"},     // disjoint, survives
  };
  Diag diag;
  const auto kept = corpus::resolve_overlaps(std::move(anns), &diag);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].start == 2);
  CHECK(kept[1].start == 20);
  CHECK(diag.warnings.size() == 2);

  // Different types never clash.
  std::vector<EntitySpan> mixed = {{0, 5, EntityType::Gene, "aaaaa"},
                                   {0, 5, EntityType::Disease, "aaaaa"}};
  CHECK(corpus::resolve_overlaps(std::move(mixed), nullptr).size() == 2);
}

TEST_CASE("decode_iobes spec traces") {
  const std::u32string text = utf8::decode("BRCA1 rest");
  SUBCASE("S over one token") {
    const std::vector<Token> tokens = {{"BRCA1", 0, 5, 0}};
    const std::vector<IobesLabel> labels = {IobesLabel::of(IobesPrefix::S, EntityType::Gene)};
    const auto spans = corpus::decode_iobes(labels, tokens, text);
    REQUIRE(spans.size() == 1);
    CHECK(spans[0] == EntitySpan{0, 5, EntityType::Gene, "BRCA1"});
  }
  SUBCASE("B-E pair over two tokens") {
    const std::u32string t2 = utf8::decode("breast cancer");
    const std::vector<Token> tokens = {{"breast", 0, 6, 0}, {"cancer", 7, 13, 0}};
    const std::vector<IobesLabel> labels = {
        IobesLabel::of(IobesPrefix::B, EntityType::Disease),
        IobesLabel::of(IobesPrefix::E, EntityType::Disease)};
    const auto spans = corpus::decode_iobes(labels, tokens, t2);
    REQUIRE(spans.size() == 1);
    CHECK(spans[0] == EntitySpan{0, 13, EntityType::Disease, "breast cancer"});
  }
  SUBCASE("lenient repair: bare I-run becomes one span") {
    const std::u32string t2 = utf8::decode("aa bb");
    const std::vector<Token> tokens = {{"aa", 0, 2, 0}, {"bb", 3, 5, 0}};
    const std::vector<IobesLabel> labels = {IobesLabel::of(IobesPrefix::I, EntityType::Gene),
                                            IobesLabel::of(IobesPrefix::I, EntityType::Gene)};
    const auto spans = corpus::decode_iobes(labels, tokens, t2);
    REQUIRE(spans.size() == 1);
    CHECK(spans[0] == EntitySpan{0, 5, EntityType::Gene, "aa bb"});
  }
  SUBCASE("orphan E closes a single-token span") {
    const std::vector<Token> tokens = {{"BRCA1", 0, 5, 0}};
    const std::vector<IobesLabel> labels = {IobesLabel::of(IobesPrefix::E, EntityType::Gene)};
    const auto spans = corpus::decode_iobes(labels, tokens, text);
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].end == 5);
  }
  SUBCASE("truncated B at sequence end still closes") {
    const std::vector<Token> tokens = {{"BRCA1", 0, 5, 0}};
    const std::vector<IobesLabel> labels = {IobesLabel::of(IobesPrefix::B, EntityType::Gene)};
    CHECK(corpus::decode_iobes(labels, tokens, text).size() == 1);
  }
  SUBCASE("length mismatch throws") {
    const std::vector<Token> tokens = {{"BRCA1", 0, 5, 0}};
    CHECK_THROWS_AS(corpus::decode_iobes({}, tokens, text), Error);
  }
}

TEST_CASE("IOBES round-trip property on randomized annotation sets") {
  num::Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    // Build a synthetic token sequence.
    const int n_tokens = 1 + static_cast<int>(rng.uniform_index(12));
    std::vector<Token> tokens;
    std::u32string text;
    for (int i = 0; i < n_tokens; ++i) {
      if (i > 0) text += U' ';
      const std::size_t start = text.size();
      const int len = 1 + static_cast<int>(rng.uniform_index(4));
      for (int k = 0; k < len; ++k) text += static_cast<char32_t>(U'a' + rng.uniform_index(26));
      tokens.push_back({utf8::encode(text.substr(start)), start, text.size(), 0});
    }
    // Token-aligned, non-overlapping annotations.
    std::vector<EntitySpan> anns;
    int i = 0;
    while (i < n_tokens) {
      if (rng.uniform() < 0.4) {
        const int span_len = 1 + static_cast<int>(rng.uniform_index(3));
        const int last = std::min(n_tokens - 1, i + span_len - 1);
        const std::size_t start = tokens[i].start;
        const std::size_t end = tokens[last].end;
        anns.push_back({start, end, EntityType::Gene,
                        utf8::encode(text.substr(start, end - start))});
        i = last + 1;
      } else {
        ++i;
      }
    }
    const auto labels = corpus::encode_iobes(tokens, anns, EntityType::Gene);
    const auto decoded = corpus::decode_iobes(labels, tokens, text);
    CHECK(decoded == anns);
  }
}
