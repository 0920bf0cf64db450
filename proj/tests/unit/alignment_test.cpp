// Copyright 2026 The ocrpost Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>

#include "doctest.h"
#include "ocrpost/alignment.hpp"
#include "ocrpost/corpus.hpp"
#include "support/oracles.hpp"

using namespace ocrpost;

namespace {

bool has_op(const Alignment& a, EditOpKind kind, const std::u32string& source,
            const std::u32string& target) {
  for (const auto& op : a.ops) {
    if (op.kind == kind && op.source == source && op.target == target) return true;
  }
  return false;
}

std::u32string reconstruct_source(const Alignment& a) {
  std::u32string s;
  for (const auto& op : a.ops) s += op.source;
  return s;
}

std::u32string reconstruct_target(const Alignment& a) {
  std::u32string s;
  for (const auto& op : a.ops) s += op.target;
  return s;
}

}  // namespace

TEST_CASE("merge recovers a 2:1 character segmentation error") {
  // "tlne" reads "the" with h split into ln; correcting merges ln -> h.
  const Alignment a = align_words(std::u32string(U"tlne"), std::u32string(U"the"));
  CHECK(a.cost == 1);
  CHECK(has_op(a, EditOpKind::Merge, U"ln", U"h"));
}

TEST_CASE("split recovers a 1:2 error") {
  const Alignment a = align_words(std::u32string(U"amual"), std::u32string(U"annual"));
  CHECK(a.cost == 1);
  CHECK(has_op(a, EditOpKind::Split, U"m", U"nn"));
}

TEST_CASE("a 2:2 pair covers two consecutive edits at cost 1") {
  // (tln, the): t matches, then both remaining positions differ; the single
  // atomic pair op explains it.
  const Alignment a = align_words(std::u32string(U"tln"), std::u32string(U"the"));
  CHECK(a.cost == 1);
  CHECK(has_op(a, EditOpKind::Pair, U"ln", U"he"));
}

TEST_CASE("identical words align with all matches at cost 0") {
  const Alignment a = align_words(std::u32string(U"great"), std::u32string(U"great"));
  CHECK(a.cost == 0);
  for (const auto& op : a.ops) CHECK(op.kind == EditOpKind::Match);
}

TEST_CASE("substitution stays a substitution, not a degenerate pair") {
  const Alignment a = align_words(std::u32string(U"graat"), std::u32string(U"great"));
  CHECK(a.cost == 1);
  CHECK(has_op(a, EditOpKind::Substitute, U"a", U"e"));
}

TEST_CASE("doubled-letter deletions and insertions stay canonical") {
  // bab vs baab: an insert, never a degenerate split (a -> aa).
  const Alignment ins = align_words(std::u32string(U"bab"), std::u32string(U"baab"));
  CHECK(ins.cost == 1);
  CHECK(has_op(ins, EditOpKind::Insert, U"", U"a"));
  const Alignment del = align_words(std::u32string(U"baab"), std::u32string(U"bab"));
  CHECK(del.cost == 1);
  CHECK(has_op(del, EditOpKind::Delete, U"a", U""));
}

TEST_CASE("equal-cost edits land as late in the word as possible") {
  const Alignment a = align_words(std::u32string(U"aa"), std::u32string(U"a"));
  REQUIRE(a.ops.size() == 2);
  CHECK(a.ops[0].kind == EditOpKind::Match);
  CHECK(a.ops[1].kind == EditOpKind::Delete);
}

TEST_CASE("alignment reconstruction rebuilds both words") {
  std::mt19937_64 rng(42);
  const std::u32string alphabet = U"abcde";
  for (int round = 0; round < 500; ++round) {
    std::u32string x, y;
    const int nx = 1 + static_cast<int>(rng() % 8);
    const int ny = 1 + static_cast<int>(rng() % 8);
    for (int i = 0; i < nx; ++i) x += alphabet[rng() % alphabet.size()];
    for (int i = 0; i < ny; ++i) y += alphabet[rng() % alphabet.size()];
    const Alignment a = align_words(x, y);
    CHECK(reconstruct_source(a) == x);
    CHECK(reconstruct_target(a) == y);
    int non_match = 0;
    for (const auto& op : a.ops) non_match += op.kind != EditOpKind::Match ? 1 : 0;
    CHECK(a.cost == non_match);
  }
}

TEST_CASE("alignment cost equals the enumeration oracle on small words") {
  // The full <=6 sweep over {a,b,c} runs in the acceptance suite; here the
  // exhaustive <=4 set plus random length-6 samples keep the unit suite fast.
  const auto words = oracle::all_words(U"abc", 1, 4);
  for (const auto& x : words) {
    for (const auto& y : words) {
      const int dp = align_words(x, y).cost;
      CAPTURE(utf8_encode(x));
      CAPTURE(utf8_encode(y));
      REQUIRE(dp == oracle::alignment_min_cost(x, y));
    }
  }
  std::mt19937_64 rng(11);
  const std::u32string alphabet = U"abc";
  for (int round = 0; round < 2000; ++round) {
    std::u32string x, y;
    const int nx = 5 + static_cast<int>(rng() % 2);
    const int ny = 5 + static_cast<int>(rng() % 2);
    for (int i = 0; i < nx; ++i) x += alphabet[rng() % alphabet.size()];
    for (int i = 0; i < ny; ++i) y += alphabet[rng() % alphabet.size()];
    REQUIRE(align_words(x, y).cost == oracle::alignment_min_cost(x, y));
  }
}

TEST_CASE("alignment cost is symmetric and satisfies the triangle inequality") {
  const auto words = oracle::all_words(U"ab", 1, 4);
  std::vector<std::vector<int>> cost(words.size(), std::vector<int>(words.size(), 0));
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (std::size_t j = 0; j < words.size(); ++j) {
      cost[i][j] = align_words(words[i], words[j]).cost;
    }
  }
  for (std::size_t i = 0; i < words.size(); ++i) {
    CHECK(cost[i][i] == 0);
    for (std::size_t j = 0; j < words.size(); ++j) {
      CHECK(cost[i][j] == cost[j][i]);
      for (std::size_t k = 0; k < words.size(); ++k) {
        CHECK(cost[i][j] <= cost[i][k] + cost[k][j]);
      }
    }
  }
}

TEST_CASE("align_cost_capped matches align_words below the cap") {
  std::mt19937_64 rng(5);
  const std::u32string alphabet = U"abcd";
  for (int round = 0; round < 1000; ++round) {
    std::u32string x, y;
    const int nx = 1 + static_cast<int>(rng() % 7);
    const int ny = 1 + static_cast<int>(rng() % 7);
    for (int i = 0; i < nx; ++i) x += alphabet[rng() % alphabet.size()];
    for (int i = 0; i < ny; ++i) y += alphabet[rng() % alphabet.size()];
    const int full = align_words(x, y).cost;
    const int capped = align_cost_capped(x, y, 3);
    CHECK(capped == std::min(full, 3));
  }
}

TEST_CASE("extract_edit_instances keeps only the trainable class") {
  CHECK(extract_edit_instances(align_words(std::u32string(U"tlne"), std::u32string(U"the"))) ==
        std::vector<EditInstance>{EditInstance{U"ln", U"h", 1}});
  CHECK(extract_edit_instances(align_words(std::u32string(U"tln"), std::u32string(U"the"))) ==
        std::vector<EditInstance>{EditInstance{U"ln", U"he", 1}});
  CHECK(extract_edit_instances(align_words(std::u32string(U"great"), std::u32string(U"great")))
            .empty());
  // Two non-adjacent substitutions fall outside the class.
  CHECK(extract_edit_instances(align_words(std::u32string(U"xbz"), std::u32string(U"abc")))
            .empty());
}

TEST_CASE("pair_documents pairs identical documents one to one") {
  const Document ocr = tokenize("alpha beta gamma", "d");
  const Document truth = tokenize("alpha beta gamma", "d");
  const auto pairs = pair_documents(ocr, truth);
  REQUIRE(pairs.size() == 3);
  for (const auto& [token, surface] : pairs) CHECK(token.surface == surface);
}

TEST_CASE("pair_documents pairs erroneous words with their truth") {
  const Document ocr = tokenize("tln graat", "d");
  const Document truth = tokenize("the great", "d");
  const auto pairs = pair_documents(ocr, truth);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].first.surface == "tln");
  CHECK(pairs[0].second == "the");
  CHECK(pairs[1].first.surface == "graat");
  CHECK(pairs[1].second == "great");
}

TEST_CASE("a fused word becomes a 1:2 link, not a bad 1:1 pair") {
  const Document ocr = tokenize("wallof", "d");
  const Document truth = tokenize("wall of", "d");
  CHECK(pair_documents(ocr, truth).empty());
  const auto pairing = align_documents(ocr, truth);
  REQUIRE(pairing.links.size() == 1);
  CHECK(pairing.links[0].kind == LinkKind::OneToTwo);
}

TEST_CASE("a split word becomes a 2:1 link") {
  const Document ocr = tokenize("x wa ll y", "d");
  const Document truth = tokenize("x wall y", "d");
  const auto pairing = align_documents(ocr, truth);
  REQUIRE(pairing.links.size() == 3);
  CHECK(pairing.links[1].kind == LinkKind::TwoToOne);
  CHECK(pairing.links[1].ocr_begin == 1);
  CHECK(pairing.links[1].truth_begin == 1);
}

TEST_CASE("document pairing prefers skipping noise over a bad pair") {
  // The noise token must be skipped so "the" can pair with its own truth.
  const Document ocr = tokenize("zzz the great", "d");
  const Document truth = tokenize("the great", "d");
  const auto pairing = align_documents(ocr, truth);
  REQUIRE(pairing.links.size() == 3);
  CHECK(pairing.links[0].kind == LinkKind::OcrOnly);
  const auto pairs = pair_documents(ocr, truth);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].first.surface == "the");
  CHECK(pairs[1].first.surface == "great");
}
