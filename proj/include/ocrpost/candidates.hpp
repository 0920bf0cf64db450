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

#ifndef OCRPOST_CANDIDATES_HPP
#define OCRPOST_CANDIDATES_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ocrpost/confusion.hpp"
#include "ocrpost/corpus.hpp"
#include "ocrpost/language_model.hpp"

namespace ocrpost {

// A proposed correction for one OCR token. Split candidates carry exactly
// one internal space; join candidates consume the following token as well.
struct Candidate {
  std::string surface;
  CandidateKind kind = CandidateKind::SegmentEdit;
  std::optional<EditInstance> edit;  // segment edits: the entry used, count = its weight
  std::vector<int> source_positions;
};

namespace detail {

inline void upsert_segment_candidate(std::map<std::string, Candidate>& out,
                                     const std::u32string& replaced, const Token& token,
                                     const EditInstance& edit) {
  std::string surface = utf8_encode(replaced);
  if (surface == token.surface) return;
  auto it = out.find(surface);
  if (it != out.end()) {
    // Same surface reachable through several entries: keep the strongest
    // evidence.
    if (it->second.edit && it->second.edit->count < edit.count) it->second.edit = edit;
    return;
  }
  Candidate cand;
  cand.surface = std::move(surface);
  cand.kind = CandidateKind::SegmentEdit;
  cand.edit = edit;
  cand.source_positions = {token.position};
  out.emplace(cand.surface, std::move(cand));
}

}  // namespace detail

// Expands a token into raw correction candidates, before the dictionary
// filter: every single application of a confusion entry at every valid
// offset, the join with the following token (unigram-validated), and every
// two-way split of a long token (bigram-validated). Candidates are unique by
// surface, never equal to the original, and sorted by surface. Entries below
// min_weight are ignored (default: no pruning).
inline std::vector<Candidate> generate_raw(const Token& token, const Token* next,
                                           const ConfusionMatrix& matrix, const NGramModel& lm,
                                           int split_min = 5, std::int64_t min_weight = 1) {
  const std::u32string word = utf8_decode(token.surface);
  const int n = static_cast<int>(word.size());
  std::map<std::string, Candidate> by_surface;

  // Segment edits: corruption lengths 0 (insertion entries applied at every
  // boundary), 1 and 2.
  for (int len = 0; len <= 2; ++len) {
    for (int offset = 0; offset + len <= n; ++offset) {
      const std::u32string corruption = word.substr(offset, len);
      for (const auto& [correction, weight] : matrix.lookup(corruption)) {
        if (weight < min_weight) continue;
        std::u32string replaced;
        replaced.reserve(word.size() + correction.size());
        replaced.append(word, 0, offset);
        replaced.append(correction);
        replaced.append(word, offset + len);
        if (replaced.empty()) continue;
        detail::upsert_segment_candidate(by_surface, replaced, token,
                                         EditInstance{corruption, correction, weight});
      }
    }
  }

  // Space deletion: join with the following word, kept only when the joined
  // form is a dictionary word.
  if (next != nullptr) {
    std::string joined = token.surface + next->surface;
    if (lm.is_word(joined) && by_surface.find(joined) == by_surface.end()) {
      Candidate cand;
      cand.surface = std::move(joined);
      cand.kind = CandidateKind::SpaceDelete;
      cand.source_positions = {token.position, next->position};
      by_surface.emplace(cand.surface, std::move(cand));
    }
  }

  // Space insertion: two-way splits of long words, kept only when the two
  // parts form a known bigram.
  if (n > split_min) {
    for (int cut = 1; cut < n; ++cut) {
      const std::string left = utf8_encode(word.substr(0, cut));
      const std::string right = utf8_encode(word.substr(cut));
      if (lm.bigram_freq(left, right) < 1) continue;
      Candidate cand;
      cand.surface = left + " " + right;
      cand.kind = CandidateKind::SpaceInsert;
      cand.source_positions = {token.position};
      by_surface.emplace(cand.surface, std::move(cand));
    }
  }

  std::vector<Candidate> out;
  out.reserve(by_surface.size());
  for (auto& [surface, cand] : by_surface) out.push_back(std::move(cand));
  return out;
}

// The correction-candidates vector as the ranker sees it: segment edits that
// are not dictionary words are dropped. Splits were validated on the bigram
// table and joins on the unigram table already.
inline std::vector<Candidate> generate(const Token& token, const Token* next,
                                       const ConfusionMatrix& matrix, const NGramModel& lm,
                                       int split_min = 5, std::int64_t min_weight = 1) {
  std::vector<Candidate> raw = generate_raw(token, next, matrix, lm, split_min, min_weight);
  std::erase_if(raw, [&](const Candidate& c) {
    return c.kind == CandidateKind::SegmentEdit && !lm.is_word(c.surface);
  });
  return raw;
}

}  // namespace ocrpost

#endif  // OCRPOST_CANDIDATES_HPP
