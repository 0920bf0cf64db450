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

#ifndef OCRPOST_FEATURES_HPP
#define OCRPOST_FEATURES_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ocrpost/candidates.hpp"
#include "ocrpost/confusion.hpp"
#include "ocrpost/corpus.hpp"
#include "ocrpost/errors.hpp"
#include "ocrpost/language_model.hpp"

namespace ocrpost {

// OCR-output surfaces around one token. Bigram features look at the OCR
// neighbors, not at neighbor candidates; next2 is the outer neighbor a join
// candidate borders on.
struct TokenContext {
  std::optional<std::string> prev;
  std::optional<std::string> next;
  std::optional<std::string> next2;
};

inline TokenContext make_context(const Document& doc, int position) {
  TokenContext ctx;
  const int n = static_cast<int>(doc.tokens.size());
  if (position > 0) ctx.prev = doc.tokens[position - 1].surface;
  if (position + 1 < n) ctx.next = doc.tokens[position + 1].surface;
  if (position + 2 < n) ctx.next2 = doc.tokens[position + 2].surface;
  return ctx;
}

// The ranker's feature vector: confusion weight, unigram document frequency,
// and the backward/forward bigram document frequencies against the OCR
// neighbors. Raw counts, no normalization.
struct RankerFeatures {
  std::int64_t confusion_weight = 0;
  std::int64_t unigram_freq = 0;
  std::int64_t backward_bigram = 0;
  std::int64_t forward_bigram = 0;

  std::vector<double> to_vector() const {
    return {static_cast<double>(confusion_weight), static_cast<double>(unigram_freq),
            static_cast<double>(backward_bigram), static_cast<double>(forward_bigram)};
  }

  static const std::vector<std::string>& names() {
    static const std::vector<std::string> kNames = {"confusion_weight", "unigram_freq",
                                                    "backward_bigram", "forward_bigram"};
    return kNames;
  }
};

namespace detail {

inline std::pair<std::string, std::string> split_parts(const std::string& surface) {
  const auto space = surface.find(' ');
  return {surface.substr(0, space),
          space == std::string::npos ? std::string() : surface.substr(space + 1)};
}

// Unigram evidence for a candidate surface; split candidates aggregate with
// the minimum of their two parts.
inline std::int64_t candidate_unigram(const Candidate& cand, const NGramModel& lm) {
  if (cand.kind == CandidateKind::SpaceInsert) {
    const auto [left, right] = split_parts(cand.surface);
    return std::min(lm.unigram_freq(left), lm.unigram_freq(right));
  }
  return lm.unigram_freq(cand.surface);
}

inline std::int64_t candidate_backward_bigram(const Candidate& cand, const TokenContext& ctx,
                                              const NGramModel& lm) {
  if (!ctx.prev) return 0;
  if (cand.kind == CandidateKind::SpaceInsert) {
    return lm.bigram_freq(*ctx.prev, split_parts(cand.surface).first);
  }
  return lm.bigram_freq(*ctx.prev, cand.surface);
}

inline std::int64_t candidate_forward_bigram(const Candidate& cand, const TokenContext& ctx,
                                             const NGramModel& lm) {
  switch (cand.kind) {
    case CandidateKind::SpaceInsert:
      return ctx.next ? lm.bigram_freq(split_parts(cand.surface).second, *ctx.next) : 0;
    case CandidateKind::SpaceDelete:
      // The join swallowed ctx.next; its forward neighbor is next2.
      return ctx.next2 ? lm.bigram_freq(cand.surface, *ctx.next2) : 0;
    default:
      return ctx.next ? lm.bigram_freq(cand.surface, *ctx.next) : 0;
  }
}

}  // namespace detail

inline RankerFeatures ranker_features(const Candidate& cand, const TokenContext& ctx,
                                      const NGramModel& lm) {
  RankerFeatures f;
  f.confusion_weight = cand.edit ? cand.edit->count : 0;
  f.unigram_freq = detail::candidate_unigram(cand, lm);
  f.backward_bigram = detail::candidate_backward_bigram(cand, ctx, lm);
  f.forward_bigram = detail::candidate_forward_bigram(cand, ctx, lm);
  return f;
}

// The decision maker's feature vector: smoothed candidate/OCR frequency
// ratios (unigram, both bigrams, within-document term frequency), the OCR
// confidence, and the confusion weight. Ratios above 1 are evidence for
// replacing.
struct DecisionFeatures {
  double inv_prop_unigram = 1.0;
  double inv_prop_backward_bigram = 1.0;
  double inv_prop_forward_bigram = 1.0;
  double inv_prop_term_freq = 1.0;
  double ocr_confidence = 1.0;
  std::int64_t confusion_weight = 0;

  std::vector<double> to_vector() const {
    return {inv_prop_unigram,  inv_prop_backward_bigram,
            inv_prop_forward_bigram, inv_prop_term_freq,
            ocr_confidence,    static_cast<double>(confusion_weight)};
  }

  static const std::vector<std::string>& names() {
    static const std::vector<std::string> kNames = {
        "inv_prop_unigram", "inv_prop_backward_bigram", "inv_prop_forward_bigram",
        "inv_prop_term_freq", "ocr_confidence", "confusion_weight"};
    return kNames;
  }
};

// Within-document term frequency of a surface. A split surface ("wall of")
// counts adjacent token pairs.
inline std::int64_t document_term_freq(const Document& doc, const std::string& surface) {
  const auto space = surface.find(' ');
  std::int64_t count = 0;
  if (space == std::string::npos) {
    for (const auto& t : doc.tokens) {
      if (t.surface == surface) ++count;
    }
    return count;
  }
  const std::string left = surface.substr(0, space);
  const std::string right = surface.substr(space + 1);
  for (std::size_t i = 0; i + 1 < doc.tokens.size(); ++i) {
    if (doc.tokens[i].surface == left && doc.tokens[i + 1].surface == right) ++count;
  }
  return count;
}

inline DecisionFeatures decision_features(const Token& ocr, const Candidate& top,
                                          const Document& doc, const TokenContext& ctx,
                                          const NGramModel& lm, double eps = 1.0) {
  if (eps <= 0.0) throw ConfigError("smoothing eps must be positive");
  DecisionFeatures f;
  const auto ratio = [eps](std::int64_t cand_freq, std::int64_t ocr_freq) {
    return (static_cast<double>(cand_freq) + eps) / (static_cast<double>(ocr_freq) + eps);
  };
  f.inv_prop_unigram = ratio(detail::candidate_unigram(top, lm), lm.unigram_freq(ocr.surface));
  f.inv_prop_backward_bigram =
      ratio(detail::candidate_backward_bigram(top, ctx, lm),
            ctx.prev ? lm.bigram_freq(*ctx.prev, ocr.surface) : 0);
  f.inv_prop_forward_bigram =
      ratio(detail::candidate_forward_bigram(top, ctx, lm),
            ctx.next ? lm.bigram_freq(ocr.surface, *ctx.next) : 0);
  f.inv_prop_term_freq =
      ratio(document_term_freq(doc, top.surface), document_term_freq(doc, ocr.surface));
  f.ocr_confidence = ocr.confidence.value_or(1.0);
  f.confusion_weight = top.edit ? top.edit->count : 0;
  return f;
}

}  // namespace ocrpost

#endif  // OCRPOST_FEATURES_HPP
