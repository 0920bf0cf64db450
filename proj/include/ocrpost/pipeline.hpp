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

#ifndef OCRPOST_PIPELINE_HPP
#define OCRPOST_PIPELINE_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ocrpost/alignment.hpp"
#include "ocrpost/candidates.hpp"
#include "ocrpost/confusion.hpp"
#include "ocrpost/corpus_io.hpp"
#include "ocrpost/features.hpp"
#include "ocrpost/language_model.hpp"
#include "ocrpost/logistic.hpp"

namespace ocrpost {

struct PipelineConfig {
  int split_min = 5;          // minimum length (exclusive) for split candidates
  std::int64_t min_confusion_weight = 1;  // entries below this are not used for generation
  double eps = 1.0;           // add-eps smoothing of the proportion features
  double threshold = 0.5;     // decision threshold: replace when score >= threshold
  TrainConfig ranker_train{.nonnegative_weights = true};
  TrainConfig decider_train{};
  std::uint64_t seed = 0;

  void validate() const {
    if (split_min < 1) throw ConfigError("split_min must be >= 1");
    if (min_confusion_weight < 1) throw ConfigError("min_confusion_weight must be >= 1");
    if (eps <= 0.0) throw ConfigError("eps must be positive");
    if (threshold < 0.0 || threshold > 1.0) throw ConfigError("threshold must be in [0,1]");
  }
};

struct ScoredCandidate {
  Candidate candidate;
  RankerFeatures features;
  double score = 0.0;
};

// Scores each candidate with the ranker model and sorts descending;
// ties break on the surface so the order is reproducible.
inline std::vector<ScoredCandidate> rank_candidates(const LogisticModel& ranker,
                                                    std::vector<ScoredCandidate> scored) {
  for (auto& sc : scored) sc.score = ranker.score(sc.features.to_vector());
  std::sort(scored.begin(), scored.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
    return a.score != b.score ? a.score > b.score : a.candidate.surface < b.candidate.surface;
  });
  return scored;
}

inline std::vector<ScoredCandidate> rank_candidates(const LogisticModel& ranker,
                                                    const std::vector<Candidate>& candidates,
                                                    const TokenContext& ctx,
                                                    const NGramModel& lm) {
  std::vector<ScoredCandidate> scored;
  scored.reserve(candidates.size());
  for (const auto& cand : candidates) {
    scored.push_back(ScoredCandidate{cand, ranker_features(cand, ctx, lm), 0.0});
  }
  return rank_candidates(ranker, std::move(scored));
}

inline bool decide(const LogisticModel& decider, const DecisionFeatures& features,
                   double threshold) {
  return decider.score(features.to_vector()) >= threshold;
}

inline void check_model_features(const LogisticModel& model,
                                 const std::vector<std::string>& expected, const char* role) {
  if (model.feature_names != expected) {
    throw ConfigError(std::string(role) + " model feature names do not match the extractor");
  }
}

// Per-candidate trace rows for the feature-dump debugging interface; the
// columns follow the ranker and decision feature tables.
struct RankerTraceRow {
  std::string doc_id;
  int position = 0;
  std::string token;
  std::string candidate;
  CandidateKind kind = CandidateKind::SegmentEdit;
  RankerFeatures features;
  double score = 0.0;
};

struct DecisionTraceRow {
  std::string doc_id;
  int position = 0;
  std::string token;
  std::string candidate;
  DecisionFeatures features;
  double score = 0.0;
  bool replaced = false;
};

struct CorrectionTrace {
  std::vector<RankerTraceRow> ranker_rows;
  std::vector<DecisionTraceRow> decision_rows;
};

// End-to-end correction of one document: generate, rank, extract decision
// features, accept or reject, left to right. A token consumed by an accepted
// join is skipped. Returns the corrected document plus one decision record
// per token that had candidates.
inline std::pair<Document, std::vector<CorrectionDecision>> correct_document(
    const Document& doc, const ConfusionMatrix& matrix, const NGramModel& lm,
    const LogisticModel& ranker, const LogisticModel& decider, const PipelineConfig& config,
    CorrectionTrace* trace = nullptr) {
  config.validate();
  check_model_features(ranker, RankerFeatures::names(), "ranker");
  check_model_features(decider, DecisionFeatures::names(), "decider");

  std::vector<CorrectionDecision> decisions;
  const int n = static_cast<int>(doc.tokens.size());
  for (int i = 0; i < n; ++i) {
    const Token& token = doc.tokens[i];
    const Token* next = i + 1 < n ? &doc.tokens[i + 1] : nullptr;
    const std::vector<Candidate> candidates = generate(token, next, matrix, lm, config.split_min, config.min_confusion_weight);
    if (candidates.empty()) continue;
    const TokenContext ctx = make_context(doc, i);
    const std::vector<ScoredCandidate> ranked = rank_candidates(ranker, candidates, ctx, lm);
    if (trace != nullptr) {
      for (const auto& sc : ranked) {
        trace->ranker_rows.push_back(RankerTraceRow{doc.doc_id, i, token.surface,
                                                    sc.candidate.surface, sc.candidate.kind,
                                                    sc.features, sc.score});
      }
    }
    const ScoredCandidate& top = ranked.front();
    const DecisionFeatures dfeat = decision_features(token, top.candidate, doc, ctx, lm, config.eps);
    const double dscore = decider.score(dfeat.to_vector());
    const bool replace = dscore >= config.threshold;

    CorrectionDecision d;
    d.position = i;
    d.original = top.candidate.kind == CandidateKind::SpaceDelete
                     ? token.surface + " " + next->surface
                     : token.surface;
    d.ranker_score = top.score;
    d.decision_score = dscore;
    d.kind = top.candidate.kind;
    if (replace) d.replacement = top.candidate.surface;
    if (trace != nullptr) {
      trace->decision_rows.push_back(DecisionTraceRow{doc.doc_id, i, token.surface,
                                                      top.candidate.surface, dfeat, dscore,
                                                      replace});
    }
    decisions.push_back(std::move(d));
    if (replace && top.candidate.kind == CandidateKind::SpaceDelete) ++i;
  }
  return {apply_decisions(doc, decisions), std::move(decisions)};
}

// ---------------------------------------------------------------------------
// Aligned-corpus sites: the shared substrate of the training flows and the
// evaluation harness.

// One correction site in an OCR document whose ground truth is known.
// `truth` may contain one space (the OCR token fused two words) and
// `ocr_count` may be 2 (the truth word was split across two OCR tokens).
struct AlignedSite {
  int ocr_position = 0;
  int ocr_count = 1;
  std::string ocr_surface;   // space-joined when ocr_count == 2
  std::string truth;
  bool has_truth = true;     // false for OCR tokens with no counterpart
  bool ocr_correct = false;
  bool in_class = false;     // reachable by one extended edit (incl. pure spacing)
};

inline std::vector<AlignedSite> aligned_sites(const Document& ocr, const Document& truth,
                                              WordCostCache* cache = nullptr) {
  std::vector<AlignedSite> sites;
  for (const auto& link : align_documents(ocr, truth, cache).links) {
    AlignedSite site;
    site.ocr_position = link.ocr_begin;
    site.ocr_count = link.ocr_count;
    switch (link.kind) {
      case LinkKind::OneToOne: {
        site.ocr_surface = ocr.tokens[link.ocr_begin].surface;
        site.truth = truth.tokens[link.truth_begin].surface;
        site.ocr_correct = site.ocr_surface == site.truth;
        site.in_class = !site.ocr_correct &&
                        align_words(site.ocr_surface, site.truth).cost == 1;
        break;
      }
      case LinkKind::TwoToOne: {
        site.ocr_surface =
            ocr.tokens[link.ocr_begin].surface + " " + ocr.tokens[link.ocr_begin + 1].surface;
        site.truth = truth.tokens[link.truth_begin].surface;
        site.ocr_correct = false;
        // Pure spacing error: the concatenation matches exactly.
        site.in_class = ocr.tokens[link.ocr_begin].surface +
                            ocr.tokens[link.ocr_begin + 1].surface ==
                        site.truth;
        break;
      }
      case LinkKind::OneToTwo: {
        site.ocr_surface = ocr.tokens[link.ocr_begin].surface;
        site.truth = truth.tokens[link.truth_begin].surface + " " +
                     truth.tokens[link.truth_begin + 1].surface;
        site.ocr_correct = false;
        site.in_class = site.ocr_surface == truth.tokens[link.truth_begin].surface +
                                                truth.tokens[link.truth_begin + 1].surface;
        break;
      }
      case LinkKind::OcrOnly: {
        site.ocr_surface = ocr.tokens[link.ocr_begin].surface;
        site.has_truth = false;
        site.ocr_correct = false;
        site.in_class = false;
        break;
      }
      case LinkKind::TruthOnly:
        continue;  // no OCR-side site
    }
    sites.push_back(std::move(site));
  }
  return sites;
}

// ---------------------------------------------------------------------------
// Training flows.

struct TrainedModels {
  ConfusionMatrix matrix;
  LogisticModel ranker;
  LogisticModel decider;
  // Bookkeeping the flows report.
  std::int64_t ranker_sites = 0;
  std::int64_t ranker_sites_skipped = 0;  // truth not among the candidates
  std::int64_t ranker_rows = 0;
  std::int64_t decider_rows = 0;
  std::int64_t decider_positive = 0;
  TrainStats ranker_stats;
  TrainStats decider_stats;
};

// The ranker's training set: erroneous in-class sites only, every candidate
// a row, the candidate equal to ground truth labeled 1. Sites whose truth is
// out of candidate reach are skipped (and counted).
inline TrainingSet build_ranker_training_set(const AlignedCorpus& corpus,
                                             const ConfusionMatrix& matrix, const NGramModel& lm,
                                             const PipelineConfig& config,
                                             std::int64_t* sites_used = nullptr,
                                             std::int64_t* sites_skipped = nullptr) {
  TrainingSet data;
  data.feature_names = RankerFeatures::names();
  std::int64_t used = 0, skipped = 0;
  WordCostCache cache;
  for (const auto& [ocr, truth] : corpus.pairs) {
    for (const AlignedSite& site : aligned_sites(ocr, truth, &cache)) {
      if (!site.has_truth || site.ocr_correct || !site.in_class) continue;
      const Token& token = ocr.tokens[site.ocr_position];
      const Token* next = site.ocr_position + 1 < static_cast<int>(ocr.tokens.size())
                              ? &ocr.tokens[site.ocr_position + 1]
                              : nullptr;
      const auto candidates = generate(token, next, matrix, lm, config.split_min, config.min_confusion_weight);
      const bool reachable = std::any_of(candidates.begin(), candidates.end(),
                                         [&](const Candidate& c) { return c.surface == site.truth; });
      if (!reachable) {
        ++skipped;
        continue;
      }
      ++used;
      const TokenContext ctx = make_context(ocr, site.ocr_position);
      const std::string group = ocr.doc_id + "#" + std::to_string(site.ocr_position);
      for (const auto& cand : candidates) {
        TrainingRow row;
        row.features = ranker_features(cand, ctx, lm).to_vector();
        row.label = cand.surface == site.truth ? 1 : 0;
        row.group_id = group;
        data.rows.push_back(std::move(row));
      }
    }
  }
  if (sites_used != nullptr) *sites_used = used;
  if (sites_skipped != nullptr) *sites_skipped = skipped;
  if (data.rows.empty()) throw DataError("ranker training set is empty: no in-class errors");
  return data;
}

// The decider's training set: every token with a candidate vector forms a
// correction pair with its top-ranked candidate; label 1 iff the OCR word is
// wrong and the top candidate is the truth.
inline TrainingSet build_decider_training_set(const AlignedCorpus& corpus,
                                              const ConfusionMatrix& matrix, const NGramModel& lm,
                                              const LogisticModel& ranker,
                                              const PipelineConfig& config,
                                              std::int64_t* positives = nullptr) {
  check_model_features(ranker, RankerFeatures::names(), "ranker");
  TrainingSet data;
  data.feature_names = DecisionFeatures::names();
  std::int64_t positive_rows = 0;
  WordCostCache cache;
  for (const auto& [ocr, truth] : corpus.pairs) {
    std::map<int, const AlignedSite*> site_at;
    const auto sites = aligned_sites(ocr, truth, &cache);
    for (const auto& site : sites) site_at[site.ocr_position] = &site;
    const int n = static_cast<int>(ocr.tokens.size());
    for (int i = 0; i < n; ++i) {
      const Token& token = ocr.tokens[i];
      const Token* next = i + 1 < n ? &ocr.tokens[i + 1] : nullptr;
      const auto candidates = generate(token, next, matrix, lm, config.split_min, config.min_confusion_weight);
      if (candidates.empty()) continue;
      const TokenContext ctx = make_context(ocr, i);
      const auto ranked = rank_candidates(ranker, candidates, ctx, lm);
      const ScoredCandidate& top = ranked.front();
      const auto it = site_at.find(i);
      const AlignedSite* site = it == site_at.end() ? nullptr : it->second;
      const bool label = site != nullptr && site->has_truth && !site->ocr_correct &&
                         top.candidate.surface == site->truth;
      TrainingRow row;
      row.features = decision_features(token, top.candidate, ocr, ctx, lm, config.eps).to_vector();
      row.label = label ? 1 : 0;
      row.group_id = ocr.doc_id + "#" + std::to_string(i);
      data.rows.push_back(std::move(row));
      if (label) ++positive_rows;
    }
  }
  if (positives != nullptr) *positives = positive_rows;
  if (data.rows.empty()) throw DataError("decider training set is empty");
  if (positive_rows == 0) {
    throw DataError("no positive correction pairs in " + std::to_string(data.rows.size()) +
                    " rows; cannot train the decision model");
  }
  return data;
}

// The full training flow: channel, then ranker, then decider (the decider
// needs the trained ranker to pick its top candidates).
inline TrainedModels train_all(const AlignedCorpus& corpus, const NGramModel& lm,
                               const PipelineConfig& config) {
  config.validate();
  TrainedModels out;
  out.matrix = train_confusion(corpus);
  const TrainingSet ranker_data = build_ranker_training_set(
      corpus, out.matrix, lm, config, &out.ranker_sites, &out.ranker_sites_skipped);
  out.ranker_rows = static_cast<std::int64_t>(ranker_data.rows.size());
  out.ranker = train_logistic(ranker_data, config.ranker_train, &out.ranker_stats);
  const TrainingSet decider_data = build_decider_training_set(
      corpus, out.matrix, lm, out.ranker, config, &out.decider_positive);
  out.decider_rows = static_cast<std::int64_t>(decider_data.rows.size());
  out.decider = train_logistic(decider_data, config.decider_train, &out.decider_stats);
  return out;
}

// ---------------------------------------------------------------------------
// Threshold tuning: the false-positive / false-negative trade-off of the
// decision stage as a function of the threshold.

struct DecisionObservation {
  double score = 0.0;
  bool ocr_correct = false;
  bool top_is_truth = false;
  bool has_truth = true;
};

inline std::vector<DecisionObservation> collect_decision_observations(
    const AlignedCorpus& corpus, const ConfusionMatrix& matrix, const NGramModel& lm,
    const LogisticModel& ranker, const LogisticModel& decider, const PipelineConfig& config) {
  check_model_features(ranker, RankerFeatures::names(), "ranker");
  check_model_features(decider, DecisionFeatures::names(), "decider");
  std::vector<DecisionObservation> observations;
  WordCostCache cache;
  for (const auto& [ocr, truth] : corpus.pairs) {
    std::map<int, const AlignedSite*> site_at;
    const auto sites = aligned_sites(ocr, truth, &cache);
    for (const auto& site : sites) site_at[site.ocr_position] = &site;
    const int n = static_cast<int>(ocr.tokens.size());
    for (int i = 0; i < n; ++i) {
      const Token& token = ocr.tokens[i];
      const Token* next = i + 1 < n ? &ocr.tokens[i + 1] : nullptr;
      const auto candidates = generate(token, next, matrix, lm, config.split_min, config.min_confusion_weight);
      if (candidates.empty()) continue;
      const TokenContext ctx = make_context(ocr, i);
      const auto ranked = rank_candidates(ranker, candidates, ctx, lm);
      const ScoredCandidate& top = ranked.front();
      const auto it = site_at.find(i);
      const AlignedSite* site = it == site_at.end() ? nullptr : it->second;
      DecisionObservation obs;
      obs.score = decider.score(
          decision_features(token, top.candidate, ocr, ctx, lm, config.eps).to_vector());
      obs.has_truth = site != nullptr && site->has_truth;
      obs.ocr_correct = site != nullptr && site->ocr_correct;
      obs.top_is_truth = obs.has_truth && top.candidate.surface == site->truth;
      observations.push_back(obs);
    }
  }
  return observations;
}

struct ThresholdPoint {
  double threshold = 0.0;
  std::int64_t rejected_correct = 0;   // correct OCR word replaced (false positive)
  std::int64_t accepted_correct = 0;
  std::int64_t rejected_fixable = 0;   // erroneous word with truth on top, replaced
  std::int64_t accepted_fixable = 0;   // ... kept (false negative)
  double fp_rate = 0.0;
  double fn_rate = 0.0;
};

// Sweeps thresholds over decision observations. FP rate follows the decision
// table convention: replacing a correct OCR word; FN rate is conditioned on
// erroneous words whose truth was ranked top.
inline std::vector<ThresholdPoint> sweep_thresholds(
    const std::vector<DecisionObservation>& observations, int steps = 99) {
  std::vector<ThresholdPoint> points;
  for (int s = 1; s <= steps; ++s) {
    ThresholdPoint p;
    p.threshold = static_cast<double>(s) / (steps + 1);
    for (const auto& obs : observations) {
      const bool replace = obs.score >= p.threshold;
      if (obs.ocr_correct) {
        ++(replace ? p.rejected_correct : p.accepted_correct);
      } else if (obs.top_is_truth) {
        ++(replace ? p.rejected_fixable : p.accepted_fixable);
      }
    }
    const auto rate = [](std::int64_t a, std::int64_t b) {
      return a + b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(a + b);
    };
    p.fp_rate = rate(p.rejected_correct, p.accepted_correct);
    p.fn_rate = rate(p.accepted_fixable, p.rejected_fixable);
    points.push_back(p);
  }
  return points;
}

// The smallest threshold meeting the FP target (FP falls and FN rises with
// the threshold, so this is also the FN-minimal compliant choice).
inline double pick_threshold(const std::vector<ThresholdPoint>& points, double max_fp_rate) {
  for (const auto& p : points) {
    if (p.fp_rate <= max_fp_rate) return p.threshold;
  }
  return points.empty() ? 1.0 : points.back().threshold;
}

}  // namespace ocrpost

#endif  // OCRPOST_PIPELINE_HPP
