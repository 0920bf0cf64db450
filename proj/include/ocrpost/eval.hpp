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

#ifndef OCRPOST_EVAL_HPP
#define OCRPOST_EVAL_HPP

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "ocrpost/alignment.hpp"
#include "ocrpost/corpus.hpp"
#include "ocrpost/errors.hpp"
#include "ocrpost/pipeline.hpp"

namespace ocrpost {

// Token-level edit distance (substitution/insertion/deletion, unit costs)
// between two token sequences.
inline std::int64_t token_edit_distance(const std::vector<Token>& hyp,
                                        const std::vector<Token>& ref) {
  const std::size_t n = hyp.size(), m = ref.size();
  std::vector<std::int64_t> prev(m + 1), curr(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<std::int64_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    curr[0] = static_cast<std::int64_t>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const std::int64_t sub = prev[j - 1] + (hyp[i - 1].surface == ref[j - 1].surface ? 0 : 1);
      curr[j] = std::min({sub, prev[j] + 1, curr[j - 1] + 1});
    }
    std::swap(prev, curr);
  }
  return prev[m];
}

inline double wer(const Document& hypothesis, const Document& reference) {
  if (reference.tokens.empty()) throw DataError("wer: empty reference document");
  return static_cast<double>(token_edit_distance(hypothesis.tokens, reference.tokens)) /
         static_cast<double>(reference.tokens.size());
}

// Corpus-level WER: total edit distance over total reference length.
inline double wer(const std::vector<Document>& hypothesis, const std::vector<Document>& reference) {
  if (hypothesis.size() != reference.size()) {
    throw DataError("wer: document count mismatch");
  }
  std::int64_t distance = 0, ref_len = 0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    if (reference[i].tokens.empty()) throw DataError("wer: empty reference document");
    distance += token_edit_distance(hypothesis[i].tokens, reference[i].tokens);
    ref_len += static_cast<std::int64_t>(reference[i].tokens.size());
  }
  return static_cast<double>(distance) / static_cast<double>(ref_len);
}

// The per-stage evaluation report: error-class coverage, retrieval recall,
// recall@k of the ranker, the decision table, and end-to-end WER.
struct EvalReport {
  double wer_before = 0.0;
  double wer_after = 0.0;
  double relative_reduction = 0.0;

  std::int64_t sites_with_truth = 0;
  std::int64_t sites_erroneous = 0;
  std::int64_t sites_in_class = 0;
  std::int64_t sites_retrieved = 0;   // truth among the generated candidates
  double error_class_share = 0.0;     // in-class / erroneous
  double retrieval_recall = 0.0;      // retrieved / erroneous

  std::map<int, double> recall_at_k;      // denominator: erroneous with retrievable truth
  std::map<int, double> recall_at_k_all;  // denominator: all erroneous sites

  // Decision table, rates per column. The incorrect column only counts
  // erroneous words whose truth was ranked top.
  std::int64_t decided_correct = 0;
  std::int64_t decided_fixable = 0;
  double reject_correct = 0.0;    // false positive rate
  double accept_correct = 0.0;
  double reject_incorrect = 0.0;
  double accept_incorrect = 0.0;

  std::map<int, std::int64_t> candidate_count_hist;  // filtered vector sizes, all tokens
  double mean_candidates_raw = 0.0;
  double mean_candidates_filtered = 0.0;
  std::int64_t max_candidates_raw = 0;
  std::int64_t max_candidates_filtered = 0;
};

// Runs every pipeline stage over an aligned test corpus and measures each
// stage against the known truth. Erroneous/correct status comes from the
// token-level pairing, so spacing errors are scored at their sites rather
// than as positional mismatches.
inline EvalReport ceiling_analysis(const AlignedCorpus& corpus, const ConfusionMatrix& matrix,
                                   const NGramModel& lm, const LogisticModel& ranker,
                                   const LogisticModel& decider, const PipelineConfig& config) {
  config.validate();
  check_model_features(ranker, RankerFeatures::names(), "ranker");
  check_model_features(decider, DecisionFeatures::names(), "decider");

  EvalReport report;
  std::vector<Document> ocr_docs, truth_docs, corrected_docs;
  std::int64_t rank_hits[11] = {0};  // rank_hits[k]: truth found at rank <= k
  std::int64_t raw_total = 0, filtered_total = 0, tokens_total = 0;
  std::int64_t fp_count = 0, fn_count = 0;
  WordCostCache cache;

  for (const auto& [ocr, truth] : corpus.pairs) {
    ocr_docs.push_back(ocr);
    truth_docs.push_back(truth);

    // End-to-end correction (with join consumption) scores the WER; the
    // per-token pass below measures the stages in isolation.
    auto [corrected, decisions] = correct_document(ocr, matrix, lm, ranker, decider, config);
    corrected_docs.push_back(std::move(corrected));

    std::map<int, const AlignedSite*> site_at;
    const auto sites = aligned_sites(ocr, truth, &cache);
    for (const auto& site : sites) site_at[site.ocr_position] = &site;

    const int n = static_cast<int>(ocr.tokens.size());
    std::vector<std::vector<ScoredCandidate>> ranked_at(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const Token& token = ocr.tokens[i];
      const Token* next = i + 1 < n ? &ocr.tokens[i + 1] : nullptr;
      const auto raw = generate_raw(token, next, matrix, lm, config.split_min, config.min_confusion_weight);
      const auto filtered = generate(token, next, matrix, lm, config.split_min, config.min_confusion_weight);
      ++tokens_total;
      raw_total += static_cast<std::int64_t>(raw.size());
      filtered_total += static_cast<std::int64_t>(filtered.size());
      report.max_candidates_raw =
          std::max(report.max_candidates_raw, static_cast<std::int64_t>(raw.size()));
      report.max_candidates_filtered =
          std::max(report.max_candidates_filtered, static_cast<std::int64_t>(filtered.size()));
      ++report.candidate_count_hist[static_cast<int>(filtered.size())];
      if (filtered.empty()) continue;

      const TokenContext ctx = make_context(ocr, i);
      ranked_at[static_cast<std::size_t>(i)] = rank_candidates(ranker, filtered, ctx, lm);
      const ScoredCandidate& top = ranked_at[static_cast<std::size_t>(i)].front();

      // Decision table, one correction pair per token with candidates.
      const auto it = site_at.find(i);
      const AlignedSite* site = it == site_at.end() ? nullptr : it->second;
      if (site == nullptr || !site->has_truth) continue;
      const double dscore = decider.score(
          decision_features(token, top.candidate, ocr, ctx, lm, config.eps).to_vector());
      const bool replace = dscore >= config.threshold;
      if (site->ocr_correct) {
        ++report.decided_correct;
        if (replace) ++fp_count;
      } else if (top.candidate.surface == site->truth) {
        ++report.decided_fixable;
        if (!replace) ++fn_count;
      }
    }

    for (const AlignedSite& site : sites) {
      if (!site.has_truth) continue;
      ++report.sites_with_truth;
      if (site.ocr_correct) continue;
      ++report.sites_erroneous;
      if (site.in_class) ++report.sites_in_class;
      const auto& ranked = ranked_at[static_cast<std::size_t>(site.ocr_position)];
      for (std::size_t r = 0; r < ranked.size(); ++r) {
        if (ranked[r].candidate.surface == site.truth) {
          ++report.sites_retrieved;
          for (int k = static_cast<int>(r) + 1; k <= 10; ++k) ++rank_hits[k];
          break;
        }
      }
    }
  }

  report.wer_before = wer(ocr_docs, truth_docs);
  report.wer_after = wer(corrected_docs, truth_docs);
  report.relative_reduction =
      report.wer_before > 0.0 ? (report.wer_before - report.wer_after) / report.wer_before : 0.0;

  report.error_class_share =
      report.sites_erroneous > 0
          ? static_cast<double>(report.sites_in_class) / report.sites_erroneous
          : 0.0;
  report.retrieval_recall =
      report.sites_erroneous > 0
          ? static_cast<double>(report.sites_retrieved) / report.sites_erroneous
          : 0.0;
  for (int k = 1; k <= 10; ++k) {
    report.recall_at_k[k] = report.sites_retrieved > 0
                                ? static_cast<double>(rank_hits[k]) / report.sites_retrieved
                                : 0.0;
    report.recall_at_k_all[k] = report.sites_erroneous > 0
                                    ? static_cast<double>(rank_hits[k]) / report.sites_erroneous
                                    : 0.0;
  }

  if (report.decided_correct > 0) {
    report.reject_correct = static_cast<double>(fp_count) / report.decided_correct;
    report.accept_correct = 1.0 - report.reject_correct;
  }
  if (report.decided_fixable > 0) {
    report.accept_incorrect = static_cast<double>(fn_count) / report.decided_fixable;
    report.reject_incorrect = 1.0 - report.accept_incorrect;
  }

  report.mean_candidates_raw =
      tokens_total > 0 ? static_cast<double>(raw_total) / tokens_total : 0.0;
  report.mean_candidates_filtered =
      tokens_total > 0 ? static_cast<double>(filtered_total) / tokens_total : 0.0;
  return report;
}

// Fig.-1-style data: (k, recall) rows for plotting.
inline std::vector<std::pair<int, double>> recall_curve(const EvalReport& report) {
  std::vector<std::pair<int, double>> rows;
  for (const auto& [k, recall] : report.recall_at_k) rows.emplace_back(k, recall);
  return rows;
}

inline void write_recall_curve(const EvalReport& report, std::ostream& out) {
  out << "k\trecall\n";
  if (report.sites_erroneous == 0) return;  // nothing to measure: header only
  char buf[32];
  for (const auto& [k, recall] : recall_curve(report)) {
    std::snprintf(buf, sizeof(buf), "%.6f", recall);
    out << k << '\t' << buf << '\n';
  }
}

namespace detail {

inline std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace detail

// Machine-readable key/value form.
inline void write_report_kv(const EvalReport& r, std::ostream& out) {
  out << "wer_before\t" << detail::fmt6(r.wer_before) << '\n';
  out << "wer_after\t" << detail::fmt6(r.wer_after) << '\n';
  out << "relative_reduction\t" << detail::fmt6(r.relative_reduction) << '\n';
  out << "sites_with_truth\t" << r.sites_with_truth << '\n';
  out << "sites_erroneous\t" << r.sites_erroneous << '\n';
  out << "sites_in_class\t" << r.sites_in_class << '\n';
  out << "sites_retrieved\t" << r.sites_retrieved << '\n';
  out << "error_class_share\t" << detail::fmt6(r.error_class_share) << '\n';
  out << "retrieval_recall\t" << detail::fmt6(r.retrieval_recall) << '\n';
  for (const auto& [k, v] : r.recall_at_k) {
    out << "recall_at_" << k << '\t' << detail::fmt6(v) << '\n';
  }
  for (const auto& [k, v] : r.recall_at_k_all) {
    out << "recall_at_" << k << "_all\t" << detail::fmt6(v) << '\n';
  }
  out << "decided_correct\t" << r.decided_correct << '\n';
  out << "decided_fixable\t" << r.decided_fixable << '\n';
  out << "reject_correct\t" << detail::fmt6(r.reject_correct) << '\n';
  out << "accept_correct\t" << detail::fmt6(r.accept_correct) << '\n';
  out << "reject_incorrect\t" << detail::fmt6(r.reject_incorrect) << '\n';
  out << "accept_incorrect\t" << detail::fmt6(r.accept_incorrect) << '\n';
  out << "mean_candidates_raw\t" << detail::fmt6(r.mean_candidates_raw) << '\n';
  out << "mean_candidates_filtered\t" << detail::fmt6(r.mean_candidates_filtered) << '\n';
  out << "max_candidates_raw\t" << r.max_candidates_raw << '\n';
  out << "max_candidates_filtered\t" << r.max_candidates_filtered << '\n';
  for (const auto& [count, sites] : r.candidate_count_hist) {
    out << "candidate_count_hist_" << count << '\t' << sites << '\n';
  }
}

// Human-readable form.
inline void write_report_text(const EvalReport& r, std::ostream& out) {
  out << "WER before correction:        " << detail::fmt6(r.wer_before) << '\n';
  out << "WER after correction:         " << detail::fmt6(r.wer_after) << '\n';
  out << "Relative WER reduction:       " << detail::fmt6(r.relative_reduction) << '\n';
  out << '\n';
  out << "Erroneous word sites:         " << r.sites_erroneous << " of " << r.sites_with_truth
      << '\n';
  out << "  in correctable class:       " << r.sites_in_class << " ("
      << detail::fmt6(r.error_class_share) << ")\n";
  out << "  truth among candidates:     " << r.sites_retrieved << " ("
      << detail::fmt6(r.retrieval_recall) << ")\n";
  out << '\n';
  out << "Ranker recall@k (retrievable / all erroneous):\n";
  for (const auto& [k, v] : r.recall_at_k) {
    out << "  k=" << k << "\t" << detail::fmt6(v) << "\t"
        << detail::fmt6(r.recall_at_k_all.at(k)) << '\n';
  }
  out << '\n';
  out << "Decision table (rates per column):\n";
  out << "                     OCR correct   OCR incorrect (truth on top)\n";
  out << "  reject OCR word    " << detail::fmt6(r.reject_correct) << "      "
      << detail::fmt6(r.reject_incorrect) << '\n';
  out << "  accept OCR word    " << detail::fmt6(r.accept_correct) << "      "
      << detail::fmt6(r.accept_incorrect) << '\n';
  out << "  (decided: " << r.decided_correct << " correct, " << r.decided_fixable
      << " fixable)\n";
  out << '\n';
  out << "Candidates per token: raw mean " << detail::fmt6(r.mean_candidates_raw) << " (max "
      << r.max_candidates_raw << "), filtered mean " << detail::fmt6(r.mean_candidates_filtered)
      << " (max " << r.max_candidates_filtered << ")\n";
}

}  // namespace ocrpost

#endif  // OCRPOST_EVAL_HPP
