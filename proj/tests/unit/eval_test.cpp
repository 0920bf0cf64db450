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
#include <sstream>

#include "doctest.h"
#include "ocrpost/eval.hpp"
#include "support/closed_loop.hpp"
#include "support/oracles.hpp"

using namespace ocrpost;

TEST_CASE("wer basics") {
  const Document ref = tokenize("a b c d e f g h i j", "d");
  CHECK(wer(ref, ref) == doctest::Approx(0.0));
  const Document one_sub = tokenize("a b c d X f g h i j", "d");
  CHECK(wer(one_sub, ref) == doctest::Approx(0.10));
  const Document empty = tokenize("", "d");
  CHECK(wer(empty, ref) == doctest::Approx(1.0));
  CHECK_THROWS_AS(static_cast<void>(wer(ref, empty)), DataError);
}

TEST_CASE("wer matches the brute-force DP oracle on random shuffles") {
  std::mt19937_64 rng(2024);
  const char* vocab[3] = {"wa", "lo", "ch"};
  for (int round = 0; round < 3000; ++round) {
    const int n = static_cast<int>(rng() % 9);
    const int m = 1 + static_cast<int>(rng() % 8);
    Document hyp, ref;
    hyp.doc_id = ref.doc_id = "d";
    std::vector<int> h_ids, r_ids;
    for (int i = 0; i < n; ++i) {
      const int id = static_cast<int>(rng() % 3);
      h_ids.push_back(id);
      Token t;
      t.surface = vocab[id];
      t.position = i;
      hyp.tokens.push_back(t);
    }
    for (int j = 0; j < m; ++j) {
      const int id = static_cast<int>(rng() % 3);
      r_ids.push_back(id);
      Token t;
      t.surface = vocab[id];
      t.position = j;
      ref.tokens.push_back(t);
    }
    const double expected = static_cast<double>(oracle::token_distance(h_ids, r_ids)) / m;
    const double value = wer(hyp, ref);
    CHECK(value == doctest::Approx(expected));
    CHECK(value >= 0.0);
    CHECK(value <= std::max(1.0, static_cast<double>(n) / m) + 1e-12);
  }
}

TEST_CASE("wer is symmetric for equal-length substitution-only pairs and bounded") {
  std::mt19937_64 rng(9);
  const char* vocab[3] = {"x", "y", "z"};
  for (int round = 0; round < 300; ++round) {
    const int n = 1 + static_cast<int>(rng() % 8);
    Document a, b;
    for (int i = 0; i < n; ++i) {
      Token t1, t2;
      t1.surface = vocab[rng() % 3];
      t2.surface = vocab[rng() % 3];
      t1.position = t2.position = i;
      a.tokens.push_back(t1);
      b.tokens.push_back(t2);
    }
    CHECK(wer(a, b) == doctest::Approx(wer(b, a)));
    CHECK(wer(a, b) >= 0.0);
    CHECK(wer(a, b) <= 1.0);
  }
}

TEST_CASE("closed-world ceiling analysis retrieves every in-class error") {
  // Channel and matrix share the same corpus (train = test), every error is
  // a single character edit: retrieval must be exactly 1.0.
  testsupport::ClosedLoopOptions opt;
  opt.tokens = 3500;
  opt.seed = 7;
  opt.train_share = 1.0;  // closed world: evaluate on the training corpus
  opt.bigram_cutoff = 1;
  opt.channel.mix_substitution = 0.55;
  opt.channel.mix_deletion = 0.15;
  opt.channel.mix_insertion = 0.15;
  opt.channel.mix_merge_split = 0.10;
  opt.channel.mix_pair = 0.05;
  opt.channel.mix_spacing = 0.0;
  const auto loop = testsupport::run_closed_loop(opt);
  const EvalReport report = ceiling_analysis(loop.train_corpus, loop.models.matrix, loop.lm,
                                             loop.models.ranker, loop.models.decider, loop.config);
  CHECK(report.sites_erroneous > 300);
  CHECK(report.error_class_share == doctest::Approx(1.0));
  CHECK(report.retrieval_recall == doctest::Approx(1.0));
  CHECK(report.wer_after < report.wer_before);
}

TEST_CASE("recall@k is non-decreasing and the curve emits monotone rows") {
  testsupport::ClosedLoopOptions opt;
  opt.tokens = 4000;
  opt.seed = 31;
  const auto loop = testsupport::run_closed_loop(opt);
  const EvalReport report = ceiling_analysis(loop.test_corpus, loop.models.matrix, loop.lm,
                                             loop.models.ranker, loop.models.decider, loop.config);
  double last = 0.0, last_all = 0.0;
  for (int k = 1; k <= 10; ++k) {
    CHECK(report.recall_at_k.at(k) + 1e-12 >= last);
    CHECK(report.recall_at_k_all.at(k) + 1e-12 >= last_all);
    CHECK(report.recall_at_k_all.at(k) <= report.recall_at_k.at(k) + 1e-12);
    last = report.recall_at_k.at(k);
    last_all = report.recall_at_k_all.at(k);
  }
  std::ostringstream curve;
  write_recall_curve(report, curve);
  std::istringstream lines(curve.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "k\trecall");
  int rows = 0;
  double prev = -1.0;
  std::string line;
  while (std::getline(lines, line)) {
    const auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    const double recall = std::stod(line.substr(tab + 1));
    CHECK(recall + 1e-12 >= prev);
    prev = recall;
    ++rows;
  }
  CHECK(rows == 10);
}

TEST_CASE("recall curve on an empty erroneous set is header plus zeros") {
  testsupport::ClosedLoopOptions opt;
  opt.tokens = 1200;
  opt.seed = 13;
  const auto loop = testsupport::run_closed_loop(opt);
  // Evaluate on an error-free corpus: pair each clean doc with itself.
  AlignedCorpus clean_pairs;
  for (const auto& doc : loop.clean) clean_pairs.pairs.emplace_back(doc, doc);
  const EvalReport report = ceiling_analysis(clean_pairs, loop.models.matrix, loop.lm,
                                             loop.models.ranker, loop.models.decider, loop.config);
  CHECK(report.sites_erroneous == 0);
  CHECK(report.retrieval_recall == 0.0);
  for (const auto& [k, recall] : report.recall_at_k) CHECK(recall == 0.0);
  CHECK(report.wer_before == doctest::Approx(0.0));
  std::ostringstream curve;
  write_recall_curve(report, curve);
  CHECK(curve.str() == "k\trecall\n");
}

TEST_CASE("decision table columns sum to one") {
  testsupport::ClosedLoopOptions opt;
  opt.tokens = 5000;
  opt.seed = 41;
  const auto loop = testsupport::run_closed_loop(opt);
  const EvalReport report = ceiling_analysis(loop.test_corpus, loop.models.matrix, loop.lm,
                                             loop.models.ranker, loop.models.decider, loop.config);
  REQUIRE(report.decided_correct > 0);
  REQUIRE(report.decided_fixable > 0);
  CHECK(report.reject_correct + report.accept_correct == doctest::Approx(1.0));
  CHECK(report.reject_incorrect + report.accept_incorrect == doctest::Approx(1.0));
}

TEST_CASE("relative reduction matches recomputation from raw corpora") {
  testsupport::ClosedLoopOptions opt;
  opt.tokens = 3000;
  opt.seed = 53;
  const auto loop = testsupport::run_closed_loop(opt);
  const EvalReport report = ceiling_analysis(loop.test_corpus, loop.models.matrix, loop.lm,
                                             loop.models.ranker, loop.models.decider, loop.config);
  std::vector<Document> ocr_docs, truth_docs, corrected;
  for (const auto& [ocr, truth] : loop.test_corpus.pairs) {
    ocr_docs.push_back(ocr);
    truth_docs.push_back(truth);
    corrected.push_back(correct_document(ocr, loop.models.matrix, loop.lm, loop.models.ranker,
                                         loop.models.decider, loop.config)
                            .first);
  }
  const double before = wer(ocr_docs, truth_docs);
  const double after = wer(corrected, truth_docs);
  CHECK(report.wer_before == doctest::Approx(before));
  CHECK(report.wer_after == doctest::Approx(after));
  CHECK(report.relative_reduction == doctest::Approx((before - after) / before));
}

TEST_CASE("multi-error channel lowers the class share below one") {
  testsupport::ClosedLoopOptions opt;
  opt.tokens = 4000;
  opt.seed = 61;
  opt.channel.multi_error_share = 0.25;
  const auto loop = testsupport::run_closed_loop(opt);
  const EvalReport report = ceiling_analysis(loop.test_corpus, loop.models.matrix, loop.lm,
                                             loop.models.ranker, loop.models.decider, loop.config);
  CHECK(report.error_class_share < 0.95);
  CHECK(report.error_class_share > 0.5);
}

TEST_CASE("reports serialize deterministically") {
  testsupport::ClosedLoopOptions opt;
  opt.tokens = 2000;
  opt.seed = 71;
  const auto run = [&]() {
    const auto loop = testsupport::run_closed_loop(opt);
    const EvalReport report =
        ceiling_analysis(loop.test_corpus, loop.models.matrix, loop.lm, loop.models.ranker,
                         loop.models.decider, loop.config);
    std::ostringstream kv, text, curve;
    write_report_kv(report, kv);
    write_report_text(report, text);
    write_recall_curve(report, curve);
    return kv.str() + "\x01" + text.str() + "\x01" + curve.str();
  };
  CHECK(run() == run());
}
