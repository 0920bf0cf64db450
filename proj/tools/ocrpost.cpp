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
//
// Command-line front end: train the language model, channel, ranker and
// decider; corrupt clean text into synthetic OCR; correct documents; and
// evaluate every stage against ground truth.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ocrpost/ocrpost.hpp"

namespace fs = std::filesystem;
using namespace ocrpost;

namespace {

struct ModelPaths {
  std::string dir;

  std::string matrix() const { return (fs::path(dir) / "matrix.tsv").string(); }
  std::string ranker() const { return (fs::path(dir) / "ranker.model").string(); }
  std::string decider() const { return (fs::path(dir) / "decider.model").string(); }
};

struct CommonOptions {
  ModelPaths models;
  PipelineConfig config;
};

void add_model_dir(CLI::App* cmd, CommonOptions& common, bool required = true) {
  auto* opt = cmd->add_option("--model-dir", common.models.dir,
                              "Directory holding unigrams.tsv, bigrams.tsv, matrix.tsv, "
                              "ranker.model and decider.model");
  if (required) opt->required();
}

void add_pipeline_options(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("--split-min", common.config.split_min,
                  "Minimum word length (exclusive) for split candidates")
      ->capture_default_str();
  cmd->add_option("--min-confusion-weight", common.config.min_confusion_weight,
                  "Ignore confusion entries below this weight during generation")
      ->capture_default_str();
  cmd->add_option("--eps", common.config.eps, "Smoothing constant of the proportion features")
      ->capture_default_str();
  cmd->add_option("--threshold", common.config.threshold,
                  "Decision threshold: replace when the decision score reaches it")
      ->capture_default_str();
}

void add_train_options(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("--ranker-learning-rate", common.config.ranker_train.learning_rate)
      ->capture_default_str();
  cmd->add_option("--ranker-epochs", common.config.ranker_train.epochs)->capture_default_str();
  cmd->add_option("--ranker-l2", common.config.ranker_train.l2)->capture_default_str();
  cmd->add_flag("--ranker-free-weights",
                [&common](std::int64_t count) {
                  common.config.ranker_train.nonnegative_weights = count == 0;
                },
                "Allow negative ranker weights (default clamps them at zero)");
  cmd->add_option("--decider-learning-rate", common.config.decider_train.learning_rate)
      ->capture_default_str();
  cmd->add_option("--decider-epochs", common.config.decider_train.epochs)->capture_default_str();
  cmd->add_option("--decider-l2", common.config.decider_train.l2)->capture_default_str();
  cmd->add_option("--seed", common.config.seed, "Training seed")->capture_default_str();
}

NGramModel load_lm_or_fail(const CommonOptions& common) {
  return NGramModel::load(common.models.dir);
}

struct LoadedArtifacts {
  ConfusionMatrix matrix;
  NGramModel lm;
  LogisticModel ranker;
  LogisticModel decider;
};

LoadedArtifacts load_artifacts(const CommonOptions& common) {
  LoadedArtifacts a;
  a.lm = NGramModel::load(common.models.dir);
  a.matrix = ConfusionMatrix::load_file(common.models.matrix());
  a.ranker = LogisticModel::load_file(common.models.ranker());
  a.decider = LogisticModel::load_file(common.models.decider());
  return a;
}

std::vector<Document> load_plain_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::vector<Document> docs;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Document doc = tokenize(line, "doc" + std::to_string(docs.size()));
    if (!doc.tokens.empty()) docs.push_back(std::move(doc));
  }
  if (docs.empty()) throw DataError(path + ": no documents");
  return docs;
}

void write_ranker_dump(const CorrectionTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "#doc_id\tposition\ttoken\tcandidate\tkind\tconfusion_weight\tunigram_freq\t"
         "backward_bigram\tforward_bigram\tranker_score\n";
  char buf[32];
  for (const auto& row : trace.ranker_rows) {
    std::snprintf(buf, sizeof(buf), "%.6f", row.score);
    out << row.doc_id << '\t' << row.position << '\t' << row.token << '\t' << row.candidate
        << '\t' << to_string(row.kind) << '\t' << row.features.confusion_weight << '\t'
        << row.features.unigram_freq << '\t' << row.features.backward_bigram << '\t'
        << row.features.forward_bigram << '\t' << buf << '\n';
  }
}

void write_decision_dump(const CorrectionTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "#doc_id\tposition\ttoken\tcandidate\tinv_prop_unigram\tinv_prop_backward_bigram\t"
         "inv_prop_forward_bigram\tinv_prop_term_freq\tocr_confidence\tconfusion_weight\t"
         "decision_score\treplaced\n";
  char buf[160];
  for (const auto& row : trace.decision_rows) {
    std::snprintf(buf, sizeof(buf), "%.6f\t%.6f\t%.6f\t%.6f\t%.6f", row.features.inv_prop_unigram,
                  row.features.inv_prop_backward_bigram, row.features.inv_prop_forward_bigram,
                  row.features.inv_prop_term_freq, row.features.ocr_confidence);
    char score[32];
    std::snprintf(score, sizeof(score), "%.6f", row.score);
    out << row.doc_id << '\t' << row.position << '\t' << row.token << '\t' << row.candidate
        << '\t' << buf << '\t' << row.features.confusion_weight << '\t' << score << '\t'
        << (row.replaced ? 1 : 0) << '\n';
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Post-OCR text correction: confusion-matrix candidate generation, "
               "feature-based ranking and an accept/reject decision"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI-style config file");

  CommonOptions common;

  // --- train-lm ---
  auto* train_lm_cmd =
      app.add_subcommand("train-lm", "Build unigram/bigram document-frequency lists");
  std::string lm_input;
  std::int64_t bigram_cutoff = 2, unigram_cutoff = 1;
  train_lm_cmd->add_option("--input", lm_input, "Plain text corpus, one document per line")
      ->required();
  add_model_dir(train_lm_cmd, common);
  train_lm_cmd->add_option("--bigram-cutoff", bigram_cutoff)->capture_default_str();
  train_lm_cmd->add_option("--unigram-cutoff", unigram_cutoff)->capture_default_str();
  train_lm_cmd->callback([&]() {
    const auto docs = load_plain_corpus(lm_input);
    const NGramModel model = train_lm(docs, bigram_cutoff, unigram_cutoff);
    fs::create_directories(common.models.dir);
    model.save(common.models.dir);
    std::cout << "trained language model: " << model.doc_count << " documents, "
              << model.unigram_count() << " unigrams, " << model.bigram_count() << " bigrams\n";
  });

  // --- corrupt ---
  auto* corrupt_cmd =
      app.add_subcommand("corrupt", "Corrupt clean text into an aligned synthetic OCR corpus");
  std::string corrupt_input, corrupt_out_dir, corrupt_table_in;
  ChannelSpec spec;
  std::uint64_t corrupt_seed = 1;
  corrupt_cmd->add_option("--input", corrupt_input, "Plain text corpus, one document per line")
      ->required();
  corrupt_cmd->add_option("--out-dir", corrupt_out_dir,
                          "Output directory: ocr.tsv, truth.tsv, labels.tsv, channel_table.tsv")
      ->required();
  corrupt_cmd->add_option("--table", corrupt_table_in,
                          "Reuse an existing channel table instead of sampling one");
  corrupt_cmd->add_option("--wer", spec.word_error_rate, "Per-token corruption probability")
      ->capture_default_str();
  corrupt_cmd->add_option("--mix-substitution", spec.mix_substitution)->capture_default_str();
  corrupt_cmd->add_option("--mix-deletion", spec.mix_deletion)->capture_default_str();
  corrupt_cmd->add_option("--mix-insertion", spec.mix_insertion)->capture_default_str();
  corrupt_cmd->add_option("--mix-merge-split", spec.mix_merge_split)->capture_default_str();
  corrupt_cmd->add_option("--mix-pair", spec.mix_pair)->capture_default_str();
  corrupt_cmd->add_option("--mix-spacing", spec.mix_spacing)->capture_default_str();
  corrupt_cmd->add_option("--multi-error", spec.multi_error_share,
                          "Share of corrupted tokens receiving a second, out-of-class edit")
      ->capture_default_str();
  corrupt_cmd->add_option("--seed", corrupt_seed)->capture_default_str();
  corrupt_cmd->callback([&]() {
    const auto docs = load_plain_corpus(corrupt_input);
    const ChannelTable table = corrupt_table_in.empty()
                                   ? make_random_table(docs, corrupt_seed)
                                   : ChannelTable::load_file(corrupt_table_in);
    const SyntheticCorpus synthetic = corrupt(docs, table, spec, corrupt_seed);
    fs::create_directories(corrupt_out_dir);
    std::vector<Document> ocr_docs, truth_docs;
    for (const auto& [ocr, truth] : synthetic.corpus.pairs) {
      ocr_docs.push_back(ocr);
      truth_docs.push_back(truth);
    }
    write_documents(ocr_docs, (fs::path(corrupt_out_dir) / "ocr.tsv").string());
    write_documents(truth_docs, (fs::path(corrupt_out_dir) / "truth.tsv").string());
    {
      std::ofstream labels((fs::path(corrupt_out_dir) / "labels.tsv").string(), std::ios::binary);
      write_corruption_records(synthetic.records, labels);
    }
    table.save((fs::path(corrupt_out_dir) / "channel_table.tsv").string());
    std::cout << "corrupted " << synthetic.tokens_corrupted << " of " << synthetic.tokens_seen
              << " tokens over " << synthetic.corpus.pairs.size() << " documents\n";
  });

  // --- train-channel ---
  auto* train_channel_cmd =
      app.add_subcommand("train-channel", "Train the confusion matrix from aligned documents");
  std::string ocr_path, truth_path;
  train_channel_cmd->add_option("--ocr", ocr_path, "OCR-side TSV")->required();
  train_channel_cmd->add_option("--truth", truth_path, "Ground-truth TSV")->required();
  add_model_dir(train_channel_cmd, common);
  train_channel_cmd->callback([&]() {
    const AlignedCorpus corpus = load_aligned(ocr_path, truth_path);
    const ConfusionMatrix matrix = train_confusion(corpus);
    fs::create_directories(common.models.dir);
    matrix.save(common.models.matrix());
    std::cout << "trained confusion matrix: " << matrix.pair_count() << " segment pairs, total "
              << matrix.total_weight() << " observations\n";
  });

  // --- train-ranker ---
  auto* train_ranker_cmd =
      app.add_subcommand("train-ranker", "Train the candidate ranking model");
  int cv_folds = 0;
  train_ranker_cmd->add_option("--ocr", ocr_path, "OCR-side TSV")->required();
  train_ranker_cmd->add_option("--truth", truth_path, "Ground-truth TSV")->required();
  add_model_dir(train_ranker_cmd, common);
  add_pipeline_options(train_ranker_cmd, common);
  add_train_options(train_ranker_cmd, common);
  train_ranker_cmd->add_option("--cv", cv_folds, "Also report k-fold cross-validation metrics");
  train_ranker_cmd->callback([&]() {
    const AlignedCorpus corpus = load_aligned(ocr_path, truth_path);
    const NGramModel lm = load_lm_or_fail(common);
    const ConfusionMatrix matrix = ConfusionMatrix::load_file(common.models.matrix());
    std::int64_t used = 0, skipped = 0;
    const TrainingSet data =
        build_ranker_training_set(corpus, matrix, lm, common.config, &used, &skipped);
    TrainStats stats;
    const LogisticModel model = train_logistic(data, common.config.ranker_train, &stats);
    model.save(common.models.ranker());
    std::cout << "trained ranker on " << data.rows.size() << " rows from " << used
              << " sites (skipped " << skipped << " with unreachable truth); final loss "
              << stats.final_loss << "\n";
    if (cv_folds >= 2) {
      const auto cv = cross_validate(data, common.config.ranker_train, cv_folds,
                                     common.config.seed);
      for (std::size_t f = 0; f < cv.folds.size(); ++f) {
        std::cout << "fold " << f << ": accuracy " << cv.folds[f].accuracy << ", log-loss "
                  << cv.folds[f].log_loss << " (" << cv.folds[f].test_rows << " rows)\n";
      }
      std::cout << "mean accuracy " << cv.mean_accuracy << "\n";
    }
  });

  // --- train-decider ---
  auto* train_decider_cmd =
      app.add_subcommand("train-decider", "Train the correction decision model");
  train_decider_cmd->add_option("--ocr", ocr_path, "OCR-side TSV")->required();
  train_decider_cmd->add_option("--truth", truth_path, "Ground-truth TSV")->required();
  add_model_dir(train_decider_cmd, common);
  add_pipeline_options(train_decider_cmd, common);
  add_train_options(train_decider_cmd, common);
  train_decider_cmd->callback([&]() {
    const AlignedCorpus corpus = load_aligned(ocr_path, truth_path);
    const NGramModel lm = load_lm_or_fail(common);
    const ConfusionMatrix matrix = ConfusionMatrix::load_file(common.models.matrix());
    const LogisticModel ranker = LogisticModel::load_file(common.models.ranker());
    std::int64_t positives = 0;
    const TrainingSet data =
        build_decider_training_set(corpus, matrix, lm, ranker, common.config, &positives);
    TrainStats stats;
    const LogisticModel model = train_logistic(data, common.config.decider_train, &stats);
    model.save(common.models.decider());
    std::cout << "trained decider on " << data.rows.size() << " correction pairs (" << positives
              << " positive); final loss " << stats.final_loss << "\n";
  });

  // --- train-all ---
  auto* train_all_cmd =
      app.add_subcommand("train-all", "Train channel, ranker and decider in one flow");
  train_all_cmd->add_option("--ocr", ocr_path, "OCR-side TSV")->required();
  train_all_cmd->add_option("--truth", truth_path, "Ground-truth TSV")->required();
  add_model_dir(train_all_cmd, common);
  add_pipeline_options(train_all_cmd, common);
  add_train_options(train_all_cmd, common);
  train_all_cmd->callback([&]() {
    const AlignedCorpus corpus = load_aligned(ocr_path, truth_path);
    const NGramModel lm = load_lm_or_fail(common);
    const TrainedModels trained = train_all(corpus, lm, common.config);
    trained.matrix.save(common.models.matrix());
    trained.ranker.save(common.models.ranker());
    trained.decider.save(common.models.decider());
    std::cout << "confusion matrix: " << trained.matrix.pair_count() << " segment pairs\n"
              << "ranker: " << trained.ranker_rows << " rows from " << trained.ranker_sites
              << " sites (skipped " << trained.ranker_sites_skipped << "); final loss "
              << trained.ranker_stats.final_loss << "\n"
              << "decider: " << trained.decider_rows << " pairs (" << trained.decider_positive
              << " positive); final loss " << trained.decider_stats.final_loss << "\n";
  });

  // --- correct ---
  auto* correct_cmd = app.add_subcommand("correct", "Correct OCR documents");
  std::string correct_input, correct_output, correct_log, dump_prefix;
  correct_cmd->add_option("--input", correct_input, "OCR TSV to correct")->required();
  correct_cmd->add_option("--output", correct_output, "Corrected text, one line per document")
      ->required();
  correct_cmd->add_option("--log", correct_log, "Change log TSV (default: <output>.changes.tsv)");
  correct_cmd->add_option("--dump-features", dump_prefix,
                          "Write <prefix>.ranker.tsv and <prefix>.decision.tsv feature dumps");
  add_model_dir(correct_cmd, common);
  add_pipeline_options(correct_cmd, common);
  correct_cmd->callback([&]() {
    const auto artifacts = load_artifacts(common);
    const auto docs = load_documents(correct_input);
    if (correct_log.empty()) correct_log = correct_output + ".changes.tsv";
    CorrectionTrace trace;
    CorrectionTrace* trace_ptr = dump_prefix.empty() ? nullptr : &trace;
    std::vector<std::vector<CorrectionDecision>> decisions;
    std::int64_t replacements = 0;
    for (const auto& doc : docs) {
      auto [corrected, decided] = correct_document(doc, artifacts.matrix, artifacts.lm,
                                                   artifacts.ranker, artifacts.decider,
                                                   common.config, trace_ptr);
      for (const auto& d : decided) replacements += d.replacement ? 1 : 0;
      decisions.push_back(std::move(decided));
    }
    write_corrected_files(docs, decisions, correct_output, correct_log);
    if (!dump_prefix.empty()) {
      write_ranker_dump(trace, dump_prefix + ".ranker.tsv");
      write_decision_dump(trace, dump_prefix + ".decision.tsv");
    }
    std::cout << "corrected " << docs.size() << " documents, " << replacements
              << " replacements\n";
  });

  // --- evaluate ---
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "Per-stage evaluation against ground truth");
  std::string eval_out_dir = ".";
  evaluate_cmd->add_option("--ocr", ocr_path, "OCR-side TSV")->required();
  evaluate_cmd->add_option("--truth", truth_path, "Ground-truth TSV")->required();
  evaluate_cmd->add_option("--out-dir", eval_out_dir,
                           "Where report.txt, report.tsv and recall_curve.tsv go")
      ->capture_default_str();
  add_model_dir(evaluate_cmd, common);
  add_pipeline_options(evaluate_cmd, common);
  evaluate_cmd->callback([&]() {
    const auto artifacts = load_artifacts(common);
    const AlignedCorpus corpus = load_aligned(ocr_path, truth_path);
    const EvalReport report = ceiling_analysis(corpus, artifacts.matrix, artifacts.lm,
                                               artifacts.ranker, artifacts.decider, common.config);
    fs::create_directories(eval_out_dir);
    {
      std::ofstream out((fs::path(eval_out_dir) / "report.txt").string(), std::ios::binary);
      write_report_text(report, out);
    }
    {
      std::ofstream out((fs::path(eval_out_dir) / "report.tsv").string(), std::ios::binary);
      write_report_kv(report, out);
    }
    {
      std::ofstream out((fs::path(eval_out_dir) / "recall_curve.tsv").string(), std::ios::binary);
      write_recall_curve(report, out);
    }
    write_report_text(report, std::cout);
  });

  // --- tune-threshold ---
  auto* tune_cmd = app.add_subcommand(
      "tune-threshold", "Sweep decision thresholds and report the FP/FN trade-off");
  std::string curve_out = "threshold_curve.tsv";
  double max_fp = 0.02;
  tune_cmd->add_option("--ocr", ocr_path, "Held-out OCR-side TSV")->required();
  tune_cmd->add_option("--truth", truth_path, "Held-out ground-truth TSV")->required();
  tune_cmd->add_option("--out", curve_out, "Trade-off curve TSV")->capture_default_str();
  tune_cmd->add_option("--max-fp", max_fp, "Target false-positive rejection rate")
      ->capture_default_str();
  add_model_dir(tune_cmd, common);
  add_pipeline_options(tune_cmd, common);
  tune_cmd->callback([&]() {
    const auto artifacts = load_artifacts(common);
    const AlignedCorpus corpus = load_aligned(ocr_path, truth_path);
    const auto observations = collect_decision_observations(
        corpus, artifacts.matrix, artifacts.lm, artifacts.ranker, artifacts.decider,
        common.config);
    const auto points = sweep_thresholds(observations);
    {
      std::ofstream out(curve_out, std::ios::binary);
      if (!out) throw DataError("cannot write " + curve_out);
      out << "threshold\tfp_rate\tfn_rate\trejected_correct\taccepted_correct\t"
             "rejected_fixable\taccepted_fixable\n";
      char buf[64];
      for (const auto& p : points) {
        std::snprintf(buf, sizeof(buf), "%.2f\t%.6f\t%.6f", p.threshold, p.fp_rate, p.fn_rate);
        out << buf << '\t' << p.rejected_correct << '\t' << p.accepted_correct << '\t'
            << p.rejected_fixable << '\t' << p.accepted_fixable << '\n';
      }
    }
    const double picked = pick_threshold(points, max_fp);
    std::cout << "suggested threshold: " << picked << " (fp <= " << max_fp << ")\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // bad usage is a configuration error
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
