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

#ifndef OCRPOST_LANGUAGE_MODEL_HPP
#define OCRPOST_LANGUAGE_MODEL_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ocrpost/corpus.hpp"
#include "ocrpost/errors.hpp"

namespace ocrpost {

// Unigram/bigram document-frequency tables. Frequencies count documents
// containing the term, not occurrences. The corpus-based dictionary is the
// unigram table itself: is_word(w) <=> unigram_freq(w) > 0.
class NGramModel {
 public:
  std::int64_t doc_count = 0;
  std::int64_t unigram_cutoff = 1;
  std::int64_t bigram_cutoff = 2;

  bool is_word(const std::string& w) const { return unigram_freq(w) > 0; }

  std::int64_t unigram_freq(const std::string& w) const {
    const auto it = unigram_.find(w);
    return it == unigram_.end() ? 0 : it->second;
  }

  std::int64_t bigram_freq(const std::string& w1, const std::string& w2) const {
    const auto it = bigram_.find(bigram_key(w1, w2));
    return it == bigram_.end() ? 0 : it->second;
  }

  std::size_t unigram_count() const { return unigram_.size(); }
  std::size_t bigram_count() const { return bigram_.size(); }

  void save(const std::string& dir) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    save_table(unigram_, (fs::path(dir) / "unigrams.tsv").string(), unigram_cutoff);
    save_table(bigram_, (fs::path(dir) / "bigrams.tsv").string(), bigram_cutoff);
  }

  // doc_count is stored in both headers; the loader keeps the unigram one
  // and cross-checks the bigram file.
  static NGramModel load(const std::string& dir) {
    namespace fs = std::filesystem;
    NGramModel model;
    model.load_table((fs::path(dir) / "unigrams.tsv").string(), &model.unigram_,
                     &model.unigram_cutoff);
    model.doc_count = model.loaded_doc_count_;
    model.load_table((fs::path(dir) / "bigrams.tsv").string(), &model.bigram_,
                     &model.bigram_cutoff);
    if (model.loaded_doc_count_ != model.doc_count) {
      throw DataError("language model files disagree on doc_count");
    }
    return model;
  }

  friend NGramModel train_lm(const std::vector<Document>& corpus, std::int64_t bigram_cutoff,
                             std::int64_t unigram_cutoff);

 private:
  static std::string bigram_key(const std::string& w1, const std::string& w2) {
    std::string key;
    key.reserve(w1.size() + w2.size() + 1);
    key += w1;
    key.push_back('\t');
    key += w2;
    return key;
  }

  void save_table(const std::unordered_map<std::string, std::int64_t>& table,
                  const std::string& path, std::int64_t cutoff) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << "#doc_count\t" << doc_count << "\tcutoff\t" << cutoff << '\n';
    std::vector<const std::pair<const std::string, std::int64_t>*> rows;
    rows.reserve(table.size());
    for (const auto& kv : table) rows.push_back(&kv);
    std::sort(rows.begin(), rows.end(),
              [](const auto* a, const auto* b) { return a->first < b->first; });
    for (const auto* kv : rows) out << kv->first << '\t' << kv->second << '\n';
  }

  void load_table(const std::string& path, std::unordered_map<std::string, std::int64_t>* table,
                  std::int64_t* cutoff) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": missing header");
    {
      const auto fields = split(line);
      if (fields.size() != 4 || fields[0] != "#doc_count" || fields[2] != "cutoff") {
        throw DataError(path + ": malformed header");
      }
      loaded_doc_count_ = std::stoll(fields[1]);
      *cutoff = std::stoll(fields[3]);
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto tab = line.rfind('\t');
      if (tab == std::string::npos) {
        throw DataError(path + " line " + std::to_string(line_no) + ": malformed");
      }
      const std::int64_t freq = std::stoll(line.substr(tab + 1));
      if (freq <= 0) {
        throw DataError(path + " line " + std::to_string(line_no) + ": non-positive frequency");
      }
      (*table)[line.substr(0, tab)] = freq;
    }
  }

  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      if (tab == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    return fields;
  }

  std::unordered_map<std::string, std::int64_t> unigram_;
  std::unordered_map<std::string, std::int64_t> bigram_;  // key: w1 '\t' w2
  std::int64_t loaded_doc_count_ = 0;
};

// Builds the frequency lists. Each word and each adjacent word pair counts
// at most once per document; bigrams below the cutoff are dropped at the
// end of training, unigrams likewise when a unigram cutoff > 1 is set.
inline NGramModel train_lm(const std::vector<Document>& corpus, std::int64_t bigram_cutoff = 2,
                           std::int64_t unigram_cutoff = 1) {
  if (bigram_cutoff < 0 || unigram_cutoff < 0) throw ConfigError("cutoff must be >= 0");
  NGramModel model;
  model.bigram_cutoff = bigram_cutoff;
  model.unigram_cutoff = unigram_cutoff;
  std::int64_t docs_with_tokens = 0;
  for (const auto& doc : corpus) {
    if (doc.tokens.empty()) continue;
    ++docs_with_tokens;
    std::unordered_set<std::string> words;
    std::unordered_set<std::string> bigrams;
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
      words.insert(doc.tokens[i].surface);
      if (i + 1 < doc.tokens.size()) {
        bigrams.insert(NGramModel::bigram_key(doc.tokens[i].surface, doc.tokens[i + 1].surface));
      }
    }
    for (const auto& w : words) ++model.unigram_[w];
    for (const auto& b : bigrams) ++model.bigram_[b];
  }
  if (docs_with_tokens == 0) throw DataError("empty corpus");
  model.doc_count = docs_with_tokens;
  std::erase_if(model.bigram_, [&](const auto& kv) { return kv.second < bigram_cutoff; });
  if (unigram_cutoff > 1) {
    std::erase_if(model.unigram_, [&](const auto& kv) { return kv.second < unigram_cutoff; });
  }
  return model;
}

}  // namespace ocrpost

#endif  // OCRPOST_LANGUAGE_MODEL_HPP
