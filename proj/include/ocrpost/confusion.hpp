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

#ifndef OCRPOST_CONFUSION_HPP
#define OCRPOST_CONFUSION_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "ocrpost/alignment.hpp"
#include "ocrpost/corpus.hpp"
#include "ocrpost/errors.hpp"

namespace ocrpost {

// Weighted segment confusion matrix of the noisy channel: corruption segment
// -> set of (correction segment, occurrence count). Corruptions and
// corrections are 0..2 scalars long; a segment never maps to itself.
class ConfusionMatrix {
 public:
  using CorrectionMap = std::map<std::u32string, std::int64_t>;

  void add(const EditInstance& instance, std::int64_t weight = 1) {
    if (instance.corruption == instance.correction) {
      throw DataError("confusion entry maps a segment to itself");
    }
    if (instance.corruption.size() > 2 || instance.correction.size() > 2) {
      throw DataError("confusion segments are at most two characters");
    }
    if (instance.corruption.empty() && instance.correction.empty()) {
      throw DataError("confusion entry with two empty segments");
    }
    if (weight <= 0) throw DataError("confusion weight must be positive");
    entries_[instance.corruption][instance.correction] += weight;
  }

  const CorrectionMap& lookup(const std::u32string& corruption) const {
    static const CorrectionMap kEmpty;
    const auto it = entries_.find(corruption);
    return it == entries_.end() ? kEmpty : it->second;
  }

  std::int64_t weight(const std::u32string& corruption, const std::u32string& correction) const {
    const auto it = entries_.find(corruption);
    if (it == entries_.end()) return 0;
    const auto jt = it->second.find(correction);
    return jt == it->second.end() ? 0 : jt->second;
  }

  const std::map<std::u32string, CorrectionMap>& entries() const { return entries_; }

  std::int64_t total_weight() const {
    std::int64_t total = 0;
    for (const auto& [corruption, corrections] : entries_)
      for (const auto& [correction, w] : corrections) total += w;
    return total;
  }

  std::size_t pair_count() const {
    std::size_t count = 0;
    for (const auto& [corruption, corrections] : entries_) count += corrections.size();
    return count;
  }

  bool empty() const { return entries_.empty(); }

  // TSV `corruption TAB correction TAB weight`, sorted by (corruption,
  // correction); empty segments are encoded as the U+2205 sentinel.
  void save(std::ostream& out) const {
    for (const auto& [corruption, corrections] : entries_) {
      for (const auto& [correction, w] : corrections) {
        out << encode_segment(corruption) << '\t' << encode_segment(correction) << '\t' << w
            << '\n';
      }
    }
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    save(out);
  }

  static ConfusionMatrix load(std::istream& in) {
    ConfusionMatrix matrix;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto t1 = line.find('\t');
      const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
      if (t2 == std::string::npos) {
        throw DataError("confusion matrix line " + std::to_string(line_no) + ": malformed");
      }
      EditInstance instance;
      instance.corruption = decode_segment(line.substr(0, t1));
      instance.correction = decode_segment(line.substr(t1 + 1, t2 - t1 - 1));
      const std::int64_t w = std::stoll(line.substr(t2 + 1));
      matrix.add(instance, w);
    }
    return matrix;
  }

  static ConfusionMatrix load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return load(in);
  }

  static std::string encode_segment(const std::u32string& s) {
    return s.empty() ? "\xE2\x88\x85" : utf8_encode(s);  // U+2205 empty set
  }

  static std::u32string decode_segment(const std::string& s) {
    return s == "\xE2\x88\x85" ? std::u32string() : utf8_decode(s);
  }

 private:
  std::map<std::u32string, CorrectionMap> entries_;
};

// Learns the channel from an aligned corpus: every qualifying (cost-1) word
// pair contributes its correction instance. Spacing links are excluded; the
// paper's channel covers character segments only.
inline ConfusionMatrix train_confusion(const AlignedCorpus& corpus) {
  if (corpus.pairs.empty()) throw DataError("no training pairs");
  ConfusionMatrix matrix;
  WordCostCache cache;
  for (const auto& [ocr, truth] : corpus.pairs) {
    for (const auto& link : align_documents(ocr, truth, &cache).links) {
      if (link.kind != LinkKind::OneToOne) continue;
      const std::string& ocr_surface = ocr.tokens[link.ocr_begin].surface;
      const std::string& truth_surface = truth.tokens[link.truth_begin].surface;
      if (ocr_surface == truth_surface) continue;
      const Alignment alignment = align_words(ocr_surface, truth_surface);
      for (const auto& instance : extract_edit_instances(alignment)) {
        matrix.add(instance);
      }
    }
  }
  return matrix;
}

}  // namespace ocrpost

#endif  // OCRPOST_CONFUSION_HPP
