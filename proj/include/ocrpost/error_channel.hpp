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

#ifndef OCRPOST_ERROR_CHANNEL_HPP
#define OCRPOST_ERROR_CHANNEL_HPP

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ocrpost/alignment.hpp"
#include "ocrpost/corpus.hpp"
#include "ocrpost/errors.hpp"
#include "ocrpost/unicode.hpp"

namespace ocrpost {

// The error kinds the channel can inject, mirroring the observed OCR error
// taxonomy: recognition errors at segment level plus spacing errors.
enum class ErrorKind { Substitution, Deletion, Insertion, MergeSplit, Pair22, Spacing };

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Substitution: return "substitution";
    case ErrorKind::Deletion: return "deletion";
    case ErrorKind::Insertion: return "insertion";
    case ErrorKind::MergeSplit: return "merge_split";
    case ErrorKind::Pair22: return "pair_2_2";
    case ErrorKind::Spacing: return "spacing";
  }
  return "?";
}

// How the channel corrupts: per-token error probability and the error-kind
// mix. multi_error_share corrupted tokens receive a second independent
// character edit, which puts them outside the correctable class.
struct ChannelSpec {
  double word_error_rate = 0.25;
  double mix_substitution = 0.50;
  double mix_deletion = 0.15;
  double mix_insertion = 0.15;
  double mix_merge_split = 0.10;
  double mix_pair = 0.00;
  double mix_spacing = 0.10;
  double multi_error_share = 0.0;
  // Simulated recognition confidence ranges.
  double clean_conf_min = 0.60, clean_conf_max = 1.00;
  double corrupt_conf_min = 0.15, corrupt_conf_max = 0.80;

  void validate() const {
    if (word_error_rate < 0.0 || word_error_rate > 1.0) {
      throw ConfigError("word_error_rate must be in [0,1]");
    }
    const double mix[] = {mix_substitution, mix_deletion,    mix_insertion,
                          mix_merge_split,  mix_pair,        mix_spacing};
    double sum = 0.0;
    for (double m : mix) {
      if (m < 0.0) throw ConfigError("error mix weights must be >= 0");
      sum += m;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("error mix must sum to 1");
    if (multi_error_share < 0.0 || multi_error_share > 1.0) {
      throw ConfigError("multi_error_share must be in [0,1]");
    }
  }
};

// The channel's corruption tables, truth segment -> OCR segment. The inverse
// entries are what confusion-matrix training should recover.
struct ChannelTable {
  using WeightedChar = std::pair<char32_t, double>;
  using WeightedPair = std::pair<std::u32string, double>;

  std::map<char32_t, std::vector<WeightedChar>> substitutions;  // c -> c'
  std::map<std::u32string, std::vector<WeightedChar>> merges;   // xy -> z
  std::map<char32_t, std::vector<WeightedPair>> splits;         // z -> xy
  std::map<std::u32string, std::vector<WeightedPair>> pairs;    // xy -> uv
  std::vector<WeightedChar> insertions;                         // hallucinated chars

  void save(std::ostream& out) const {
    const auto str = [](char32_t c) { return utf8_encode(c); };
    for (const auto& [source, targets] : substitutions)
      for (const auto& [target, w] : targets)
        out << "sub\t" << str(source) << '\t' << str(target) << '\t' << w << '\n';
    for (const auto& [source, targets] : merges)
      for (const auto& [target, w] : targets)
        out << "merge\t" << utf8_encode(source) << '\t' << str(target) << '\t' << w << '\n';
    for (const auto& [source, targets] : splits)
      for (const auto& [target, w] : targets)
        out << "split\t" << str(source) << '\t' << utf8_encode(target) << '\t' << w << '\n';
    for (const auto& [source, targets] : pairs)
      for (const auto& [target, w] : targets)
        out << "pair\t" << utf8_encode(source) << '\t' << utf8_encode(target) << '\t' << w << '\n';
    for (const auto& [target, w] : insertions)
      out << "ins\t\xE2\x88\x85\t" << str(target) << '\t' << w << '\n';
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    save(out);
  }

  static ChannelTable load(std::istream& in) {
    ChannelTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::vector<std::string> fields;
      std::size_t start = 0;
      while (true) {
        const auto tab = line.find('\t', start);
        fields.push_back(line.substr(start, tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
      }
      if (fields.size() != 4) {
        throw DataError("channel table line " + std::to_string(line_no) + ": malformed");
      }
      const std::u32string source = utf8_decode(fields[1]);
      const std::u32string target = utf8_decode(fields[2]);
      const double w = std::stod(fields[3]);
      if (fields[0] == "sub") {
        table.substitutions[source.at(0)].emplace_back(target.at(0), w);
      } else if (fields[0] == "merge") {
        table.merges[source].emplace_back(target.at(0), w);
      } else if (fields[0] == "split") {
        table.splits[source.at(0)].emplace_back(target, w);
      } else if (fields[0] == "pair") {
        table.pairs[source].emplace_back(target, w);
      } else if (fields[0] == "ins") {
        table.insertions.emplace_back(target.at(0), w);
      } else {
        throw DataError("channel table line " + std::to_string(line_no) + ": unknown kind '" +
                        fields[0] + "'");
      }
    }
    return table;
  }

  static ChannelTable load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return load(in);
  }
};

// One injected error. corruption/correction are the OCR-side and truth-side
// segments of character-level errors (empty for spacing); edit_count > 1
// marks a multi-error token.
struct CorruptionRecord {
  std::string doc_id;
  int ocr_position = 0;
  int truth_position = 0;
  ErrorKind kind = ErrorKind::Substitution;
  int edit_count = 1;
  std::string ocr_surface;    // space-joined when the site spans two OCR tokens
  std::string truth_surface;  // space-joined when the site spans two truth tokens
  std::string corruption;
  std::string correction;
};

struct SyntheticCorpus {
  AlignedCorpus corpus;
  std::vector<CorruptionRecord> records;
  std::int64_t tokens_seen = 0;     // Bernoulli trials
  std::int64_t tokens_corrupted = 0;
};

namespace detail {

// Zipf-like weights 1, 1/2, 1/3, ... over an ordered target list.
template <typename T>
void zipf_weights(std::vector<std::pair<T, double>>& targets) {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    targets[i].second = 1.0 / static_cast<double>(i + 1);
  }
}

template <typename T>
const T& weighted_pick(const std::vector<std::pair<T, double>>& options, std::mt19937_64& rng) {
  double total = 0.0;
  for (const auto& [value, w] : options) total += w;
  std::uniform_real_distribution<double> dist(0.0, total);
  double x = dist(rng);
  for (const auto& [value, w] : options) {
    x -= w;
    if (x <= 0.0) return value;
  }
  return options.back().first;
}

}  // namespace detail

// Samples a corruption table over the corpus alphabet. Substitution and
// insertion entries cover every character; merge/split/pair entries cover
// the most frequent adjacent character pairs, so drawn error kinds are
// almost always applicable. Per-source target weights fall off Zipf-like.
inline ChannelTable make_random_table(const std::vector<Document>& corpus, std::uint64_t seed,
                                      int sub_targets_per_char = 3, int max_pair_sources = 80) {
  std::map<char32_t, std::int64_t> char_freq;
  std::map<std::u32string, std::int64_t> pair_freq;
  for (const auto& doc : corpus) {
    for (const auto& t : doc.tokens) {
      const std::u32string w = utf8_decode(t.surface);
      for (std::size_t i = 0; i < w.size(); ++i) {
        ++char_freq[w[i]];
        if (i + 1 < w.size()) ++pair_freq[w.substr(i, 2)];
      }
    }
  }
  if (char_freq.size() < 4) throw DataError("corpus alphabet too small for a channel table");

  std::vector<char32_t> alphabet;
  alphabet.reserve(char_freq.size());
  for (const auto& [c, f] : char_freq) alphabet.push_back(c);
  std::vector<char32_t> by_freq = alphabet;
  std::stable_sort(by_freq.begin(), by_freq.end(),
                   [&](char32_t a, char32_t b) { return char_freq[a] > char_freq[b]; });
  std::vector<std::u32string> pairs_by_freq;
  for (const auto& [p, f] : pair_freq) pairs_by_freq.push_back(p);
  std::stable_sort(pairs_by_freq.begin(), pairs_by_freq.end(),
                   [&](const auto& a, const auto& b) { return pair_freq[a] > pair_freq[b]; });
  if (static_cast<int>(pairs_by_freq.size()) > max_pair_sources) {
    pairs_by_freq.resize(max_pair_sources);
  }

  std::mt19937_64 rng(seed);
  ChannelTable table;

  auto pick_char_except = [&](std::initializer_list<char32_t> excluded) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      const char32_t c = by_freq[std::uniform_int_distribution<std::size_t>(
          0, std::min<std::size_t>(by_freq.size(), 20) - 1)(rng)];
      if (std::find(excluded.begin(), excluded.end(), c) == excluded.end()) return c;
    }
    throw DataError("cannot sample a distinct character");
  };

  for (char32_t c : alphabet) {
    std::vector<ChannelTable::WeightedChar> targets;
    while (static_cast<int>(targets.size()) < sub_targets_per_char) {
      const char32_t t = pick_char_except({c});
      if (std::none_of(targets.begin(), targets.end(),
                       [&](const auto& kv) { return kv.first == t; })) {
        targets.emplace_back(t, 0.0);
      }
      if (targets.size() >= std::min<std::size_t>(by_freq.size() - 1, 20)) break;
    }
    detail::zipf_weights(targets);
    table.substitutions[c] = std::move(targets);
  }

  for (char32_t c : alphabet) {
    const char32_t x = pick_char_except({c});
    const char32_t y = pick_char_except({c});
    table.splits[c] = {{std::u32string{x, y}, 1.0}};
  }

  for (const auto& p : pairs_by_freq) {
    table.merges[p] = {{pick_char_except({p[0], p[1]}), 1.0}};
    const char32_t u = pick_char_except({p[0]});
    const char32_t v = pick_char_except({p[1]});
    table.pairs[p] = {{std::u32string{u, v}, 1.0}};
  }

  std::vector<ChannelTable::WeightedChar> ins;
  for (std::size_t i = 0; i < std::min<std::size_t>(by_freq.size(), 20); ++i) {
    ins.emplace_back(by_freq[i], 0.0);
  }
  detail::zipf_weights(ins);
  table.insertions = std::move(ins);
  return table;
}

namespace detail {

struct AppliedEdit {
  bool ok = false;
  std::u32string result;
  std::u32string corruption;  // OCR-side segment
  std::u32string correction;  // truth-side segment
};

// Applies one character-level corruption of the given kind to `word`
// (truth -> OCR direction). Fails when the kind is not applicable.
inline AppliedEdit apply_char_edit(const std::u32string& word, ErrorKind kind,
                                   const ChannelTable& table, std::mt19937_64& rng) {
  AppliedEdit edit;
  const int n = static_cast<int>(word.size());
  auto uniform = [&](int lo, int hi) {  // inclusive
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  switch (kind) {
    case ErrorKind::Substitution: {
      if (n < 1) return edit;
      const int pos = uniform(0, n - 1);
      const auto it = table.substitutions.find(word[pos]);
      if (it == table.substitutions.end() || it->second.empty()) return edit;
      const char32_t target = weighted_pick(it->second, rng);
      edit.result = word;
      edit.result[pos] = target;
      edit.corruption = std::u32string{target};
      edit.correction = std::u32string{word[pos]};
      edit.ok = true;
      return edit;
    }
    case ErrorKind::Deletion: {  // the OCR output drops a character
      if (n < 2) return edit;
      const int pos = uniform(0, n - 1);
      edit.result = word.substr(0, pos) + word.substr(pos + 1);
      edit.corruption.clear();
      edit.correction = std::u32string{word[pos]};
      edit.ok = true;
      return edit;
    }
    case ErrorKind::Insertion: {  // the OCR output hallucinates a character
      if (table.insertions.empty()) return edit;
      const int pos = uniform(0, n);
      const char32_t c = weighted_pick(table.insertions, rng);
      edit.result = word.substr(0, pos) + std::u32string{c} + word.substr(pos);
      edit.corruption = std::u32string{c};
      edit.correction.clear();
      edit.ok = true;
      return edit;
    }
    case ErrorKind::MergeSplit: {
      // 2:1 (two truth chars -> one OCR char) or 1:2, whichever the draw and
      // the table allow at a random position.
      const bool try_merge_first = uniform(0, 1) == 0;
      for (int variant = 0; variant < 2; ++variant) {
        const bool merge = (variant == 0) == try_merge_first;
        if (merge && n >= 2) {
          std::vector<int> sites;
          for (int i = 0; i + 1 < n; ++i) {
            if (table.merges.count(word.substr(i, 2)) != 0) sites.push_back(i);
          }
          if (!sites.empty()) {
            const int pos = sites[static_cast<std::size_t>(uniform(0, static_cast<int>(sites.size()) - 1))];
            const std::u32string source = word.substr(pos, 2);
            const char32_t target = weighted_pick(table.merges.at(source), rng);
            edit.result = word.substr(0, pos) + std::u32string{target} + word.substr(pos + 2);
            edit.corruption = std::u32string{target};
            edit.correction = source;
            edit.ok = true;
            return edit;
          }
        } else if (!merge && n >= 1) {
          std::vector<int> sites;
          for (int i = 0; i < n; ++i) {
            if (table.splits.count(word[i]) != 0) sites.push_back(i);
          }
          if (!sites.empty()) {
            const int pos = sites[static_cast<std::size_t>(uniform(0, static_cast<int>(sites.size()) - 1))];
            const std::u32string target = weighted_pick(table.splits.at(word[pos]), rng);
            edit.result = word.substr(0, pos) + target + word.substr(pos + 1);
            edit.corruption = target;
            edit.correction = std::u32string{word[pos]};
            edit.ok = true;
            return edit;
          }
        }
      }
      return edit;
    }
    case ErrorKind::Pair22: {
      if (n < 2) return edit;
      std::vector<int> sites;
      for (int i = 0; i + 1 < n; ++i) {
        if (table.pairs.count(word.substr(i, 2)) != 0) sites.push_back(i);
      }
      if (sites.empty()) return edit;
      const int pos = sites[static_cast<std::size_t>(uniform(0, static_cast<int>(sites.size()) - 1))];
      const std::u32string source = word.substr(pos, 2);
      const std::u32string target = weighted_pick(table.pairs.at(source), rng);
      edit.result = word.substr(0, pos) + target + word.substr(pos + 2);
      edit.corruption = target;
      edit.correction = source;
      edit.ok = true;
      return edit;
    }
    case ErrorKind::Spacing:
      return edit;  // handled at token level
  }
  return edit;
}

}  // namespace detail

// Corrupts a clean corpus into an aligned (OCR, truth) corpus. Each token is
// independently corrupted with probability word_error_rate; a corrupted
// token receives one error drawn from the mix (redrawn, bounded, when the
// kind is not applicable). Spacing errors either join the token with its
// successor or split it at a uniform interior position. Deterministic for a
// given seed.
inline SyntheticCorpus corrupt(const std::vector<Document>& clean, const ChannelTable& table,
                               const ChannelSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SyntheticCorpus out;

  const std::vector<std::pair<ErrorKind, double>> mix = {
      {ErrorKind::Substitution, spec.mix_substitution}, {ErrorKind::Deletion, spec.mix_deletion},
      {ErrorKind::Insertion, spec.mix_insertion},       {ErrorKind::MergeSplit, spec.mix_merge_split},
      {ErrorKind::Pair22, spec.mix_pair},               {ErrorKind::Spacing, spec.mix_spacing},
  };

  auto confidence = [&](bool corrupted) {
    const double lo = corrupted ? spec.corrupt_conf_min : spec.clean_conf_min;
    const double hi = corrupted ? spec.corrupt_conf_max : spec.clean_conf_max;
    return lo + (hi - lo) * unit(rng);
  };

  for (const auto& doc : clean) {
    Document ocr_doc, truth_doc;
    ocr_doc.doc_id = doc.doc_id;
    truth_doc.doc_id = doc.doc_id;
    auto emit_truth = [&](const std::string& surface) {
      Token t;
      t.surface = surface;
      t.doc_id = doc.doc_id;
      t.position = static_cast<int>(truth_doc.tokens.size());
      truth_doc.tokens.push_back(std::move(t));
    };
    auto emit_ocr = [&](const std::string& surface, bool corrupted) {
      Token t;
      t.surface = surface;
      t.doc_id = doc.doc_id;
      t.position = static_cast<int>(ocr_doc.tokens.size());
      t.confidence = confidence(corrupted);
      ocr_doc.tokens.push_back(std::move(t));
    };

    const int n = static_cast<int>(doc.tokens.size());
    for (int i = 0; i < n; ++i) {
      const std::string& surface = doc.tokens[i].surface;
      ++out.tokens_seen;
      if (unit(rng) >= spec.word_error_rate) {
        emit_truth(surface);
        emit_ocr(surface, false);
        continue;
      }

      CorruptionRecord record;
      record.doc_id = doc.doc_id;
      bool applied = false;
      for (int attempt = 0; attempt < 16 && !applied; ++attempt) {
        const ErrorKind kind = detail::weighted_pick(mix, rng);
        if (kind == ErrorKind::Spacing) {
          const std::u32string word = utf8_decode(surface);
          const bool join_ok = i + 1 < n;
          const bool split_ok = word.size() >= 2;
          if (!join_ok && !split_ok) continue;
          bool join = join_ok && (!split_ok || std::uniform_int_distribution<int>(0, 1)(rng) == 0);
          record.kind = ErrorKind::Spacing;
          record.ocr_position = static_cast<int>(ocr_doc.tokens.size());
          record.truth_position = static_cast<int>(truth_doc.tokens.size());
          if (join) {
            const std::string& next_surface = doc.tokens[i + 1].surface;
            record.truth_surface = surface + " " + next_surface;
            record.ocr_surface = surface + next_surface;
            emit_truth(surface);
            emit_truth(next_surface);
            emit_ocr(record.ocr_surface, true);
            ++i;  // the successor is consumed by the join
          } else {
            const int cut = std::uniform_int_distribution<int>(
                1, static_cast<int>(word.size()) - 1)(rng);
            const std::string left = utf8_encode(word.substr(0, static_cast<std::size_t>(cut)));
            const std::string right = utf8_encode(word.substr(static_cast<std::size_t>(cut)));
            record.truth_surface = surface;
            record.ocr_surface = left + " " + right;
            emit_truth(surface);
            emit_ocr(left, true);
            emit_ocr(right, true);
          }
          applied = true;
          break;
        }

        detail::AppliedEdit edit =
            detail::apply_char_edit(utf8_decode(surface), kind, table, rng);
        if (!edit.ok) continue;
        record.kind = kind;
        record.corruption = utf8_encode(edit.corruption);
        record.correction = utf8_encode(edit.correction);
        std::u32string corrupted = edit.result;
        if (spec.multi_error_share > 0.0 && unit(rng) < spec.multi_error_share) {
          // A second character edit, retried until the net transformation
          // actually leaves the single-edit class (adjacent or overlapping
          // edits can compose back into one primitive edit).
          const std::u32string truth_word = utf8_decode(surface);
          for (int extra = 0; extra < 16; ++extra) {
            const ErrorKind second = detail::weighted_pick(mix, rng);
            if (second == ErrorKind::Spacing) continue;
            detail::AppliedEdit more = detail::apply_char_edit(corrupted, second, table, rng);
            if (!more.ok) continue;
            const Alignment net = align_words(more.result, truth_word);
            if (net.cost <= 1) continue;
            corrupted = more.result;
            record.edit_count = 2;
            break;
          }
        }
        record.ocr_position = static_cast<int>(ocr_doc.tokens.size());
        record.truth_position = static_cast<int>(truth_doc.tokens.size());
        record.truth_surface = surface;
        record.ocr_surface = utf8_encode(corrupted);
        emit_truth(surface);
        emit_ocr(record.ocr_surface, true);
        applied = true;
      }

      if (!applied) {
        emit_truth(surface);
        emit_ocr(surface, false);
        continue;
      }
      ++out.tokens_corrupted;
      out.records.push_back(std::move(record));
    }
    out.corpus.pairs.emplace_back(std::move(ocr_doc), std::move(truth_doc));
  }
  return out;
}

inline void write_corruption_records(const std::vector<CorruptionRecord>& records,
                                     std::ostream& out) {
  const auto seg = [](const std::string& s) {  // U+2205 sentinel for empty segments
    return s.empty() ? std::string("\xE2\x88\x85") : s;
  };
  out << "#doc_id\tocr_pos\ttruth_pos\tkind\tedit_count\tocr\ttruth\tcorruption\tcorrection\n";
  for (const auto& r : records) {
    out << r.doc_id << '\t' << r.ocr_position << '\t' << r.truth_position << '\t'
        << to_string(r.kind) << '\t' << r.edit_count << '\t' << r.ocr_surface << '\t'
        << r.truth_surface << '\t' << seg(r.corruption) << '\t' << seg(r.correction) << '\n';
  }
}

}  // namespace ocrpost

#endif  // OCRPOST_ERROR_CHANNEL_HPP
