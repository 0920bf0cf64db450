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

#ifndef OCRPOST_ALIGNMENT_HPP
#define OCRPOST_ALIGNMENT_HPP

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ocrpost/corpus.hpp"
#include "ocrpost/errors.hpp"
#include "ocrpost/unicode.hpp"

namespace ocrpost {

// Character-level edit operations of the extended (primitive) edit distance:
// the classic three plus merge (2:1), split (1:2) and pair (2:2), each at
// unit cost. Merge/split require the lone character to differ from both
// characters on the other side, and pair requires both positions to differ;
// the degenerate forms are already expressible as match+delete, match+insert
// or a single substitution, and excluding them keeps the extracted correction
// instances canonical (a plain substitution never comes back as a 2:2 pair).
enum class EditOpKind { Match, Substitute, Delete, Insert, Merge, Split, Pair };

inline const char* to_string(EditOpKind k) {
  switch (k) {
    case EditOpKind::Match: return "match";
    case EditOpKind::Substitute: return "substitute";
    case EditOpKind::Delete: return "delete";
    case EditOpKind::Insert: return "insert";
    case EditOpKind::Merge: return "merge";
    case EditOpKind::Split: return "split";
    case EditOpKind::Pair: return "pair";
  }
  return "?";
}

// source = OCR-side segment, target = truth-side segment.
struct EditOp {
  EditOpKind kind = EditOpKind::Match;
  std::u32string source;
  std::u32string target;

  bool operator==(const EditOp&) const = default;
};

struct Alignment {
  std::vector<EditOp> ops;
  int cost = 0;  // number of non-match ops, minimal over all alignments
};

// One corruption -> correction observation: the OCR-side segment and the
// truth-side segment it should become. Segment lengths are 0..2, never both
// empty, never equal.
struct EditInstance {
  std::u32string corruption;
  std::u32string correction;
  std::int64_t count = 1;

  bool operator==(const EditInstance& o) const {
    return corruption == o.corruption && correction == o.correction;
  }
  bool operator<(const EditInstance& o) const {
    return corruption != o.corruption ? corruption < o.corruption : correction < o.correction;
  }
};

namespace detail {

constexpr int kInfCost = std::numeric_limits<int>::max() / 4;

struct CellValue {
  int cost = kInfCost;
  int ops = kInfCost;
};

inline bool better(const CellValue& a, const CellValue& b) {
  return a.cost != b.cost ? a.cost < b.cost : a.ops < b.ops;
}

}  // namespace detail

// Minimal-cost alignment of an OCR word against its ground truth under the
// extended operation set. Ties are resolved deterministically: fewest ops
// first, then edits as late in the word as possible, then the fixed kind
// order match < substitute < delete < insert < merge < split < pair.
inline Alignment align_words(const std::u32string& ocr, const std::u32string& truth) {
  const int n = static_cast<int>(ocr.size());
  const int m = static_cast<int>(truth.size());
  const int width = m + 1;
  // Suffix values: best (cost, op count) aligning ocr[i:] vs truth[j:].
  std::vector<detail::CellValue> value(static_cast<std::size_t>(n + 1) * (m + 1));
  auto at = [&](int i, int j) -> detail::CellValue& {
    return value[static_cast<std::size_t>(i) * width + j];
  };
  at(n, m) = {0, 0};

  struct Move {
    EditOpKind kind;
    int di, dj;
    int cost;
  };
  // Enumerated in tie-break kind order.
  auto moves_from = [&](int i, int j, Move out[7]) -> int {
    int k = 0;
    if (i < n && j < m && ocr[i] == truth[j]) out[k++] = {EditOpKind::Match, 1, 1, 0};
    if (i < n && j < m && ocr[i] != truth[j]) out[k++] = {EditOpKind::Substitute, 1, 1, 1};
    if (i < n) out[k++] = {EditOpKind::Delete, 1, 0, 1};
    if (j < m) out[k++] = {EditOpKind::Insert, 0, 1, 1};
    if (i + 2 <= n && j < m && truth[j] != ocr[i] && truth[j] != ocr[i + 1])
      out[k++] = {EditOpKind::Merge, 2, 1, 1};
    if (i < n && j + 2 <= m && ocr[i] != truth[j] && ocr[i] != truth[j + 1])
      out[k++] = {EditOpKind::Split, 1, 2, 1};
    if (i + 2 <= n && j + 2 <= m && ocr[i] != truth[j] && ocr[i + 1] != truth[j + 1])
      out[k++] = {EditOpKind::Pair, 2, 2, 1};
    return k;
  };

  Move moves[7];
  for (int i = n; i >= 0; --i) {
    for (int j = m; j >= 0; --j) {
      if (i == n && j == m) continue;
      detail::CellValue best;
      const int count = moves_from(i, j, moves);
      for (int k = 0; k < count; ++k) {
        const auto& mv = moves[k];
        const auto& next = at(i + mv.di, j + mv.dj);
        if (next.cost >= detail::kInfCost) continue;
        const detail::CellValue cand{next.cost + mv.cost, next.ops + 1};
        if (detail::better(cand, best)) best = cand;
      }
      at(i, j) = best;
    }
  }

  Alignment result;
  result.cost = at(0, 0).cost;
  int i = 0, j = 0;
  while (i < n || j < m) {
    const detail::CellValue here = at(i, j);
    const int count = moves_from(i, j, moves);
    for (int k = 0; k < count; ++k) {
      const auto& mv = moves[k];
      const auto& next = at(i + mv.di, j + mv.dj);
      if (next.cost >= detail::kInfCost) continue;
      if (next.cost + mv.cost == here.cost && next.ops + 1 == here.ops) {
        EditOp op;
        op.kind = mv.kind;
        op.source = ocr.substr(i, mv.di);
        op.target = truth.substr(j, mv.dj);
        result.ops.push_back(std::move(op));
        i += mv.di;
        j += mv.dj;
        break;
      }
    }
  }
  return result;
}

inline Alignment align_words(std::string_view ocr, std::string_view truth) {
  return align_words(utf8_decode(ocr), utf8_decode(truth));
}

// Cost-only variant with a cap: values >= cap are all reported as cap.
// Used in bulk by document pairing, where only small costs matter.
inline int align_cost_capped(const std::u32string& ocr, const std::u32string& truth, int cap) {
  const int n = static_cast<int>(ocr.size());
  const int m = static_cast<int>(truth.size());
  if (std::abs(n - m) >= cap) return cap;
  const int width = m + 1;
  std::vector<int> value(static_cast<std::size_t>(n + 1) * (m + 1), detail::kInfCost);
  auto at = [&](int i, int j) -> int& {
    return value[static_cast<std::size_t>(i) * width + j];
  };
  at(n, m) = 0;
  for (int i = n; i >= 0; --i) {
    for (int j = m; j >= 0; --j) {
      if (i == n && j == m) continue;
      int best = detail::kInfCost;
      if (i < n && j < m) {
        const int step = ocr[i] == truth[j] ? 0 : 1;
        best = std::min(best, at(i + 1, j + 1) + step);
      }
      if (i < n) best = std::min(best, at(i + 1, j) + 1);
      if (j < m) best = std::min(best, at(i, j + 1) + 1);
      if (i + 2 <= n && j < m && truth[j] != ocr[i] && truth[j] != ocr[i + 1])
        best = std::min(best, at(i + 2, j + 1) + 1);
      if (i < n && j + 2 <= m && ocr[i] != truth[j] && ocr[i] != truth[j + 1])
        best = std::min(best, at(i + 1, j + 2) + 1);
      if (i + 2 <= n && j + 2 <= m && ocr[i] != truth[j] && ocr[i + 1] != truth[j + 1])
        best = std::min(best, at(i + 2, j + 2) + 1);
      at(i, j) = std::min(best, cap);
    }
  }
  return at(0, 0);
}

// The trainable error class is exactly the cost-1 alignments: one extended
// primitive edit, where a single 2:2 pair op covers the consecutive
// double-edit case. Anything else yields no instances.
inline std::vector<EditInstance> extract_edit_instances(const Alignment& alignment) {
  std::vector<EditInstance> out;
  if (alignment.cost != 1) return out;
  for (const auto& op : alignment.ops) {
    if (op.kind == EditOpKind::Match) continue;
    out.push_back(EditInstance{op.source, op.target, 1});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Token-level document pairing.

enum class LinkKind { OneToOne, TwoToOne, OneToTwo, OcrOnly, TruthOnly };

inline const char* to_string(LinkKind k) {
  switch (k) {
    case LinkKind::OneToOne: return "1:1";
    case LinkKind::TwoToOne: return "2:1";
    case LinkKind::OneToTwo: return "1:2";
    case LinkKind::OcrOnly: return "ocr_only";
    case LinkKind::TruthOnly: return "truth_only";
  }
  return "?";
}

struct TokenLink {
  LinkKind kind = LinkKind::OneToOne;
  int ocr_begin = 0;
  int ocr_count = 0;
  int truth_begin = 0;
  int truth_count = 0;
};

struct DocumentPairing {
  std::vector<TokenLink> links;
};

// Memo for word-vs-word alignment costs, shared across the documents of one
// corpus; words repeat heavily so the hit rate is high.
class WordCostCache {
 public:
  int cost(const std::u32string& a, const std::u32string& b, int cap) {
    if (a == b) return 0;
    std::string key = utf8_encode(a);
    key.push_back('\t');
    key += utf8_encode(b);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    const int c = align_cost_capped(a, b, cap);
    memo_.emplace(std::move(key), c);
    return c;
  }

 private:
  std::unordered_map<std::string, int> memo_;
};

// Monotone token-level alignment between an OCR document and its truth.
// Transitions: 1:1 word pair (char-level alignment cost), 2:1 and 1:2 word
// pairs against the concatenation (+1 for the whitespace edit, so spacing
// errors surface as dedicated links instead of misleading 1:1 pairs), and
// skips costing the skipped word's length.
inline DocumentPairing align_documents(const Document& ocr, const Document& truth,
                                       WordCostCache* cache = nullptr) {
  WordCostCache local;
  WordCostCache& costs = cache ? *cache : local;
  constexpr int kCap = 8;

  const int n = static_cast<int>(ocr.tokens.size());
  const int m = static_cast<int>(truth.tokens.size());
  std::vector<std::u32string> a(n), b(m);
  for (int i = 0; i < n; ++i) a[i] = utf8_decode(ocr.tokens[i].surface);
  for (int j = 0; j < m; ++j) b[j] = utf8_decode(truth.tokens[j].surface);

  const int width = m + 1;
  std::vector<int> value(static_cast<std::size_t>(n + 1) * (m + 1), detail::kInfCost);
  auto at = [&](int i, int j) -> int& {
    return value[static_cast<std::size_t>(i) * width + j];
  };
  at(n, m) = 0;

  struct Move {
    LinkKind kind;
    int di, dj;
  };
  static constexpr Move kMoves[] = {
      {LinkKind::OneToOne, 1, 1}, {LinkKind::TwoToOne, 2, 1}, {LinkKind::OneToTwo, 1, 2},
      {LinkKind::OcrOnly, 1, 0},  {LinkKind::TruthOnly, 0, 1},
  };

  auto move_cost = [&](const Move& mv, int i, int j) -> int {
    switch (mv.kind) {
      case LinkKind::OneToOne:
        return costs.cost(a[i], b[j], kCap);
      case LinkKind::TwoToOne:
        return costs.cost(a[i] + a[i + 1], b[j], kCap) + 1;
      case LinkKind::OneToTwo:
        return costs.cost(a[i], b[j] + b[j + 1], kCap) + 1;
      case LinkKind::OcrOnly:
        return static_cast<int>(a[i].size());
      case LinkKind::TruthOnly:
        return static_cast<int>(b[j].size());
    }
    return detail::kInfCost;
  };
  auto applicable = [&](const Move& mv, int i, int j) {
    return i + mv.di <= n && j + mv.dj <= m;
  };

  for (int i = n; i >= 0; --i) {
    for (int j = m; j >= 0; --j) {
      if (i == n && j == m) continue;
      int best = detail::kInfCost;
      for (const auto& mv : kMoves) {
        if (!applicable(mv, i, j)) continue;
        const int next = at(i + mv.di, j + mv.dj);
        if (next >= detail::kInfCost) continue;
        best = std::min(best, next + move_cost(mv, i, j));
      }
      at(i, j) = best;
    }
  }

  DocumentPairing pairing;
  int i = 0, j = 0;
  while (i < n || j < m) {
    for (const auto& mv : kMoves) {
      if (!applicable(mv, i, j)) continue;
      const int next = at(i + mv.di, j + mv.dj);
      if (next >= detail::kInfCost) continue;
      if (next + move_cost(mv, i, j) == at(i, j)) {
        pairing.links.push_back(TokenLink{mv.kind, i, mv.di, j, mv.dj});
        i += mv.di;
        j += mv.dj;
        break;
      }
    }
  }
  return pairing;
}

// The 1:1 pairs of the token alignment, as (OCR token, truth surface).
inline std::vector<std::pair<Token, std::string>> pair_documents(const Document& ocr,
                                                                 const Document& truth,
                                                                 WordCostCache* cache = nullptr) {
  std::vector<std::pair<Token, std::string>> pairs;
  for (const auto& link : align_documents(ocr, truth, cache).links) {
    if (link.kind != LinkKind::OneToOne) continue;
    pairs.emplace_back(ocr.tokens[link.ocr_begin], truth.tokens[link.truth_begin].surface);
  }
  return pairs;
}

}  // namespace ocrpost

#endif  // OCRPOST_ALIGNMENT_HPP
