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

#ifndef OCRPOST_CORPUS_HPP
#define OCRPOST_CORPUS_HPP

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ocrpost/unicode.hpp"

namespace ocrpost {

// One OCR word. `confidence` is the engine's word-level recognition
// confidence in [0,1]; absent when the source carries none.
struct Token {
  std::string surface;
  std::string doc_id;
  int position = 0;
  std::optional<double> confidence;
};

struct Document {
  std::string doc_id;
  std::vector<Token> tokens;
};

// Paired OCR output and ground-truth transcription, matched by doc_id.
struct AlignedCorpus {
  std::vector<std::pair<Document, Document>> pairs;  // (ocr, truth)
};

// What a correction candidate is made of. Original is reserved for the
// untouched OCR word at the decision stage; the generator never emits it.
enum class CandidateKind { SegmentEdit, SpaceInsert, SpaceDelete, Original };

inline const char* to_string(CandidateKind k) {
  switch (k) {
    case CandidateKind::SegmentEdit: return "segment_edit";
    case CandidateKind::SpaceInsert: return "space_insert";
    case CandidateKind::SpaceDelete: return "space_delete";
    case CandidateKind::Original: return "original";
  }
  return "?";
}

// Whitespace tokenization: split on maximal runs of whitespace scalars,
// never emitting empty tokens. Punctuation stays attached to its word.
inline Document tokenize(std::string_view text, std::string doc_id) {
  Document doc;
  doc.doc_id = std::move(doc_id);
  const std::u32string cps = utf8_decode(text);
  std::u32string current;
  auto flush = [&]() {
    if (current.empty()) return;
    Token t;
    t.surface = utf8_encode(current);
    t.doc_id = doc.doc_id;
    t.position = static_cast<int>(doc.tokens.size());
    doc.tokens.push_back(std::move(t));
    current.clear();
  };
  for (char32_t c : cps) {
    if (is_whitespace(c)) {
      flush();
    } else {
      current.push_back(c);
    }
  }
  flush();
  return doc;
}

}  // namespace ocrpost

#endif  // OCRPOST_CORPUS_HPP
