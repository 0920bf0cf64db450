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

#ifndef OCRPOST_CORPUS_IO_HPP
#define OCRPOST_CORPUS_IO_HPP

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ocrpost/corpus.hpp"
#include "ocrpost/errors.hpp"

namespace ocrpost {

// The outcome of the accept/reject stage for one OCR token. `replacement`
// absent means the original word was kept. For a space_delete (join) the
// original covers two tokens, written "left right".
struct CorrectionDecision {
  int position = 0;
  std::string original;
  std::optional<std::string> replacement;
  double ranker_score = 0.0;
  double decision_score = 0.0;
  CandidateKind kind = CandidateKind::Original;
};

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

inline double parse_confidence_value(std::string_view field, std::size_t line_no) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(std::string(field), &used);
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(line_no) + ": malformed confidence '" +
                    std::string(field) + "'");
  }
  if (used != field.size()) {
    throw DataError("line " + std::to_string(line_no) + ": malformed confidence '" +
                    std::string(field) + "'");
  }
  if (value < 0.0 || value > 1.0) {
    throw DataError("line " + std::to_string(line_no) + ": confidence out of range");
  }
  return value;
}

// Word-level confidence, or the minimum over a comma-separated per-character
// list (the engine-agnostic stand-in for character confidences minimized to
// word level).
inline double parse_confidence(std::string_view field, std::size_t line_no) {
  double min_value = 1.0;
  std::size_t start = 0;
  bool any = false;
  while (start <= field.size()) {
    std::size_t comma = field.find(',', start);
    if (comma == std::string_view::npos) comma = field.size();
    const std::string_view part = field.substr(start, comma - start);
    if (part.empty()) {
      throw DataError("line " + std::to_string(line_no) + ": malformed confidence");
    }
    const double v = parse_confidence_value(part, line_no);
    min_value = any ? std::min(min_value, v) : v;
    any = true;
    if (comma == field.size()) break;
    start = comma + 1;
  }
  return min_value;
}

inline void check_surface(std::string_view surface, std::size_t line_no) {
  if (surface.empty()) {
    throw DataError("line " + std::to_string(line_no) + ": empty token surface");
  }
  for (char32_t c : utf8_decode(surface)) {
    if (is_whitespace(c)) {
      throw DataError("line " + std::to_string(line_no) +
                      ": token surface contains whitespace");
    }
  }
}

inline std::string format_score(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace detail

// Token-per-line TSV: `surface [TAB confidence]`, blank line = document
// boundary. `allow_confidence=false` is the ground-truth variant.
inline std::vector<Document> parse_documents(std::istream& in, std::string_view id_prefix,
                                             bool allow_confidence = true) {
  std::vector<Document> docs;
  Document current;
  std::size_t line_no = 0;
  auto flush = [&]() {
    if (current.tokens.empty()) return;
    current.doc_id = std::string(id_prefix) + std::to_string(docs.size());
    for (auto& t : current.tokens) t.doc_id = current.doc_id;
    docs.push_back(std::move(current));
    current = Document{};
  };
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    const auto fields = detail::split_tabs(line);
    if (fields.size() > 2) {
      throw DataError("line " + std::to_string(line_no) + ": malformed record (" +
                      std::to_string(fields.size()) + " fields)");
    }
    detail::check_surface(fields[0], line_no);
    Token t;
    t.surface = std::string(fields[0]);
    t.position = static_cast<int>(current.tokens.size());
    if (fields.size() == 2) {
      if (!allow_confidence) {
        throw DataError("line " + std::to_string(line_no) +
                        ": ground truth must not carry confidence");
      }
      t.confidence = detail::parse_confidence(fields[1], line_no);
    }
    current.tokens.push_back(std::move(t));
  }
  flush();
  return docs;
}

inline std::vector<Document> load_documents(const std::string& path,
                                            bool allow_confidence = true) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  try {
    return parse_documents(in, "doc", allow_confidence);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

// Single-document form; errors out on multi-document files so callers that
// expect one page notice early.
inline Document load_ocr_document(const std::string& path) {
  auto docs = load_documents(path, true);
  if (docs.size() != 1) {
    throw DataError(path + ": expected exactly one document, found " +
                    std::to_string(docs.size()));
  }
  return std::move(docs.front());
}

// Pairs OCR and ground-truth files record-for-record by document index.
inline AlignedCorpus load_aligned(const std::string& ocr_path, const std::string& truth_path) {
  auto ocr = load_documents(ocr_path, true);
  auto truth = load_documents(truth_path, false);
  if (ocr.size() != truth.size()) {
    throw DataError("document count mismatch: " + ocr_path + " has " +
                    std::to_string(ocr.size()) + ", " + truth_path + " has " +
                    std::to_string(truth.size()));
  }
  AlignedCorpus corpus;
  corpus.pairs.reserve(ocr.size());
  for (std::size_t i = 0; i < ocr.size(); ++i) {
    corpus.pairs.emplace_back(std::move(ocr[i]), std::move(truth[i]));
  }
  return corpus;
}

inline void write_documents(const std::vector<Document>& docs, std::ostream& out) {
  bool first = true;
  for (const auto& doc : docs) {
    if (!first) out << '\n';
    first = false;
    for (const auto& t : doc.tokens) {
      out << t.surface;
      if (t.confidence) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", *t.confidence);
        out << '\t' << buf;
      }
      out << '\n';
    }
  }
}

inline void write_documents(const std::vector<Document>& docs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  write_documents(docs, out);
}

// Applies accepted replacements to a document. A space_insert replacement
// becomes two tokens; a space_delete consumes the following token.
inline Document apply_decisions(const Document& doc,
                                const std::vector<CorrectionDecision>& decisions) {
  std::vector<const CorrectionDecision*> by_pos(doc.tokens.size(), nullptr);
  for (const auto& d : decisions) {
    if (d.position < 0 || d.position >= static_cast<int>(doc.tokens.size())) {
      throw DataError("decision position " + std::to_string(d.position) +
                      " outside document " + doc.doc_id);
    }
    by_pos[static_cast<std::size_t>(d.position)] = &d;
  }
  Document out;
  out.doc_id = doc.doc_id;
  auto emit = [&](std::string surface, std::optional<double> confidence) {
    Token t;
    t.surface = std::move(surface);
    t.doc_id = out.doc_id;
    t.position = static_cast<int>(out.tokens.size());
    t.confidence = confidence;
    out.tokens.push_back(std::move(t));
  };
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    const CorrectionDecision* d = by_pos[i];
    if (d == nullptr || !d->replacement) {
      emit(doc.tokens[i].surface, doc.tokens[i].confidence);
      continue;
    }
    const std::string& repl = *d->replacement;
    const std::size_t space = repl.find(' ');
    if (space != std::string::npos) {
      emit(repl.substr(0, space), std::nullopt);
      emit(repl.substr(space + 1), std::nullopt);
    } else {
      emit(repl, std::nullopt);
    }
    if (d->kind == CandidateKind::SpaceDelete) ++i;  // join consumed the next token
  }
  return out;
}

// Corrected text: one line per document, single-space joined. The change log
// records only actual replacements: position, original, replacement,
// ranker_score, decision_score.
inline void write_corrected(const Document& doc,
                            const std::vector<CorrectionDecision>& decisions,
                            std::ostream& text_out, std::ostream& log_out) {
  const Document corrected = apply_decisions(doc, decisions);
  for (std::size_t i = 0; i < corrected.tokens.size(); ++i) {
    if (i > 0) text_out << ' ';
    text_out << corrected.tokens[i].surface;
  }
  text_out << '\n';
  for (const auto& d : decisions) {
    if (!d.replacement) continue;
    log_out << d.position << '\t' << d.original << '\t' << *d.replacement << '\t'
            << detail::format_score(d.ranker_score) << '\t'
            << detail::format_score(d.decision_score) << '\n';
  }
}

// Multi-document variant; documents separated by `#doc <id>` lines in the log.
inline void write_corrected_files(const std::vector<Document>& docs,
                                  const std::vector<std::vector<CorrectionDecision>>& decisions,
                                  const std::string& text_path, const std::string& log_path) {
  if (docs.size() != decisions.size()) {
    throw ConfigError("decision list count does not match document count");
  }
  std::ofstream text_out(text_path, std::ios::binary);
  if (!text_out) throw DataError("cannot write " + text_path);
  std::ofstream log_out(log_path, std::ios::binary);
  if (!log_out) throw DataError("cannot write " + log_path);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    log_out << "#doc " << docs[i].doc_id << '\n';
    write_corrected(docs[i], decisions[i], text_out, log_out);
  }
}

}  // namespace ocrpost

#endif  // OCRPOST_CORPUS_IO_HPP
