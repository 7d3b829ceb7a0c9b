#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mrc/schema.hpp"

namespace mrc {

/// Half-open character interval [start, end) into a document.
struct CharSpan {
  size_t start = 0;
  size_t end = 0;

  size_t length() const { return end - start; }
  bool contains(const CharSpan& o) const { return start <= o.start && o.end <= end; }
  bool overlaps(const CharSpan& o) const { return start < o.end && o.start < end; }
  size_t overlap_length(const CharSpan& o) const {
    size_t lo = start > o.start ? start : o.start;
    size_t hi = end < o.end ? end : o.end;
    return hi > lo ? hi - lo : 0;
  }
  bool operator==(const CharSpan& o) const = default;
  auto operator<=>(const CharSpan& o) const = default;
};

/// One annotated concept: a category plus one or more non-overlapping,
/// ordered character fragments. Multi-fragment (discontinuous) mentions are
/// kept faithfully; downstream alignment and scoring use the envelope.
struct ConceptMention {
  std::string id;
  std::string category;
  std::vector<CharSpan> fragments;
  std::string text;

  CharSpan envelope() const {
    if (fragments.empty()) return {};
    return {fragments.front().start, fragments.back().end};
  }
};

struct RelationAnnotation {
  std::string id;
  std::string relation_type;
  std::string arg1;  // trigger-side mention id
  std::string arg2;  // attribute-side mention id
};

struct Document {
  std::string doc_id;
  std::string text;
  std::vector<ConceptMention> concepts;
  std::vector<RelationAnnotation> relations;

  const ConceptMention* find_concept(const std::string& id) const;
};

struct Sentence {
  std::string doc_id;
  CharSpan span;
  std::string text;
};

struct ParseStats {
  size_t ignored_lines = 0;   // A-, E-, N-, #- and other non-T/R lines
  size_t missing_ann = 0;     // corpus documents without an .ann file
};

/// Parse one .txt/.ann pair. Mentions and relations are validated against the
/// schema; any malformed line raises ParseError naming the line number.
Document parse_brat_document(std::string_view txt_content, std::string_view ann_content,
                             const Schema& schema, const std::string& doc_id = "doc",
                             ParseStats* stats = nullptr);

/// Emit the annotation file for a document. Ids are reassigned sequentially;
/// parse(serialize(d)) reproduces d up to id renaming.
std::string serialize_brat(const Document& doc);

/// Deterministic sentence splitter: boundaries at newlines and at . ? !
/// followed by whitespace and an uppercase letter or digit. Sentences whose
/// computed boundary would cut a gold mention are extended (merged) so every
/// mention lies inside exactly one sentence.
std::vector<Sentence> split_sentences(const Document& doc);

/// Structural equality up to annotation-id renaming.
bool documents_equivalent(const Document& a, const Document& b);

/// Load every .txt (with optional sibling .ann) under dir, sorted by name.
std::vector<Document> load_brat_corpus(const std::string& dir, const Schema& schema,
                                       ParseStats* stats = nullptr);

/// Write doc.text to <dir>/<doc_id>.txt and serialize_brat to <doc_id>.ann.
void write_brat_document(const Document& doc, const std::string& dir);

}  // namespace mrc
