#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mrc/brat.hpp"
#include "mrc/question.hpp"
#include "mrc/tokenizer.hpp"

namespace mrc {

/// Inclusive token-index pair (start_tok, end_tok) into the context tokens.
using TokenSpan = std::pair<int, int>;

/// One (question, context, answer) unit. Built from a document and rendered
/// question; input_ids/segment_ids stay empty until encode_instance runs it
/// against a vocabulary.
struct MrcInstance {
  std::string doc_id;
  CharSpan sentence_span;
  std::string context_text;
  RenderedQuestion question;
  std::vector<Token> context_tokens;
  std::vector<TokenSpan> answer_spans;

  std::vector<int> input_ids;
  std::vector<int> segment_ids;
  int context_row_begin = 0;  // index of the first context token row
  int context_rows = 0;       // context tokens kept after truncation

  bool encoded() const { return !input_ids.empty(); }
};

/// Binary start/end vectors over n context tokens plus the positive pair set.
struct GoldSpanLabels {
  std::vector<int> y_start;
  std::vector<int> y_end;
  std::vector<TokenSpan> y_match;
};

struct BuildStats {
  size_t unalignable_mentions = 0;
  size_t cross_sentence_relations = 0;
  size_t triggers_without_relations = 0;
  size_t truncated_instances = 0;
  size_t lost_answers = 0;
};

/// First/last token overlapping the mention envelope, or nullopt when the
/// mention lies outside the tokenized sentence.
std::optional<TokenSpan> align_char_spans_to_tokens(const ConceptMention& mention,
                                                    const Sentence& sentence,
                                                    const std::vector<Token>& tokens);

/// One instance per (sentence x concept category); answers are that
/// category's gold mentions in the sentence.
std::vector<MrcInstance> build_concept_instances(const Document& doc, const Schema& schema,
                                                 Strategy strategy, BuildStats* stats = nullptr);

/// One instance per (trigger x compatible relation type), context = the
/// trigger's sentence. Gold answers are filled when the trigger matches a
/// gold mention of the document; predicted triggers get empty answers.
std::vector<MrcInstance> build_relation_instances(const Document& doc,
                                                  const std::vector<ConceptMention>& triggers,
                                                  const Schema& schema, Strategy strategy,
                                                  BuildStats* stats = nullptr);

/// Derive start/end/match labels over the first n context tokens; answers
/// reaching past n are dropped.
GoldSpanLabels make_gold_labels(const MrcInstance& inst, size_t n);

/// Fill input_ids/segment_ids as [CLS] question [SEP] context [SEP] with the
/// question part never truncated and the context right-truncated to fit
/// max_seq_len. Returns the number of gold answers lost to truncation.
size_t encode_instance(MrcInstance& inst, const Vocabulary& vocab, size_t max_seq_len,
                       BuildStats* stats = nullptr);

/// Corpus-ordered vocabulary over question and context tokens.
Vocabulary build_vocabulary(const std::vector<MrcInstance>& instances);

/// True when some token is claimed by two or more gold mentions, i.e. the
/// document's gold labeling has no one-tag-per-token BIO encoding.
bool detect_bio_conflict(const Document& doc);

void write_instances_jsonl(const std::vector<MrcInstance>& instances, std::ostream& out);
void write_instances_jsonl(const std::vector<MrcInstance>& instances, const std::string& path);
std::vector<MrcInstance> read_instances_jsonl(std::istream& in);
std::vector<MrcInstance> read_instances_jsonl_file(const std::string& path);

}  // namespace mrc
