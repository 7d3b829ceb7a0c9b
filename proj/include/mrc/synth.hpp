#pragma once

#include <string>
#include <vector>

#include "mrc/brat.hpp"
#include "mrc/schema.hpp"

namespace mrc {

struct SynthSpec {
  int num_documents = 50;
  int min_sentences = 2;
  int max_sentences = 5;
  double nesting_rate = 0.3;     // fraction of sentences using the nested overlap pattern
  double relation_density = 0.7; // chance a drug+attribute sentence links them
  uint64_t seed = 0;
  bool shifted_lexicon = false;  // institution-shift variant: different filler vocabulary

  void validate() const;
};

struct SynthCorpus {
  std::vector<Document> docs;
  Schema schema;
};

/// Three concept categories (Drug as trigger, Effect, Duration) and two
/// relation types (Effect-Drug, Duration-Drug).
Schema synth_schema();

/// Deterministic corpus: same spec, same bytes. Nested sentences carry an
/// outer Duration mention containing a Drug and an Effect mention, which has
/// no one-tag-per-token encoding.
SynthCorpus generate_corpus(const SynthSpec& spec);

/// Write <doc>.txt/<doc>.ann per document plus schema.json into dir.
void write_corpus(const SynthCorpus& corpus, const std::string& dir);

}  // namespace mrc
