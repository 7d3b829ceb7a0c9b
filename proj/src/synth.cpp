#include "mrc/synth.hpp"

#include <filesystem>
#include <fstream>

#include "mrc/errors.hpp"
#include "mrc/rng.hpp"

namespace mrc {

namespace {

const std::vector<std::string> kDrugs = {"aspirin",  "ibuprofen",  "metformin",
                                         "lisinopril", "warfarin",  "insulin",
                                         "prednisone", "amoxicillin"};

const std::vector<std::string> kEffects = {"rash",      "nausea", "headache", "dizziness",
                                           "itching",   "cough",  "fatigue",  "swelling"};

const std::vector<std::string> kDurations = {"for two days", "for a week", "over three months",
                                             "for ten days"};

const std::vector<std::string> kFillers = {
    "patient", "stable", "clinic", "visit",  "today",  "notes",  "review", "plan",
    "stated",  "denies", "reports", "doing", "well",   "overall", "exam",  "normal"};

const std::vector<std::string> kShiftedFillers = {
    "resident", "ward",   "rounds", "transfer", "chart",   "intake", "follow", "unit",
    "observed", "appears", "states", "feeling",  "improved", "course", "status", "benign"};

/// One sentence under construction: text plus locally-addressed annotations.
struct SentenceDraft {
  std::string text;
  std::vector<ConceptMention> mentions;          // fragments local to the sentence
  std::vector<std::pair<size_t, size_t>> links;  // (trigger idx, attribute idx)
  std::vector<std::string> link_types;

  size_t add_word(const std::string& word) {
    if (!text.empty()) text += ' ';
    size_t start = text.size();
    text += word;
    return start;
  }

  void add_mention(const std::string& category, size_t start, size_t end) {
    ConceptMention m;
    m.category = category;
    m.fragments = {{start, end}};
    m.text = text.substr(start, end - start);
    mentions.push_back(std::move(m));
  }

  void add_link(const std::string& type, size_t trigger_idx, size_t attr_idx) {
    link_types.push_back(type);
    links.emplace_back(trigger_idx, attr_idx);
  }
};

class Generator {
 public:
  Generator(const SynthSpec& spec, Rng& rng)
      : spec_(spec), rng_(rng),
        fillers_(spec.shifted_lexicon ? kShiftedFillers : kFillers) {}

  SentenceDraft sentence() {
    double roll = rng_.uniform();
    if (roll < spec_.nesting_rate) return nested();
    int pick = rng_.uniform_int(0, 4);
    switch (pick) {
      case 0: return filler_only();
      case 1: return plain_drug();
      case 2: return effect_sentence();
      case 3: return duration_sentence();
      default: return two_drugs();
    }
  }

 private:
  const std::string& pick(const std::vector<std::string>& pool) {
    return pool[static_cast<size_t>(rng_.uniform_int(0, static_cast<int>(pool.size()) - 1))];
  }

  bool linked() { return rng_.uniform() < spec_.relation_density; }

  SentenceDraft filler_only() {
    SentenceDraft s;
    int n = rng_.uniform_int(3, 6);
    for (int i = 0; i < n; ++i) s.add_word(pick(fillers_));
    s.add_word(".");
    return s;
  }

  SentenceDraft plain_drug() {
    SentenceDraft s;
    s.add_word(pick(fillers_));
    s.add_word("took");
    const auto& drug = pick(kDrugs);
    size_t ds = s.add_word(drug);
    s.add_mention("Drug", ds, ds + drug.size());
    s.add_word("daily");
    s.add_word(".");
    return s;
  }

  SentenceDraft effect_sentence() {
    SentenceDraft s;
    const auto& drug = pick(kDrugs);
    const auto& effect = pick(kEffects);
    if (linked()) {
      size_t ds = s.add_word(drug);
      s.add_mention("Drug", ds, ds + drug.size());
      s.add_word("caused");
      size_t es = s.add_word(effect);
      s.add_mention("Effect", es, es + effect.size());
      s.add_link("Effect-Drug", 0, 1);
    } else {
      size_t ds = s.add_word(drug);
      s.add_mention("Drug", ds, ds + drug.size());
      s.add_word("was");
      s.add_word("held");
      s.add_word(";");
      size_t es = s.add_word(effect);
      s.add_mention("Effect", es, es + effect.size());
      s.add_word("was");
      s.add_word("noted");
    }
    s.add_word(".");
    return s;
  }

  SentenceDraft duration_sentence() {
    SentenceDraft s;
    const auto& drug = pick(kDrugs);
    const auto& duration = pick(kDurations);
    if (linked()) {
      s.add_word("took");
      size_t ds = s.add_word(drug);
      s.add_mention("Drug", ds, ds + drug.size());
      size_t us = s.add_word(duration);
      s.add_mention("Duration", us, us + duration.size());
      s.add_link("Duration-Drug", 0, 1);
    } else {
      size_t ds = s.add_word(drug);
      s.add_mention("Drug", ds, ds + drug.size());
      s.add_word("refilled");
      s.add_word(";");
      s.add_word("felt");
      s.add_word("fine");
      size_t us = s.add_word(duration);
      s.add_mention("Duration", us, us + duration.size());
    }
    s.add_word(".");
    return s;
  }

  SentenceDraft two_drugs() {
    SentenceDraft s;
    const auto& drug1 = pick(kDrugs);
    std::string drug2 = pick(kDrugs);
    while (drug2 == drug1) drug2 = pick(kDrugs);
    const auto& effect = pick(kEffects);
    if (linked()) {
      size_t d1 = s.add_word(drug1);
      s.add_mention("Drug", d1, d1 + drug1.size());
      s.add_word("caused");
      size_t es = s.add_word(effect);
      s.add_mention("Effect", es, es + effect.size());
      s.add_word("but");
      size_t d2 = s.add_word(drug2);
      s.add_mention("Drug", d2, d2 + drug2.size());
      s.add_word("was");
      s.add_word("tolerated");
      s.add_link("Effect-Drug", 0, 1);
    } else {
      size_t d1 = s.add_word(drug1);
      s.add_mention("Drug", d1, d1 + drug1.size());
      s.add_word("and");
      size_t d2 = s.add_word(drug2);
      s.add_mention("Drug", d2, d2 + drug2.size());
      s.add_word("were");
      s.add_word("reviewed");
      s.add_word(";");
      size_t es = s.add_word(effect);
      s.add_mention("Effect", es, es + effect.size());
      s.add_word("resolved");
    }
    s.add_word(".");
    return s;
  }

  /// Outer Duration mention containing a Drug and an Effect mention: the
  /// one-tag-per-token conflict the span formulation must survive.
  SentenceDraft nested() {
    SentenceDraft s;
    const auto& drug = pick(kDrugs);
    const auto& effect = pick(kEffects);
    s.add_word(pick(fillers_));
    s.add_word("felt");
    s.add_word("fine");
    size_t outer_start = s.add_word("as");
    s.add_word("long");
    s.add_word("as");
    size_t ds = s.add_word(drug);
    s.add_word("eased");
    s.add_word("the");
    size_t es = s.add_word(effect);
    size_t outer_end = es + effect.size();
    s.add_mention("Duration", outer_start, outer_end);
    s.add_mention("Drug", ds, ds + drug.size());
    s.add_mention("Effect", es, outer_end);
    s.add_link("Duration-Drug", 1, 0);
    s.add_link("Effect-Drug", 1, 2);
    s.add_word(".");
    return s;
  }

  const SynthSpec& spec_;
  Rng& rng_;
  const std::vector<std::string>& fillers_;
};

}  // namespace

void SynthSpec::validate() const {
  if (num_documents < 1) throw ConfigError("num_documents must be >= 1");
  if (min_sentences < 1 || max_sentences < min_sentences)
    throw ConfigError("sentence range must satisfy 1 <= min <= max");
  if (nesting_rate < 0.0 || nesting_rate > 1.0)
    throw ConfigError("nesting_rate must be in [0, 1]");
  if (relation_density < 0.0 || relation_density > 1.0)
    throw ConfigError("relation_density must be in [0, 1]");
}

Schema synth_schema() {
  Schema s;
  s.name = "synth-drug";
  s.concept_categories = {"Drug", "Effect", "Duration"};
  s.trigger_categories = {"Drug"};
  s.relation_types = {{"Effect-Drug", "Effect", "Drug", "Effect"},
                      {"Duration-Drug", "Duration", "Drug", "Duration"}};
  s.concept_questions = {
      {"Drug", "find the drug names mentioned in the note"},
      {"Effect", "find the unwanted effects described in the note"},
      {"Duration", "find the phrases saying how long something lasted"}};
  s.relation_questions = {
      {"Effect-Drug", "what unwanted effect is linked to the medication {trigger}"},
      {"Duration-Drug", "what duration is linked to the medication {trigger}"}};
  s.validate();
  return s;
}

SynthCorpus generate_corpus(const SynthSpec& spec) {
  spec.validate();
  SynthCorpus corpus;
  corpus.schema = synth_schema();

  Rng rng(spec.seed);
  Generator gen(spec, rng);

  for (int di = 0; di < spec.num_documents; ++di) {
    Document doc;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "doc%04d", di + 1);
    doc.doc_id = buf;

    int n_sentences = rng.uniform_int(spec.min_sentences, spec.max_sentences);
    size_t cursor = 0;
    int next_rel = 1;
    for (int si = 0; si < n_sentences; ++si) {
      SentenceDraft draft = gen.sentence();
      if (si > 0) {
        doc.text += '\n';
        ++cursor;
      }
      doc.text += draft.text;

      size_t mention_base = doc.concepts.size();
      for (auto& m : draft.mentions) {
        for (auto& frag : m.fragments) {
          frag.start += cursor;
          frag.end += cursor;
        }
        m.id = "T" + std::to_string(doc.concepts.size() + 1);
        doc.concepts.push_back(std::move(m));
      }
      for (size_t li = 0; li < draft.links.size(); ++li) {
        RelationAnnotation rel;
        rel.id = "R" + std::to_string(next_rel++);
        rel.relation_type = draft.link_types[li];
        rel.arg1 = doc.concepts[mention_base + draft.links[li].first].id;
        rel.arg2 = doc.concepts[mention_base + draft.links[li].second].id;
        doc.relations.push_back(std::move(rel));
      }
      cursor += draft.text.size();
    }
    doc.text += '\n';
    corpus.docs.push_back(std::move(doc));
  }
  return corpus;
}

void write_corpus(const SynthCorpus& corpus, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& doc : corpus.docs) write_brat_document(doc, dir);
  std::ofstream schema_out(std::filesystem::path(dir) / "schema.json");
  if (!schema_out) throw IoError("cannot write schema.json in " + dir);
  schema_out << corpus.schema.to_json().dump(2) << '\n';
}

}  // namespace mrc
