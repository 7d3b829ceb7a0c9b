#include "mrc/pipeline.hpp"

#include <algorithm>
#include <set>

#include "mrc/errors.hpp"
#include "mrc/instance.hpp"

namespace mrc {

nlohmann::json PipelineDiagnostics::to_json() const {
  return {{"doc_id", doc_id},
          {"questions_issued", questions_issued},
          {"empty_answers", empty_answers},
          {"truncated_instances", truncated_instances},
          {"cross_sentence_gold", cross_sentence_gold}};
}

PipelineDiagnostics& PipelineDiagnostics::operator+=(const PipelineDiagnostics& other) {
  questions_issued += other.questions_issued;
  empty_answers += other.empty_answers;
  truncated_instances += other.truncated_instances;
  cross_sentence_gold += other.cross_sentence_gold;
  return *this;
}

void check_model_binding(const Model& model, const Schema& schema, Strategy strategy) {
  if (model.schema_fingerprint != schema.fingerprint())
    throw ConfigError("model was trained against schema '" + model.schema_name +
                      "', which does not match schema '" + schema.name + "'");
  if (model.strategy != strategy)
    throw ConfigError("model was trained with the " + to_string(model.strategy) +
                      " question strategy, requested " + to_string(strategy));
}

namespace {

ConceptMention mention_from_span(const Document& doc, const CharSpan& sentence_span,
                                 const std::vector<Token>& tokens, const TokenSpan& span,
                                 const std::string& category) {
  size_t start = sentence_span.start + tokens[static_cast<size_t>(span.first)].span.start;
  size_t end = sentence_span.start + tokens[static_cast<size_t>(span.second)].span.end;
  ConceptMention m;
  m.category = category;
  m.fragments = {{start, end}};
  m.text = doc.text.substr(start, end - start);
  return m;
}

std::vector<TokenSpan> predict_instance(const Model& model, MrcInstance& inst,
                                        PipelineDiagnostics* diag) {
  BuildStats stats;
  encode_instance(inst, model.vocab, model.config.encoder.max_seq_len, &stats);
  auto spans = predict_spans(model, inst);
  if (diag) {
    diag->questions_issued++;
    if (spans.empty()) diag->empty_answers++;
    diag->truncated_instances += stats.truncated_instances;
  }
  return spans;
}

void sort_mentions(std::vector<ConceptMention>& mentions) {
  std::sort(mentions.begin(), mentions.end(), [](const auto& a, const auto& b) {
    auto ea = a.envelope(), eb = b.envelope();
    return std::tie(ea.start, ea.end, a.category) < std::tie(eb.start, eb.end, b.category);
  });
}

void assign_ids(std::vector<ConceptMention>& mentions) {
  for (size_t i = 0; i < mentions.size(); ++i) mentions[i].id = "T" + std::to_string(i + 1);
}

}  // namespace

std::vector<ConceptMention> predict_concepts(const Document& doc, const Model& model,
                                             const Schema& schema,
                                             const std::vector<std::string>& categories,
                                             Strategy strategy, PipelineDiagnostics* diag) {
  check_model_binding(model, schema, strategy);
  for (const auto& cat : categories)
    if (!schema.has_category(cat))
      throw ConfigError("category '" + cat + "' is not in schema '" + schema.name + "'");

  auto instances = build_concept_instances(doc, schema, strategy);
  std::vector<ConceptMention> out;
  for (auto& inst : instances) {
    if (std::find(categories.begin(), categories.end(), inst.question.target_category) ==
        categories.end())
      continue;
    auto spans = predict_instance(model, inst, diag);
    for (const auto& s : spans)
      out.push_back(mention_from_span(doc, inst.sentence_span, inst.context_tokens, s,
                                      inst.question.target_category));
  }
  sort_mentions(out);
  assign_ids(out);
  return out;
}

std::vector<ConceptMention> extract_triggers(const Document& doc, const Model& model,
                                             const Schema& schema, Strategy strategy,
                                             bool oracle, PipelineDiagnostics* diag) {
  if (oracle) {
    std::vector<ConceptMention> out;
    for (const auto& m : doc.concepts)
      if (schema.is_trigger(m.category)) out.push_back(m);
    sort_mentions(out);
    assign_ids(out);
    return out;
  }
  std::vector<std::string> trigger_cats(schema.trigger_categories.begin(),
                                        schema.trigger_categories.end());
  return predict_concepts(doc, model, schema, trigger_cats, strategy, diag);
}

PipelineOutput run_end_to_end(const Document& doc, const Model& trigger_model,
                              const Model& relation_model, const Schema& schema,
                              Strategy strategy, bool oracle_triggers) {
  if (!oracle_triggers) check_model_binding(trigger_model, schema, strategy);
  check_model_binding(relation_model, schema, strategy);

  PipelineOutput out;
  out.diagnostics.doc_id = doc.doc_id;

  auto raw_triggers =
      extract_triggers(doc, trigger_model, schema, strategy, oracle_triggers, &out.diagnostics);

  std::vector<ConceptMention> triggers;
  std::set<std::pair<std::string, std::vector<CharSpan>>> seen;
  for (const auto& t : raw_triggers)
    if (seen.insert({t.category, t.fragments}).second) triggers.push_back(t);

  std::vector<ConceptMention> concepts = triggers;
  std::vector<RelationAnnotation> relations;
  std::map<std::pair<std::string, std::vector<CharSpan>>, size_t> attr_index;

  auto concept_id = [&](size_t index) { return "T" + std::to_string(index + 1); };

  for (size_t ti = 0; ti < triggers.size(); ++ti) {
    auto rels = schema.relations_for_trigger(triggers[ti].category);
    auto insts = build_relation_instances(doc, {triggers[ti]}, schema, strategy);
    if (insts.empty()) continue;
    if (insts.size() != rels.size())
      throw Error("relation instance count mismatch for trigger " + triggers[ti].category);

    for (size_t k = 0; k < insts.size(); ++k) {
      auto spans = predict_instance(relation_model, insts[k], &out.diagnostics);
      for (const auto& s : spans) {
        auto attr = mention_from_span(doc, insts[k].sentence_span, insts[k].context_tokens, s,
                                      rels[k]->attribute_category);
        auto key = std::make_pair(attr.category, attr.fragments);
        auto it = attr_index.find(key);
        size_t ai;
        if (it == attr_index.end()) {
          ai = concepts.size();
          attr.id = concept_id(ai);
          concepts.push_back(attr);
          attr_index.emplace(key, ai);
        } else {
          ai = it->second;
        }
        relations.push_back({"R" + std::to_string(relations.size() + 1), rels[k]->name,
                             concept_id(ti), concept_id(ai)});
        RelationTriple triple{triggers[ti], rels[k]->name, concepts[ai]};
        triple.trigger.id = concept_id(ti);
        out.triples.push_back(std::move(triple));
      }
    }
  }

  for (size_t i = 0; i < concepts.size(); ++i) concepts[i].id = concept_id(i);

  // Gold relations that no same-sentence question can reach.
  if (!doc.relations.empty()) {
    auto sentences = split_sentences(doc);
    auto sentence_of = [&](const ConceptMention& m) -> int {
      for (size_t i = 0; i < sentences.size(); ++i)
        if (sentences[i].span.contains(m.envelope())) return static_cast<int>(i);
      return -1;
    };
    for (const auto& rel : doc.relations) {
      const ConceptMention* a = doc.find_concept(rel.arg1);
      const ConceptMention* b = doc.find_concept(rel.arg2);
      if (a != nullptr && b != nullptr && sentence_of(*a) != sentence_of(*b))
        out.diagnostics.cross_sentence_gold++;
    }
  }

  out.pred_doc.doc_id = doc.doc_id;
  out.pred_doc.text = doc.text;
  out.pred_doc.concepts = std::move(concepts);
  out.pred_doc.relations = std::move(relations);
  return out;
}

}  // namespace mrc
