#include "mrc/question.hpp"

#include "mrc/errors.hpp"

namespace mrc {

RenderedQuestion render_concept_question(const std::string& category, const Schema& schema,
                                         Strategy strategy) {
  if (!schema.has_category(category))
    throw ConfigError("category '" + category + "' not in schema '" + schema.name + "'");
  RenderedQuestion q;
  q.target_category = category;
  q.strategy = strategy;
  if (strategy == Strategy::Pseudo) {
    q.text = "entity: " + category;
    return q;
  }
  auto it = schema.concept_questions.find(category);
  if (it == schema.concept_questions.end() || it->second.empty())
    throw ConfigError("no question template for category '" + category + "'");
  q.text = it->second;
  return q;
}

RenderedQuestion render_relation_question(const std::string& relation_name,
                                          const ConceptMention& trigger, const Schema& schema,
                                          Strategy strategy) {
  const RelationType* rel = schema.find_relation(relation_name);
  if (rel == nullptr)
    throw ConfigError("relation '" + relation_name + "' not in schema '" + schema.name + "'");
  if (rel->trigger_category != trigger.category)
    throw ConfigError("relation '" + relation_name + "' expects trigger category '" +
                      rel->trigger_category + "' but mention '" + trigger.text + "' has '" +
                      trigger.category + "'");
  RenderedQuestion q;
  q.target_category = rel->attribute_category;
  q.relation = rel->name;
  q.strategy = strategy;
  q.trigger_text = trigger.text;
  const std::string quoted = "\"" + trigger.text + "\"";
  if (strategy == Strategy::Pseudo) {
    q.text = rel->trigger_category + " ; " + rel->label + " ; " + rel->attribute_category + " " +
             quoted;
    return q;
  }
  auto it = schema.relation_questions.find(rel->name);
  if (it == schema.relation_questions.end() || it->second.empty())
    throw ConfigError("no question template for relation '" + rel->name + "'");
  const std::string& tmpl = it->second;
  size_t pos = tmpl.find("{trigger}");
  if (pos == std::string::npos)
    throw ConfigError("template for relation '" + rel->name + "' lacks {trigger}");
  q.text = tmpl.substr(0, pos) + quoted + tmpl.substr(pos + 9);
  return q;
}

}  // namespace mrc
