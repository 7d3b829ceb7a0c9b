#pragma once

#include <string>

#include "mrc/brat.hpp"
#include "mrc/schema.hpp"

namespace mrc {

/// A fully rendered question ready to be paired with a context sentence.
/// `target_category` is the category the answers carry: the asked-about
/// category for concept questions, the attribute category for relation
/// questions. `relation` and `trigger_text` are empty for concept questions.
struct RenderedQuestion {
  std::string text;
  std::string target_category;
  std::string relation;
  Strategy strategy = Strategy::Natural;
  std::string trigger_text;

  bool is_relation() const { return !relation.empty(); }
  bool operator==(const RenderedQuestion&) const = default;
};

/// Natural: the schema's template verbatim. Pseudo: "entity: <category>".
RenderedQuestion render_concept_question(const std::string& category, const Schema& schema,
                                         Strategy strategy);

/// Natural: the schema's template with {trigger} replaced by the trigger's
/// surface text wrapped in double quotes. Pseudo:
/// `<trigger_category> ; <label> ; <attribute_category> "<trigger text>"`.
RenderedQuestion render_relation_question(const std::string& relation_name,
                                          const ConceptMention& trigger, const Schema& schema,
                                          Strategy strategy);

}  // namespace mrc
