#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace mrc {

/// Question generation strategy: handcrafted natural-language questions vs
/// mechanical pseudo-questions built from category and relation names.
enum class Strategy { Natural, Pseudo };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

/// A typed relation between a trigger concept and an attribute concept.
/// `name` is the annotation-file relation type; `label` is the short form
/// used when composing pseudo-questions.
struct RelationType {
  std::string name;
  std::string label;
  std::string trigger_category;
  std::string attribute_category;
};

/// Extraction schema: concept categories, the subset acting as relation
/// triggers, the relation inventory, and the natural-language question
/// templates for each target. Relation templates carry a single {trigger}
/// placeholder; concept templates carry none.
class Schema {
 public:
  std::string name;
  std::vector<std::string> concept_categories;
  std::vector<std::string> trigger_categories;
  std::vector<RelationType> relation_types;
  std::map<std::string, std::string> concept_questions;   // category -> template
  std::map<std::string, std::string> relation_questions;  // relation name -> template

  bool has_category(const std::string& cat) const;
  bool is_trigger(const std::string& cat) const;
  const RelationType* find_relation(const std::string& name) const;
  std::vector<const RelationType*> relations_for_trigger(const std::string& cat) const;

  /// Throws ConfigError listing every gap (missing templates, bad pairings,
  /// malformed placeholders).
  void validate() const;

  nlohmann::json to_json() const;
  static Schema from_json(const nlohmann::json& j);
  static Schema load_file(const std::string& path);

  /// Stable content hash used to detect checkpoint/schema mismatches.
  std::string fingerprint() const;

  /// Bundled schemas: "drug-ade" (2018 medication/ADE inventory) and "sdoh"
  /// (2022 social-determinants inventory). Throws ConfigError for other names.
  static Schema builtin(const std::string& name);
  static const std::vector<std::string>& builtin_names();
  static std::string builtin_json(const std::string& name);
};

/// Resolve a --schema argument: a builtin name or a path to a JSON file.
Schema resolve_schema(const std::string& name_or_path);

}  // namespace mrc
