#include "mrc/schema.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "mrc/errors.hpp"

namespace mrc {

std::string to_string(Strategy s) {
  return s == Strategy::Natural ? "natural" : "pseudo";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "natural") return Strategy::Natural;
  if (s == "pseudo") return Strategy::Pseudo;
  throw ConfigError("unknown question strategy '" + s + "' (expected natural|pseudo)");
}

bool Schema::has_category(const std::string& cat) const {
  return std::find(concept_categories.begin(), concept_categories.end(), cat) !=
         concept_categories.end();
}

bool Schema::is_trigger(const std::string& cat) const {
  return std::find(trigger_categories.begin(), trigger_categories.end(), cat) !=
         trigger_categories.end();
}

const RelationType* Schema::find_relation(const std::string& rel_name) const {
  for (const auto& r : relation_types)
    if (r.name == rel_name) return &r;
  return nullptr;
}

std::vector<const RelationType*> Schema::relations_for_trigger(const std::string& cat) const {
  std::vector<const RelationType*> out;
  for (const auto& r : relation_types)
    if (r.trigger_category == cat) out.push_back(&r);
  return out;
}

namespace {

size_t count_placeholder(const std::string& s) {
  size_t n = 0;
  for (size_t pos = s.find("{trigger}"); pos != std::string::npos;
       pos = s.find("{trigger}", pos + 1))
    ++n;
  return n;
}

}  // namespace

void Schema::validate() const {
  std::vector<std::string> gaps;
  std::set<std::string> seen_cats;
  if (concept_categories.empty()) gaps.push_back("no concept categories defined");
  for (const auto& c : concept_categories) {
    if (!seen_cats.insert(c).second) gaps.push_back("duplicate category '" + c + "'");
    auto it = concept_questions.find(c);
    if (it == concept_questions.end() || it->second.empty())
      gaps.push_back("missing natural question for category '" + c + "'");
    else if (count_placeholder(it->second) != 0)
      gaps.push_back("concept question for '" + c + "' must not contain {trigger}");
  }
  for (const auto& t : trigger_categories)
    if (!has_category(t)) gaps.push_back("trigger category '" + t + "' not in concept set");
  std::set<std::string> seen_rels;
  for (const auto& r : relation_types) {
    if (!seen_rels.insert(r.name).second)
      gaps.push_back("duplicate relation type '" + r.name + "'");
    if (!is_trigger(r.trigger_category))
      gaps.push_back("relation '" + r.name + "': '" + r.trigger_category +
                     "' is not a trigger category");
    if (!has_category(r.attribute_category))
      gaps.push_back("relation '" + r.name + "': attribute category '" +
                     r.attribute_category + "' not in concept set");
    auto it = relation_questions.find(r.name);
    if (it == relation_questions.end() || it->second.empty())
      gaps.push_back("missing natural question for relation '" + r.name + "'");
    else if (count_placeholder(it->second) != 1)
      gaps.push_back("relation question for '" + r.name +
                     "' must contain exactly one {trigger} placeholder");
  }
  if (!gaps.empty()) {
    std::ostringstream oss;
    oss << "schema '" << name << "' invalid (" << gaps.size() << " problems):";
    for (const auto& g : gaps) oss << "\n  - " << g;
    throw ConfigError(oss.str());
  }
}

nlohmann::json Schema::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["concepts"] = nlohmann::json::array();
  for (const auto& c : concept_categories) {
    nlohmann::json cj;
    cj["category"] = c;
    cj["trigger"] = is_trigger(c);
    auto it = concept_questions.find(c);
    cj["question"] = it == concept_questions.end() ? "" : it->second;
    j["concepts"].push_back(cj);
  }
  j["relations"] = nlohmann::json::array();
  for (const auto& r : relation_types) {
    nlohmann::json rj;
    rj["name"] = r.name;
    rj["label"] = r.label;
    rj["trigger"] = r.trigger_category;
    rj["attribute"] = r.attribute_category;
    auto it = relation_questions.find(r.name);
    rj["question"] = it == relation_questions.end() ? "" : it->second;
    j["relations"].push_back(rj);
  }
  return j;
}

Schema Schema::from_json(const nlohmann::json& j) {
  Schema s;
  s.name = j.value("name", "unnamed");
  if (j.contains("concepts")) {
    for (const auto& cj : j.at("concepts")) {
      std::string cat = cj.at("category").get<std::string>();
      s.concept_categories.push_back(cat);
      if (cj.value("trigger", false)) s.trigger_categories.push_back(cat);
      if (cj.contains("question")) s.concept_questions[cat] = cj.at("question").get<std::string>();
    }
  }
  if (j.contains("relations")) {
    for (const auto& rj : j.at("relations")) {
      RelationType r;
      r.name = rj.at("name").get<std::string>();
      r.label = rj.value("label", r.name);
      r.trigger_category = rj.value("trigger", "");
      r.attribute_category = rj.value("attribute", "");
      s.relation_types.push_back(r);
      if (rj.contains("question"))
        s.relation_questions[r.name] = rj.at("question").get<std::string>();
    }
  }
  s.validate();
  return s;
}

Schema Schema::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schema file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("schema file " + path + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

std::string Schema::fingerprint() const {
  // FNV-1a 64 over the canonical dump; stable across builds and platforms.
  const std::string dump = to_json().dump();
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

Schema resolve_schema(const std::string& name_or_path) {
  const auto& names = Schema::builtin_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end())
    return Schema::builtin(name_or_path);
  return Schema::load_file(name_or_path);
}

}  // namespace mrc
