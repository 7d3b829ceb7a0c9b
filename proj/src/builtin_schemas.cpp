#include "mrc/errors.hpp"
#include "mrc/schema.hpp"

namespace mrc {

namespace {

// Medication / adverse-drug-event schema: one trigger category (Drug), eight
// attribute categories, eight relation types. The relation questions are the
// attribute questions with the example drug name generalized to {trigger}.
const char* kDrugAdeJson = R"json({
  "name": "drug-ade",
  "concepts": [
    {"category": "Drug", "trigger": true,
     "question": "Find the drug events including names, brand names and collective names."},
    {"category": "Strength",
     "question": "What is the active ingredient amount of Pantoprazole?"},
    {"category": "Form",
     "question": "What is the physical form of Pantoprazole?"},
    {"category": "Dosage",
     "question": "What is the amount of Pantoprazole taken?"},
    {"category": "Frequency",
     "question": "How often each dose of Pantoprazole should be taken?"},
    {"category": "Route",
     "question": "What is the path of Pantoprazole taken into the body?"},
    {"category": "Duration",
     "question": "How long to take Pantoprazole?"},
    {"category": "Reason",
     "question": "What is the medical reason for giving Pantoprazole?"},
    {"category": "ADE",
     "question": "What are the injuries resulting from the use of Pantoprazole?"}
  ],
  "relations": [
    {"name": "Strength-Drug", "label": "Strength", "trigger": "Drug", "attribute": "Strength",
     "question": "What is the active ingredient amount of {trigger}?"},
    {"name": "Form-Drug", "label": "Form", "trigger": "Drug", "attribute": "Form",
     "question": "What is the physical form of {trigger}?"},
    {"name": "Dosage-Drug", "label": "Dosage", "trigger": "Drug", "attribute": "Dosage",
     "question": "What is the amount of {trigger} taken?"},
    {"name": "Frequency-Drug", "label": "Frequency", "trigger": "Drug", "attribute": "Frequency",
     "question": "How often each dose of {trigger} should be taken?"},
    {"name": "Route-Drug", "label": "Route", "trigger": "Drug", "attribute": "Route",
     "question": "What is the path of {trigger} taken into the body?"},
    {"name": "Duration-Drug", "label": "Duration", "trigger": "Drug", "attribute": "Duration",
     "question": "How long to take {trigger}?"},
    {"name": "Reason-Drug", "label": "Reason", "trigger": "Drug", "attribute": "Reason",
     "question": "What is the medical reason for giving {trigger}?"},
    {"name": "ADE-Drug", "label": "ADE", "trigger": "Drug", "attribute": "ADE",
     "question": "What are the injuries resulting from the use of {trigger}?"}
  ]
})json";

// Social-determinants-of-health schema: five trigger categories, nine
// attribute categories, 29 trigger-specific relation types.
const char* kSdohJson = R"json({
  "name": "sdoh",
  "concepts": [
    {"category": "Employment", "trigger": true,
     "question": "Find the employment event in the text, including work-related key phrases and subheadings."},
    {"category": "LivingStatus", "trigger": true,
     "question": "Find the living status events that are form of “lives” or “resides”."},
    {"category": "Alcohol", "trigger": true,
     "question": "Find the alcohol events like “alcohol”, “ETOH”, “drink”, or “beer”."},
    {"category": "Drug", "trigger": true,
     "question": "Find the drug events involve marijuana, illegal drugs, or the abuse of prescription drugs."},
    {"category": "Tobacco", "trigger": true,
     "question": "Find the tobacco events that are first-hand smoking or smokes."},
    {"category": "TypeLiving",
     "question": "Find the type of living like alone, with family, with others, or homeless."},
    {"category": "StatusEmploy",
     "question": "Find the status of employment like employed, unemployed and retired."},
    {"category": "Method",
     "question": "How the substance is used."},
    {"category": "Duration",
     "question": "How long has the substance use persisted like for years or over years."},
    {"category": "Frequency",
     "question": "How often the substance is used like per or every or few times."},
    {"category": "StatusTime",
     "question": "Find the status of substance use like none, current, or past."},
    {"category": "Type",
     "question": "Find the specific type of substance used."},
    {"category": "Amount",
     "question": "Find the amount of substance use."},
    {"category": "History",
     "question": "How long ago the substance use occurred like years ago or in years."}
  ],
  "relations": [
    {"name": "Employment-StatusEmploy", "label": "StatusEmploy", "trigger": "Employment", "attribute": "StatusEmploy",
     "question": "what is the status of employment associated with {trigger}"},
    {"name": "Employment-Type", "label": "Type", "trigger": "Employment", "attribute": "Type",
     "question": "what is the type of employment associated with {trigger}"},
    {"name": "Employment-Duration", "label": "Duration", "trigger": "Employment", "attribute": "Duration",
     "question": "how long has the employment associated with {trigger} lasted"},
    {"name": "Employment-History", "label": "History", "trigger": "Employment", "attribute": "History",
     "question": "how long ago the employment associated with {trigger} occurred"},
    {"name": "LivingStatus-Type", "label": "Type", "trigger": "LivingStatus", "attribute": "TypeLiving",
     "question": "what is the type of living status associated with {trigger}"},
    {"name": "LivingStatus-StatusTime", "label": "StatusTime", "trigger": "LivingStatus", "attribute": "StatusTime",
     "question": "what is the status of living associated with {trigger}"},
    {"name": "LivingStatus-Duration", "label": "Duration", "trigger": "LivingStatus", "attribute": "Duration",
     "question": "how long the living status associated with {trigger} lasted"},
    {"name": "LivingStatus-History", "label": "History", "trigger": "LivingStatus", "attribute": "History",
     "question": "how long ago the living status associated with {trigger} occurred"},
    {"name": "Tobacco-Duration", "label": "Duration", "trigger": "Tobacco", "attribute": "Duration",
     "question": "how long the tobacco use associated with {trigger} lasted"},
    {"name": "Tobacco-History", "label": "History", "trigger": "Tobacco", "attribute": "History",
     "question": "how long ago the tobacco use associated with {trigger} occurred"},
    {"name": "Tobacco-StatusTime", "label": "StatusTime", "trigger": "Tobacco", "attribute": "StatusTime",
     "question": "what is the status of tobacco use associated with {trigger}"},
    {"name": "Tobacco-Type", "label": "Type", "trigger": "Tobacco", "attribute": "Type",
     "question": "what is the specific type of tobacco use associated with {trigger}"},
    {"name": "Tobacco-Amount", "label": "Amount", "trigger": "Tobacco", "attribute": "Amount",
     "question": "what is the amount of tobacco use associated with {trigger}"},
    {"name": "Tobacco-Method", "label": "Method", "trigger": "Tobacco", "attribute": "Method",
     "question": "how the tobacco associated with {trigger} is used"},
    {"name": "Tobacco-Frequency", "label": "Frequency", "trigger": "Tobacco", "attribute": "Frequency",
     "question": "how often the tobacco associated with {trigger} is used"},
    {"name": "Alcohol-Duration", "label": "Duration", "trigger": "Alcohol", "attribute": "Duration",
     "question": "how long the alcohol use associated with {trigger} lasted"},
    {"name": "Alcohol-History", "label": "History", "trigger": "Alcohol", "attribute": "History",
     "question": "how long ago the alcohol use associated with {trigger} occurred"},
    {"name": "Alcohol-StatusTime", "label": "StatusTime", "trigger": "Alcohol", "attribute": "StatusTime",
     "question": "what is the status of alcohol use associated with {trigger}"},
    {"name": "Alcohol-Type", "label": "Type", "trigger": "Alcohol", "attribute": "Type",
     "question": "what is the specific type of alcohol use associated with {trigger}"},
    {"name": "Alcohol-Amount", "label": "Amount", "trigger": "Alcohol", "attribute": "Amount",
     "question": "what is the amount of alcohol use associated with {trigger}"},
    {"name": "Alcohol-Method", "label": "Method", "trigger": "Alcohol", "attribute": "Method",
     "question": "how the alcohol associated with {trigger} is used"},
    {"name": "Alcohol-Frequency", "label": "Frequency", "trigger": "Alcohol", "attribute": "Frequency",
     "question": "how often the alcohol associated with {trigger} is used"},
    {"name": "Drug-Duration", "label": "Duration", "trigger": "Drug", "attribute": "Duration",
     "question": "how long the drug use associated with {trigger} lasted"},
    {"name": "Drug-History", "label": "History", "trigger": "Drug", "attribute": "History",
     "question": "how long ago the drug use associated with {trigger} occurred"},
    {"name": "Drug-StatusTime", "label": "StatusTime", "trigger": "Drug", "attribute": "StatusTime",
     "question": "what is the status of alcohol use associated with {trigger}"},
    {"name": "Drug-Type", "label": "Type", "trigger": "Drug", "attribute": "Type",
     "question": "what is the specific type of drug use associated with {trigger}"},
    {"name": "Drug-Amount", "label": "Amount", "trigger": "Drug", "attribute": "Amount",
     "question": "what is the amount of drug use associated with {trigger}"},
    {"name": "Drug-Method", "label": "Method", "trigger": "Drug", "attribute": "Method",
     "question": "how the drug associated with {trigger} is used"},
    {"name": "Drug-Frequency", "label": "Frequency", "trigger": "Drug", "attribute": "Frequency",
     "question": "how often the drug associated with {trigger} is used"}
  ]
})json";

}  // namespace

const std::vector<std::string>& Schema::builtin_names() {
  static const std::vector<std::string> names = {"drug-ade", "sdoh"};
  return names;
}

std::string Schema::builtin_json(const std::string& name) {
  if (name == "drug-ade") return kDrugAdeJson;
  if (name == "sdoh") return kSdohJson;
  throw ConfigError("unknown builtin schema '" + name + "' (have: drug-ade, sdoh)");
}

Schema Schema::builtin(const std::string& name) {
  return from_json(nlohmann::json::parse(builtin_json(name)));
}

}  // namespace mrc
