#include <CLI11.hpp>

#include <fstream>
#include <sstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mrc/errors.hpp"
#include "mrc/harness.hpp"
#include "mrc/instance.hpp"
#include "mrc/kernels.hpp"
#include "mrc/pipeline.hpp"
#include "mrc/synth.hpp"
#include "mrc/train.hpp"

using namespace mrc;

namespace {

struct GlobalOpts {
  uint64_t seed = 0;
  std::string config_path;
  std::string schema_arg;
  int jobs = 0;

  const CLI::App* app = nullptr;
  bool seed_given() const { return app->count("--seed") > 0; }
};

Schema schema_or_die(const GlobalOpts& g) {
  if (g.schema_arg.empty())
    throw ConfigError("--schema is required (builtin name or path to a schema JSON file)");
  return resolve_schema(g.schema_arg);
}

nlohmann::json load_config_json(const GlobalOpts& g) {
  if (g.config_path.empty()) return nlohmann::json::object();
  std::ifstream in(g.config_path);
  if (!in) throw IoError("cannot open config file: " + g.config_path);
  try {
    nlohmann::json j;
    in >> j;
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config file " + g.config_path + " is not valid JSON: " + e.what());
  }
}

ModelConfig model_config_from(const nlohmann::json& cfg) {
  if (cfg.contains("model")) return ModelConfig::from_json(cfg.at("model"));
  return ModelConfig{};
}

TrainConfig train_config_from(const nlohmann::json& cfg) {
  if (cfg.contains("train")) return TrainConfig::from_json(cfg.at("train"));
  return TrainConfig{};
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  out << content;
  if (!out) throw IoError("failed writing output file: " + path);
}

std::vector<ConceptMention> gold_triggers(const Document& doc, const Schema& schema) {
  std::vector<ConceptMention> triggers;
  for (const auto& m : doc.concepts)
    if (schema.is_trigger(m.category)) triggers.push_back(m);
  return triggers;
}

// ---------------------------------------------------------------- convert

struct ConvertOpts {
  std::string input, out;
  std::string mode = "concept";
  std::string strategy = "natural";
};

void cmd_convert(const GlobalOpts& g, const ConvertOpts& o) {
  Schema schema = schema_or_die(g);
  Strategy strategy = strategy_from_string(o.strategy);
  if (o.mode != "concept" && o.mode != "relation")
    throw ConfigError("--mode must be concept or relation");

  ParseStats pstats;
  auto docs = load_brat_corpus(o.input, schema, &pstats);
  if (docs.empty()) throw InputError("no documents found under " + o.input);

  BuildStats bstats;
  std::vector<MrcInstance> instances;
  for (const auto& doc : docs) {
    std::vector<MrcInstance> insts;
    if (o.mode == "concept") {
      insts = build_concept_instances(doc, schema, strategy, &bstats);
    } else {
      insts = build_relation_instances(doc, gold_triggers(doc, schema), schema, strategy, &bstats);
    }
    instances.insert(instances.end(), insts.begin(), insts.end());
  }
  write_instances_jsonl(instances, o.out);

  std::cout << "wrote " << instances.size() << " " << o.mode << " instances from " << docs.size()
            << " documents to " << o.out << "\n";
  if (bstats.unalignable_mentions > 0)
    std::cout << "note: " << bstats.unalignable_mentions << " unalignable mentions\n";
  if (bstats.cross_sentence_relations > 0)
    std::cout << "note: " << bstats.cross_sentence_relations << " cross-sentence relations\n";
  if (pstats.missing_ann > 0)
    std::cout << "note: " << pstats.missing_ann << " documents had no .ann file\n";
}

// ---------------------------------------------------------------- synth

struct SynthOpts {
  std::string out;
  SynthSpec spec;
  bool shifted = false;
};

void cmd_synth(const GlobalOpts& g, SynthOpts& o) {
  if (g.seed_given()) o.spec.seed = g.seed;
  o.spec.shifted_lexicon = o.shifted;
  SynthCorpus corpus = generate_corpus(o.spec);
  write_corpus(corpus, o.out);
  std::cout << "wrote " << corpus.docs.size() << " documents to " << o.out << "\n";
}

// ---------------------------------------------------------------- train

struct TrainOpts {
  std::string instances, val_instances, out;
  std::string strategy = "natural";
  double lr = 0.0;
  int batch_size = 0, epochs = 0, patience = 0;
  std::string optimizer;
  const CLI::App* cmd = nullptr;
};

void cmd_train(const GlobalOpts& g, const TrainOpts& o) {
  Schema schema = schema_or_die(g);
  nlohmann::json cfg = load_config_json(g);
  ModelConfig mc = model_config_from(cfg);
  TrainConfig tc = train_config_from(cfg);

  if (o.cmd->count("--lr")) tc.learning_rate = o.lr;
  if (o.cmd->count("--batch-size")) tc.batch_size = o.batch_size;
  if (o.cmd->count("--epochs")) tc.max_epochs = o.epochs;
  if (o.cmd->count("--patience")) tc.patience = o.patience;
  if (o.cmd->count("--optimizer")) tc.optimizer = o.optimizer;
  if (g.seed_given()) tc.seed = g.seed;

  auto train_insts = read_instances_jsonl_file(o.instances);
  std::vector<MrcInstance> val;
  if (!o.val_instances.empty()) val = read_instances_jsonl_file(o.val_instances);

  TrainResult result = train_model(train_insts, val, schema, strategy_from_string(o.strategy), mc,
                                   tc);
  save_model(result.model, o.out);

  std::cout << epoch_log_to_tsv(result.log);
  std::cout << "best epoch " << result.best_epoch << " span F1 " << result.best_metric << "\n";
  std::cout << "saved model to " << o.out << "\n";
}

// ---------------------------------------------------------------- crossval

struct CrossvalOpts {
  std::string input, out;
  std::string strategy = "natural";
  int k = 5;
};

void cmd_crossval(const GlobalOpts& g, const CrossvalOpts& o) {
  Schema schema = schema_or_die(g);
  nlohmann::json cfg = load_config_json(g);
  ModelConfig mc = model_config_from(cfg);
  TrainConfig base = train_config_from(cfg);
  if (g.seed_given()) base.seed = g.seed;

  auto docs = load_brat_corpus(o.input, schema);
  CrossValResult result =
      cross_validate(docs, schema, strategy_from_string(o.strategy), mc, base, o.k);

  std::string tsv = grid_to_tsv(result);
  std::cout << tsv;
  std::cout << "runs: " << result.runs << "\n";
  std::cout << "selected learning_rate=" << result.best.learning_rate
            << " batch_size=" << result.best.batch_size << "\n";
  if (!o.out.empty()) write_text_file(o.out, tsv);
}

// ---------------------------------------------------------------- predict

struct PredictOpts {
  std::string input, model, out;
  std::string categories;  // comma-separated; empty = all concept categories
};

void cmd_predict(const GlobalOpts& g, const PredictOpts& o) {
  Schema schema = schema_or_die(g);
  Model model = load_model(o.model);

  std::vector<std::string> categories;
  if (o.categories.empty()) {
    categories = schema.concept_categories;
  } else {
    std::stringstream ss(o.categories);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) categories.push_back(item);
    }
  }

  auto docs = load_brat_corpus(o.input, schema);
  if (docs.empty()) throw InputError("no documents found under " + o.input);

  for (const auto& doc : docs) {
    Document pred;
    pred.doc_id = doc.doc_id;
    pred.text = doc.text;
    pred.concepts = predict_concepts(doc, model, schema, categories, model.strategy);
    write_brat_document(pred, o.out);
  }
  std::cout << "wrote " << docs.size() << " documents to " << o.out << "\n";
}

// ---------------------------------------------------------------- pipeline

struct PipelineOpts {
  std::string input, trigger_model, relation_model, out, diagnostics;
  bool oracle_triggers = false;
};

void cmd_pipeline(const GlobalOpts& g, const PipelineOpts& o) {
  Schema schema = schema_or_die(g);
  Model relation_model = load_model(o.relation_model);

  Model trigger_model;
  if (!o.oracle_triggers) {
    if (o.trigger_model.empty())
      throw ConfigError("--trigger-model is required unless --oracle-triggers is set");
    trigger_model = load_model(o.trigger_model);
  }

  auto docs = load_brat_corpus(o.input, schema);
  if (docs.empty()) throw InputError("no documents found under " + o.input);

  PipelineDiagnostics total;
  nlohmann::json per_doc = nlohmann::json::array();
  size_t triples = 0;
  for (const auto& doc : docs) {
    PipelineOutput output = run_end_to_end(doc, trigger_model, relation_model, schema,
                                           relation_model.strategy, o.oracle_triggers);
    write_brat_document(output.pred_doc, o.out);
    per_doc.push_back(output.diagnostics.to_json());
    total += output.diagnostics;
    triples += output.triples.size();
  }

  if (!o.diagnostics.empty()) write_text_file(o.diagnostics, per_doc.dump(2) + "\n");
  std::cout << "processed " << docs.size() << " documents: " << total.questions_issued
            << " questions, " << triples << " relation triples\n";
  std::cout << "wrote predictions to " << o.out << "\n";
}

// ---------------------------------------------------------------- eval

struct EvalOpts {
  std::string gold, pred, out;
  std::string task = "both";      // concept | relation | both
  std::string criterion = "both"; // strict | lenient | both
  std::string format = "tsv";     // tsv | json
};

void cmd_eval(const GlobalOpts& g, const EvalOpts& o) {
  Schema schema = schema_or_die(g);
  if (o.task != "concept" && o.task != "relation" && o.task != "both")
    throw ConfigError("--task must be concept, relation, or both");
  if (o.criterion != "strict" && o.criterion != "lenient" && o.criterion != "both")
    throw ConfigError("--criterion must be strict, lenient, or both");
  if (o.format != "tsv" && o.format != "json")
    throw ConfigError("--format must be tsv or json");

  auto gold_docs = load_brat_corpus(o.gold, schema);
  auto pred_docs = load_brat_corpus(o.pred, schema);

  std::vector<MatchCriterion> criteria;
  if (o.criterion != "lenient") criteria.push_back(MatchCriterion::Strict);
  if (o.criterion != "strict") criteria.push_back(MatchCriterion::Lenient);

  std::vector<EvalReport> reports;
  for (MatchCriterion c : criteria) {
    if (o.task != "relation") reports.push_back(evaluate_concepts(gold_docs, pred_docs, c));
    if (o.task != "concept") reports.push_back(evaluate_relations(gold_docs, pred_docs, c));
  }

  std::string rendered =
      o.format == "tsv" ? reports_to_tsv(reports) : reports_to_json(reports).dump(2) + "\n";
  std::cout << rendered;
  if (!o.out.empty()) write_text_file(o.out, rendered);
}

// ------------------------------------------------------- compare-strategies

struct CompareOpts {
  std::string train, test, out;
};

void cmd_compare(const GlobalOpts& g, const CompareOpts& o) {
  Schema schema = schema_or_die(g);
  nlohmann::json cfg = load_config_json(g);
  ModelConfig mc = model_config_from(cfg);
  TrainConfig tc = train_config_from(cfg);
  if (g.seed_given()) tc.seed = g.seed;

  auto train_docs = load_brat_corpus(o.train, schema);
  auto test_docs = load_brat_corpus(o.test, schema);

  StrategyComparison cmp = compare_question_strategies(train_docs, test_docs, schema, mc, tc);
  std::string tsv = comparison_to_tsv(cmp);
  std::cout << tsv;
  if (!o.out.empty()) write_text_file(o.out, tsv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MRC-style clinical concept and relation extraction toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  g.app = &app;
  app.add_option("--seed", g.seed, "Random seed override");
  app.add_option("--config", g.config_path, "JSON config file with model/train sections")
      ->envname("MRCKIT_CONFIG");
  app.add_option("--schema", g.schema_arg, "Builtin schema name or schema JSON path");
  app.add_option("--jobs", g.jobs, "Worker threads for linear algebra (default: all cores)");

  ConvertOpts convert_o;
  auto* convert = app.add_subcommand("convert", "BRAT corpus to JSON-Lines MRC instances");
  convert->fallthrough();
  convert->add_option("--input", convert_o.input, "BRAT directory")->required();
  convert->add_option("--out", convert_o.out, "Output .jsonl path")->required();
  convert->add_option("--mode", convert_o.mode, "concept or relation (default concept)");
  convert->add_option("--strategy", convert_o.strategy, "natural or pseudo (default natural)");

  SynthOpts synth_o;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic BRAT corpus");
  synth->fallthrough();
  synth->add_option("--out", synth_o.out, "Output directory")->required();
  synth->add_option("--docs", synth_o.spec.num_documents, "Document count (default 50)");
  synth->add_option("--min-sentences", synth_o.spec.min_sentences, "Min sentences per doc");
  synth->add_option("--max-sentences", synth_o.spec.max_sentences, "Max sentences per doc");
  synth->add_option("--nesting-rate", synth_o.spec.nesting_rate, "Nested-sentence rate");
  synth->add_option("--relation-density", synth_o.spec.relation_density, "Linked-sentence rate");
  synth->add_flag("--shifted", synth_o.shifted, "Use the shifted filler vocabulary");

  TrainOpts train_o;
  auto* train = app.add_subcommand("train", "Train a model on converted instances");
  train->fallthrough();
  train->add_option("--instances", train_o.instances, "Training .jsonl")->required();
  train->add_option("--val-instances", train_o.val_instances, "Validation .jsonl");
  train->add_option("--out", train_o.out, "Checkpoint output path")->required();
  train->add_option("--strategy", train_o.strategy, "natural or pseudo (default natural)");
  train->add_option("--lr", train_o.lr, "Learning rate");
  train->add_option("--batch-size", train_o.batch_size, "Batch size");
  train->add_option("--epochs", train_o.epochs, "Max epochs");
  train->add_option("--patience", train_o.patience, "Early-stopping patience");
  train->add_option("--optimizer", train_o.optimizer, "adam or sgd");
  train_o.cmd = train;

  CrossvalOpts crossval_o;
  auto* crossval = app.add_subcommand("crossval", "Grid search with k-fold cross-validation");
  crossval->fallthrough();
  crossval->add_option("--input", crossval_o.input, "BRAT directory")->required();
  crossval->add_option("--out", crossval_o.out, "Write the score table here too");
  crossval->add_option("--strategy", crossval_o.strategy, "natural or pseudo (default natural)");
  crossval->add_option("--k", crossval_o.k, "Fold count (default 5)");

  PredictOpts predict_o;
  auto* predict = app.add_subcommand("predict", "Concept extraction to BRAT files");
  predict->fallthrough();
  predict->add_option("--input", predict_o.input, "BRAT directory (.txt files)")->required();
  predict->add_option("--model", predict_o.model, "Checkpoint path")->required();
  predict->add_option("--out", predict_o.out, "Output BRAT directory")->required();
  predict->add_option("--categories", predict_o.categories, "Comma-separated categories");

  PipelineOpts pipeline_o;
  auto* pipeline = app.add_subcommand("pipeline", "Two-pass end-to-end relation extraction");
  pipeline->fallthrough();
  pipeline->add_option("--input", pipeline_o.input, "BRAT directory")->required();
  pipeline->add_option("--trigger-model", pipeline_o.trigger_model, "Trigger model checkpoint");
  pipeline->add_option("--relation-model", pipeline_o.relation_model, "Relation model checkpoint")
      ->required();
  pipeline->add_option("--out", pipeline_o.out, "Output BRAT directory")->required();
  pipeline->add_flag("--oracle-triggers", pipeline_o.oracle_triggers, "Use gold triggers");
  pipeline->add_option("--diagnostics", pipeline_o.diagnostics, "Per-document diagnostics JSON");

  EvalOpts eval_o;
  auto* eval = app.add_subcommand("eval", "Score predictions against gold BRAT");
  eval->fallthrough();
  eval->add_option("--gold", eval_o.gold, "Gold BRAT directory")->required();
  eval->add_option("--pred", eval_o.pred, "Predicted BRAT directory")->required();
  eval->add_option("--task", eval_o.task, "concept, relation, or both (default both)");
  eval->add_option("--criterion", eval_o.criterion, "strict, lenient, or both (default both)");
  eval->add_option("--format", eval_o.format, "tsv or json (default tsv)");
  eval->add_option("--out", eval_o.out, "Write the report here too");

  CompareOpts compare_o;
  auto* compare = app.add_subcommand("compare-strategies",
                                     "Natural vs pseudo questions on both tasks");
  compare->fallthrough();
  compare->add_option("--train", compare_o.train, "Training BRAT directory")->required();
  compare->add_option("--test", compare_o.test, "Test BRAT directory")->required();
  compare->add_option("--out", compare_o.out, "Write the table here too");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (g.jobs > 0) kernels::set_threads(g.jobs);
    if (convert->parsed()) cmd_convert(g, convert_o);
    if (synth->parsed()) cmd_synth(g, synth_o);
    if (train->parsed()) cmd_train(g, train_o);
    if (crossval->parsed()) cmd_crossval(g, crossval_o);
    if (predict->parsed()) cmd_predict(g, predict_o);
    if (pipeline->parsed()) cmd_pipeline(g, pipeline_o);
    if (eval->parsed()) cmd_eval(g, eval_o);
    if (compare->parsed()) cmd_compare(g, compare_o);
  } catch (const IoError& e) {
    std::cerr << "error[io]: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error[parse]: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error[config]: " << e.what() << "\n";
    return 4;
  } catch (const InputError& e) {
    std::cerr << "error[input]: " << e.what() << "\n";
    return 4;
  } catch (const TrainError& e) {
    std::cerr << "error[train]: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return 5;
  }
  return 0;
}
