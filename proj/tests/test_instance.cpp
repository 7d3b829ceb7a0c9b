#include <doctest.h>

#include <sstream>

#include "mrc/errors.hpp"
#include "mrc/instance.hpp"
#include "mrc/tokenizer.hpp"

using namespace mrc;

namespace {

std::vector<std::string> texts(const std::vector<Token>& toks) {
  std::vector<std::string> out;
  for (const auto& t : toks) out.push_back(t.text);
  return out;
}

const MrcInstance& find_instance(const std::vector<MrcInstance>& v, const std::string& target) {
  for (const auto& i : v)
    if (i.question.target_category == target) return i;
  throw std::runtime_error("no instance for " + target);
}

}  // namespace

TEST_CASE("tokenizer separates edge punctuation") {
  CHECK(texts(tokenize_with_offsets("ETOH: none.")) ==
        std::vector<std::string>{"ETOH", ":", "none", "."});
}

TEST_CASE("tokenizer on empty input") { CHECK(tokenize_with_offsets("").empty()); }

TEST_CASE("tokenizer keeps interior punctuation") {
  CHECK(texts(tokenize_with_offsets("1.5 mg")) == std::vector<std::string>{"1.5", "mg"});
  CHECK(texts(tokenize_with_offsets("(40 mg)")) ==
        std::vector<std::string>{"(", "40", "mg", ")"});
  CHECK(texts(tokenize_with_offsets("...")) == std::vector<std::string>{".", ".", "."});
}

TEST_CASE("tokenization is lossless") {
  std::string text = "Pt takes 1.5 mg (daily!) -- ETOH: none.\n  Next line?";
  auto toks = tokenize_with_offsets(text);
  std::vector<bool> covered(text.size(), false);
  for (const auto& t : toks) {
    CHECK(text.substr(t.span.start, t.span.length()) == t.text);
    for (size_t i = t.span.start; i < t.span.end; ++i) {
      CHECK(!covered[i]);
      covered[i] = true;
    }
  }
  for (size_t i = 0; i < text.size(); ++i)
    CHECK(covered[i] == !std::isspace(static_cast<unsigned char>(text[i])));
}

TEST_CASE("vocabulary specials and lookup") {
  Vocabulary v;
  CHECK(v.size() == 4);
  CHECK(v.id("[PAD]") == Vocabulary::kPad);
  CHECK(v.id("[CLS]") == Vocabulary::kCls);
  CHECK(v.id("anything") == Vocabulary::kUnk);
  int a = v.add("rash");
  CHECK(a == 4);
  CHECK(v.add("rash") == 4);
  CHECK(v.token(4) == "rash");
  auto round = Vocabulary::from_json(v.to_json());
  CHECK(round.id("rash") == 4);
  CHECK(round.size() == v.size());
}

TEST_CASE("alignment picks overlapping token range") {
  Sentence sent{"doc", {0, 28}, "Pt takes Pantoprazole daily."};
  auto toks = tokenize_with_offsets(sent.text);
  ConceptMention m;
  m.category = "Drug";
  m.fragments = {{9, 21}};
  m.text = "Pantoprazole";
  auto span = align_char_spans_to_tokens(m, sent, toks);
  REQUIRE(span.has_value());
  CHECK(*span == TokenSpan{2, 2});

  ConceptMention wide;
  wide.fragments = {{3, 21}};
  wide.text = "takes Pantoprazole";
  auto wspan = align_char_spans_to_tokens(wide, sent, toks);
  REQUIRE(wspan.has_value());
  CHECK(*wspan == TokenSpan{1, 2});
}

TEST_CASE("alignment of the nested discussion phrase") {
  Sentence sent{"doc", {0, 31}, "as long as your rash is itching"};
  auto toks = tokenize_with_offsets(sent.text);
  ConceptMention m;
  m.fragments = {{16, 31}};
  m.text = "rash is itching";
  auto span = align_char_spans_to_tokens(m, sent, toks);
  REQUIRE(span.has_value());
  CHECK(*span == TokenSpan{4, 6});
}

TEST_CASE("alignment fails outside the sentence") {
  Sentence sent{"doc", {10, 20}, "some text."};
  auto toks = tokenize_with_offsets(sent.text);
  ConceptMention m;
  m.fragments = {{0, 4}};
  auto span = align_char_spans_to_tokens(m, sent, toks);
  CHECK(!span.has_value());
}

TEST_CASE("concept instances per sentence and category") {
  auto schema = Schema::builtin("drug-ade");
  auto doc = parse_brat_document("Pt takes Pantoprazole daily.", "T1\tDrug 9 21\tPantoprazole",
                                 schema);
  auto instances = build_concept_instances(doc, schema, Strategy::Natural);
  REQUIRE(instances.size() == 9);
  size_t nonempty = 0;
  for (const auto& i : instances) nonempty += i.answer_spans.empty() ? 0 : 1;
  CHECK(nonempty == 1);
  CHECK(find_instance(instances, "Drug").answer_spans == std::vector<TokenSpan>{{2, 2}});
}

TEST_CASE("two mentions of one category share an instance") {
  auto schema = Schema::builtin("drug-ade");
  auto doc = parse_brat_document("Aspirin and Tylenol given.",
                                 "T1\tDrug 0 7\tAspirin\nT2\tDrug 12 19\tTylenol", schema);
  auto instances = build_concept_instances(doc, schema, Strategy::Natural);
  CHECK(find_instance(instances, "Drug").answer_spans ==
        std::vector<TokenSpan>({{0, 0}, {2, 2}}));
}

TEST_CASE("overlapping gold lands in separate instances") {
  auto schema = Schema::builtin("drug-ade");
  std::string txt = "as long as your rash is itching";
  std::string ann =
      "T1\tDuration 0 31\tas long as your rash is itching\n"
      "T2\tADE 16 20\trash\n"
      "T3\tReason 24 31\titching\n";
  auto doc = parse_brat_document(txt, ann, schema);
  auto instances = build_concept_instances(doc, schema, Strategy::Natural);
  CHECK(find_instance(instances, "Duration").answer_spans == std::vector<TokenSpan>{{0, 6}});
  CHECK(find_instance(instances, "ADE").answer_spans == std::vector<TokenSpan>{{4, 4}});
  CHECK(find_instance(instances, "Reason").answer_spans == std::vector<TokenSpan>{{6, 6}});
  CHECK(detect_bio_conflict(doc));
}

TEST_CASE("disjoint gold has a BIO encoding") {
  auto schema = Schema::builtin("drug-ade");
  auto doc = parse_brat_document("Aspirin daily.", "T1\tDrug 0 7\tAspirin\nT2\tFrequency 8 13\tdaily",
                                 schema);
  CHECK(!detect_bio_conflict(doc));
}

TEST_CASE("relation instances per trigger and compatible type") {
  auto schema = Schema::builtin("drug-ade");
  std::string txt = "Pantoprazole 40 mg daily.";
  std::string ann =
      "T1\tDrug 0 12\tPantoprazole\n"
      "T2\tStrength 13 18\t40 mg\n"
      "T3\tFrequency 19 24\tdaily\n"
      "R1\tStrength-Drug Arg1:T1 Arg2:T2\n"
      "R2\tFrequency-Drug Arg1:T1 Arg2:T3\n";
  auto doc = parse_brat_document(txt, ann, schema);
  auto instances = build_relation_instances(doc, {doc.concepts[0]}, schema, Strategy::Natural);
  REQUIRE(instances.size() == 8);
  size_t nonempty = 0;
  for (const auto& i : instances) nonempty += i.answer_spans.empty() ? 0 : 1;
  CHECK(nonempty == 2);
  CHECK(find_instance(instances, "Strength").answer_spans ==
        std::vector<TokenSpan>({{1, 2}}));
  CHECK(find_instance(instances, "Frequency").answer_spans ==
        std::vector<TokenSpan>({{3, 3}}));
}

TEST_CASE("employment trigger issues four instances") {
  auto schema = Schema::builtin("sdoh");
  auto doc = parse_brat_document("Retired surgical nurse.",
                                 "T1\tEmployment 0 22\tRetired surgical nurse", schema);
  auto instances = build_relation_instances(doc, {doc.concepts[0]}, schema, Strategy::Natural);
  CHECK(instances.size() == 4);
  for (const auto& i : instances) {
    CHECK(i.answer_spans.empty());
    CHECK(i.question.trigger_text == "Retired surgical nurse");
  }
}

TEST_CASE("predicted trigger absent from gold gets empty answers") {
  auto schema = Schema::builtin("drug-ade");
  std::string txt = "Pantoprazole 40 mg daily.";
  std::string ann =
      "T1\tDrug 0 12\tPantoprazole\n"
      "T2\tStrength 13 18\t40 mg\n"
      "R1\tStrength-Drug Arg1:T1 Arg2:T2\n";
  auto doc = parse_brat_document(txt, ann, schema);
  ConceptMention predicted;
  predicted.category = "Drug";
  predicted.fragments = {{0, 15}};  // wrong boundary: not the gold mention
  predicted.text = "Pantoprazole 40";
  auto instances = build_relation_instances(doc, {predicted}, schema, Strategy::Natural);
  REQUIRE(instances.size() == 8);
  for (const auto& i : instances) CHECK(i.answer_spans.empty());
}

TEST_CASE("cross-sentence relations are counted and skipped") {
  auto schema = Schema::builtin("drug-ade");
  std::string txt = "Pantoprazole started. Rash got worse.";
  std::string ann =
      "T1\tDrug 0 12\tPantoprazole\n"
      "T2\tADE 22 26\tRash\n"
      "R1\tADE-Drug Arg1:T1 Arg2:T2\n";
  auto doc = parse_brat_document(txt, ann, schema);
  BuildStats stats;
  auto instances = build_relation_instances(doc, {doc.concepts[0]}, schema, Strategy::Natural,
                                            &stats);
  CHECK(stats.cross_sentence_relations == 1);
  CHECK(find_instance(instances, "ADE").answer_spans.empty());
}

TEST_CASE("gold labels from answer spans") {
  MrcInstance inst;
  inst.answer_spans = {{1, 2}, {4, 4}};
  auto labels = make_gold_labels(inst, 6);
  CHECK(labels.y_start == std::vector<int>({0, 1, 0, 0, 1, 0}));
  CHECK(labels.y_end == std::vector<int>({0, 0, 1, 0, 1, 0}));
  CHECK(labels.y_match == std::vector<TokenSpan>({{1, 2}, {4, 4}}));

  auto trimmed = make_gold_labels(inst, 3);
  CHECK(trimmed.y_match == std::vector<TokenSpan>({{1, 2}}));
}

TEST_CASE("encode produces cls question sep context sep") {
  auto schema = Schema::builtin("drug-ade");
  auto doc = parse_brat_document("Pt takes Pantoprazole daily.", "T1\tDrug 9 21\tPantoprazole",
                                 schema);
  auto instances = build_concept_instances(doc, schema, Strategy::Pseudo);
  auto& inst = const_cast<MrcInstance&>(find_instance(instances, "Drug"));
  auto vocab = build_vocabulary(instances);
  size_t lost = encode_instance(inst, vocab, 128);
  CHECK(lost == 0);
  REQUIRE(inst.encoded());

  // entity: Drug -> [entity, :, Drug]
  REQUIRE(inst.input_ids.size() == 1 + 3 + 1 + 5 + 1);
  CHECK(inst.input_ids.front() == Vocabulary::kCls);
  CHECK(inst.input_ids[4] == Vocabulary::kSep);
  CHECK(inst.input_ids.back() == Vocabulary::kSep);
  CHECK(inst.context_row_begin == 5);
  CHECK(inst.context_rows == 5);
  CHECK(inst.segment_ids ==
        std::vector<int>({0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1}));
  CHECK(vocab.token(inst.input_ids[7]) == "Pantoprazole");
}

TEST_CASE("context is right-truncated and lost answers reported") {
  auto schema = Schema::builtin("drug-ade");
  auto doc = parse_brat_document("Pt takes Pantoprazole daily.", "T1\tDrug 9 21\tPantoprazole",
                                 schema);
  auto instances = build_concept_instances(doc, schema, Strategy::Pseudo);
  auto& inst = const_cast<MrcInstance&>(find_instance(instances, "Drug"));
  auto vocab = build_vocabulary(instances);
  BuildStats stats;
  size_t lost = encode_instance(inst, vocab, 8, &stats);
  CHECK(inst.context_rows == 2);  // 8 - (1 + 3 + 2) = 2 context tokens survive
  CHECK(lost == 1);
  CHECK(stats.truncated_instances == 1);
  CHECK(stats.lost_answers == 1);
  CHECK(inst.input_ids.size() == 8);
}

TEST_CASE("oversized question is rejected") {
  MrcInstance inst;
  inst.question.text = "a b c d e f g h";
  Vocabulary v;
  CHECK_THROWS_AS(encode_instance(inst, v, 8), InputError);
}

TEST_CASE("unknown words encode as UNK") {
  MrcInstance inst;
  inst.context_text = "zzz unheard";
  inst.context_tokens = tokenize_with_offsets(inst.context_text);
  inst.question.text = "find it";
  Vocabulary v;
  encode_instance(inst, v, 16);
  for (size_t i = 1; i + 1 < inst.input_ids.size(); ++i)
    if (inst.input_ids[i] != Vocabulary::kSep) CHECK(inst.input_ids[i] == Vocabulary::kUnk);
}

TEST_CASE("instances jsonl round trip") {
  auto schema = Schema::builtin("drug-ade");
  std::string txt = "Pantoprazole 40 mg daily.";
  std::string ann =
      "T1\tDrug 0 12\tPantoprazole\n"
      "T2\tStrength 13 18\t40 mg\n"
      "R1\tStrength-Drug Arg1:T1 Arg2:T2\n";
  auto doc = parse_brat_document(txt, ann, schema);
  auto instances = build_concept_instances(doc, schema, Strategy::Natural);
  auto rel = build_relation_instances(doc, {doc.concepts[0]}, schema, Strategy::Pseudo);
  instances.insert(instances.end(), rel.begin(), rel.end());

  std::stringstream buf;
  write_instances_jsonl(instances, buf);
  auto loaded = read_instances_jsonl(buf);
  REQUIRE(loaded.size() == instances.size());
  for (size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].doc_id == instances[i].doc_id);
    CHECK(loaded[i].sentence_span == instances[i].sentence_span);
    CHECK(loaded[i].context_text == instances[i].context_text);
    CHECK(loaded[i].question == instances[i].question);
    CHECK(loaded[i].context_tokens == instances[i].context_tokens);
    CHECK(loaded[i].answer_spans == instances[i].answer_spans);
  }
}

TEST_CASE("jsonl reader rejects bad records") {
  std::stringstream bad1("not json\n");
  CHECK_THROWS_AS(read_instances_jsonl(bad1), ParseError);
  std::stringstream bad2(R"({"doc_id":"d","sentence":{"start":0,"end":3},"context":"a b",)"
                         R"("question":{"text":"q","target":"T","strategy":"natural"},)"
                         R"("answers":[[0,9]]})"
                         "\n");
  CHECK_THROWS_AS(read_instances_jsonl(bad2), ParseError);
}
