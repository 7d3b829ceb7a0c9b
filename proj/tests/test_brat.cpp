#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mrc/brat.hpp"
#include "mrc/errors.hpp"
#include "mrc/schema.hpp"

using namespace mrc;

namespace {

Schema ade() { return Schema::builtin("drug-ade"); }

Document make_doc(const std::string& text) {
  Document d;
  d.doc_id = "doc";
  d.text = text;
  return d;
}

}  // namespace

TEST_CASE("parse single entity line") {
  auto doc = parse_brat_document("Pt takes Pantoprazole daily.", "T1\tDrug 9 21\tPantoprazole", ade());
  REQUIRE(doc.concepts.size() == 1);
  CHECK(doc.concepts[0].id == "T1");
  CHECK(doc.concepts[0].category == "Drug");
  CHECK(doc.concepts[0].fragments == std::vector<CharSpan>{{9, 21}});
  CHECK(doc.concepts[0].text == "Pantoprazole");
  CHECK(doc.relations.empty());
}

TEST_CASE("parse empty inputs") {
  auto doc = parse_brat_document("", "", ade());
  CHECK(doc.concepts.empty());
  CHECK(doc.relations.empty());
}

TEST_CASE("parse relation with matching categories") {
  std::string txt = "Pantoprazole 40 mg daily.";
  std::string ann =
      "T1\tDrug 0 12\tPantoprazole\n"
      "T2\tStrength 13 18\t40 mg\n"
      "R1\tStrength-Drug Arg1:T1 Arg2:T2\n";
  auto doc = parse_brat_document(txt, ann, ade());
  REQUIRE(doc.relations.size() == 1);
  CHECK(doc.relations[0].relation_type == "Strength-Drug");
  CHECK(doc.relations[0].arg1 == "T1");
  CHECK(doc.relations[0].arg2 == "T2");
}

TEST_CASE("relation type/category mismatch rejected") {
  std::string txt = "Pantoprazole daily forever.";
  std::string ann =
      "T1\tDrug 0 12\tPantoprazole\n"
      "T2\tFrequency 13 18\tdaily\n"
      "R1\tStrength-Drug Arg1:T1 Arg2:T2\n";
  CHECK_THROWS_WITH_AS(parse_brat_document(txt, ann, ade()),
                       doctest::Contains("relation type/category mismatch"), ParseError);
}

TEST_CASE("parse errors name the offending line") {
  auto check_line = [&](const std::string& ann, int line, const char* needle) {
    try {
      parse_brat_document("Pt takes Pantoprazole daily.", ann, ade());
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == line);
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  check_line("T1\tDrug 9 99\tPantoprazole", 1, "beyond text end");
  check_line("T1\tDrug nine 21\tPantoprazole", 1, "malformed offset");
  check_line("T1\tDrug 9 21\tPantopruzole", 1, "text field mismatch");
  check_line("T1\tDrug 9 21\tPantoprazole\nT2\tPotato 0 2\tPt", 2, "not in schema");
  check_line("T1\tDrug 9 21\tPantoprazole\nR1\tStrength-Drug Arg1:T1 Arg2:T9", 2,
             "does not resolve");
  check_line("T1\tDrug 21 9\tPantoprazole", 1, "start >= end");
}

TEST_CASE("non-T/R lines are ignored and counted") {
  std::string ann =
      "T1\tDrug 9 21\tPantoprazole\n"
      "A1\tNegation T1\n"
      "#1\tAnnotatorNotes T1\tcheck me\n";
  ParseStats stats;
  auto doc = parse_brat_document("Pt takes Pantoprazole daily.", ann, ade(), "doc", &stats);
  CHECK(doc.concepts.size() == 1);
  CHECK(stats.ignored_lines == 2);
}

TEST_CASE("parsing is insensitive to line order") {
  std::string txt = "Pantoprazole 40 mg daily.";
  std::string fwd =
      "T1\tDrug 0 12\tPantoprazole\n"
      "T2\tStrength 13 18\t40 mg\n"
      "R1\tStrength-Drug Arg1:T1 Arg2:T2\n";
  std::string rev =
      "R1\tStrength-Drug Arg1:T1 Arg2:T2\n"
      "T2\tStrength 13 18\t40 mg\n"
      "T1\tDrug 0 12\tPantoprazole\n";
  CHECK(documents_equivalent(parse_brat_document(txt, fwd, ade()),
                             parse_brat_document(txt, rev, ade())));
}

TEST_CASE("multi-fragment spans parse faithfully") {
  //                     0123456789012345678901234567
  std::string txt = "take Pantoprazole or the gel";
  std::string ann = "T1\tDrug 5 17;25 28\tPantoprazole gel";
  auto doc = parse_brat_document(txt, ann, ade());
  REQUIRE(doc.concepts.size() == 1);
  CHECK(doc.concepts[0].fragments == std::vector<CharSpan>({{5, 17}, {25, 28}}));
  CHECK(doc.concepts[0].envelope() == CharSpan{5, 28});
  CHECK(doc.concepts[0].text == "Pantoprazole gel");
}

TEST_CASE("multi-fragment text mismatch rejected") {
  std::string txt = "take Pantoprazole or the gel";
  std::string ann = "T1\tDrug 5 17;25 28\tPantoprazolegel";
  CHECK_THROWS_AS(parse_brat_document(txt, ann, ade()), ParseError);
}

TEST_CASE("serialize single mention") {
  auto doc = parse_brat_document("Pt takes Pantoprazole daily.", "T1\tDrug 9 21\tPantoprazole", ade());
  CHECK(serialize_brat(doc) == "T1\tDrug 9 21\tPantoprazole\n");
}

TEST_CASE("serialize empty document") {
  CHECK(serialize_brat(make_doc("nothing here")) == "");
}

TEST_CASE("serialize relations after entities") {
  std::string txt = "Pantoprazole 40 mg daily.";
  std::string ann =
      "T1\tDrug 0 12\tPantoprazole\n"
      "T2\tStrength 13 18\t40 mg\n"
      "R1\tStrength-Drug Arg1:T1 Arg2:T2\n";
  auto doc = parse_brat_document(txt, ann, ade());
  CHECK(serialize_brat(doc) ==
        "T1\tDrug 0 12\tPantoprazole\n"
        "T2\tStrength 13 18\t40 mg\n"
        "R1\tStrength-Drug Arg1:T1 Arg2:T2\n");
}

TEST_CASE("round trip with id renaming") {
  std::string txt = "Pantoprazole 40 mg daily for rash.";
  std::string ann =
      "T7\tDrug 0 12\tPantoprazole\n"
      "T3\tStrength 13 18\t40 mg\n"
      "T5\tReason 29 33\trash\n"
      "R2\tStrength-Drug Arg1:T7 Arg2:T3\n"
      "R9\tReason-Drug Arg1:T7 Arg2:T5\n";
  auto doc = parse_brat_document(txt, ann, ade());
  auto again = parse_brat_document(txt, serialize_brat(doc), ade());
  CHECK(documents_equivalent(doc, again));
  CHECK(again.concepts[0].id == "T1");
}

TEST_CASE("sentence split on terminator before uppercase") {
  auto s = split_sentences(make_doc("He smokes. ETOH: none."));
  REQUIRE(s.size() == 2);
  CHECK(s[0].text == "He smokes.");
  CHECK(s[1].text == "ETOH: none.");
  CHECK(s[0].span == CharSpan{0, 10});
  CHECK(s[1].span == CharSpan{11, 22});
}

TEST_CASE("sentence split on newline") {
  auto s = split_sentences(make_doc("Line one\nLine two"));
  REQUIRE(s.size() == 2);
  CHECK(s[0].text == "Line one");
  CHECK(s[1].text == "Line two");
}

TEST_CASE("no split inside decimal number") {
  auto s = split_sentences(make_doc("Dose 1.5 mg daily."));
  REQUIRE(s.size() == 1);
  CHECK(s[0].text == "Dose 1.5 mg daily.");
}

TEST_CASE("no split before lowercase continuation") {
  auto s = split_sentences(make_doc("Taken p.o. twice daily."));
  CHECK(s.size() == 1);
}

TEST_CASE("split before digit") {
  auto s = split_sentences(make_doc("Stop now. 40 mg was too much."));
  REQUIRE(s.size() == 2);
  CHECK(s[1].text == "40 mg was too much.");
}

TEST_CASE("sentence spans cover all non-whitespace text") {
  std::string text = "One sentence. Two things here.\n\n  Indented line.\nLast";
  auto doc = make_doc(text);
  auto sents = split_sentences(doc);
  REQUIRE(!sents.empty());
  for (size_t i = 1; i < sents.size(); ++i) CHECK(sents[i - 1].span.end <= sents[i].span.start);
  std::vector<bool> covered(text.size(), false);
  for (const auto& s : sents) {
    CHECK(doc.text.substr(s.span.start, s.span.length()) == s.text);
    for (size_t i = s.span.start; i < s.span.end; ++i) covered[i] = true;
  }
  for (size_t i = 0; i < text.size(); ++i)
    if (!std::isspace(static_cast<unsigned char>(text[i]))) CHECK(covered[i]);
}

TEST_CASE("mention straddling a computed boundary merges sentences") {
  //                 0         1         2         3
  //                 0123456789012345678901234567890123456
  std::string txt = "Rash for 2 wk. Stopped drug. He is ok.";
  std::string ann = "T1\tDuration 9 22\t2 wk. Stopped";
  auto doc = parse_brat_document(txt, ann, ade());
  auto sents = split_sentences(doc);
  REQUIRE(sents.size() == 2);
  CHECK(sents[0].text == "Rash for 2 wk. Stopped drug.");
  CHECK(sents[1].text == "He is ok.");
  CharSpan env = doc.concepts[0].envelope();
  bool contained = false;
  for (const auto& s : sents) contained = contained || s.span.contains(env);
  CHECK(contained);
}

TEST_CASE("corpus directory round trip") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "mrc_brat_corpus_test";
  fs::remove_all(dir);

  auto doc_a = parse_brat_document("Pantoprazole 40 mg.", "T1\tDrug 0 12\tPantoprazole", ade(), "a");
  auto doc_b = parse_brat_document("No drugs today.", "", ade(), "b");
  write_brat_document(doc_a, dir.string());
  write_brat_document(doc_b, dir.string());
  {
    std::ofstream extra(dir / "c.txt", std::ios::binary);
    extra << "Unannotated text.";
  }

  ParseStats stats;
  auto docs = load_brat_corpus(dir.string(), ade(), &stats);
  REQUIRE(docs.size() == 3);
  CHECK(docs[0].doc_id == "a");
  CHECK(docs[1].doc_id == "b");
  CHECK(docs[2].doc_id == "c");
  CHECK(documents_equivalent(docs[0], doc_a));
  CHECK(stats.missing_ann == 1);
  fs::remove_all(dir);
}

TEST_CASE("missing corpus directory raises io error") {
  CHECK_THROWS_AS(load_brat_corpus("/nonexistent/brat/dir", ade()), IoError);
}

TEST_CASE("corpus parse failure names the document") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "mrc_brat_badcorpus_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream t(dir / "bad.txt", std::ios::binary);
    t << "short";
    std::ofstream a(dir / "bad.ann", std::ios::binary);
    a << "T1\tDrug 0 99\twrong";
  }
  CHECK_THROWS_WITH_AS(load_brat_corpus(dir.string(), ade()), doctest::Contains("bad.ann"),
                       ParseError);
  fs::remove_all(dir);
}

TEST_CASE("documents_equivalent detects differences") {
  std::string txt = "Pantoprazole daily.";
  auto a = parse_brat_document(txt, "T1\tDrug 0 12\tPantoprazole", ade());
  auto b = parse_brat_document(txt, "T5\tDrug 0 12\tPantoprazole", ade());
  auto c = parse_brat_document(txt, "T1\tFrequency 13 18\tdaily", ade());
  CHECK(documents_equivalent(a, b));
  CHECK(!documents_equivalent(a, c));
  CHECK(!documents_equivalent(a, make_doc("Pantoprazole daily.")));
}
