#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "semshift/corpus.hpp"
#include "test_util.hpp"

namespace semshift {
namespace {

using Tokens = std::vector<std::string>;
using testing::TempDir;
using testing::write_file;

TEST(Tokenize, EmptyInput) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, DetachesPunctuationAndLowercases) {
  EXPECT_EQ(tokenize("The model, trained."), (Tokens{"the", "model", ",", "trained", "."}));
}

TEST(Tokenize, KeepsIntraWordHyphensAndApostrophes) {
  EXPECT_EQ(tokenize("state-of-the-art"), (Tokens{"state-of-the-art"}));
  EXPECT_EQ(tokenize("Don't (re-use)"), (Tokens{"don't", "(", "re-use", ")"}));
  EXPECT_EQ(tokenize("'quoted'"), (Tokens{"'", "quoted", "'"}));
}

TEST(Tokenize, CollapsesDigitRuns) {
  EXPECT_EQ(tokenize("In 2015, pi was 3.14 and COVID19 (1,000)."),
            (Tokens{"in", "<num>", ",", "pi", "was", "<num>", "and", "covid<num>", "(", "<num>",
                    ")", "."}));
}

TEST(Tokenize, SplitsOnUnicodeWhitespace) {
  EXPECT_EQ(tokenize("alpha　beta gamma\tdelta"),
            (Tokens{"alpha", "beta", "gamma", "delta"}));
}

TEST(Tokenize, CasedVariantAligns) {
  const std::string text = "The BERT model (2019) was trained on Wikipedia.";
  const auto lower = tokenize(text);
  const auto cased = tokenize_cased(text);
  ASSERT_EQ(lower.size(), cased.size());
  for (std::size_t i = 0; i < lower.size(); ++i) EXPECT_EQ(lower[i], ascii_lower(cased[i]));
  EXPECT_EQ(cased[1], "BERT");
}

// Random strings drawn from letters, digits, punctuation and whitespace.
std::string random_text(std::mt19937_64& rng) {
  static const std::string alphabet =
      "abcXYZ019 -'.,;:!?()\"<>[]/\t\n#$%&";
  std::uniform_int_distribution<std::size_t> len(0, 40);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string s;
  const auto n = len(rng);
  for (std::size_t i = 0; i < n; ++i) s += alphabet[pick(rng)];
  return s;
}

TEST(Tokenize, PropertiesOnRandomText) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5000; ++trial) {
    const auto text = random_text(rng);
    const auto tokens = tokenize(text);
    EXPECT_EQ(tokens, tokenize(text));  // deterministic
    for (const auto& t : tokens) {
      ASSERT_FALSE(t.empty());
      EXPECT_EQ(t.find_first_of(" \t\n\r"), std::string::npos) << t;
    }
    EXPECT_EQ(tokenize(join_tokens(tokens)), tokens) << "idempotence failed for: " << text;
  }
}

TEST(DetectEnglish, Examples) {
  EXPECT_TRUE(detect_english("the model is trained on the data"));
  EXPECT_FALSE(detect_english("语言模型训练数据"));
  // ASCII letters only, but none of the stopwords.
  EXPECT_FALSE(detect_english("xqz bnm vrk wpl"));
  EXPECT_FALSE(detect_english(""));
  EXPECT_FALSE(detect_english("   \t "));
}

TEST(DetectEnglish, AlphaFractionThreshold) {
  // 8 letters of 10 non-space characters: exactly at the threshold.
  EXPECT_TRUE(detect_english("the abcde 12"));
  // 8 of 11: below.
  EXPECT_FALSE(detect_english("the abcde 123"));
}

TEST(DetectEnglish, InvariantUnderWhitespaceNormalization) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> words = {"the", "model", "is", "data", "xqz", "语",
                                          "42",  "of",    "!!", "net"};
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  std::uniform_int_distribution<int> gap(1, 4);
  const std::vector<std::string> spaces = {" ", "\t", "\n", "　", " "};
  for (int trial = 0; trial < 500; ++trial) {
    std::string compact;
    std::string messy = " ";
    for (int i = 0; i < 6; ++i) {
      const auto& w = words[pick(rng)];
      compact += (i ? " " : "") + w;
      messy += w;
      for (int g = gap(rng); g > 0; --g) messy += spaces[static_cast<std::size_t>(g) % spaces.size()];
    }
    EXPECT_EQ(detect_english(compact), detect_english(messy)) << compact;
  }
}

TEST(LoadCorpus, TwoSlicesThreeDocuments) {
  TempDir dir;
  write_file(dir / "c.jsonl",
             R"({"id":"a","time":"2015","text":"The network is trained on the data."})" "\n"
             R"({"id":"b","time":"2015","text":"A model of the world.","extra":1})" "\n"
             R"({"id":"c","time":"2021","text":"The transformer is large."})" "\n");
  LoadReport report;
  const Corpus corpus = load_corpus(dir / "c.jsonl", {}, &report);
  EXPECT_EQ(corpus.documents.size(), 3u);
  ASSERT_EQ(corpus.slices.size(), 2u);
  EXPECT_EQ(corpus.slices.at("2015").documents.size(), 2u);
  EXPECT_EQ(corpus.slices.at("2021").documents.size(), 1u);
  EXPECT_EQ(report.loaded, 3u);
  EXPECT_TRUE(report.malformed_lines.empty());
  for (const auto& [label, slice] : corpus.slices) {
    for (const auto& d : slice.documents) EXPECT_EQ(d->time_label, label);
  }
}

TEST(LoadCorpus, EmptyFileIsEmptyCorpus) {
  TempDir dir;
  write_file(dir / "empty.jsonl", "");
  try {
    load_corpus(dir / "empty.jsonl");
    FAIL() << "expected EmptyCorpus";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyCorpus);
  }
}

TEST(LoadCorpus, MissingFile) {
  try {
    load_corpus("/nonexistent/semshift/corpus.jsonl");
    FAIL() << "expected MissingFile";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingFile);
  }
}

TEST(LoadCorpus, DropsNonEnglish) {
  TempDir dir;
  write_file(dir / "c.jsonl",
             R"({"id":"en","time":"2015","text":"the model is trained on the data"})" "\n"
             R"({"id":"zh","time":"2015","text":"语言模型 训练数据 语言"})" "\n");
  LoadReport report;
  const Corpus corpus = load_corpus(dir / "c.jsonl", {}, &report);
  EXPECT_EQ(corpus.documents.size(), 1u);
  EXPECT_EQ(report.dropped_language, 1u);
  EXPECT_EQ(corpus.documents[0]->id, "en");

  CorpusOptions no_filter;
  no_filter.language_filter = false;
  EXPECT_EQ(load_corpus(dir / "c.jsonl", no_filter).documents.size(), 2u);
}

TEST(LoadCorpus, MalformedAndShortLinesAreSkipped) {
  TempDir dir;
  write_file(dir / "c.jsonl",
             R"({"id":"a","time":"2015","text":"the model is trained"})" "\n"
             "not json\n"
             R"({"id":"b","time":2015,"text":"the model is trained"})" "\n"
             R"({"id":"a","time":"2015","text":"the duplicate id is here"})" "\n"
             R"({"id":"c","time":"2015","text":"the end"})" "\n"
             "\n");
  LoadReport report;
  const Corpus corpus = load_corpus(dir / "c.jsonl", {}, &report);
  EXPECT_EQ(corpus.documents.size(), 1u);
  EXPECT_EQ(report.malformed_lines, (std::vector<std::size_t>{2, 3, 4}));
  EXPECT_EQ(report.dropped_short, 1u);
}

TEST(LoadCorpus, VocabMatchesRecount) {
  TempDir dir;
  std::mt19937_64 rng(3);
  const std::vector<std::string> words = {"the", "model", "data", "net", "of", "bank", "river"};
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  std::string content;
  for (int i = 0; i < 50; ++i) {
    std::string text = "the";
    for (int j = 0; j < 8; ++j) text += " " + words[pick(rng)];
    content += nlohmann::json{{"id", std::to_string(i)}, {"time", i % 3 ? "x" : "y"}, {"text", text}}
                   .dump() +
               "\n";
  }
  write_file(dir / "c.jsonl", content);
  const Corpus corpus = load_corpus(dir / "c.jsonl");
  std::size_t vocab_total = 0;
  for (const auto& [w, c] : corpus.vocab) vocab_total += c;
  EXPECT_EQ(vocab_total, corpus.token_count());
  Vocab recount;
  for (const auto& d : corpus.documents) {
    for (const auto& t : d->tokens) ++recount[t];
  }
  EXPECT_EQ(recount, corpus.vocab);
  std::size_t in_slices = 0;
  for (const auto& [label, s] : corpus.slices) in_slices += s.documents.size();
  EXPECT_EQ(in_slices, corpus.documents.size());
}

TEST(SliceByTime, OrderAndUnknownLabel) {
  std::vector<DocumentPtr> docs = {make_document("a", "2015", "the model is here"),
                                   make_document("b", "2021", "the model is there")};
  const Corpus corpus = build_corpus(docs);
  auto one = slice_by_time(corpus, {"2015"});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].label, "2015");
  auto both = slice_by_time(corpus, {"2021", "2015"});
  ASSERT_EQ(both.size(), 2u);
  EXPECT_EQ(both[0].label, "2021");
  EXPECT_EQ(both[1].label, "2015");
  try {
    slice_by_time(corpus, {"1999"});
    FAIL() << "expected UnknownLabel";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownLabel);
  }
}

}  // namespace
}  // namespace semshift
