#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "semshift/embeddings.hpp"
#include "synthetic.hpp"
#include "test_util.hpp"

namespace semshift {
namespace {

using testing::TempDir;
using testing::doc_from_tokens;
using testing::write_file;

TimeSlice numbered_slice(std::size_t n, std::size_t target_pos) {
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < n; ++i) tokens.push_back("w" + std::to_string(i));
  tokens[target_pos] = "target";
  return TimeSlice{"t", {doc_from_tokens("d0", "t", tokens)}};
}

TEST(CollectOccurrences, WindowArithmetic) {
  const auto occs = collect_occurrences(numbered_slice(300, 150), "target", 128);
  ASSERT_EQ(occs.size(), 1u);
  const auto& o = occs[0];
  ASSERT_EQ(o.window.size(), 128u);
  EXPECT_EQ(o.window.front(), "w87");
  EXPECT_EQ(o.window.back(), "w214");
  EXPECT_EQ(o.center, 63u);
  EXPECT_EQ(o.window[o.center], "target");
  EXPECT_EQ(o.position, 150u);
  EXPECT_EQ(o.doc_id, "d0");
  EXPECT_EQ(o.time_label, "t");
}

TEST(CollectOccurrences, ClipsAtDocumentEdges) {
  const auto occs = collect_occurrences(numbered_slice(10, 2), "target", 128);
  ASSERT_EQ(occs.size(), 1u);
  EXPECT_EQ(occs[0].window.size(), 10u);
  EXPECT_EQ(occs[0].center, 2u);
}

TEST(CollectOccurrences, EvenAndOddWindows) {
  const auto slice = numbered_slice(50, 25);
  auto odd = collect_occurrences(slice, "target", 5);
  EXPECT_EQ(odd[0].window.front(), "w23");
  EXPECT_EQ(odd[0].window.back(), "w27");
  auto even = collect_occurrences(slice, "target", 6);
  EXPECT_EQ(even[0].window.front(), "w23");
  EXPECT_EQ(even[0].window.back(), "w28");
}

TEST(CollectOccurrences, EveryOccurrenceInOrder) {
  TimeSlice slice{"t",
                  {doc_from_tokens("a", "t", {"x", "bank", "y", "bank"}),
                   doc_from_tokens("b", "t", {"bank", "z"})}};
  const auto occs = collect_occurrences(slice, "bank", 3);
  ASSERT_EQ(occs.size(), 3u);
  EXPECT_EQ(occs[0].position, 1u);
  EXPECT_EQ(occs[1].position, 3u);
  EXPECT_EQ(occs[2].doc_id, "b");
  EXPECT_EQ(occs[1].window, (std::vector<std::string>{"y", "bank"}));
}

TEST(CollectOccurrences, Errors) {
  const auto slice = numbered_slice(10, 2);
  try {
    collect_occurrences(slice, "absent");
    FAIL() << "expected WordAbsent";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kWordAbsent);
  }
  EXPECT_THROW(collect_occurrences(slice, "target", 2), Error);
}

TEST(EmbeddingFile, ReadsTwoRecords) {
  TempDir dir;
  write_file(dir / "e.jsonl",
             R"({"format":"semshift-emb","version":1,"dim":3})" "\n"
             R"({"word":"bank","time":"2015","doc_id":"a","position":4,"vector":[1,0,0]})" "\n"
             R"({"word":"bank","time":"2015","doc_id":"b","position":0,"vector":[0,0.5,0.5]})" "\n");
  const auto table = read_embedding_file(dir / "e.jsonl");
  ASSERT_EQ(table.size(), 1u);
  const auto& m = table.at({"bank", "2015"});
  EXPECT_EQ(m.size(), 2u);
  EXPECT_EQ(m.dim(), 3u);
  EXPECT_EQ(m.rows(1, 1), 0.5);
  EXPECT_EQ(m.refs[0], (OccurrenceRef{"a", 4}));
}

TEST(EmbeddingFile, DimensionMismatch) {
  TempDir dir;
  write_file(dir / "e.jsonl",
             R"({"format":"semshift-emb","version":1,"dim":3})" "\n"
             R"({"word":"bank","time":"2015","doc_id":"a","position":4,"vector":[1,0]})" "\n");
  try {
    read_embedding_file(dir / "e.jsonl");
    FAIL() << "expected DimMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimMismatch);
  }
}

TEST(EmbeddingFile, EmptyMissingAndHeaderless) {
  TempDir dir;
  write_file(dir / "empty.jsonl", "");
  EXPECT_TRUE(read_embedding_file(dir / "empty.jsonl").empty());
  write_file(dir / "nohdr.jsonl",
             R"({"word":"bank","time":"2015","doc_id":"a","position":4,"vector":[1,0]})" "\n");
  try {
    read_embedding_file(dir / "nohdr.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedRecord);
  }
  try {
    read_embedding_file(dir / "missing.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingFile);
  }
}

TEST(EmbeddingFile, RoundTripWithinFloatPrecision) {
  TempDir dir;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  EmbeddingTable table;
  for (const char* word : {"bank", "cell"}) {
    for (const char* time : {"2015", "2021"}) {
      UsageMatrix m{word, time, Matrix(0, 16), {}};
      for (std::size_t i = 0; i < 7; ++i) {
        std::vector<double> v(16);
        for (auto& x : v) x = g(rng);
        m.rows.append_row(v);
        m.refs.push_back({std::string(word) + std::to_string(i), i * 3});
      }
      table[{word, time}] = m;
    }
  }
  write_embedding_file(dir / "e.jsonl", table, 16);
  const auto back = read_embedding_file(dir / "e.jsonl");
  ASSERT_EQ(back.size(), table.size());
  for (const auto& [key, m] : table) {
    const auto& r = back.at(key);
    ASSERT_EQ(r.refs, m.refs);
    for (std::size_t i = 0; i < m.rows.data().size(); ++i) {
      EXPECT_NEAR(r.rows.data()[i], m.rows.data()[i], 1e-6 * std::max(1.0, std::abs(m.rows.data()[i])));
    }
  }
  // Writing what was read reproduces the file byte for byte.
  write_embedding_file(dir / "e2.jsonl", back, 16);
  EXPECT_EQ(testing::read_file(dir / "e.jsonl"), testing::read_file(dir / "e2.jsonl"));
}

TEST(EmbeddingWriter, RejectsWrongDimension) {
  std::ostringstream out;
  EmbeddingWriter w(out, 4);
  const std::vector<double> v = {1.0, 2.0};
  EXPECT_THROW(w.write("x", "t", "d", 0, v), Error);
}

TEST(NormalizeMatrix, Examples) {
  UsageMatrix m{"w", "t", Matrix{{3, 4}, {0, 2}}, {}};
  const auto n = normalize_matrix(m);
  EXPECT_DOUBLE_EQ(n.rows(0, 0), 0.6);
  EXPECT_DOUBLE_EQ(n.rows(0, 1), 0.8);
  EXPECT_DOUBLE_EQ(n.rows(1, 1), 1.0);
}

TEST(NormalizeMatrix, UnitNormsAndIdempotence) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    Matrix rows(0, 12);
    for (int i = 0; i < 5; ++i) {
      std::vector<double> v(12);
      for (auto& x : v) x = g(rng) * 10.0;
      rows.append_row(v);
    }
    const auto once = normalize_matrix(UsageMatrix{"w", "t", rows, {}});
    for (std::size_t i = 0; i < once.size(); ++i) EXPECT_NEAR(l2_norm(once.rows.row(i)), 1.0, 1e-12);
    const auto twice = normalize_matrix(once);
    for (std::size_t i = 0; i < once.rows.data().size(); ++i) {
      EXPECT_NEAR(once.rows.data()[i], twice.rows.data()[i], 1e-12);
    }
  }
}

TEST(NormalizeMatrix, ZeroRowThrows) {
  try {
    normalize_matrix(UsageMatrix{"w", "t", Matrix{{1, 0}, {0, 0}}, {}});
    FAIL() << "expected ZeroVector";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroVector);
  }
}

UsageOccurrence occurrence(std::vector<std::string> window, std::size_t center) {
  return UsageOccurrence{window[center], "d", 0, std::move(window), center, "t"};
}

TEST(FallbackEmbed, DeterministicAndIgnoresCentre) {
  const auto a = occurrence({"river", "bank", "water"}, 1);
  const auto b = occurrence({"river", "shore", "water"}, 1);
  EXPECT_EQ(fallback_embed(a, 64, 3), fallback_embed(a, 64, 3));
  EXPECT_EQ(fallback_embed(a, 64, 3), fallback_embed(b, 64, 3));
  EXPECT_NE(fallback_embed(a, 64, 3), fallback_embed(a, 64, 4));
  EXPECT_THROW(fallback_embed(a, 4, 3), Error);
}

TEST(FallbackEmbed, LoneTokenIsZero) {
  const auto v = fallback_embed(occurrence({"bank"}, 0), 32, 0);
  EXPECT_EQ(l2_norm(v), 0.0);
}

TEST(FallbackEmbed, DisjointContextsAreNearlyOrthogonal) {
  testing::WordFactory words(21);
  const auto left = words.take(10);
  const auto right = words.take(10);
  auto wa = left;
  wa.insert(wa.begin() + 5, "bank");
  auto wb = right;
  wb.insert(wb.begin() + 5, "bank");
  int below = 0;
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto a = fallback_embed(occurrence(wa, 5), 256, seed);
    const auto b = fallback_embed(occurrence(wb, 5), 256, seed);
    const double cos = dot(a, b) / (l2_norm(a) * l2_norm(b));
    total += cos;
    if (cos < 0.5) ++below;
  }
  EXPECT_GE(below, 990);
  EXPECT_LT(std::abs(total / 1000.0), 0.05);
}

TEST(EmbedOccurrences, AlignsRefs) {
  TimeSlice slice{"t",
                  {doc_from_tokens("a", "t", {"x", "bank", "y"}),
                   doc_from_tokens("b", "t", {"bank", "z"})}};
  const auto m = embed_occurrences(collect_occurrences(slice, "bank", 5), 32, 0);
  EXPECT_EQ(m.size(), 2u);
  EXPECT_EQ(m.dim(), 32u);
  EXPECT_EQ(m.refs[1], (OccurrenceRef{"b", 0}));
  EXPECT_EQ(m.word, "bank");
}

}  // namespace
}  // namespace semshift
