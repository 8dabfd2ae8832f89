#include <gtest/gtest.h>

#include <sstream>

#include "citescope/corpus.hpp"
#include "citescope/snapshot.hpp"
#include "oracles/raw_corpus.hpp"

using namespace citescope;
using oracle::RawWork;

TEST(Corpus, ThreeRecordDegrees) {
  auto c = oracle::build({{"A", 2000, {}}, {"B", 2001, {"A"}}, {"C", 2001, {"A"}}});
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c.citers(c.at("A")).size(), 2u);
  EXPECT_EQ(c.references(c.at("B")).size(), 1u);
  EXPECT_EQ(c.works_in_year(2001).size(), 2u);
}

TEST(Corpus, DanglingReferenceDropped) {
  IngestReport rep;
  auto c = oracle::build({{"D", 2001, {"Z"}}}, {1000, 3000}, &rep);
  EXPECT_EQ(c.size(), 1u);
  EXPECT_EQ(c.references(0).size(), 0u);
  EXPECT_EQ(rep.dangling_refs, 1u);
}

TEST(Corpus, EmptyBuild) {
  IngestReport rep;
  auto c = oracle::build({}, {1000, 3000}, &rep);
  EXPECT_TRUE(c.empty());
  EXPECT_EQ(rep.works, 0u);
  EXPECT_TRUE(c.observed_years().empty());
}

TEST(Corpus, RejectionsAreCounted) {
  CorpusBuilder b({1990, 2010});
  EXPECT_TRUE(b.add({"A", 2000, {"A", "B", "B"}, 1, {}}));
  EXPECT_FALSE(b.add({"A", 2001, {}, 1, {}}));
  EXPECT_FALSE(b.add({"X", 1950, {}, 1, {}}));
  EXPECT_FALSE(b.add({"", 2000, {}, 1, {}}));
  EXPECT_TRUE(b.add({"B", 1999, {}, kUnlabeledSubfield, {}}));
  IngestReport rep;
  auto c = b.build(&rep);
  EXPECT_EQ(rep.duplicate_id, 1u);
  EXPECT_EQ(rep.year_out_of_range, 1u);
  EXPECT_EQ(rep.missing_id, 1u);
  EXPECT_EQ(rep.self_refs, 1u);
  EXPECT_EQ(rep.duplicate_refs, 1u);
  EXPECT_EQ(rep.unlabeled_subfield, 1u);
  EXPECT_EQ(c.year(c.at("A")), 2000);  // first record wins
  EXPECT_EQ(c.references(c.at("A")).size(), 1u);
}

TEST(Corpus, UnknownLookupThrows) {
  auto c = oracle::build({{"A", 2000, {}}});
  EXPECT_THROW(c.at("nope"), LookupError);
  EXPECT_THROW(yearly_citation_series(c, 7, 3), LookupError);
}

TEST(Corpus, TransposeAndSortedRowsOnRandomCorpora) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto c = oracle::build(oracle::random_corpus(seed, 150));
    std::size_t in_edges = 0;
    for (WorkIndex u = 0; u < c.size(); ++u) {
      auto refs = c.references(u);
      EXPECT_TRUE(std::is_sorted(refs.begin(), refs.end()));
      for (WorkIndex v : refs) {
        auto cit = c.citers(v);
        EXPECT_TRUE(std::binary_search(cit.begin(), cit.end(), u));
      }
      auto cit = c.citers(u);
      EXPECT_TRUE(std::is_sorted(cit.begin(), cit.end()));
      for (WorkIndex w : cit) EXPECT_TRUE(c.cites(w, u));
      in_edges += cit.size();
    }
    EXPECT_EQ(in_edges, c.edge_count());
  }
}

TEST(YearlySeries, CountsByOffset) {
  auto c = oracle::build({{"f", 2000, {}},
                          {"a", 2000, {"f"}},
                          {"b", 2001, {"f"}},
                          {"c", 2001, {"f"}},
                          {"d", 2003, {"f"}},
                          {"early", 1998, {"f"}}});
  auto s = yearly_citation_series(c, c.at("f"), 3);
  EXPECT_EQ(s.gamma, (std::vector<std::uint32_t>{1, 2, 0, 1}));
  EXPECT_EQ(s.early_citers, 1u);
  EXPECT_EQ(c.early_citations(), 1u);
}

TEST(YearlySeries, NoCiters) {
  auto c = oracle::build({{"f", 2000, {}}});
  auto s = yearly_citation_series(c, 0, 10);
  EXPECT_EQ(s.gamma, std::vector<std::uint32_t>(11, 0));
}

TEST(YearlySeries, SumBoundedByInDegree) {
  auto c = oracle::build(oracle::random_corpus(9, 200));
  for (WorkIndex w = 0; w < c.size(); ++w) {
    auto s = yearly_citation_series(c, w, 100);
    std::uint64_t sum = s.early_citers;
    for (auto g : s.gamma) sum += g;
    EXPECT_EQ(sum, c.citers(w).size());
  }
}

TEST(CocitedBag, MultisetUnion) {
  auto c = oracle::build({{"f", 2000, {}},
                          {"a", 1999, {}},
                          {"b", 1999, {}},
                          {"P1", 2001, {"f", "a", "b"}},
                          {"P2", 2001, {"f", "b"}},
                          {"P3", 2001, {"f"}}});
  auto bag = cocited_bag(c, c.at("f"), 1);
  ASSERT_EQ(bag.members.size(), 2u);
  EXPECT_EQ(bag.members[0], std::make_pair(c.at("a"), 1u));
  EXPECT_EQ(bag.members[1], std::make_pair(c.at("b"), 2u));
  EXPECT_EQ(bag.size, 3u);
  EXPECT_EQ(cocited_bag(c, c.at("f"), 1, CocitationSemantics::Set).size, 2u);
  EXPECT_EQ(cocited_bag(c, c.at("f"), 4).size, 0u);
}

TEST(CocitedBag, SizeMatchesReferenceCountIdentity) {
  auto c = oracle::build(oracle::random_corpus(4, 300));
  for (WorkIndex f = 0; f < c.size(); ++f) {
    for (int t = 0; t <= 5; ++t) {
      auto bag = cocited_bag(c, f, t);
      std::uint64_t expect = 0;
      for (WorkIndex p : c.citers(f)) {
        if (c.year(p) == c.year(f) + t) expect += c.references(p).size() - 1;
      }
      EXPECT_EQ(bag.size, expect);
      for (auto& [m, k] : bag.members) EXPECT_NE(m, f);
    }
  }
}

TEST(Snapshot, RoundTripIsBitIdentical) {
  auto works = oracle::random_corpus(3, 120);
  works[0].countries = {"US", "IL"};
  works[5].countries = {"DE"};
  auto c = oracle::build(works);
  std::stringstream a, b;
  write_snapshot(a, c);
  auto loaded = read_snapshot(a);
  write_snapshot(b, loaded);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(loaded.in_adjacency(), c.in_adjacency());
  EXPECT_EQ(loaded.countries(0), c.countries(0));

  // Re-ingesting the same stream produces the same bytes.
  std::stringstream again;
  write_snapshot(again, oracle::build(works));
  EXPECT_EQ(again.str(), a.str());
}

TEST(Snapshot, RejectsBadHeader) {
  std::stringstream s("NOTASNAPSHOT");
  EXPECT_THROW(read_snapshot(s), FormatError);
  auto c = oracle::build({{"A", 2000, {}}});
  std::stringstream good;
  write_snapshot(good, c);
  auto bytes = good.str();
  bytes[8] = 9;  // version
  std::stringstream bad(bytes);
  EXPECT_THROW(read_snapshot(bad), FormatError);
  std::stringstream truncated(good.str().substr(0, 20));
  EXPECT_THROW(read_snapshot(truncated), FormatError);
}
