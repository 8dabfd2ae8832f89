#include <gtest/gtest.h>

#include "citescope/impact_metrics.hpp"
#include "oracles/raw_corpus.hpp"

using namespace citescope;
using oracle::RawWork;

namespace {

std::vector<RawWork> six_work_fixture() {
  return {{"f", 2000, {}},        {"a", 2000, {}},      {"b", 2000, {}},
          {"P1", 2001, {"f", "a"}}, {"Q1", 2001, {"a"}}, {"P2", 2002, {"f", "b"}}};
}

}  // namespace

TEST(Nbnc, SixWorkFixture) {
  auto works = six_work_fixture();
  auto c = oracle::build(works);
  MetricOptions opt;
  opt.horizon = 10;
  auto s = nbnc(c, c.at("f"), opt);
  EXPECT_EQ(s.yearly_terms[1], 0.5);
  EXPECT_EQ(s.yearly_terms[2], 1.0);
  EXPECT_EQ(s.value, 1.5);
  EXPECT_TRUE(s.truncated_horizon);
  EXPECT_EQ(oracle::naive_nbnc(oracle::resolve(works), "f", 10).value, 1.5);
}

TEST(Nbnc, UncitedIsZero) {
  auto c = oracle::build({{"f", 2000, {}}, {"g", 2005, {}}});
  auto s = nbnc(c, 0);
  EXPECT_EQ(s.value, 0.0);
  for (double t : s.yearly_terms) EXPECT_EQ(t, 0.0);
}

TEST(Nbnc, SymmetricFixtureGivesOnePerCitedYear) {
  // f and g are published together and always cited together.
  auto c = oracle::build({{"f", 2000, {}},
                          {"g", 2000, {}},
                          {"p", 2001, {"f", "g"}},
                          {"q", 2003, {"f", "g"}},
                          {"r", 2003, {"f", "g"}}});
  auto s = nbnc(c, c.at("f"), {.horizon = 5});
  EXPECT_EQ(s.value, 2.0);
  EXPECT_EQ(s.yearly_terms[1], 1.0);
  EXPECT_EQ(s.yearly_terms[3], 1.0);
}

TEST(Nbnc, ZeroDenominatorYearContributesNothing) {
  // Citer's only other reference is cited by nobody in its own year 1.
  auto c = oracle::build({{"f", 2000, {}}, {"old", 1990, {}}, {"p", 2001, {"f", "old"}}});
  auto s = nbnc(c, c.at("f"), {.horizon = 3});
  EXPECT_EQ(s.value, 0.0);
}

TEST(Nbnc, UnknownWorkAndBadHorizon) {
  auto c = oracle::build({{"f", 2000, {}}});
  EXPECT_THROW(nbnc(c, 3), LookupError);
  EXPECT_THROW(nbnc(c, 0, {.horizon = -1}), ArgumentError);
}

TEST(Nbnc, MatchesNaiveOracleAcrossToggles) {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    auto works = oracle::random_corpus(seed, 200);
    auto c = oracle::build(works);
    auto r = oracle::resolve(works);
    for (bool set_sem : {false, true}) {
      for (bool calendar : {false, true}) {
        MetricOptions opt;
        opt.horizon = 6;
        opt.semantics = set_sem ? CocitationSemantics::Set : CocitationSemantics::Multiset;
        opt.age = calendar ? CocitedAge::FocalCalendar : CocitedAge::OwnAge;
        auto all = nbnc_all(c, c.observed_years(), opt);
        ASSERT_EQ(all.size(), c.size());
        for (const auto& s : all) {
          auto ref = oracle::naive_nbnc(r, c.id(s.work), 6, set_sem, calendar);
          EXPECT_EQ(s.value, ref.value);
          EXPECT_EQ(s.yearly_terms, ref.terms);
        }
      }
    }
  }
}

TEST(Nbnc, BatchEqualsPointwise) {
  auto c = oracle::build({{"A", 2000, {}}, {"B", 2001, {"A"}}, {"C", 2001, {"A", "B"}}});
  auto all = nbnc_all(c, {1990, 2010});
  ASSERT_EQ(all.size(), 3u);
  for (const auto& s : all) {
    auto p = nbnc(c, s.work);
    EXPECT_EQ(p.value, s.value);
    EXPECT_EQ(p.yearly_terms, s.yearly_terms);
  }
  EXPECT_TRUE(nbnc_all(c, {2050, 2060}).empty());
  EXPECT_TRUE(nbnc_all(c, {2001, 2000}).empty());
}

TEST(Nbnc, ThreadCountDoesNotChangeResults) {
  auto c = oracle::build(oracle::random_corpus(77, 500));
  auto one = nbnc_all(c, c.observed_years(), {.horizon = 10, .threads = 1});
  auto four = nbnc_all(c, c.observed_years(), {.horizon = 10, .threads = 4});
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].work, four[i].work);
    EXPECT_EQ(one[i].value, four[i].value);
  }
}

TEST(Nbnc, CloningCitersLeavesTermsUnchanged) {
  auto works = oracle::random_corpus(5, 120);
  auto base = oracle::build(works);
  auto cloned = works;
  for (const auto& w : works) {
    RawWork copy = w;
    copy.id = w.id + "_clone";
    std::erase(copy.refs, w.id);
    // Clones cite the originals, so every citation count doubles.
    cloned.push_back(copy);
  }
  auto doubled = oracle::build(cloned);
  for (WorkIndex w = 0; w < base.size(); ++w) {
    auto a = nbnc(base, w, {.horizon = 5});
    auto b = nbnc(doubled, doubled.at(base.id(w)), {.horizon = 5});
    for (std::size_t t = 0; t < a.yearly_terms.size(); ++t) {
      EXPECT_NEAR(a.yearly_terms[t], b.yearly_terms[t], 1e-12);
    }
  }
}

TEST(Nbnc, ZeroIffUncitedWithinHorizon) {
  auto c = oracle::build(oracle::random_corpus(11, 300));
  for (WorkIndex w = 0; w < c.size(); ++w) {
    auto s = nbnc(c, w, {.horizon = 4});
    auto g = yearly_citation_series(c, w, 4);
    std::uint64_t cited = 0;
    for (auto x : g.gamma) cited += x;
    EXPECT_GE(s.value, 0.0);
    if (cited == 0) {
      EXPECT_EQ(s.value, 0.0);
    }
  }
}

TEST(Cd, MaximalDisruption) {
  auto c = oracle::build({{"r", 1990, {}},
                          {"f", 2000, {"r"}},
                          {"a", 2001, {"f"}},
                          {"b", 2002, {"f"}},
                          {"d", 2003, {"f"}}});
  auto s = cd_index(c, c.at("f"));
  EXPECT_EQ(s.value, 1.0);
  EXPECT_EQ(s.c_x, 3u);
  EXPECT_EQ(classify(s), BreakthroughClass::Disruptive);
}

TEST(Cd, MaximalConsolidation) {
  auto c = oracle::build({{"r", 1990, {}},
                          {"f", 2000, {"r"}},
                          {"a", 2001, {"f", "r"}},
                          {"b", 2002, {"f", "r"}}});
  auto s = cd_index(c, c.at("f"));
  EXPECT_EQ(s.value, -1.0);
  EXPECT_EQ(s.c_y, 2u);
  EXPECT_EQ(classify(s), BreakthroughClass::Consolidating);
}

TEST(Cd, MixedFixtureIsZero) {
  auto works = std::vector<RawWork>{{"r1", 1990, {}},
                                    {"r2", 1990, {}},
                                    {"f", 2000, {"r1", "r2"}},
                                    {"a", 2001, {"f"}},
                                    {"b", 2001, {"f", "r1"}},
                                    {"d", 2001, {"r2"}}};
  auto c = oracle::build(works);
  auto s = cd_index(c, c.at("f"));
  EXPECT_EQ(s.c_x, 1u);
  EXPECT_EQ(s.c_y, 1u);
  EXPECT_EQ(s.c_total, 2u);
  EXPECT_EQ(s.c_refs, 1u);
  EXPECT_EQ(s.value, 0.0);
  EXPECT_EQ(classify(s), BreakthroughClass::Consolidating);
  EXPECT_EQ(oracle::naive_cd(oracle::resolve(works), "f", 10).value, 0.0);
}

TEST(Cd, ZeroDenominatorFlagged) {
  auto c = oracle::build({{"r", 1990, {}}, {"f", 2000, {"r"}}});
  auto s = cd_index(c, c.at("f"));
  EXPECT_TRUE(s.zero_denominator);
  EXPECT_EQ(s.value, 0.0);
  EXPECT_EQ(classify(s), BreakthroughClass::Consolidating);
}

TEST(Cd, WindowExcludesLateAndEarlyCiters) {
  auto c = oracle::build({{"f", 2000, {}}, {"late", 2011, {"f"}}, {"early", 1999, {"f"}}});
  auto s = cd_index(c, c.at("f"), 10);
  EXPECT_EQ(s.c_total, 0u);
  EXPECT_EQ(cd_index(c, c.at("f"), 11).c_total, 1u);
}

TEST(Classify, StrictInequality) {
  CdScore s;
  s.value = 0.2;
  EXPECT_EQ(classify(s), BreakthroughClass::Disruptive);
  s.value = 0.0;
  EXPECT_EQ(classify(s), BreakthroughClass::Consolidating);
  s.value = -0.3;
  EXPECT_EQ(classify(s), BreakthroughClass::Consolidating);
}

TEST(Cd, MatchesBruteForceAndBounds) {
  for (std::uint64_t seed = 200; seed < 230; ++seed) {
    auto works = oracle::random_corpus(seed, 200, 2000, 12, 8);
    auto c = oracle::build(works);
    auto r = oracle::resolve(works);
    for (WorkIndex w = 0; w < c.size(); ++w) {
      auto s = cd_index(c, w, 5);
      auto ref = oracle::naive_cd(r, c.id(w), 5);
      EXPECT_EQ(s.c_x, ref.cx);
      EXPECT_EQ(s.c_y, ref.cy);
      EXPECT_EQ(s.c_refs, ref.crefs);
      EXPECT_EQ(s.value, ref.value);
      EXPECT_LE(std::abs(s.value), 1.0);
      EXPECT_EQ(s.value > 0, s.c_x > s.c_y);
    }
  }
}

TEST(Cd, AddingCitersMovesMonotonically) {
  auto works = oracle::random_corpus(8, 150);
  auto c = oracle::build(works);
  for (WorkIndex f = 0; f < c.size(); f += 7) {
    const auto base = cd_index(c, f).value;
    auto plus_x = works;
    plus_x.push_back({"newx", c.year(f) + 1, {c.id(f)}});
    auto cx = oracle::build(plus_x);
    EXPECT_GE(cd_index(cx, cx.at(c.id(f))).value, base);
    if (!c.references(f).empty()) {
      auto plus_y = works;
      plus_y.push_back({"newy", c.year(f) + 1, {c.id(f), c.id(c.references(f)[0])}});
      auto cy = oracle::build(plus_y);
      EXPECT_LE(cd_index(cy, cy.at(c.id(f))).value, base);
    }
  }
}
