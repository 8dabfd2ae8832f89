#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "citescope/analysis.hpp"
#include "citescope/random.hpp"
#include "citescope/table_io.hpp"

using namespace citescope;

namespace {

std::map<std::string, double> keyed(const std::vector<double>& v) {
  std::map<std::string, double> m;
  for (std::size_t i = 0; i < v.size(); ++i) m["k" + std::to_string(i)] = v[i];
  return m;
}

// Classic 1 - 6 Σd² / (n(n²-1)), valid without ties.
double closed_form(const std::vector<double>& a, const std::vector<double>& b) {
  auto ra = average_ranks(a), rb = average_ranks(b);
  double d2 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
  const double n = static_cast<double>(a.size());
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

}  // namespace

TEST(Spearman, ThreePointCase) {
  EXPECT_EQ(spearman(keyed({1, 2, 3}), keyed({1, 3, 2})).rho, 0.5);
  EXPECT_EQ(spearman(keyed({1, 2, 3, 4}), keyed({1, 2, 3, 4})).rho, 1.0);
  EXPECT_EQ(spearman(keyed({1, 2, 3, 4}), keyed({4, 3, 2, 1})).rho, -1.0);
}

TEST(Spearman, IntersectionAndInsufficientData) {
  std::map<std::string, double> a{{"US", 1}, {"FR", 2}, {"IT", 3}, {"XX", 4}};
  std::map<std::string, double> b{{"US", 1}, {"FR", 2}, {"IT", 3}, {"YY", 9}};
  auto r = spearman(a, b);
  EXPECT_EQ(r.common, 3u);
  EXPECT_EQ(r.only_a, (std::vector<std::string>{"XX"}));
  EXPECT_EQ(r.only_b, (std::vector<std::string>{"YY"}));
  EXPECT_EQ(r.rho, 1.0);
  std::map<std::string, double> small{{"US", 1}, {"FR", 2}};
  EXPECT_THROW(spearman(small, b), InsufficientDataError);
}

TEST(Spearman, AverageRanksForTies) {
  EXPECT_EQ(average_ranks({10, 20, 20, 30}), (std::vector<double>{1, 2.5, 2.5, 4}));
  // Tied-rank Pearson by hand: ranks (1,2.5,2.5,4) vs (1,2,3,4):
  // cov = 1.5*1.5 + 0 + 0 + 1.5*1.5 = 4.5, var_a = 4.5, var_b = 5.
  EXPECT_NEAR(spearman(keyed({10, 20, 20, 30}), keyed({1, 2, 3, 4})).rho, 4.5 / std::sqrt(4.5 * 5.0), 1e-15);
}

TEST(Spearman, ClosedFormAndMonotoneInvariance) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng.below(40);
    std::vector<double> a(n), b(n), ta(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform();
      b[i] = rng.uniform();
      ta[i] = std::exp(3 * a[i]) + 7;
    }
    const double rho = spearman(keyed(a), keyed(b)).rho;
    EXPECT_NEAR(rho, closed_form(a, b), 1e-12);
    EXPECT_EQ(rho, spearman(keyed(ta), keyed(b)).rho);
    EXPECT_GE(rho, -1.0);
    EXPECT_LE(rho, 1.0);
  }
}

TEST(PowerLaw, ExactRecovery) {
  std::vector<double> x{1, 2, 4, 8}, y;
  for (double v : x) y.push_back(2 * std::pow(v, 1.5));
  auto f = loglog_fit(x, y);
  EXPECT_NEAR(f.exponent, 1.5, 1e-9);
  EXPECT_NEAR(f.prefactor, 2.0, 1e-9);
  EXPECT_NEAR(f.residual, 0.0, 1e-20);
  auto flat = loglog_fit(x, {3, 3, 3, 3});
  EXPECT_NEAR(flat.exponent, 0.0, 1e-15);
  EXPECT_NEAR(flat.prefactor, 3.0, 1e-12);
}

TEST(PowerLaw, Errors) {
  EXPECT_THROW(loglog_fit({1, 2, 3}, {1, 0, 2}), ArgumentError);
  EXPECT_THROW(loglog_fit({1, -2, 3}, {1, 1, 2}), ArgumentError);
  EXPECT_THROW(loglog_fit({1, 2}, {1, 2}), InsufficientDataError);
  EXPECT_THROW(loglog_fit({2, 2, 2}, {1, 2, 3}), ArgumentError);
}

TEST(PowerLaw, NoisyDataMatchesNormalEquations) {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + rng.below(30);
    std::vector<double> x(n), y(n);
    Eigen::MatrixXd design(n, 2);
    Eigen::VectorXd rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = 0.1 + 100 * rng.uniform();
      y[i] = 0.7 * std::pow(x[i], 0.8) * std::exp(0.3 * (rng.uniform() - 0.5));
      design(i, 0) = 1.0;
      design(i, 1) = std::log(x[i]);
      rhs(i) = std::log(y[i]);
    }
    const Eigen::Vector2d beta = (design.transpose() * design).ldlt().solve(design.transpose() * rhs);
    auto f = loglog_fit(x, y);
    EXPECT_NEAR(f.exponent, beta(1), 1e-9);
    EXPECT_NEAR(std::log(f.prefactor), beta(0), 1e-9);
    EXPECT_NEAR(f.residual, (design * beta - rhs).squaredNorm(), 1e-9);

    // Rescaling x or y moves only the prefactor.
    std::vector<double> xs = x, ys = y;
    for (auto& v : xs) v *= 13.0;
    for (auto& v : ys) v *= 0.2;
    EXPECT_NEAR(loglog_fit(xs, ys).exponent, f.exponent, 1e-9);
  }
}

TEST(Gerd, MeanWithCoverage) {
  ExternalIndicator rd, gdp;
  rd.set("US", 2000, 2.0);
  rd.set("US", 2001, 3.0);
  gdp.set("US", 2000, 100.0);
  gdp.set("US", 2001, 200.0);
  gdp.set("US", 2002, 300.0);
  rd.set("FR", 2005, 1.0);
  auto g = gerd_means(rd, gdp, {2000, 2003});
  ASSERT_EQ(g.count("US"), 1u);
  EXPECT_DOUBLE_EQ(g["US"].value, (2.0 + 6.0) / 2.0);
  EXPECT_DOUBLE_EQ(g["US"].coverage, 0.5);
  EXPECT_EQ(g.count("FR"), 0u);
}

TEST(Tables, RoundTripAndChecksum) {
  const auto dir = std::filesystem::temp_directory_path() / "citescope_table_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "t.tsv").string();
  Table t({"name", "value", "flag"});
  t.row() << "a" << 0.1 << true;
  t.row() << "b" << 1e-300 << false;
  t.save(path);
  auto p = read_table(path);
  EXPECT_EQ(p.header, (std::vector<std::string>{"name", "value", "flag"}));
  EXPECT_EQ(parse_double(p.rows[0][p.column("value")]), 0.1);
  EXPECT_EQ(parse_double(p.rows[1][1]), 1e-300);
  EXPECT_EQ(file_checksum(path), hex64(fnv1a(t.str())));
  EXPECT_THROW(p.column("nope"), FormatError);
  EXPECT_THROW(parse_double("1.5x"), FormatError);

  std::ofstream(dir / "c.csv") << "country,period,value\nUS,2000,1.5\n";
  auto csv = read_table((dir / "c.csv").string(), 0);
  EXPECT_EQ(csv.rows[0][0], "US");
  std::filesystem::remove_all(dir);
}

TEST(Fnv, KnownVectors) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}
