#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fieldscan/tabular.hpp"
#include "oracles/oracles.hpp"
#include "support/fixtures.hpp"

using namespace fieldscan;
using fixtures::csv;

// ---------------------------------------------------------------------------
// load_csv

TEST(LoadCsv, InfersKindsFromCells) {
  const auto ds = csv("a,b\n1,x\n2,y\n");
  ASSERT_EQ(ds.num_rows(), 2u);
  EXPECT_EQ(ds.schema()[0].kind, AttributeKind::Numeric);
  EXPECT_EQ(ds.schema()[1].kind, AttributeKind::Nominal);
  EXPECT_EQ(ds.at(1, 0).as_number(), 2.0);
  EXPECT_EQ(ds.at(0, 1).as_label(), "x");
}

TEST(LoadCsv, EmptyCellIsMissing) {
  const auto ds = csv("a,b,c\n3,,z\n");
  EXPECT_TRUE(ds.at(0, 1).is_missing());
  EXPECT_EQ(ds.at(0, 2).as_label(), "z");
}

TEST(LoadCsv, KindHintOverridesInference) {
  CsvOptions opts;
  opts.kind_hints["a"] = AttributeKind::Nominal;
  const auto ds = csv("a\n1\n2\nn/a-hint Nominal\n", opts);
  EXPECT_EQ(ds.schema()[0].kind, AttributeKind::Nominal);
  for (std::size_t r = 0; r < ds.num_rows(); ++r) EXPECT_TRUE(ds.at(r, 0).is_label());
  EXPECT_EQ(ds.at(0, 0).as_label(), "1");
}

TEST(LoadCsv, SentinelsAreMissing) {
  const auto ds = csv("a,b\nno data,x\n2,sin datos\n");
  EXPECT_EQ(ds.schema()[0].kind, AttributeKind::Numeric);
  EXPECT_TRUE(ds.at(0, 0).is_missing());
  EXPECT_TRUE(ds.at(1, 1).is_missing());
}

TEST(LoadCsv, QuotedFieldsAndRowIds) {
  const auto ds = csv("name,v\n\"Doe, J\",1\n\"say \"\"hi\"\"\",2\n");
  EXPECT_EQ(ds.at(0, 0).as_label(), "Doe, J");
  EXPECT_EQ(ds.at(1, 0).as_label(), "say \"hi\"");
  EXPECT_EQ(ds.row_id(0), 0);
  EXPECT_EQ(ds.row_id(1), 1);
}

TEST(LoadCsv, Errors) {
  EXPECT_THROW(csv(""), ParseError);
  try {
    csv("a,b\n1,2\n3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(csv("a,a\n1,2\n"), SchemaError);
  CsvOptions hint;
  hint.kind_hints["zz"] = AttributeKind::Numeric;
  EXPECT_THROW(csv("a\n1\n", hint), SchemaError);
  CsvOptions numeric;
  numeric.kind_hints["a"] = AttributeKind::Numeric;
  EXPECT_THROW(csv("a\nx\n", numeric), ParseError);
}

TEST(LoadCsv, RoundTripsNumbersBitExactly) {
  Rng rng(11);
  std::string text = "x,y\n";
  std::vector<double> xs;
  for (int i = 0; i < 200; ++i) {
    const double x = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<int>(rng.below(30)) - 10);
    xs.push_back(x);
    text += format_number(x) + ",L" + std::to_string(i % 3) + "\n";
  }
  const auto ds = csv(text);
  const auto again = csv(to_csv(ds));
  for (std::size_t r = 0; r < xs.size(); ++r) {
    EXPECT_EQ(ds.at(r, 0).as_number(), xs[r]);
    EXPECT_EQ(again.at(r, 0).as_number(), xs[r]);
    EXPECT_EQ(again.at(r, 1).as_label(), ds.at(r, 1).as_label());
  }
  EXPECT_EQ(to_csv(again), to_csv(ds));
}

// ---------------------------------------------------------------------------
// Dataset

TEST(DatasetTest, RejectsMalformedRows) {
  Schema s({{"a", AttributeKind::Numeric}});
  EXPECT_THROW(Dataset(s, {{Value("x")}}), SchemaError);
  EXPECT_THROW(Dataset(s, {{Value(1.0), Value(2.0)}}), SchemaError);
  EXPECT_THROW(Dataset(s, {{Value(1.0)}, {Value(2.0)}}, {5, 5}), SchemaError);
  EXPECT_THROW(Schema({{"a", AttributeKind::Numeric}, {"a", AttributeKind::Nominal}}), SchemaError);
}

TEST(DatasetTest, RowIdsSurviveProjectionAndSelection) {
  const auto ds = csv("a,b,c\n1,x,5\n2,y,6\n3,z,7\n");
  const std::size_t pick[] = {2, 0};
  const auto sub = ds.select_rows(pick);
  EXPECT_EQ(sub.row_id(0), 2);
  EXPECT_EQ(sub.row_id(1), 0);
  const std::vector<std::string> cols{"c", "a"};
  const auto proj = sub.project(cols);
  EXPECT_EQ(proj.schema()[0].name, "c");
  EXPECT_EQ(proj.row_ids(), sub.row_ids());
  EXPECT_EQ(proj.at(0, 1).as_number(), 3.0);
}

// ---------------------------------------------------------------------------
// column_stats / znormalize

TEST(ColumnStatsTest, TwoPointMean) {
  const auto s = column_stats(csv("a\n2\n4\n"), "a");
  EXPECT_DOUBLE_EQ(*s.mean, 3.0);
  EXPECT_DOUBLE_EQ(*s.std_dev, 1.0);
  EXPECT_EQ(*s.min, 2.0);
  EXPECT_EQ(*s.max, 4.0);
}

TEST(ColumnStatsTest, NominalMode) {
  const auto s = column_stats(csv("v\nFiscal\nSubfiscal\nSubfiscal\n"), "v");
  EXPECT_EQ(s.mode->as_label(), "Subfiscal");
  EXPECT_FALSE(s.mean);
}

TEST(ColumnStatsTest, AllMissing) {
  CsvOptions opts;
  opts.kind_hints["a"] = AttributeKind::Numeric;
  const auto s = column_stats(csv("a,b\n,1\n,2\n", opts), "a");
  EXPECT_EQ(s.count, 0u);
  EXPECT_EQ(s.missing, 2u);
  EXPECT_FALSE(s.mode);
  EXPECT_FALSE(s.mean);
}

TEST(ColumnStatsTest, ModeTieGoesToFirstSeen) {
  EXPECT_EQ(column_stats(csv("v\nb\na\na\nb\n"), "v").mode->as_label(), "b");
  EXPECT_EQ(column_stats(csv("v\na\nb\nb\na\n"), "v").mode->as_label(), "a");
  EXPECT_EQ(column_stats(csv("v\n3\n1\n1\n3\n"), "v").mode->as_number(), 3.0);
}

TEST(ZNormalize, Examples) {
  const std::vector<std::string> a{"a"};
  auto z = znormalize(csv("a\n2\n4\n"), a);
  EXPECT_DOUBLE_EQ(z.at(0, 0).as_number(), -1.0);
  EXPECT_DOUBLE_EQ(z.at(1, 0).as_number(), 1.0);
  z = znormalize(csv("a\n5\n5\n5\n"), a);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(z.at(r, 0).as_number(), 0.0);
  z = znormalize(csv("a\n1\n2\n3\n"), a);
  EXPECT_NEAR(z.at(0, 0).as_number(), -1.2247, 1e-4);
  EXPECT_NEAR(z.at(1, 0).as_number(), 0.0, 1e-12);
  EXPECT_NEAR(z.at(2, 0).as_number(), 1.2247, 1e-4);
  EXPECT_THROW(znormalize(csv("a\nx\n"), a), SchemaError);
}

TEST(ZNormalize, KeepsMissingAndIsIdempotent) {
  const auto ds = fixtures::random_dataset(3, {.rows = 50, .numeric = 3, .nominal = 1, .missing = 0.1});
  const auto names = numeric_attributes(ds);
  const auto once = znormalize(ds, names);
  const auto twice = znormalize(once, names);
  for (std::size_t r = 0; r < ds.num_rows(); ++r)
    for (std::size_t c = 0; c < names.size(); ++c) {
      EXPECT_EQ(ds.at(r, c).is_missing(), once.at(r, c).is_missing());
      if (!once.at(r, c).is_missing()) {
        EXPECT_NEAR(once.at(r, c).as_number(), twice.at(r, c).as_number(), 1e-9);
      }
    }
}

// ---------------------------------------------------------------------------
// Gower distance

TEST(Gower, Examples) {
  const auto ds = csv("n,c\n0,x\n10,y\n5,x\n");
  GowerMetric g(ds);
  EXPECT_EQ(g(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(g(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(g(0, 2), 0.25);
  EXPECT_DOUBLE_EQ(mixed_distance(ds.row(0), ds.row(1), ds), 1.0);

  const auto four = csv("a,b,c,d\n1,x,y,2\n1,x,z,2\n");
  EXPECT_DOUBLE_EQ(GowerMetric(four)(0, 1), 0.25);
}

TEST(Gower, MissingCellsAreSkipped) {
  CsvOptions opts;
  opts.kind_hints["c"] = AttributeKind::Nominal;
  const auto ds = csv("n,c\n0,x\n10,\n,\n", opts);
  GowerMetric g(ds);
  EXPECT_DOUBLE_EQ(g(0, 1), 1.0);  // only n is shared
  EXPECT_EQ(g(0, 2), 0.0);         // nothing shared
  EXPECT_THROW(g.between(ds.row(0), std::vector<Value>{Value(1.0)}), SchemaError);
  EXPECT_THROW(g.between(ds.row(0), std::vector<Value>{Value("a"), Value("b")}), SchemaError);
}

TEST(Gower, MatchesOracleAndIsAMetricLikeMeasure) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto ds = fixtures::random_dataset(seed, {.rows = 30, .numeric = 3, .nominal = 2, .missing = seed % 2 ? 0.1 : 0.0});
    GowerMetric g(ds);
    const auto ref = oracle::gower(ds);
    for (std::size_t i = 0; i < ds.num_rows(); ++i)
      for (std::size_t j = 0; j < ds.num_rows(); ++j) {
        EXPECT_NEAR(g(i, j), ref[i][j], 1e-12);
        EXPECT_EQ(g(i, j), g(j, i));
        EXPECT_GE(g(i, j), 0.0);
        EXPECT_LE(g(i, j), 1.0);
      }
  }
}

// ---------------------------------------------------------------------------
// discretize

TEST(Discretize, EqualWidthMidpoint) {
  const auto d = discretize(csv("a\n0\n1\n2\n3\n"), "a", 2, BinningMethod::EqualWidth);
  EXPECT_EQ(d.schema()[0].kind, AttributeKind::Nominal);
  EXPECT_EQ(d.at(0, 0).as_label(), "[0,1.5)");
  EXPECT_EQ(d.at(1, 0).as_label(), "[0,1.5)");
  EXPECT_EQ(d.at(2, 0).as_label(), "[1.5,3]");
  EXPECT_EQ(d.at(3, 0).as_label(), "[1.5,3]");
}

TEST(Discretize, EqualFrequencyKeepsTiesTogether) {
  const auto d = discretize(csv("a\n1\n1\n1\n9\n"), "a", 2, BinningMethod::EqualFrequency);
  EXPECT_EQ(d.at(0, 0).as_label(), d.at(1, 0).as_label());
  EXPECT_EQ(d.at(1, 0).as_label(), d.at(2, 0).as_label());
  EXPECT_NE(d.at(2, 0).as_label(), d.at(3, 0).as_label());
  EXPECT_EQ(d.at(0, 0).as_label(), "[1,9)");
  EXPECT_EQ(d.at(3, 0).as_label(), "[9,9]");
}

TEST(Discretize, ConstantColumnIsOneInterval) {
  const auto d = discretize(csv("a\n4\n4\n4\n"), "a", 2, BinningMethod::EqualWidth);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(d.at(r, 0).as_label(), "[4,4]");
}

TEST(Discretize, Errors) {
  EXPECT_THROW(discretize(csv("a\n1\n2\n"), "a", 1, BinningMethod::EqualWidth), ArgumentError);
  EXPECT_THROW(discretize(csv("a\nx\n"), "a", 2, BinningMethod::EqualWidth), SchemaError);
  CsvOptions opts;
  opts.kind_hints["a"] = AttributeKind::Numeric;
  EXPECT_THROW(discretize(csv("a,b\n,1\n", opts), "a", 2, BinningMethod::EqualWidth), DataError);
}

TEST(Discretize, EveryValueLandsInItsInterval) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto ds = fixtures::random_dataset(seed, {.rows = 40, .numeric = 1, .nominal = 0});
    for (auto method : {BinningMethod::EqualWidth, BinningMethod::EqualFrequency}) {
      std::vector<double> xs;
      for (std::size_t r = 0; r < ds.num_rows(); ++r) xs.push_back(ds.at(r, 0).as_number());
      const auto b = make_binning(xs, 4, method);
      EXPECT_TRUE(std::is_sorted(b.cuts.begin(), b.cuts.end()));
      for (double x : xs) {
        const auto bin = b.bin_of(x);
        const double lo = bin == 0 ? b.min : b.cuts[bin - 1];
        const double hi = bin == b.cuts.size() ? b.max : b.cuts[bin];
        EXPECT_GE(x, lo);
        if (bin == b.cuts.size()) {
          EXPECT_LE(x, hi);
        } else {
          EXPECT_LT(x, hi);
        }
      }
    }
  }
}
