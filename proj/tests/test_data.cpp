#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "iotids/data.hpp"
#include "iotids/error.hpp"
#include "support/synthetic.hpp"

using namespace iotids;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

std::string error_of(const std::string& csv, const std::string& label = "last") {
  try {
    parse_csv(csv, label);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(LoadCsv, FiveRowsThreeFeatures) {
  const auto path = write_temp("iotids_five.csv",
                               "a,b,c,class3\n"
                               "1,2,3,0\n4,5,6,1\n7,8,9,0\n1.5,2.5,3.5,1\n-1,0,1e2,1\n");
  const DataTable t = load_csv(path);
  EXPECT_EQ(t.rows(), 5u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_EQ(t.labels(), (std::vector<Label>{0, 1, 0, 1, 1}));
  EXPECT_EQ(t.feature_names(), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_DOUBLE_EQ(t.at(4, 2), 100.0);
  EXPECT_EQ(load_csv(path, "class3"), t);
}

TEST(LoadCsv, NamedLabelColumnInTheMiddle) {
  const DataTable t = parse_csv("x,y,z\n1,1,5\n2,0,6\n", "y");
  EXPECT_EQ(t.feature_names(), (std::vector<std::string>{"x", "z"}));
  EXPECT_EQ(t.labels(), (std::vector<Label>{1, 0}));
  EXPECT_DOUBLE_EQ(t.at(1, 1), 6.0);
}

TEST(LoadCsv, QuotesCrlfAndBom) {
  const DataTable t = parse_csv("\xEF\xBB\xBF\"a,1\",\"b\"\"q\",label\r\n\"1\",2,0\r\n\r\n3,4,1\r\n");
  EXPECT_EQ(t.feature_names(), (std::vector<std::string>{"a,1", "b\"q"}));
  EXPECT_EQ(t.rows(), 2u);
}

TEST(LoadCsv, LabelOutsideBinaryNamesRow) {
  const std::string msg = error_of("a,label\n1,0\n2,2\n");
  EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("'2'"), std::string::npos) << msg;
}

TEST(LoadCsv, UnparseableCellNamesRowAndColumn) {
  const std::string msg = error_of("a,b,label\n1,2,0\n3,abc,1\n");
  EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("'b'"), std::string::npos) << msg;
}

TEST(LoadCsv, RejectsMalformedInput) {
  EXPECT_NE(error_of("a,a,label\n1,2,0\n"), "");
  EXPECT_NE(error_of("a,b,label\n1,2\n"), "");
  EXPECT_NE(error_of("a,label\n1,0\n", "missing"), "");
  EXPECT_NE(error_of("a,label\nnan,0\n"), "");
  EXPECT_NE(error_of("a,label\ninf,0\n"), "");
  EXPECT_NE(error_of("a,label\n0x10,0\n"), "");
  EXPECT_NE(error_of("a,label\n1e,0\n"), "");
  EXPECT_NE(error_of("a,label\n1 2,0\n"), "");
  EXPECT_NE(error_of("a,label\n,0\n"), "");
  EXPECT_NE(error_of(""), "");
  EXPECT_THROW(load_csv("/nonexistent/iotids.csv"), DataError);
}

TEST(LoadCsv, AcceptsNumberForms) {
  const DataTable t = parse_csv("a,label\n-0.5,0\n+3,1\n1e-3,0\n2.5E+2,1\n.5,0\n");
  EXPECT_DOUBLE_EQ(t.at(0, 0), -0.5);
  EXPECT_DOUBLE_EQ(t.at(1, 0), 3.0);
  EXPECT_DOUBLE_EQ(t.at(2, 0), 0.001);
  EXPECT_DOUBLE_EQ(t.at(3, 0), 250.0);
  EXPECT_DOUBLE_EQ(t.at(4, 0), 0.5);
  EXPECT_DOUBLE_EQ(parse_csv("a,label\n 1. ,0\n").at(0, 0), 1.0);
}

TEST(DataTableTest, ConstructorEnforcesInvariants) {
  EXPECT_THROW(DataTable({"a"}, {1.0, 2.0}, {0}), DataError);
  EXPECT_THROW(DataTable({"a"}, {1.0}, {3}), DataError);
  EXPECT_THROW(DataTable({"a"}, {std::nan("")}, {0}), DataError);
}

TEST(Split, TenRowsGivesEightAndTwo) {
  const DataTable t = fixtures::random_table(10, 2, 5, 3);
  for (std::uint64_t seed : {0u, 1u, 99u}) {
    const auto s = split_indices(t, {0.2, seed, false});
    EXPECT_EQ(s.train.size(), 8u);
    EXPECT_EQ(s.test.size(), 2u);
  }
  // Balanced labels: per-class floors also sum to two.
  const DataTable balanced = fixtures::blobs(10, 2, 1.0, 4);
  EXPECT_EQ(split_indices(balanced, {0.2, 5, true}).test.size(), 2u);
}

TEST(Split, StratifiedFiftyFifty) {
  const DataTable t = fixtures::blobs(100, 2, 1.0, 8);
  const auto [train, test] = split_train_test(t, {0.2, 42, true});
  EXPECT_EQ(test.class_counts()[0], 10u);
  EXPECT_EQ(test.class_counts()[1], 10u);
  EXPECT_EQ(train.rows(), 80u);
}

TEST(Split, PartitionAndDeterminism) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const DataTable t = fixtures::random_table(5 + seed * 7, 2, 4, seed);
    if (t.class_counts()[0] == 0 || t.class_counts()[1] == 0) continue;
    for (bool strat : {false, true}) {
      const SplitSpec spec{0.1 + 0.025 * static_cast<double>(seed % 30), seed, strat};
      const auto a = split_indices(t, spec);
      const auto b = split_indices(t, spec);
      EXPECT_EQ(a.train, b.train);
      EXPECT_EQ(a.test, b.test);
      std::set<std::size_t> seen(a.train.begin(), a.train.end());
      for (std::size_t i : a.test) EXPECT_TRUE(seen.insert(i).second);
      EXPECT_EQ(seen.size(), t.rows());
      if (strat) {
        std::array<std::size_t, 2> in_test{0, 0};
        for (std::size_t i : a.test) ++in_test[static_cast<std::size_t>(t.label(i))];
        for (std::size_t c = 0; c < 2; ++c) {
          const double expect = std::floor(static_cast<double>(t.class_counts()[c]) * spec.test_fraction);
          EXPECT_LE(std::abs(static_cast<double>(in_test[c]) - expect), 1.0);
        }
      } else {
        EXPECT_EQ(a.test.size(), static_cast<std::size_t>(std::floor(t.rows() * spec.test_fraction + 1e-9)));
      }
    }
  }
}

TEST(Split, Errors) {
  const DataTable one_class({"a"}, {1, 2, 3}, {1, 1, 1});
  EXPECT_THROW(split_indices(one_class, {0.2, 1, true}), DataError);
  EXPECT_NO_THROW(split_indices(one_class, {0.5, 1, false}));
  EXPECT_THROW(split_indices(DataTable(), {0.2, 1, false}), DataError);
  EXPECT_THROW(split_indices(one_class, {1.0, 1, false}), std::invalid_argument);
}

TEST(Scaler, MinMaxEndpoints) {
  const DataTable t({"a"}, {0, 5, 10}, {0, 1, 0});
  const DataTable s = apply_scaler(t, fit_scaler(t, ScalerKind::min_max));
  EXPECT_EQ(s.values(), (std::vector<double>{0.0, 0.5, 1.0}));
}

TEST(Scaler, ZScorePopulationSd) {
  const DataTable t({"a"}, {2, 4}, {0, 1});
  const DataTable s = apply_scaler(t, fit_scaler(t, ScalerKind::z_score));
  EXPECT_DOUBLE_EQ(s.at(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(s.at(1, 0), 1.0);
}

TEST(Scaler, ConstantColumnMapsToZero) {
  const DataTable t({"a", "b"}, {7, 1, 7, 2, 7, 3}, {0, 1, 0});
  for (ScalerKind kind : {ScalerKind::min_max, ScalerKind::z_score}) {
    const DataTable s = apply_scaler(t, fit_scaler(t, kind));
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(s.at(i, 0), 0.0);
  }
}

TEST(Scaler, NoneIsIdentity) {
  const DataTable t = fixtures::noisy_linear(50, 4, 0.3, 2);
  const ScalerParams p = fit_scaler(t, ScalerKind::none);
  EXPECT_EQ(apply_scaler(t, p), t);
  EXPECT_EQ(fit_scaler(t, ScalerKind::z_score).columns.size(), 4u);
}

TEST(Scaler, Deterministic) {
  const DataTable t = fixtures::noisy_linear(40, 3, 0.1, 9);
  const auto a = fit_scaler(t, ScalerKind::z_score);
  const auto b = fit_scaler(t, ScalerKind::z_score);
  ASSERT_EQ(a.columns.size(), b.columns.size());
  for (std::size_t j = 0; j < a.columns.size(); ++j) {
    EXPECT_EQ(a.columns[j].offset, b.columns[j].offset);
    EXPECT_EQ(a.columns[j].scale, b.columns[j].scale);
  }
}
