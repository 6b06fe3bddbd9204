#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "penet/bending.hpp"
#include "penet/datagen.hpp"
#include "penet/dataset.hpp"
#include "penet/lhs.hpp"
#include "test_oracles.hpp"

using namespace penet;
namespace oracle = testing_oracles;
namespace fs = std::filesystem;

namespace {

const MaterialSpec kAluminum{80700.0, 150.0, 500.0};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(LoadingMoment, ZeroCurvatureGivesZeroMoment) {
  auto layers = single_tube_layers(22.0, 2.0, kAluminum);
  EXPECT_DOUBLE_EQ(loading_moment(0.0, layers), 0.0);
}

TEST(LoadingMoment, ElasticRegimeMatchesClosedForm) {
  auto layers = single_tube_layers(22.0, 2.0, kAluminum);
  double kappa = 0.5 * kAluminum.yield_strain() / 11.0;  // below yield everywhere
  double expected = kAluminum.E * annulus_inertia(9.0, 11.0) * kappa;
  double m = loading_moment(kappa, layers);
  EXPECT_NEAR(m, expected, 1e-12 * expected);
}

TEST(LoadingMoment, FullyPlasticLimit) {
  MaterialSpec perfectly_plastic{80700.0, 150.0, 0.0};
  auto layers = single_tube_layers(22.0, 2.0, perfectly_plastic);
  double kappa = 1000.0 * perfectly_plastic.yield_strain() / 11.0;
  double m = loading_moment(kappa, layers);
  double m_strip = oracle::strip_moment(kappa, layers);
  EXPECT_NEAR(m, m_strip, 1e-5 * std::abs(m_strip));

  double zp = oracle::strip_plastic_modulus(9.0, 11.0);
  EXPECT_NEAR(zp, 4.0 / 3.0 * (std::pow(11.0, 3) - std::pow(9.0, 3)), 1e-5 * zp);
  EXPECT_NEAR(m, perfectly_plastic.sigma_y * zp, 1e-4 * m);
  EXPECT_LT(m, perfectly_plastic.sigma_y * zp);  // elastic core remains
}

TEST(LoadingMoment, RejectsOverlappingLayers) {
  std::vector<AnnularLayer> layers{{9.0, 11.0, kAluminum}, {10.5, 12.0, kAluminum}};
  EXPECT_THROW(loading_moment(0.01, layers), geometry_error);
}

TEST(LoadingMoment, QuadratureConvergedAtDefaultGrid) {
  MaterialSpec inner{110000.0, 200.0, 1000.0};
  struct Case {
    BmtShape shape;
    double RB;
  };
  // Deep plastic, moderate, and barely-plastic bends.
  for (const Case& c : {Case{{22.0, 2.0, 0.5}, 40.0},
                        Case{{22.0, 2.0, 0.3}, 60.0},
                        Case{{14.0, 1.0, 0.7}, 3400.0}}) {
    auto layers = bmt_layers(c.shape, kAluminum, inner);
    double kappa = 1.0 / c.RB;
    double coarse = loading_moment(kappa, layers, {64, 256});
    double fine = loading_moment(kappa, layers, {128, 512});
    EXPECT_LT(std::abs(coarse - fine), 1e-6 * std::abs(fine))
        << "Do=" << c.shape.Do << " RB=" << c.RB;
  }
}

TEST(Springback, ElasticBendRecoversFully) {
  auto layers = single_tube_layers(22.0, 2.0, kAluminum);
  ProcessParams p;
  p.RB = 11.0 / (0.5 * kAluminum.yield_strain());  // half of yield strain
  p.alphaB = 90.0;
  double delta = springback_angle(layers, p);
  EXPECT_NEAR(delta / p.alphaB, 1.0, 1e-6);
}

TEST(Springback, DeterministicForFixedSeed) {
  auto layers = single_tube_layers(22.0, 2.0, kAluminum);
  ProcessParams p{60.0, 90.0, 10.0, 0.5, {}, {}, {}};
  double a = springback_angle(layers, p, {}, ProcessEffect::none(), 0.05, 1234);
  double b = springback_angle(layers, p, {}, ProcessEffect::none(), 0.05, 1234);
  EXPECT_DOUBLE_EQ(a, b);
  double c = springback_angle(layers, p, {}, ProcessEffect::none(), 0.05, 1235);
  EXPECT_NE(a, c);
}

TEST(Springback, PolarAndStripMethodsAgree) {
  auto layers = single_tube_layers(22.0, 2.0, kAluminum);
  ProcessParams p{60.0, 90.0, 0.0, 0.0, {}, {}, {}};
  double kappa = 1.0 / p.RB;
  double delta_polar = springback_angle(layers, p);
  double delta_strip = p.alphaB * p.RB * oracle::strip_moment(kappa, layers) /
                       elastic_stiffness(layers);
  EXPECT_NEAR(delta_polar, delta_strip, 1e-5 * std::abs(delta_strip));
}

TEST(Springback, RecoveryRatioApproachesOneWithYieldStress) {
  ProcessParams p{60.0, 90.0, 0.0, 0.0, {}, {}, {}};
  double previous = 0.0;
  for (double sigma_y : {50.0, 150.0, 500.0, 2000.0, 8000.0, 20000.0}) {
    MaterialSpec mat{80700.0, sigma_y, 500.0};
    auto layers = single_tube_layers(22.0, 2.0, mat);
    double ratio = springback_angle(layers, p) / p.alphaB;
    EXPECT_GT(ratio, previous);
    EXPECT_LE(ratio, 1.0 + 1e-12);
    previous = ratio;
  }
  EXPECT_NEAR(previous, 1.0, 1e-6);  // yield far above the largest fiber strain
}

TEST(ProcessEffect, MidpointsGiveUnitFactor) {
  ProcessEffect effect{0.02, 0.01, 12.5, 0.6};
  ProcessParams p{60.0, 90.0, 12.5, 0.6, {}, {}, {}};
  EXPECT_DOUBLE_EQ(effect.factor(p), 1.0);
  p.vB = 20.0;
  EXPECT_GT(effect.factor(p), 1.0);
}

// Latin hypercube -----------------------------------------------------------

TEST(Lhs, OnePointPerStratumOneDim) {
  std::vector<Interval> bounds{{0.0, 1.0}};
  auto pts = lhs_sample(4, bounds, 99);
  std::set<int> bins;
  for (const auto& p : pts) bins.insert(static_cast<int>(p[0] * 4.0));
  EXPECT_EQ(bins, (std::set<int>{0, 1, 2, 3}));
}

TEST(Lhs, SinglePointInsideBounds) {
  std::vector<Interval> bounds{{-3.0, 7.0}, {100.0, 200.0}};
  auto pts = lhs_sample(1, bounds, 5);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_GE(pts[0][0], -3.0);
  EXPECT_LT(pts[0][0], 7.0);
  EXPECT_GE(pts[0][1], 100.0);
  EXPECT_LT(pts[0][1], 200.0);
}

TEST(Lhs, StratificationHoldsInSixHundredBySix) {
  std::vector<Interval> bounds(6, Interval{2.0, 5.0});
  auto pts = lhs_sample(600, bounds, 2024);
  for (std::size_t d = 0; d < bounds.size(); ++d) {
    std::set<int> bins;
    for (const auto& p : pts) {
      double u = (p[d] - bounds[d].lo) / (bounds[d].hi - bounds[d].lo);
      bins.insert(static_cast<int>(u * 600.0));
    }
    EXPECT_EQ(bins.size(), 600u);
  }
}

TEST(Lhs, RejectsInvalidArguments) {
  std::vector<Interval> bad{{1.0, 1.0}};
  EXPECT_THROW(lhs_sample(4, bad, 0), std::invalid_argument);
  std::vector<Interval> ok{{0.0, 1.0}};
  EXPECT_THROW(lhs_sample(0, ok, 0), std::invalid_argument);
}

// Dataset generation --------------------------------------------------------

TEST(Datagen, DefaultConfigProducesExpectedRowCounts) {
  GeneratorConfig cfg;
  auto [d1, d2] = generate_datasets(cfg, 42);
  EXPECT_EQ(d1.size(), 600u);
  EXPECT_EQ(d2.size(), 80u);
  EXPECT_EQ(d1.feature_names,
            (std::vector<std::string>{"Do", "T", "RB", "alphaB", "vB", "omegaB"}));
  EXPECT_EQ(d2.feature_names, (std::vector<std::string>{"Do", "T", "Tr", "RB",
                                                        "alphaB", "vB", "omegaB"}));
}

TEST(Datagen, RejectsEmptyConfig) {
  GeneratorConfig cfg;
  cfg.n_dataset1 = 0;
  EXPECT_THROW(generate_dataset1(cfg, 1), std::invalid_argument);
}

TEST(Datagen, ByteIdenticalForFixedSeed) {
  GeneratorConfig cfg;
  cfg.n_dataset1 = 40;
  cfg.n_dataset2 = 12;
  fs::path dir_a = fs::path(::testing::TempDir()) / "gen_a";
  fs::path dir_b = fs::path(::testing::TempDir()) / "gen_b";
  write_datasets(cfg, 7, dir_a.string());
  write_datasets(cfg, 7, dir_b.string());
  EXPECT_EQ(slurp(dir_a / "dataset1.csv"), slurp(dir_b / "dataset1.csv"));
  EXPECT_EQ(slurp(dir_a / "dataset2.csv"), slurp(dir_b / "dataset2.csv"));
  EXPECT_FALSE(slurp(dir_a / "dataset1.csv").empty());
}

TEST(Datagen, CsvHeaderAndRowCount) {
  GeneratorConfig cfg;
  cfg.n_dataset1 = 25;
  cfg.n_dataset2 = 10;
  fs::path dir = fs::path(::testing::TempDir()) / "gen_counts";
  write_datasets(cfg, 3, dir.string());
  std::ifstream in(dir / "dataset2.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "Do,T,Tr,RB,alphaB,vB,omegaB,springback");
  std::size_t rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  EXPECT_EQ(rows, 10u);
}

TEST(Datagen, CsvRoundTripIsStable) {
  GeneratorConfig cfg;
  cfg.n_dataset2 = 15;
  fs::path dir = fs::path(::testing::TempDir()) / "gen_round";
  fs::create_directories(dir);
  auto d2 = generate_dataset2(cfg, 11);
  write_csv(d2, (dir / "a.csv").string());
  auto back = read_csv((dir / "a.csv").string());
  write_csv(back, (dir / "b.csv").string());
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_EQ(back.size(), d2.size());
  EXPECT_EQ(back.feature_names, d2.feature_names);
}

TEST(Datagen, OptionalFeaturesExtendSchema) {
  GeneratorConfig cfg;
  cfg.n_dataset2 = 6;
  cfg.include_optional_features = true;
  auto d2 = generate_dataset2(cfg, 1);
  EXPECT_EQ(d2.feature_names,
            (std::vector<std::string>{"Do", "T", "Tr", "RB", "alphaB", "vB",
                                      "omegaB", "Lp", "gap", "friction"}));
}

// Splitting ------------------------------------------------------------------

TEST(SplitDataset, EightyTwentySizes) {
  GeneratorConfig cfg;
  cfg.n_dataset2 = 80;
  auto d2 = generate_dataset2(cfg, 2);
  auto split = split_dataset(d2, 0.8, 17);
  EXPECT_EQ(split.train.size(), 64u);
  EXPECT_EQ(split.test.size(), 16u);
  EXPECT_EQ(split.test_indices.size(), 16u);

  cfg.n_dataset1 = 600;
  auto d1 = generate_dataset1(cfg, 2);
  auto split1 = split_dataset(d1, 0.8, 17);
  EXPECT_EQ(split1.train.size(), 480u);
  EXPECT_EQ(split1.test.size(), 120u);
}

TEST(SplitDataset, SameSeedSamePartition) {
  GeneratorConfig cfg;
  cfg.n_dataset2 = 30;
  auto d2 = generate_dataset2(cfg, 2);
  auto a = split_dataset(d2, 0.8, 5);
  auto b = split_dataset(d2, 0.8, 5);
  EXPECT_EQ(a.test_indices, b.test_indices);
  EXPECT_EQ(a.train.features, b.train.features);
}

TEST(SplitDataset, PartitionIsDisjointAndComplete) {
  GeneratorConfig cfg;
  cfg.n_dataset2 = 21;
  auto d2 = generate_dataset2(cfg, 9);
  auto split = split_dataset(d2, 0.8, 5);
  EXPECT_EQ(split.train.size() + split.test.size(), d2.size());
  std::set<std::size_t> test_set(split.test_indices.begin(),
                                 split.test_indices.end());
  EXPECT_EQ(test_set.size(), split.test.size());
}

TEST(SplitDataset, RejectsDegenerateSplits) {
  GeneratorConfig cfg;
  cfg.n_dataset2 = 2;
  auto tiny = generate_dataset2(cfg, 1);
  EXPECT_THROW(split_dataset(tiny, 0.9, 1), std::invalid_argument);  // empty test
  EXPECT_THROW(split_dataset(tiny, 1.2, 1), std::invalid_argument);
}
