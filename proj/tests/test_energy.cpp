#include <gtest/gtest.h>

#include "hisense/energy.hpp"
#include "hisense/error.hpp"
#include "hisense/random.hpp"

namespace energy = hisense::energy;

TEST(Energy, DefaultCoefficients) {
  const energy::EnergyParams p;
  EXPECT_DOUBLE_EQ(p.e_edge, 0.05);
  EXPECT_DOUBLE_EQ(p.e_comm, 2.0);
  EXPECT_DOUBLE_EQ(p.e_cloud, 8.0);
  EXPECT_DOUBLE_EQ(p.accelerator_factor, 23.6);
  EXPECT_DOUBLE_EQ(p.on_cpu_gpu().e_edge, 0.05 * 23.6);
}

TEST(Energy, ClosedForms) {
  const energy::EnergyParams p;
  const auto conv = energy::conventional_energy(100, p);
  EXPECT_DOUBLE_EQ(conv.total, 100 * 10.0);
  EXPECT_DOUBLE_EQ(conv.normalized_total, 1.0);
  EXPECT_DOUBLE_EQ(conv.edge, 0.0);

  const auto comp = energy::compressive_energy(100, p);
  EXPECT_DOUBLE_EQ(comp.total, 100 * (0.1 + 2.0 * 0.5 + 8.0));
  EXPECT_DOUBLE_EQ(comp.normalized_total, (0.1 + 1.0 + 8.0) / 10.0);

  const auto ours = energy::ours_energy(100.0, 7.0, p);
  EXPECT_DOUBLE_EQ(ours.edge, 5.0);
  EXPECT_DOUBLE_EQ(ours.comm, 14.0);
  EXPECT_DOUBLE_EQ(ours.cloud, 56.0);
  EXPECT_DOUBLE_EQ(ours.normalized_total, 75.0 / 1000.0);
  EXPECT_DOUBLE_EQ(energy::expected_transmitted_fraction(0.1, 0.9, 0.05), 0.09 + 0.045);
}

TEST(Energy, InvalidParamsRejected) {
  energy::EnergyParams p;
  p.e_comm = -1;
  EXPECT_THROW(p.validate(), hisense::InvalidArgument);
  p = {};
  p.compression_ratio = 0.0;
  EXPECT_THROW(p.validate(), hisense::InvalidArgument);
  EXPECT_THROW(energy::ours_energy(-1.0, 0.0, energy::EnergyParams{}), hisense::InvalidArgument);
}

TEST(Energy, BreakdownFractionsSumToOne) {
  const std::vector<double> grid{0.01, 0.2};
  const auto rows = energy::breakdown_report(1000, energy::EnergyParams{}, 0.9, 0.05, grid);
  ASSERT_EQ(rows.size(), 8u);
  for (const auto& r : rows) EXPECT_NEAR(r.edge_fraction + r.comm_fraction + r.cloud_fraction, 1.0, 1e-12);
  EXPECT_EQ(rows[0].method, "conventional");
  EXPECT_DOUBLE_EQ(rows[0].normalized_total, 1.0);
  const double sent = 0.01 * 0.9 + 0.99 * 0.05;
  EXPECT_NEAR(rows[2].normalized_total, (0.05 + sent * 10.0) / 10.0, 1e-12);
  EXPECT_GT(rows[3].normalized_total, rows[2].normalized_total);
}

TEST(Energy, ThresholdGrid) {
  const auto g = energy::threshold_grid(-1.0, 1.0, 5);
  EXPECT_EQ(g, std::vector<double>({-1.0, -0.5, 0.0, 0.5, 1.0}));
  EXPECT_TRUE(energy::threshold_grid(0, 1, 0).empty());
}

TEST(Energy, SweepIsMonotoneOnRandomStreams) {
  hisense::Rng rng(8);
  for (int s = 0; s < 20; ++s) {
    energy::ScoredStream st;
    for (int i = 0; i < 300; ++i) {
      const bool a = rng.bernoulli(0.05);
      st.aoi.push_back(a);
      st.scores.push_back(std::clamp(rng.normal(a ? 0.5 : 0.0, 0.3), -1.0, 1.0));
    }
    hisense::stream::PipelineConfig base;
    const auto pts = energy::tradeoff_sweep(st, base, energy::EnergyParams{}, energy::threshold_grid(1, -1, 41));
    for (std::size_t i = 1; i < pts.size(); ++i) {
      EXPECT_LT(pts[i - 1].t_score, pts[i].t_score);
      EXPECT_LE(pts[i].transmitted_fraction, pts[i - 1].transmitted_fraction);
      EXPECT_GE(pts[i].quality_loss, pts[i - 1].quality_loss);
      EXPECT_GE(pts[i].energy_saving, pts[i - 1].energy_saving);
    }
  }
}
