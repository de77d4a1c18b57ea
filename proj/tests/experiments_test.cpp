#include <gtest/gtest.h>

#include "forestgd/experiments.hpp"
#include "forestgd/generators.hpp"
#include "test_support.hpp"

namespace forestgd {
namespace {

TEST(Psnr, DefinitionAndFloor) {
  EXPECT_NEAR(psnr_from_mse(1.0, 10.0), 20.0, 1e-12);
  EXPECT_NEAR(psnr_from_mse(0.0, 1.0), 150.0, 1e-9);
  EXPECT_EQ(peak_of(std::vector<double>{-3, 2}), 3.0);
}

TEST(QuadraticFit, RecoversExactParabola) {
  std::vector<double> x{0, 0.5, 1, 1.5, 2}, y;
  for (double v : x) y.push_back(2 * v * v - 3 * v + 1);
  auto f = fit_quadratic(x, y);
  EXPECT_NEAR(f.a, 2, 1e-10);
  EXPECT_NEAR(f.b, -3, 1e-10);
  EXPECT_NEAR(f.c, 1, 1e-10);
  EXPECT_NEAR(f.r_squared, 1, 1e-12);
}

TEST(Grids, Endpoints) {
  auto g = log_grid(0.01, 10, 16);
  ASSERT_EQ(g.size(), 16u);
  EXPECT_DOUBLE_EQ(g.front(), 0.01);
  EXPECT_NEAR(g.back(), 10, 1e-12);
  EXPECT_EQ(linear_grid(0, 1, 3), (std::vector<double>{0, 0.5, 1}));
}

TEST(SmoothSignal, IsLowFrequency) {
  auto g = gen_graph(model::Knn{random_positions(100, 1), 5}, 100, 0);
  auto s = smooth_signal(g);
  EXPECT_NEAR(peak_of(s), 10.0, 1e-12);
  // Rayleigh quotient far below the mean degree.
  EXPECT_LT(dot(s, apply_laplacian(g, s)) / dot(s, s), 1.0);
}

TEST(SweepAlpha, ZeroStepEqualsXbarAndSweepIsQuadratic) {
  auto g = testing::random_connected(60, 2.0, 1, false);
  auto y = standard_normal_signal(60, 1);
  SweepConfig cfg;
  cfg.q = 1.0;
  cfg.samples = 10;
  cfg.realizations = 30;
  cfg.alpha_grid = linear_grid(0.0, 1.0, 11);
  cfg.seed = 3;
  auto r = sweep_alpha(g, y, cfg);
  EXPECT_EQ(r.rows[0].mse_zbar, r.mse_xbar);
  EXPECT_GT(r.fit.a, 0.0);
  EXPECT_GT(r.fit.r_squared, 0.999);
  EXPECT_LT(r.mse_safe, r.mse_xbar);
  EXPECT_FALSE(r.alpha_star.has_value());
  cfg.threads = 3;
  auto again = sweep_alpha(g, y, cfg);
  EXPECT_EQ(again.rows[5].mse_zbar, r.rows[5].mse_zbar);
  EXPECT_EQ(again.mean_alpha_hat, r.mean_alpha_hat);
}

TEST(SweepAlpha, ReportsOracleOnTinyGraphs) {
  auto g = testing::path_graph(3);
  SweepConfig cfg;
  cfg.alpha_grid = {0.0, 0.5};
  cfg.realizations = 5;
  auto r = sweep_alpha(g, std::vector<double>{8, 0, 0}, cfg);
  ASSERT_TRUE(r.alpha_star.has_value());
}

TEST(Denoise, ZeroNoiseLargeQRecoversSignal) {
  auto g = gen_graph(model::Knn{random_positions(80, 2), 5}, 80, 0);
  auto clean = smooth_signal(g);
  DenoiseConfig cfg;
  cfg.q_grid = {1e9};
  cfg.noise_std = 0.0;
  cfg.realizations = 2;
  auto rows = denoise(g, clean, cfg);
  EXPECT_NEAR(rows[0].psnr_y, psnr_from_mse(0.0, 10.0), 1e-9);
  EXPECT_GT(rows[0].psnr_exact, 100.0);
}

TEST(Denoise, GradientStepImprovesOnXbarAtBestQ) {
  auto g = gen_graph(model::Knn{random_positions(150, 3), 5}, 150, 0);
  auto clean = smooth_signal(g);
  DenoiseConfig cfg;
  cfg.q_grid = log_grid(0.01, 10, 16);
  cfg.noise_std = 5.0;
  cfg.samples = 2;
  cfg.realizations = 20;
  cfg.seed = 4;
  auto rows = denoise(g, clean, cfg);
  double best_x = -1e9, best_z = -1e9;
  for (const auto& r : rows) {
    best_x = std::max(best_x, r.psnr_xbar);
    best_z = std::max(best_z, r.psnr_zbar_safe);
  }
  EXPECT_GE(best_z, best_x);
}

}  // namespace
}  // namespace forestgd
