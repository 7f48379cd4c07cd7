#pragma once

#include "lfforge/pairing.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lfforge::eval {

/// Regression rows of y(t + tau) = b0 + b1 x1(t) + b2 x2(t) + b3 x3(t), with
/// x1 = relative speed, x2 = bumper-to-bumper gap, x3 = SV speed (SI units).
struct RegressionDataset {
  Eigen::MatrixXd x;                 ///< n x 3
  Eigen::VectorXd y;                 ///< SV acceleration tau later
  std::vector<std::size_t> pair_of;  ///< row -> index into pair_ids
  std::vector<std::string> pair_ids;
  std::vector<std::string> categories;  ///< per pair
  double tau = 0.5;

  Eigen::Index rows() const { return y.size(); }
  RegressionDataset subset(std::span<const Eigen::Index> row_indices) const;
};

inline constexpr std::array<const char*, 4> kCoefficientNames = {"intercept", "rel_vel", "gap_long",
                                                                 "sv_speed"};

/// One row per sample that has a successor tau later inside its own pair.
/// Throws ConfigError when tau is not a positive multiple of dt.
RegressionDataset build_dataset(std::span<const CandidatePair> pairs, double tau, double dt);

struct ModelFit {
  Eigen::Vector4d beta = Eigen::Vector4d::Zero();
  Eigen::Vector4d std_error = Eigen::Vector4d::Zero();
  Eigen::Vector4d p_value = Eigen::Vector4d::Ones();
  Eigen::VectorXd residuals;
  Eigen::VectorXd fitted;
  long dof = 0;

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

/// Ordinary least squares with intercept via column-pivoted QR. p-values are
/// two-sided t-tests with n - 4 degrees of freedom. Throws DataError for
/// n <= 4 or a rank-deficient design (naming the first collinear column).
ModelFit fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
inline ModelFit fit_ols(const RegressionDataset& d) { return fit_ols(d.x, d.y); }

/// Two-sided p-value of a t statistic with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);
/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

struct Metrics {
  double r2 = 0, adj_r2 = 0, mae = 0, rmse = 0, nrmse = 0;
  std::size_t n = 0;
};

/// 1 - SSE/SST; 0 when y is constant.
double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);

/// NRMSE = RMSE / sigma_y with the population standard deviation. Throws
/// DataError when sigma_y = 0 or sizes mismatch / n < 2.
Metrics metrics(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat, int predictors = 3);

/// w_i = 1 / (|r_i| + 1e-6).
Eigen::VectorXd wlr_weights(const Eigen::VectorXd& residuals);

struct Histogram {
  double bin_width = 5;
  std::vector<std::size_t> counts;  ///< last bin is open-ended
};
Histogram weight_histogram(const Eigen::VectorXd& weights, double bin_width = 5.0,
                           std::size_t bins = 20);

struct FoldResult {
  std::vector<std::string> test_pairs;
  ModelFit fit;
  Metrics train;
  Metrics test;
};

struct KFoldReport {
  std::vector<FoldResult> folds;
  Metrics mean_train;
  Metrics mean_test;
  std::size_t best_by_r2 = 0, worst_by_r2 = 0, best_by_nrmse = 0, worst_by_nrmse = 0;
};

/// Pairs are shuffled with a seeded Fisher-Yates and dealt round-robin into
/// k folds; each fold is fit on the rest and tested on itself. Best/worst
/// folds are selected by test R^2 and test NRMSE.
KFoldReport kfold_eval(const RegressionDataset& data, int k = 5, std::uint64_t seed = 42);

/// Fold assignment per pair index (exposed for partition checks).
std::vector<int> assign_folds(std::size_t pairs, int k, std::uint64_t seed);

struct Improvement {
  std::optional<double> r2, adj_r2, mae, rmse, nrmse;  ///< 100 (after - before) / before
  double outliers_removed_pct = 0;
};

Improvement improvement_report(const Metrics& before, const Metrics& after,
                               double removed_fraction);

}  // namespace lfforge::eval
