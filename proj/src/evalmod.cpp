#include "lfforge/evalmod.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

namespace lfforge::eval {

RegressionDataset RegressionDataset::subset(std::span<const Eigen::Index> rows) const {
  RegressionDataset out;
  out.tau = tau;
  out.pair_ids = pair_ids;
  out.categories = categories;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), 3);
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  out.pair_of.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = rows[i];
    out.x.row(static_cast<Eigen::Index>(i)) = x.row(r);
    out.y(static_cast<Eigen::Index>(i)) = y(r);
    out.pair_of.push_back(pair_of[static_cast<std::size_t>(r)]);
  }
  return out;
}

RegressionDataset build_dataset(std::span<const CandidatePair> pairs, double tau, double dt) {
  const double steps = tau / dt;
  const auto lag = static_cast<long>(std::llround(steps));
  if (!(tau > 0) || std::abs(steps - static_cast<double>(lag)) > 1e-9 || lag < 1)
    throw ConfigError("tau must be a positive multiple of dt");
  std::size_t rows = 0;
  for (const auto& p : pairs)
    if (p.samples.size() > static_cast<std::size_t>(lag)) rows += p.samples.size() - static_cast<std::size_t>(lag);

  RegressionDataset d;
  d.tau = tau;
  d.x.resize(static_cast<Eigen::Index>(rows), 3);
  d.y.resize(static_cast<Eigen::Index>(rows));
  d.pair_of.reserve(rows);
  Eigen::Index r = 0;
  for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
    const auto& p = pairs[pi];
    d.pair_ids.push_back(p.id);
    d.categories.push_back(p.category());
    for (std::size_t i = 0; i + static_cast<std::size_t>(lag) < p.samples.size(); ++i, ++r) {
      const auto& s = p.samples[i];
      d.x(r, 0) = s.rel_vel;
      d.x(r, 1) = s.gap_long;
      d.x(r, 2) = s.sv_speed;
      d.y(r) = p.samples[i + static_cast<std::size_t>(lag)].sv_accel;
      d.pair_of.push_back(pi);
    }
  }
  return d;
}

Eigen::VectorXd ModelFit::predict(const Eigen::MatrixXd& x) const {
  return (x * beta.tail<3>()).array() + beta(0);
}

namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  return design;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  return boost::math::ibeta(a, b, x);
}

double student_t_two_sided_p(double t, double dof) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0;
  const boost::math::students_t_distribution<double> dist(dof);
  return 2 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

ModelFit fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index n = x.rows();
  if (x.cols() != 3 || y.size() != n) throw std::invalid_argument("design must be n x 3 with n targets");
  if (n <= 4) throw DataError("OLS needs more than 4 rows");
  const Eigen::MatrixXd design = with_intercept(x);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < design.cols()) {
    for (Eigen::Index j = 1; j <= design.cols(); ++j) {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> part(design.leftCols(j));
      if (part.rank() < j)
        throw DataError(std::string("rank-deficient design: column '") +
                        kCoefficientNames[static_cast<std::size_t>(j - 1)] +
                        "' is collinear with earlier columns");
    }
    throw DataError("rank-deficient design");
  }

  ModelFit f;
  f.beta = qr.solve(y);
  f.fitted = design * f.beta;
  f.residuals = y - f.fitted;
  f.dof = static_cast<long>(n - 4);
  const double sigma2 = f.residuals.squaredNorm() / static_cast<double>(f.dof);
  const Eigen::Matrix4d cov =
      sigma2 * (design.transpose() * design).ldlt().solve(Eigen::Matrix4d::Identity());
  for (int j = 0; j < 4; ++j) {
    f.std_error(j) = std::sqrt(std::max(0.0, cov(j, j)));
    if (f.std_error(j) == 0)
      f.p_value(j) = f.beta(j) == 0 ? 1.0 : 0.0;
    else
      f.p_value(j) = student_t_two_sided_p(f.beta(j) / f.std_error(j), static_cast<double>(f.dof));
  }
  return f;
}

double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  const double sst = (y.array() - y.mean()).square().sum();
  if (sst == 0) return 0;
  return 1 - (y - yhat).squaredNorm() / sst;
}

Metrics metrics(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat, int predictors) {
  const Eigen::Index n = y.size();
  if (yhat.size() != n) throw std::invalid_argument("metrics: size mismatch");
  if (n < 2) throw DataError("metrics need at least two observations");
  const double sigma = std::sqrt((y.array() - y.mean()).square().mean());
  if (!(sigma > 0)) throw DataError("NRMSE undefined: observed values have zero variance");
  Metrics m;
  m.n = static_cast<std::size_t>(n);
  const Eigen::ArrayXd r = (y - yhat).array();
  m.r2 = r_squared(y, yhat);
  const double dn = static_cast<double>(n);
  m.adj_r2 = 1 - (1 - m.r2) * (dn - 1) / (dn - predictors - 1);
  m.mae = r.abs().mean();
  m.rmse = std::sqrt(r.square().mean());
  m.nrmse = m.rmse / sigma;
  return m;
}

Eigen::VectorXd wlr_weights(const Eigen::VectorXd& residuals) {
  return (residuals.array().abs() + 1e-6).inverse().matrix();
}

Histogram weight_histogram(const Eigen::VectorXd& weights, double bin_width, std::size_t bins) {
  Histogram h;
  h.bin_width = bin_width;
  h.counts.assign(bins, 0);
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    const auto b = static_cast<std::size_t>(std::max(0.0, std::floor(weights(i) / bin_width)));
    h.counts[std::min(b, bins - 1)] += 1;
  }
  return h;
}

std::vector<int> assign_folds(std::size_t pairs, int k, std::uint64_t seed) {
  std::vector<std::size_t> order(pairs);
  for (std::size_t i = 0; i < pairs; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  // Fisher-Yates with rejection sampling; independent of the standard
  // library's distribution implementations so folds match across platforms.
  for (std::size_t i = pairs; i > 1; --i) {
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw;
    do draw = rng();
    while (draw >= limit);
    std::swap(order[i - 1], order[static_cast<std::size_t>(draw % bound)]);
  }
  std::vector<int> fold(pairs);
  for (std::size_t i = 0; i < pairs; ++i) fold[order[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  return fold;
}

namespace {

Metrics mean_of(const std::vector<Metrics>& ms) {
  Metrics m;
  for (const auto& x : ms) {
    m.r2 += x.r2;
    m.adj_r2 += x.adj_r2;
    m.mae += x.mae;
    m.rmse += x.rmse;
    m.nrmse += x.nrmse;
    m.n += x.n;
  }
  const double k = static_cast<double>(ms.size());
  m.r2 /= k;
  m.adj_r2 /= k;
  m.mae /= k;
  m.rmse /= k;
  m.nrmse /= k;
  return m;
}

}  // namespace

KFoldReport kfold_eval(const RegressionDataset& data, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k-fold evaluation needs k >= 2");
  const std::size_t pairs = data.pair_ids.size();
  if (pairs < static_cast<std::size_t>(k))
    throw DataError("fewer pairs (" + std::to_string(pairs) + ") than folds (" + std::to_string(k) + ")");
  const auto fold = assign_folds(pairs, k, seed);

  KFoldReport rep;
  std::vector<Metrics> train, test;
  for (int f = 0; f < k; ++f) {
    std::vector<Eigen::Index> tr, te;
    for (Eigen::Index r = 0; r < data.rows(); ++r)
      (fold[data.pair_of[static_cast<std::size_t>(r)]] == f ? te : tr).push_back(r);
    const auto dtr = data.subset(tr);
    const auto dte = data.subset(te);
    FoldResult res;
    for (std::size_t p = 0; p < pairs; ++p)
      if (fold[p] == f) res.test_pairs.push_back(data.pair_ids[p]);
    res.fit = fit_ols(dtr);
    res.train = metrics(dtr.y, res.fit.fitted);
    res.test = metrics(dte.y, res.fit.predict(dte.x));
    train.push_back(res.train);
    test.push_back(res.test);
    rep.folds.push_back(std::move(res));
  }
  rep.mean_train = mean_of(train);
  rep.mean_test = mean_of(test);
  for (std::size_t f = 1; f < rep.folds.size(); ++f) {
    const auto& m = rep.folds[f].test;
    if (m.r2 > rep.folds[rep.best_by_r2].test.r2) rep.best_by_r2 = f;
    if (m.r2 < rep.folds[rep.worst_by_r2].test.r2) rep.worst_by_r2 = f;
    if (m.nrmse < rep.folds[rep.best_by_nrmse].test.nrmse) rep.best_by_nrmse = f;
    if (m.nrmse > rep.folds[rep.worst_by_nrmse].test.nrmse) rep.worst_by_nrmse = f;
  }
  return rep;
}

Improvement improvement_report(const Metrics& before, const Metrics& after, double removed_fraction) {
  auto pct = [](double b, double a) -> std::optional<double> {
    if (b == 0) return std::nullopt;
    return 100.0 * (a - b) / b;
  };
  Improvement imp;
  imp.r2 = pct(before.r2, after.r2);
  imp.adj_r2 = pct(before.adj_r2, after.adj_r2);
  imp.mae = pct(before.mae, after.mae);
  imp.rmse = pct(before.rmse, after.rmse);
  imp.nrmse = pct(before.nrmse, after.nrmse);
  imp.outliers_removed_pct = 100.0 * removed_fraction;
  return imp;
}

}  // namespace lfforge::eval
