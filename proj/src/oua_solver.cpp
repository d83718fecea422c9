#include "onionlabel/oua_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "onionlabel/errors.hpp"
#include "onionlabel/rng.hpp"

namespace onionlabel {

void SolverConfig::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  if (learning_rate < 0.0 || std::isnan(learning_rate)) {
    throw std::invalid_argument("learning_rate must be > 0 (or 0 for automatic)");
  }
  if (max_iters == 0) throw std::invalid_argument("max_iters must be >= 1");
  if (!(conv_tol > 0.0)) throw std::invalid_argument("conv_tol must be > 0");
  if (chunks == 0) throw std::invalid_argument("chunks must be >= 1");
  if (!(hull_tol >= 0.0)) throw std::invalid_argument("hull tolerance must be >= 0");
}

double epsilon_upper_bound(std::size_t k) {
  if (k < 2) throw std::invalid_argument("class count k must be >= 2");
  const double kk = static_cast<double>(k);
  return 2.0 / kk - 2.0 / (kk * kk);
}

TargetVector init_b(const WeakSignalMatrix& w, double epsilon) {
  const double bound = epsilon_upper_bound(w.k());
  if (!(epsilon >= 0.0) || epsilon > bound + 1e-12) {
    throw std::invalid_argument("epsilon " + std::to_string(epsilon) + " outside [0, " + std::to_string(bound) + "]");
  }
  const double n = static_cast<double>(w.n());
  const double nk = static_cast<double>(w.cols());
  TargetVector target;
  target.epsilon = epsilon;
  target.b = (w.values().rowwise().sum().array() + n - nk * epsilon).matrix();
  return target;
}

TargetVector anneal_b(const WeakSignalMatrix& w, const SafeRegion& region, const SolverConfig& cfg) {
  cfg.validate();
  if (region.dim() != w.m()) throw ShapeError("hull dimension does not match the signal count");
  const double start = epsilon_upper_bound(w.k());
  const double n = static_cast<double>(w.n());
  for (std::size_t step = 0;; ++step) {
    double epsilon = start - static_cast<double>(step) * cfg.alpha;
    if (epsilon < 1e-12) epsilon = 0.0;
    TargetVector target = init_b(w, epsilon);
    switch (region.classify(target.b, n)) {
      case RegionStatus::kSafe:
        return target;
      case RegionStatus::kOutsideH1:
        throw AnnealError(AnnealError::Kind::kOutsideHull,
                          "b/n left Conv(H1) before leaving Conv(H2) at epsilon=" + std::to_string(epsilon));
      case RegionStatus::kInsideH2:
        break;
    }
    if (epsilon == 0.0) {
      throw AnnealError(AnnealError::Kind::kNotSafeAtZero, "b/n is still inside Conv(H2) at epsilon=0");
    }
    if (step >= cfg.max_anneal_steps) {
      throw AnnealError(AnnealError::Kind::kStepBudget,
                        "no safe target within " + std::to_string(cfg.max_anneal_steps) + " annealing steps");
    }
  }
}

TargetVector anneal_b(const WeakSignalMatrix& w, const ColumnCloud& cloud, const HullDecomposition& decomposition,
                      const SolverConfig& cfg) {
  return anneal_b(w, SafeRegion(cloud, decomposition, cfg.hull_tol), cfg);
}

AugmentedSystem augment_system(const ColumnCloud& cloud, const Eigen::VectorXd& b, std::size_t n) {
  if (static_cast<std::size_t>(b.size()) != cloud.dim()) {
    throw ShapeError("target has " + std::to_string(b.size()) + " rows, A has " + std::to_string(cloud.dim()));
  }
  const Eigen::Index m = b.size();
  AugmentedSystem sys;
  sys.A.resize(m + 1, cloud.points().cols());
  sys.A.topRows(m) = cloud.points();
  sys.A.row(m).setOnes();
  sys.b.resize(m + 1);
  sys.b.head(m) = b;
  sys.b(m) = static_cast<double>(n);
  return sys;
}

AugmentedSystem augment_system(const ColumnCloud& cloud, const TargetVector& target, std::size_t n) {
  return augment_system(cloud, target.b, n);
}

double largest_singular_value_squared(const Eigen::MatrixXd& A) {
  // Power iteration on the small Gram matrix A A'.
  const Eigen::MatrixXd gram = A * A.transpose();
  Eigen::VectorXd v = Eigen::VectorXd::Ones(gram.rows()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 1000; ++it) {
    Eigen::VectorXd next = gram * v;
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    next /= norm;
    const double change = std::abs(norm - lambda);
    lambda = norm;
    v = std::move(next);
    if (change <= 1e-13 * lambda) break;
  }
  return lambda;
}

Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& y, double total) {
  const double size = static_cast<double>(y.size());
  if (total < 0.0 || total > size) {
    throw std::invalid_argument("capped simplex total " + std::to_string(total) + " outside [0, " +
                                std::to_string(size) + "]");
  }
  auto shifted_sum = [&](double tau) { return (y.array() - tau).max(0.0).min(1.0).sum(); };
  // shifted_sum is non-increasing in tau; bracket and bisect.
  double lo = y.minCoeff() - 1.0;
  double hi = y.maxCoeff();
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (shifted_sum(mid) > total ? lo : hi) = mid;
  }
  const double tau = 0.5 * (lo + hi);
  return (y.array() - tau).max(0.0).min(1.0).matrix();
}

std::vector<int> decode_labels(const Eigen::VectorXd& soft, std::size_t n, std::size_t k) {
  const LabelVector labels = LabelVector::from_onehot(soft, n, k);
  return {labels.hard().begin(), labels.hard().end()};
}

namespace {

constexpr int kRefineRounds = 4;
constexpr double kFaceTol = 1e-9;

// Gradient descent converges linearly on the face it has identified. Finish
// with minimum-norm least-squares steps over the free coordinates, cut at the
// box. A step is kept only if it lowers the augmented residual, and at a
// stationary point the step is zero, so optima are left alone.
Eigen::VectorXd refine_on_face(const AugmentedSystem& system, Eigen::VectorXd y) {
  double residual = (system.A * y - system.b).norm();
  for (int round = 0; round < kRefineRounds; ++round) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (y(i) > kFaceTol && y(i) < 1.0 - kFaceTol) free.push_back(i);
    }
    if (free.empty()) break;
    const Eigen::MatrixXd face = system.A(Eigen::all, free);
    const Eigen::VectorXd step = face.completeOrthogonalDecomposition().solve(system.b - system.A * y);
    double t = 1.0;
    for (std::size_t f = 0; f < free.size(); ++f) {
      const double yi = y(free[f]);
      const double di = step(static_cast<Eigen::Index>(f));
      if (di > 0.0) t = std::min(t, (1.0 - yi) / di);
      if (di < 0.0) t = std::min(t, -yi / di);
    }
    if (t <= 0.0) break;
    Eigen::VectorXd candidate = y;
    for (std::size_t f = 0; f < free.size(); ++f) candidate(free[f]) += t * step(static_cast<Eigen::Index>(f));
    candidate = candidate.cwiseMax(0.0).cwiseMin(1.0);
    const double next = (system.A * candidate - system.b).norm();
    if (!(next < residual)) break;
    y = std::move(candidate);
    residual = next;
    if (t == 1.0) break;
  }
  return y;
}

}  // namespace

SyntheticLabel solve_labels(const AugmentedSystem& system, std::size_t n, std::size_t k, const SolverConfig& cfg) {
  Rng rng = make_rng(cfg.seed, streams::kSolverInit);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd initial(system.A.cols());
  for (Eigen::Index i = 0; i < initial.size(); ++i) initial(i) = unit(rng);
  return solve_labels(system, n, k, cfg, std::move(initial));
}

SyntheticLabel solve_labels(const AugmentedSystem& system, std::size_t n, std::size_t k, const SolverConfig& cfg,
                            Eigen::VectorXd y) {
  cfg.validate();
  const Eigen::Index cols = system.A.cols();
  const Eigen::Index m = system.A.rows() - 1;
  if (m < 1 || system.b.size() != system.A.rows()) throw ShapeError("augmented system shapes disagree");
  if (static_cast<std::size_t>(cols) != n * k || y.size() != cols) {
    throw ShapeError("system has " + std::to_string(cols) + " columns, expected n*k=" + std::to_string(n * k));
  }

  const double sigma2 = largest_singular_value_squared(system.A);
  const double rate = cfg.learning_rate > 0.0 ? cfg.learning_rate : (sigma2 > 0.0 ? 1.0 / sigma2 : 1.0);
  const auto top = system.A.topRows(m);
  const auto target = system.b.head(m);

  SyntheticLabel out;
  y = y.cwiseMax(0.0).cwiseMin(1.0);
  out.initial_residual = (top * y - target).norm();

  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    const Eigen::VectorXd gradient = system.A.transpose() * (system.A * y - system.b);
    Eigen::VectorXd next = (y - rate * gradient).cwiseMax(0.0).cwiseMin(1.0);
    const double change = (next - y).cwiseAbs().maxCoeff() / std::max(1.0, y.cwiseAbs().maxCoeff());
    y = std::move(next);
    out.iterations = it;
    if (change < cfg.conv_tol) {
      out.converged = true;
      break;
    }
  }

  y = refine_on_face(system, std::move(y));

  // Clipping can break 1'y = n; restore it with the nearest feasible point.
  const double total = static_cast<double>(n);
  if (std::abs(y.sum() - total) > 1e-12 * total) y = project_capped_simplex(y, total);

  out.residual = (top * y - target).norm();
  out.hard = decode_labels(y, n, k);
  out.soft = std::move(y);
  return out;
}

SyntheticLabel run_oua(const WeakSignalMatrix& w, const SolverConfig& cfg, std::optional<OuaTrace>& trace) {
  cfg.validate();
  WeakSignalMatrix reduced = reduce_signals(w, cfg.chunks);
  ColumnCloud cloud = build_A(reduced);
  HullDecomposition decomposition = hull_decompose(cloud, cfg.hull_tol);
  const SafeRegion region(cloud, decomposition, cfg.hull_tol);
  TargetVector target = anneal_b(reduced, region, cfg);

  SyntheticLabel label = solve_labels(augment_system(cloud, target, w.n()), w.n(), w.k(), cfg);
  label.epsilon_used = target.epsilon;
  trace.emplace(OuaTrace{std::move(reduced), std::move(cloud), std::move(decomposition), std::move(target)});
  return label;
}

SyntheticLabel run_oua(const WeakSignalMatrix& w, const SolverConfig& cfg) {
  std::optional<OuaTrace> trace;
  return run_oua(w, cfg, trace);
}

}  // namespace onionlabel
