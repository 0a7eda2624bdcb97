#include "cacq/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace cacq {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

using SliceMap = Eigen::Map<MatrixXd>;            // S x (X+1), phase fastest
using ConstSliceMap = Eigen::Map<const MatrixXd>;

}  // namespace

SolverOptions::Method solver_method_from_string(const std::string& name) {
  if (name == "auto") return SolverOptions::Method::kAuto;
  if (name == "direct") return SolverOptions::Method::kDirect;
  if (name == "aggregated") return SolverOptions::Method::kAggregated;
  if (name == "power") return SolverOptions::Method::kPower;
  throw std::invalid_argument("unknown solver method: " + name);
}

const char* to_string(SolverOptions::Method method) {
  switch (method) {
    case SolverOptions::Method::kAuto: return "auto";
    case SolverOptions::Method::kDirect: return "direct";
    case SolverOptions::Method::kAggregated: return "aggregated";
    case SolverOptions::Method::kPower: return "power";
  }
  return "unknown";
}

void validate(const SystemConfig& config) {
  validate(config.mmpp);
  validate(config.channel);
  if (config.queue_capacity < 1) throw std::invalid_argument("queue_capacity must be >= 1");
  if (config.max_batch < 1) throw std::invalid_argument("max_batch must be >= 1");
  if (config.conn_arrival_per_min < 0.0)
    throw std::invalid_argument("conn_arrival_per_min must be >= 0");
  if (config.conn_mean_duration_min <= 0.0)
    throw std::invalid_argument("conn_mean_duration_min must be > 0");
  if (config.frame_duration_ms <= 0.0)
    throw std::invalid_argument("frame_duration_ms must be > 0");
  if (config.policy.kind() == PolicyKind::kQueueAware) {
    if (config.policy.has_alpha_curve()) {
      if (config.policy.alpha_curve().size() != config.queue_capacity + 1)
        throw std::invalid_argument("policy alpha curve must have queue_capacity + 1 entries");
    } else if (config.policy.b_th() > config.queue_capacity + 1) {
      throw std::invalid_argument("policy b_th must be <= queue_capacity + 1");
    }
  }
  if (config.solver.tolerance <= 0.0) throw std::invalid_argument("solver tolerance must be > 0");
  if (config.solver.max_sweeps < 1) throw std::invalid_argument("solver max_sweeps must be >= 1");
}

StateSpace::StateSpace(int phase_count, int queue_capacity, int connection_bound)
    : phases_(phase_count), queue_capacity_(queue_capacity), connection_bound_(connection_bound) {
  if (phase_count < 1 || queue_capacity < 0 || connection_bound < 0)
    throw std::invalid_argument("state space: invalid dimensions");
  const std::int64_t n = std::int64_t{phase_count} * (queue_capacity + 1) * (connection_bound + 1);
  if (n > std::numeric_limits<int>::max())
    throw std::invalid_argument("state space: too many states");
  size_ = static_cast<int>(n);
}

QueueKernel queue_transition_kernel(const Pmf& batch, const Pmf& service, int queue_capacity) {
  const int x_max = queue_capacity;
  const int s_max = service.support_max();
  const int a_max = batch.support_max();
  QueueKernel kernel;
  kernel.shift = s_max;
  kernel.next = MatrixXd::Zero(x_max + 1, x_max + 1);
  kernel.net_change = MatrixXd::Zero(x_max + 1, s_max + a_max + 1);
  for (int x = 0; x <= x_max; ++x) {
    for (int r = 0; r <= s_max; ++r) {
      const double pr = service(r);
      if (pr == 0.0) continue;
      const int served = std::min(r, x);
      for (int a = 0; a <= a_max; ++a) {
        const double pa = batch(a);
        if (pa == 0.0) continue;
        const double p = pr * pa;
        kernel.net_change(x, a - served + s_max) += p;
        kernel.next(x, std::min(x_max, x - served + a)) += p;
      }
    }
  }
  return kernel;
}

Pmf connection_transition_pmf(const CacPolicy& policy, int connections, int queue_len,
                              double arrival_mean, double depart_prob) {
  const int bound = policy.connection_bound();
  if (connections < 0 || connections > bound)
    throw std::invalid_argument("connection_transition_pmf: connections out of range");
  if (arrival_mean < 0.0)
    throw std::invalid_argument("connection_transition_pmf: negative arrival mean");
  const int cap = bound - connections;
  const double alpha = policy.alpha(queue_len);

  // accepted arrivals: Poisson count, thinned by alpha, stopped at the bound
  VectorXd accepted = VectorXd::Zero(cap + 1);
  const Pmf arrivals = poisson_pmf_tail_folded(arrival_mean, 1e-12);
  if (cap == 0 || alpha == 0.0) {
    accepted[0] = 1.0;
  } else {
    for (int n = 0; n <= arrivals.support_max(); ++n) {
      const double pn = arrivals(n);
      if (pn == 0.0) continue;
      const Pmf thinned = binomial_pmf(n, alpha);
      for (int k = 0; k <= n; ++k) accepted[std::min(k, cap)] += pn * thinned(k);
    }
  }

  const Pmf departures = binomial_pmf(connections, depart_prob);
  VectorXd out = VectorXd::Zero(bound + 1);
  for (int k = 0; k <= cap; ++k) {
    const double pk = accepted[k];
    if (pk == 0.0) continue;
    for (int d = 0; d <= connections; ++d) {
      const int next = std::clamp(connections + k - d, 0, bound);
      out[next] += pk * departures(d);
    }
  }
  return Pmf(std::move(out));
}

TransitionModel TransitionModel::assemble(const SystemConfig& config) {
  validate(config);
  const int phases = config.mmpp.phase_count();
  const int x_max = config.queue_capacity;
  const int bound = config.policy.connection_bound();

  TransitionModel model(config, StateSpace(phases, x_max, bound));
  model.phase_step_ = phase_step_matrix(config.mmpp, config.frame_minutes());
  model.service_ = service_pmf(config.channel);

  model.queue_kernels_.reserve(std::size_t(bound + 1) * phases);
  model.batch_means_ = MatrixXd::Zero(bound + 1, phases);
  for (int c = 0; c <= bound; ++c) {
    for (int s = 0; s < phases; ++s) {
      const Pmf batch = batch_arrival_pmf(config.mmpp, c, s, config.max_batch);
      model.batch_means_(c, s) = batch.mean();
      model.queue_kernels_.push_back(queue_transition_kernel(batch, model.service_, x_max));
    }
  }

  const double arrival_mean = config.conn_arrival_mean();
  const double depart_prob = config.conn_depart_prob();
  model.conn_kernels_.reserve(bound + 1);
  for (int c = 0; c <= bound; ++c) {
    MatrixXd g = MatrixXd::Zero(x_max + 1, bound + 1);
    for (int x = 0; x <= x_max; ++x) {
      const Pmf pmf =
          connection_transition_pmf(config.policy, c, x, arrival_mean, depart_prob);
      for (int cn = 0; cn <= pmf.support_max(); ++cn) g(x, cn) = pmf(cn);
    }
    model.conn_kernels_.push_back(std::move(g));
  }

  model.expected_service_ = VectorXd::Zero(x_max + 1);
  for (int x = 0; x <= x_max; ++x) {
    double e = 0.0;
    for (int r = 0; r <= model.service_.support_max(); ++r)
      e += std::min(r, x) * model.service_(r);
    model.expected_service_[x] = e;
  }
  return model;
}

void TransitionModel::row(int source, std::vector<std::pair<int, double>>& out) const {
  out.clear();
  const auto st = space_.state(source);
  const MatrixXd& g = conn_kernels_[st.c];
  const int phases = space_.phases();
  const int x_max = space_.queue_capacity();
  const QueueKernel& qk = queue_kernel(st.c, st.phase);
  for (int cn = 0; cn <= space_.connection_bound(); ++cn) {
    const double pg = g(st.x, cn);
    if (pg == 0.0) continue;
    for (int xn = 0; xn <= x_max; ++xn) {
      const double pq = qk.next(st.x, xn);
      if (pq == 0.0) continue;
      const double pgq = pg * pq;
      for (int sn = 0; sn < phases; ++sn) {
        const double p = pgq * phase_step_(st.phase, sn);
        if (p != 0.0) out.emplace_back(space_.index(sn, xn, cn), p);
      }
    }
  }
}

Eigen::VectorXd TransitionModel::apply(const VectorXd& pi) const {
  const int phases = space_.phases();
  const int width = space_.queue_capacity() + 1;
  const int levels = space_.connection_bound() + 1;
  const int level_dim = phases * width;
  if (pi.size() != space_.size()) throw std::invalid_argument("apply: dimension mismatch");

  VectorXd out = VectorXd::Zero(pi.size());
  MatrixXd tmp(phases, width);
  for (int c = 0; c < levels; ++c) {
    ConstSliceMap slice(pi.data() + std::size_t(c) * level_dim, phases, width);
    const MatrixXd& g = conn_kernels_[c];
    for (int ct = 0; ct < levels; ++ct) {
      if ((g.col(ct).array() == 0.0).all()) continue;
      tmp.setZero();
      for (int x = 0; x < width; ++x) {
        const double gx = g(x, ct);
        if (gx == 0.0) continue;
        for (int s = 0; s < phases; ++s) {
          const double w = slice(s, x) * gx;
          if (w == 0.0) continue;
          tmp.row(s) += w * queue_kernel(c, s).next.row(x);
        }
      }
      SliceMap out_slice(out.data() + std::size_t(ct) * level_dim, phases, width);
      out_slice.noalias() += phase_step_.transpose() * tmp;
    }
  }
  return out;
}

double TransitionModel::residual_l1(const VectorXd& pi) const {
  return (apply(pi) - pi).cwiseAbs().sum();
}

Eigen::MatrixXd TransitionModel::dense() const {
  const int n = space_.size();
  MatrixXd p = MatrixXd::Zero(n, n);
  std::vector<std::pair<int, double>> entries;
  for (int i = 0; i < n; ++i) {
    row(i, entries);
    for (const auto& [j, v] : entries) p(i, j) = v;
  }
  return p;
}

std::size_t TransitionModel::sparse_bytes_estimate() const {
  const int phases = space_.phases();
  std::size_t nnz = 0;
  std::vector<int> phase_nnz(phases);
  for (int s = 0; s < phases; ++s)
    phase_nnz[s] = static_cast<int>((phase_step_.row(s).array() != 0.0).count());
  for (int c = 0; c <= space_.connection_bound(); ++c) {
    const MatrixXd& g = conn_kernels_[c];
    for (int x = 0; x <= space_.queue_capacity(); ++x) {
      const std::size_t g_nnz = (g.row(x).array() != 0.0).count();
      for (int s = 0; s < phases; ++s) {
        const std::size_t q_nnz =
            (queue_kernel(c, s).next.row(x).array() != 0.0).count();
        nnz += g_nnz * q_nnz * phase_nnz[s];
      }
    }
  }
  return nnz * (sizeof(double) + sizeof(int)) + (space_.size() + 1) * sizeof(std::int64_t);
}

Eigen::SparseMatrix<double, Eigen::RowMajor> TransitionModel::to_sparse(
    std::size_t budget_bytes) const {
  const std::size_t estimate = sparse_bytes_estimate();
  if (estimate > budget_bytes)
    throw MemoryBudgetError(
        "transition matrix needs ~" + std::to_string(estimate / (1024 * 1024)) +
        " MiB explicit storage, over the configured budget; use the matrix-free "
        "row application (apply/row) instead");
  const int n = space_.size();
  Eigen::SparseMatrix<double, Eigen::RowMajor> p(n, n);
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<std::pair<int, double>> entries;
  for (int i = 0; i < n; ++i) {
    row(i, entries);
    for (const auto& [j, v] : entries) triplets.emplace_back(i, j, v);
  }
  p.setFromTriplets(triplets.begin(), triplets.end());
  return p;
}

Eigen::VectorXd dense_stationary(const MatrixXd& p) {
  const int n = static_cast<int>(p.rows());
  if (p.cols() != n || n < 1) throw std::invalid_argument("dense_stationary: not square");
  MatrixXd a = p.transpose() - MatrixXd::Identity(n, n);
  a.row(n - 1).setOnes();
  VectorXd b = VectorXd::Zero(n);
  b[n - 1] = 1.0;
  VectorXd pi = a.partialPivLu().solve(b);
  auto cleanup = [&](VectorXd& v) {
    v = v.cwiseMax(0.0);
    const double total = v.sum();
    if (total <= 0.0) throw std::runtime_error("dense_stationary: solve produced zero vector");
    v /= total;
  };
  cleanup(pi);
  if ((pi.transpose() * p - pi.transpose()).cwiseAbs().sum() < 1e-8 * n) return pi;

  // fall back to the null space of (P^T - I); unique stationary law required
  Eigen::FullPivLU<MatrixXd> lu(p.transpose() - MatrixXd::Identity(n, n));
  lu.setThreshold(1e-10);
  const MatrixXd kernel = lu.kernel();
  if (kernel.cols() != 1)
    throw std::runtime_error("dense_stationary: stationary distribution not unique");
  pi = kernel.col(0);
  if (pi.sum() < 0.0) pi = -pi;
  cleanup(pi);
  return pi;
}

namespace {

// Stationary solve by level-block Gauss-Seidel sweeps with an exact
// aggregation step over connection levels each sweep. Within-level systems
// are factored once; the aggregated level chain is solved directly, which
// removes the slow connection timescale from the iteration.
class AggregatedSolver {
 public:
  explicit AggregatedSolver(const TransitionModel& model) : model_(model) {
    const StateSpace& sp = model.space();
    phases_ = sp.phases();
    width_ = sp.queue_capacity() + 1;
    levels_ = sp.connection_bound() + 1;
    level_dim_ = phases_ * width_;
    level_targets_.resize(levels_);
    for (int c = 0; c < levels_; ++c)
      for (int ct = 0; ct < levels_; ++ct)
        if (!(model.connection_kernel(c).col(ct).array() == 0.0).all())
          level_targets_[c].push_back(ct);
    level_sources_.resize(levels_);
    for (int c = 0; c < levels_; ++c)
      for (int ct : level_targets_[c]) level_sources_[ct].push_back(c);

    closed_.assign(levels_, false);
    factors_.resize(levels_);
    within_.resize(levels_);
    for (int c = 0; c < levels_; ++c) {
      MatrixXd block = level_block(c);
      const double max_leak = (1.0 - block.rowwise().sum().array()).maxCoeff();
      if (max_leak < 1e-13) {
        closed_[c] = true;
        within_[c] = dense_stationary(block);
      } else {
        MatrixXd system =
            MatrixXd::Identity(level_dim_, level_dim_) - block.transpose();  // (I - B_c)^T
        factors_[c] = std::make_unique<Eigen::PartialPivLU<MatrixXd>>(std::move(system));
      }
    }
  }

  SteadyState run(const SolverOptions& options) const {
    const int n = model_.space().size();
    VectorXd pi = VectorXd::Constant(n, 1.0 / n);
    SteadyState result;
    result.method = "aggregated";
    for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
      gauss_seidel_sweep(pi);
      aggregate(pi);
      pi /= pi.sum();
      result.residual = model_.residual_l1(pi);
      result.sweeps_used = sweep;
      if (!std::isfinite(result.residual))
        throw std::runtime_error("aggregated solver diverged; try solver method 'power'");
      if (result.residual <= options.tolerance) {
        result.converged = true;
        break;
      }
    }
    result.pi = std::move(pi);
    if (!result.converged)
      throw ConvergenceError(std::move(result), "stationary solve did not converge");
    return result;
  }

 private:
  // dense within-level transition block: targets with the same c
  MatrixXd level_block(int c) const {
    MatrixXd block = MatrixXd::Zero(level_dim_, level_dim_);
    const MatrixXd& g = model_.connection_kernel(c);
    const MatrixXd& h = model_.phase_step();
    for (int x = 0; x < width_; ++x) {
      const double gx = g(x, c);
      if (gx == 0.0) continue;
      for (int s = 0; s < phases_; ++s) {
        const auto& k_row = model_.queue_kernel(c, s).next.row(x);
        for (int xn = 0; xn < width_; ++xn) {
          const double kq = k_row(xn) * gx;
          if (kq == 0.0) continue;
          for (int sn = 0; sn < phases_; ++sn)
            block(x * phases_ + s, xn * phases_ + sn) = kq * h(s, sn);
        }
      }
    }
    return block;
  }

  // contribution of level c_src's slice to level c_tgt under one step
  void apply_level(const VectorXd& pi, int c_src, int c_tgt, VectorXd& out) const {
    ConstSliceMap slice(pi.data() + std::size_t(c_src) * level_dim_, phases_, width_);
    const MatrixXd& g = model_.connection_kernel(c_src);
    MatrixXd tmp = MatrixXd::Zero(phases_, width_);
    for (int x = 0; x < width_; ++x) {
      const double gx = g(x, c_tgt);
      if (gx == 0.0) continue;
      for (int s = 0; s < phases_; ++s) {
        const double w = slice(s, x) * gx;
        if (w == 0.0) continue;
        tmp.row(s) += w * model_.queue_kernel(c_src, s).next.row(x);
      }
    }
    SliceMap out_map(out.data(), phases_, width_);
    out_map.noalias() += model_.phase_step().transpose() * tmp;
  }

  void gauss_seidel_sweep(VectorXd& pi) const {
    VectorXd inflow(level_dim_);
    for (int c = 0; c < levels_; ++c) {
      auto level = pi.segment(std::size_t(c) * level_dim_, level_dim_);
      if (closed_[c]) {
        level = within_[c] * level.sum();
        continue;
      }
      inflow.setZero();
      for (int src : level_sources_[c])
        if (src != c) apply_level(pi, src, c, inflow);
      level = factors_[c]->solve(inflow);
      level = level.cwiseMax(0.0);
    }
  }

  // replace level masses by the stationary law of the aggregated level chain
  void aggregate(VectorXd& pi) const {
    MatrixXd w = MatrixXd::Zero(levels_, levels_);
    std::vector<double> mass(levels_);
    for (int c = 0; c < levels_; ++c) {
      ConstSliceMap slice(pi.data() + std::size_t(c) * level_dim_, phases_, width_);
      mass[c] = slice.sum();
      const MatrixXd& g = model_.connection_kernel(c);
      VectorXd queue_mass = slice.colwise().sum();  // per x
      if (mass[c] > 0.0) {
        queue_mass /= mass[c];
      } else {
        queue_mass.setConstant(1.0 / width_);
      }
      w.row(c) = queue_mass.transpose() * g;
    }
    const VectorXd level_law = dense_stationary(w);
    for (int c = 0; c < levels_; ++c) {
      auto level = pi.segment(std::size_t(c) * level_dim_, level_dim_);
      if (mass[c] > 0.0) {
        level *= level_law[c] / mass[c];
      } else if (level_law[c] > 0.0) {
        level = (closed_[c] ? within_[c] : VectorXd::Constant(level_dim_, 1.0 / level_dim_)) *
                level_law[c];
      }
    }
  }

  const TransitionModel& model_;
  int phases_ = 0, width_ = 0, levels_ = 0, level_dim_ = 0;
  std::vector<std::vector<int>> level_targets_, level_sources_;
  std::vector<bool> closed_;
  std::vector<VectorXd> within_;
  std::vector<std::unique_ptr<Eigen::PartialPivLU<MatrixXd>>> factors_;
};

SteadyState solve_direct(const TransitionModel& model, const SolverOptions& options) {
  SteadyState result;
  result.method = "direct";
  result.pi = dense_stationary(model.dense());
  result.residual = model.residual_l1(result.pi);
  result.sweeps_used = 1;
  result.converged = result.residual <= options.tolerance;
  if (!result.converged)
    throw ConvergenceError(std::move(result), "direct solve residual above tolerance");
  return result;
}

SteadyState solve_power(const TransitionModel& model, const SolverOptions& options) {
  const int n = model.space().size();
  SteadyState result;
  result.method = "power";
  VectorXd pi = VectorXd::Constant(n, 1.0 / n);
  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    // damped step (P + I)/2 suppresses periodic components; same fixed point
    VectorXd next = 0.5 * (model.apply(pi) + pi);
    result.residual = 2.0 * (next - pi).cwiseAbs().sum();
    result.sweeps_used = sweep;
    pi = next / next.sum();
    if (result.residual <= options.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.pi = std::move(pi);
  if (!result.converged)
    throw ConvergenceError(std::move(result), "power iteration did not converge");
  return result;
}

}  // namespace

SteadyState solve(const TransitionModel& model) { return solve(model, model.config().solver); }

SteadyState solve(const TransitionModel& model, const SolverOptions& options) {
  const int n = model.space().size();
  auto method = options.method;
  if (method == SolverOptions::Method::kAuto) {
    const std::size_t level_dim =
        std::size_t(model.space().phases()) * (model.space().queue_capacity() + 1);
    const std::size_t level_lu_bytes =
        std::size_t(model.space().connection_bound() + 1) * level_dim * level_dim * sizeof(double);
    if (n <= options.dense_direct_limit)
      method = SolverOptions::Method::kDirect;
    else if (level_lu_bytes <= options.memory_budget_mb * std::size_t(1024 * 1024) / 2)
      method = SolverOptions::Method::kAggregated;
    else
      method = SolverOptions::Method::kPower;
  }
  switch (method) {
    case SolverOptions::Method::kDirect: return solve_direct(model, options);
    case SolverOptions::Method::kAggregated: return AggregatedSolver(model).run(options);
    case SolverOptions::Method::kPower: return solve_power(model, options);
    case SolverOptions::Method::kAuto: break;
  }
  throw std::logic_error("solve: unreachable");
}

Eigen::VectorXd marginal(const VectorXd& pi, const StateSpace& space, Axis axis) {
  if (pi.size() != space.size()) throw std::invalid_argument("marginal: dimension mismatch");
  int size = 0;
  switch (axis) {
    case Axis::kPhase: size = space.phases(); break;
    case Axis::kQueue: size = space.queue_capacity() + 1; break;
    case Axis::kConnections: size = space.connection_bound() + 1; break;
  }
  VectorXd out = VectorXd::Zero(size);
  for (int i = 0; i < space.size(); ++i) {
    const auto st = space.state(i);
    const int key = axis == Axis::kPhase ? st.phase : axis == Axis::kQueue ? st.x : st.c;
    out[key] += pi[i];
  }
  return out;
}

}  // namespace cacq
