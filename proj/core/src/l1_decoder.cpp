#include <cmath>
#include <stdexcept>

#include "qnc/decoders.hpp"

namespace qnc {
namespace {

// Largest squared singular value of theta (Lipschitz constant of the
// least-squares gradient), by power iteration on theta^T theta.
double lipschitz_constant(const Eigen::MatrixXd& theta) {
  const int n = static_cast<int>(theta.cols());
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n) / std::sqrt(double(n));
  double lam = 0.0;
  for (int it = 0; it < 80; ++it) {
    Eigen::VectorXd w = theta.transpose() * (theta * v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double lam_new = v.dot(w);
    v = w / norm;
    if (it > 4 && std::abs(lam_new - lam) <= 1e-12 * std::abs(lam_new)) {
      lam = lam_new;
      break;
    }
    lam = lam_new;
  }
  return lam;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& u, double t) {
  return u.array().sign() * (u.array().abs() - t).max(0.0);
}

struct StageResult {
  Eigen::VectorXd s;
  double residual = 0.0;
  int iterations = 0;
};

// Monotone accelerated proximal-gradient descent on
// 0.5 ||theta s - z||^2 + lambda ||s||_1, warm-started at s0.  The accepted
// iterate's objective never increases (the proximal candidate is taken only
// when it improves), which keeps the reported objective sequence monotone.
StageResult solve_stage(const Eigen::MatrixXd& theta, const Eigen::VectorXd& z,
                        double lambda, double lip, const Eigen::VectorXd& s0,
                        const L1Options& opts, int stage) {
  const double step = 1.0 / lip;
  auto objective = [&](const Eigen::VectorXd& s) {
    return 0.5 * (theta * s - z).squaredNorm() + lambda * s.lpNorm<1>();
  };

  Eigen::VectorXd x = s0, x_prev = s0, y = s0, u_prev = s0;
  double fx = objective(x);
  double t = 1.0;
  int it = 0;
  for (; it < opts.max_inner; ++it) {
    const Eigen::VectorXd grad = theta.transpose() * (theta * y - z);
    const Eigen::VectorXd u = soft_threshold(y - step * grad, step * lambda);
    const double fu = objective(u);

    x_prev = x;
    if (fu <= fx) {
      x = u;
      fx = fu;
    }
    if (opts.on_objective) opts.on_objective(stage, fx);

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = x + (t / t_next) * (u - x) + ((t - 1.0) / t_next) * (x - x_prev);
    t = t_next;

    const double move = (u - u_prev).norm();
    u_prev = u;
    if (it > 0 && move <= opts.inner_tol * std::max(1.0, u.norm())) {
      ++it;
      break;
    }
  }
  StageResult r;
  r.s = x;
  r.residual = (theta * x - z).norm();
  r.iterations = it;
  return r;
}

}  // namespace

double default_l1_epsilon(int m) {
  if (m < 1) throw std::invalid_argument("default_l1_epsilon: m < 1");
  return std::sqrt(double(m)) + 2.0 * std::pow(2.0 * m, 0.25);
}

DecodeResult l1_decode(const WhitenedSystem& ws, double eps_noise,
                       const L1Options& opts) {
  if (eps_noise < 0.0)
    throw std::invalid_argument("l1_decode: eps_noise < 0");
  const int n = static_cast<int>(ws.theta.cols());
  if (ws.z.size() != ws.theta.rows())
    throw std::invalid_argument("l1_decode: z/theta size mismatch");

  DecodeResult out;
  out.s_hat = Eigen::VectorXd::Zero(n);

  // Zero is feasible (and l1-minimal) when z itself is inside the ball, and
  // within the 1% activity band just beyond it.
  const double z_norm = ws.z.norm();
  if (z_norm <= 1.01 * eps_noise) {
    out.converged = true;
    out.x_hat = detail::to_message_domain(ws, out.s_hat);
    return out;
  }

  const double lip = lipschitz_constant(ws.theta);
  if (lip == 0.0) {
    // theta == 0: nothing can reduce the residual.
    out.converged = false;
    out.x_hat = detail::to_message_domain(ws, out.s_hat);
    return out;
  }

  const double lo_band = 0.99 * eps_noise;
  const double hi_band = 1.01 * eps_noise;
  const double lambda_max = (ws.theta.transpose() * ws.z).lpNorm<Eigen::Infinity>();

  Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd x_prev_stage = detail::to_message_domain(ws, s);
  int stage = 0;
  int total_iters = 0;
  bool in_band = false;

  auto run_stage = [&](double lambda) {
    StageResult r = solve_stage(ws.theta, ws.z, lambda, lip, s, opts, stage);
    s = r.s;
    total_iters += r.iterations;
    const Eigen::VectorXd x_now = detail::to_message_domain(ws, s);
    out.history.push_back((x_now - x_prev_stage).norm());
    x_prev_stage = x_now;
    ++stage;
    return r.residual;
  };

  // Continuation: halve lambda from lambda_max until the residual drops below
  // the band (bracketing), then bisect.
  double hi = lambda_max;          // residual(hi) = ||z|| > hi_band
  double lo = -1.0;                // unknown yet
  double lambda = 0.5 * lambda_max;
  double resid = z_norm;
  while (stage < opts.max_stages) {
    resid = run_stage(lambda);
    if (resid > hi_band) {
      hi = lambda;
      lambda *= 0.5;
      if (lambda < 1e-15 * lambda_max) break;  // eps below the reachable floor
    } else if (resid < lo_band) {
      lo = lambda;
      break;
    } else {
      in_band = true;
      break;
    }
  }
  if (!in_band && lo >= 0.0) {
    while (stage < opts.max_stages) {
      lambda = 0.5 * (lo + hi);
      resid = run_stage(lambda);
      if (resid > hi_band) {
        hi = lambda;
      } else if (resid < lo_band) {
        lo = lambda;
      } else {
        in_band = true;
        break;
      }
      if ((hi - lo) <= 1e-14 * lambda_max) break;
    }
  }

  out.s_hat = s;
  out.x_hat = detail::to_message_domain(ws, s);
  out.iterations = total_iters;
  out.converged = in_band;
  return out;
}

}  // namespace qnc
