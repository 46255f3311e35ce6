#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qnc/decoders.hpp"
#include "qnc/fft.hpp"

namespace qnc {
namespace {

constexpr double kEdgeThreshold = 1e-12;
// Per-constraint measurement-domain grids are sized adaptively; the bin count
// is capped so one leave-one-out convolution never exceeds a 4096-point FFT.
constexpr int kMinMeasurementBins = 64;
constexpr int kMaxMeasurementBins = 4096;
// The whitened noise has unit variance, so spacing 1/2 resolves the smoothed
// factors the convolution can produce (the moment-exact splat keeps coarser
// features honest); finer spacing is used when the range allows.
constexpr double kTargetInvSpacing = 2.0;
// Window half-width in standard deviations of the predicted constraint
// spread.  Mass beyond it is folded into the boundary bins, and the cyclic
// convolution without zero padding wraps only that same far-tail mass.
constexpr double kWindowSigmas = 5.0;
// Every stored message is mixed with this much uniform mass.  Messages from
// disagreeing constraints can otherwise have disjoint supports (the window
// cutoff writes exact zeros), which would annihilate the variable-side
// product; the mix keeps products strictly positive at no statistical cost.
constexpr double kMessageFloorMix = 1e-10;

int next_pow2(double x) {
  int p = 1;
  while (p < x) p <<= 1;
  return p;
}

double gaussian_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

// Catmull-Rom cubic through g1, g2 at fraction t in [0, 1).
inline double catmull_rom(double g0, double g1, double g2, double g3,
                          double t) {
  const double a = -g0 + 3.0 * g1 - 3.0 * g2 + g3;
  const double b = 2.0 * g0 - 5.0 * g1 + 4.0 * g2 - g3;
  const double c = -g0 + g2;
  return 0.5 * (((a * t + b) * t + c) * t + 2.0 * g1);
}

struct FactorGraph {
  int m = 0;
  int n = 0;
  std::vector<std::vector<int>> cn;  // constraint -> variables
  std::vector<std::vector<int>> vn;  // variable -> constraints
  // Edge ids: constraint-major ce = coff[i] + j, variable-major ve =
  // voff[v] + j'; cross maps translate one enumeration into the other.
  std::vector<int> coff, voff;
  std::vector<int> ce_to_ve, ve_to_ce;
  int edges = 0;
};

FactorGraph build_graph(const Eigen::MatrixXd& theta) {
  FactorGraph fg;
  fg.m = static_cast<int>(theta.rows());
  fg.n = static_cast<int>(theta.cols());
  fg.cn.resize(fg.m);
  fg.vn.resize(fg.n);
  for (int i = 0; i < fg.m; ++i)
    for (int v = 0; v < fg.n; ++v)
      if (std::abs(theta(i, v)) > kEdgeThreshold) {
        fg.cn[i].push_back(v);
        fg.vn[v].push_back(i);
      }
  fg.coff.resize(fg.m + 1, 0);
  for (int i = 0; i < fg.m; ++i)
    fg.coff[i + 1] = fg.coff[i] + static_cast<int>(fg.cn[i].size());
  fg.voff.resize(fg.n + 1, 0);
  for (int v = 0; v < fg.n; ++v)
    fg.voff[v + 1] = fg.voff[v] + static_cast<int>(fg.vn[v].size());
  fg.edges = fg.coff[fg.m];

  fg.ce_to_ve.resize(fg.edges);
  fg.ve_to_ce.resize(fg.edges);
  std::vector<int> cursor(fg.n, 0);  // next unmatched slot in vn[v]
  for (int i = 0; i < fg.m; ++i)
    for (std::size_t j = 0; j < fg.cn[i].size(); ++j) {
      const int v = fg.cn[i][j];
      const int ve = fg.voff[v] + cursor[v]++;
      const int ce = fg.coff[i] + static_cast<int>(j);
      fg.ce_to_ve[ce] = ve;
      fg.ve_to_ce[ve] = ce;
    }
  return fg;
}

}  // namespace

DecodeResult bp_decode(const WhitenedSystem& ws, const MessagePrior& prior,
                       const Grid& grid, double eps_rec, int max_iter,
                       double damping, BeliefState* final_state) {
  const int m = static_cast<int>(ws.theta.rows());
  const int n = static_cast<int>(ws.theta.cols());
  if (ws.z.size() != m)
    throw std::invalid_argument("bp_decode: z/theta size mismatch");
  if (!ws.z.allFinite() || !ws.theta.allFinite())
    throw std::invalid_argument("bp_decode: non-finite inputs");
  if (max_iter < 1) throw std::invalid_argument("bp_decode: max_iter < 1");
  if (damping <= 0.0 || damping > 1.0)
    throw std::invalid_argument("bp_decode: damping outside (0, 1]");
  prior.validate();

  // prior_pdf also enforces the grid invariants against this prior.
  const std::vector<double> prior_vec = prior_pdf(prior, grid);
  const Eigen::VectorXd prior_mass =
      Eigen::Map<const Eigen::VectorXd>(prior_vec.data(), prior_vec.size());
  const int ps = grid.points;
  Eigen::VectorXd centers(ps);
  for (int j = 0; j < ps; ++j) centers(j) = grid.center(j);
  double prior_mean = 0.0, prior_m2 = 0.0;
  for (int j = 0; j < ps; ++j) {
    prior_mean += centers(j) * prior_mass(j);
    prior_m2 += centers(j) * centers(j) * prior_mass(j);
  }
  const double prior_var =
      std::max(0.0, prior_m2 - prior_mean * prior_mean);

  if (eps_rec < 0.0)
    eps_rec = 1e-3 * std::sqrt(n * prior.sparsity_factor() * prior.sigma2_s);

  const FactorGraph fg = build_graph(ws.theta);

  // Message storage: bin masses over the s-grid, one block per edge.
  std::vector<float> fwd(static_cast<std::size_t>(fg.edges) * ps);
  std::vector<float> bwd(static_cast<std::size_t>(fg.edges) * ps, 0.0f);
  std::vector<double> fwd_mean(fg.edges, prior_mean);
  std::vector<double> fwd_var(fg.edges, prior_var);
  for (int e = 0; e < fg.edges; ++e)
    for (int j = 0; j < ps; ++j)
      fwd[static_cast<std::size_t>(e) * ps + j] =
          static_cast<float>(prior_mass(j));

  // Scratch reused across constraints (sized for the largest case).
  const int max_f = kMaxMeasurementBins;
  const int max_bins = max_f / 2 + 1;
  int max_deg = 0;
  for (int i = 0; i < m; ++i)
    max_deg = std::max(max_deg, static_cast<int>(fg.cn[i].size()));
  std::vector<float> splat(max_f);
  std::vector<float> gbuf(max_f);
  std::vector<std::complex<float>> noise_spec(max_bins);
  std::vector<std::complex<float>> prefix(max_bins);
  std::vector<std::complex<float>> leave(max_bins);
  std::vector<std::complex<float>> spectra(
      static_cast<std::size_t>(std::max(1, max_deg)) * max_bins);
  std::vector<std::complex<float>> suffix(
      static_cast<std::size_t>(std::max(1, max_deg)) * max_bins);
  std::vector<double> new_msg(ps);

  // Variable-update scratch: prefix chain of prior * backward products.
  std::vector<double> vprefix(static_cast<std::size_t>(m + 1) * ps);
  std::vector<double> vsuffix(ps);

  DecodeResult out;
  Eigen::VectorXd s_hat = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd x_prev = detail::to_message_domain(ws, s_hat);

  int tau = 0;
  for (tau = 1; tau <= max_iter; ++tau) {
    // ---- Constraint updates: backward messages -----------------------------
    for (int i = 0; i < m; ++i) {
      const int deg = static_cast<int>(fg.cn[i].size());
      if (deg == 0) continue;

      double mu_i = 0.0, varsum = 0.0;
      for (int j = 0; j < deg; ++j) {
        const int ce = fg.coff[i] + j;
        const int ve = fg.ce_to_ve[ce];
        const double th = ws.theta(i, fg.cn[i][j]);
        mu_i += th * fwd_mean[ve];
        varsum += th * th * fwd_var[ve];
      }

      // Adaptive centered measurement grid: the leave-one-out sums carry
      // variance <= 1 + varsum, so the window covers them to kWindowSigmas
      // and tail folding absorbs the rest.  The convolution runs cyclically
      // on the window itself: every factor is centered, so wrap-around only
      // exchanges far-tail mass that the folding rule already coarsens.
      const double half_r = kWindowSigmas * std::sqrt(1.0 + varsum);
      const int bins =
          std::clamp(next_pow2(2.0 * half_r * kTargetInvSpacing),
                     kMinMeasurementBins, kMaxMeasurementBins);
      const double h_c = 2.0 * half_r / bins;
      const int fsize = bins;
      const int sbins = fsize / 2 + 1;
      const double trust = half_r;

      // Splat the scaled, centered neighbor messages and transform them.
      const double inv_h = 1.0 / h_c;
      for (int j = 0; j < deg; ++j) {
        const int ce = fg.coff[i] + j;
        const int ve = fg.ce_to_ve[ce];
        const double th = ws.theta(i, fg.cn[i][j]);
        const double mean_j = fwd_mean[ve];
        const float* msg = &fwd[static_cast<std::size_t>(ve) * ps];
        std::fill(splat.begin(), splat.begin() + fsize, 0.0f);
        const int lo = -bins / 2, hi = bins / 2 - 1;
        for (int jj = 0; jj < ps; ++jj) {
          const double w = msg[jj];
          if (w == 0.0) continue;
          const double r = th * (centers(jj) - mean_j) * inv_h;
          const auto i0 = static_cast<long long>(std::llround(r));
          const double f = r - static_cast<double>(i0);
          // Moment-exact 3-point deposit (mass, mean and variance preserved);
          // indices folded into the window boundary per the truncation rule.
          const double wl = 0.5 * (f * f - f), wc = 1.0 - f * f,
                       wr = 0.5 * (f * f + f);
          long long q = std::clamp(i0 - 1, (long long)lo, (long long)hi);
          splat[q < 0 ? q + fsize : q] += static_cast<float>(w * wl);
          q = std::clamp(i0, (long long)lo, (long long)hi);
          splat[q < 0 ? q + fsize : q] += static_cast<float>(w * wc);
          q = std::clamp(i0 + 1, (long long)lo, (long long)hi);
          splat[q < 0 ? q + fsize : q] += static_cast<float>(w * wr);
        }
        fft::forward_r2c(fsize, splat.data(),
                         &spectra[static_cast<std::size_t>(j) * max_bins]);
      }

      // Unit-variance Gaussian noise PDF on the same window, tails folded.
      {
        std::fill(splat.begin(), splat.begin() + fsize, 0.0f);
        for (int l = -bins / 2; l < bins / 2; ++l) {
          double mass = gaussian_cdf((l + 0.5) * h_c) -
                        gaussian_cdf((l - 0.5) * h_c);
          if (l == -bins / 2) mass += gaussian_cdf((l - 0.5) * h_c);
          if (l == bins / 2 - 1) mass += 1.0 - gaussian_cdf((l + 0.5) * h_c);
          splat[l < 0 ? l + fsize : l] = static_cast<float>(mass);
        }
        fft::forward_r2c(fsize, splat.data(), noise_spec.data());
      }

      // Suffix products of the message spectra.
      {
        auto* s_last = &suffix[static_cast<std::size_t>(deg - 1) * max_bins];
        std::fill(s_last, s_last + sbins, std::complex<float>(1.0f, 0.0f));
        for (int j = deg - 2; j >= 0; --j) {
          const auto* above = &suffix[static_cast<std::size_t>(j + 1) * max_bins];
          const auto* spec = &spectra[static_cast<std::size_t>(j + 1) * max_bins];
          auto* dst = &suffix[static_cast<std::size_t>(j) * max_bins];
          for (int b = 0; b < sbins; ++b) dst[b] = above[b] * spec[b];
        }
      }

      // Leave-one-out products, remapped back onto each neighbor's s-grid.
      std::copy(noise_spec.begin(), noise_spec.begin() + sbins,
                prefix.begin());
      for (int j = 0; j < deg; ++j) {
        const int v = fg.cn[i][j];
        const int ce = fg.coff[i] + j;
        const int ve = fg.ce_to_ve[ce];
        const double th = ws.theta(i, v);
        const auto* suf = &suffix[static_cast<std::size_t>(j) * max_bins];
        for (int b = 0; b < sbins; ++b) leave[b] = prefix[b] * suf[b];
        fft::inverse_c2r(fsize, leave.data(), gbuf.data());

        // p_{i->v}(s) = g(z_i - mu_{-v} - theta*s) with mu_{-v} folded into
        // the centered representation.  gbuf carries the unnormalized
        // transform; the 1/fsize factor cancels in the normalization below.
        const double a0 = ws.z(i) - mu_i + th * fwd_mean[ve];
        double total = 0.0;
        for (int jj = 0; jj < ps; ++jj) {
          const double a = a0 - th * centers(jj);
          double val = 0.0;
          if (std::abs(a) <= trust) {
            const double pos = a * inv_h;
            const int i1 = static_cast<int>(std::floor(pos));
            const double t = pos - static_cast<double>(i1);
            // |pos| <= bins/2, so all four taps lie in [-fsize, fsize); one
            // conditional shift replaces a modulo.
            auto at = [&](int q) -> double {
              if (q < 0) q += fsize;
              return std::max(0.0f, gbuf[q]);
            };
            val = std::max(
                0.0, catmull_rom(at(i1 - 1), at(i1), at(i1 + 1), at(i1 + 2), t));
          }
          new_msg[jj] = val;
          total += val;
        }
        if (!std::isfinite(total))
          throw std::runtime_error("bp_decode: non-finite constraint message");
        float* old_msg = &bwd[static_cast<std::size_t>(ce) * ps];
        if (total <= 0.0) {
          // Degenerate remap (target support missed the grid): keep the old
          // message, or fall back to uniform on the first pass.
          if (tau == 1)
            for (int jj = 0; jj < ps; ++jj)
              old_msg[jj] = static_cast<float>(1.0 / ps);
        } else {
          double comb_total = 0.0;
          for (int jj = 0; jj < ps; ++jj) {
            double nm = new_msg[jj] / total;
            if (tau > 1) nm = damping * nm + (1.0 - damping) * old_msg[jj];
            new_msg[jj] = nm;
            comb_total += nm;
          }
          for (int jj = 0; jj < ps; ++jj)
            old_msg[jj] = static_cast<float>(
                (1.0 - kMessageFloorMix) * new_msg[jj] / comb_total +
                kMessageFloorMix / ps);
        }
        const auto* spec = &spectra[static_cast<std::size_t>(j) * max_bins];
        for (int b = 0; b < sbins; ++b) prefix[b] *= spec[b];
      }
    }

    // ---- Variable updates: forward messages and posterior means ------------
    for (int v = 0; v < n; ++v) {
      const int deg = static_cast<int>(fg.vn[v].size());
      double* pr0 = &vprefix[0];
      for (int jj = 0; jj < ps; ++jj) pr0[jj] = prior_mass(jj);
      for (int j = 0; j < deg; ++j) {
        const int ve = fg.voff[v] + j;
        const int ce = fg.ve_to_ce[ve];
        const float* bmsg = &bwd[static_cast<std::size_t>(ce) * ps];
        const double* prev = &vprefix[static_cast<std::size_t>(j) * ps];
        double* next = &vprefix[static_cast<std::size_t>(j + 1) * ps];
        double total = 0.0;
        for (int jj = 0; jj < ps; ++jj) {
          next[jj] = prev[jj] * bmsg[jj];
          total += next[jj];
        }
        if (!(total > 0.0) || !std::isfinite(total))
          throw std::runtime_error("bp_decode: non-finite variable product");
        for (int jj = 0; jj < ps; ++jj) next[jj] /= total;
      }

      // Posterior belief = prior * all incoming messages.
      const double* belief = &vprefix[static_cast<std::size_t>(deg) * ps];
      double mean = 0.0;
      for (int jj = 0; jj < ps; ++jj) mean += centers(jj) * belief[jj];
      s_hat(v) = mean;

      // Forward messages leave one incoming factor out: prefix * suffix.
      std::fill(vsuffix.begin(), vsuffix.end(), 1.0);
      for (int j = deg - 1; j >= 0; --j) {
        const int ve = fg.voff[v] + j;
        const int ce = fg.ve_to_ce[ve];
        const double* prev = &vprefix[static_cast<std::size_t>(j) * ps];
        float* fmsg = &fwd[static_cast<std::size_t>(ve) * ps];
        double total = 0.0;
        for (int jj = 0; jj < ps; ++jj) {
          new_msg[jj] = prev[jj] * vsuffix[jj];
          total += new_msg[jj];
        }
        if (!(total > 0.0) || !std::isfinite(total))
          throw std::runtime_error("bp_decode: non-finite forward message");
        double fm = 0.0, fm2 = 0.0;
        for (int jj = 0; jj < ps; ++jj) {
          const double msg = new_msg[jj] / total;
          fmsg[jj] = static_cast<float>(msg);
          fm += centers(jj) * msg;
          fm2 += centers(jj) * centers(jj) * msg;
        }
        fwd_mean[ve] = fm;
        fwd_var[ve] = std::max(0.0, fm2 - fm * fm);

        const float* bmsg = &bwd[static_cast<std::size_t>(ce) * ps];
        double stot = 0.0;
        for (int jj = 0; jj < ps; ++jj) {
          vsuffix[jj] *= bmsg[jj];
          stot += vsuffix[jj];
        }
        if (!(stot > 0.0) || !std::isfinite(stot))
          throw std::runtime_error("bp_decode: non-finite suffix product");
        for (int jj = 0; jj < ps; ++jj) vsuffix[jj] /= stot;
      }
    }

    if (!s_hat.allFinite())
      throw std::runtime_error("bp_decode: non-finite estimate");
    const Eigen::VectorXd x_now = detail::to_message_domain(ws, s_hat);
    const double move = (x_now - x_prev).norm();
    out.history.push_back(move);
    x_prev = x_now;
    if (move <= eps_rec) {
      out.converged = true;
      break;
    }
  }

  out.iterations = std::min(tau, max_iter);
  out.s_hat = s_hat;
  out.x_hat = x_prev;

  if (final_state != nullptr) {
    final_state->tau = out.iterations;
    final_state->constraint_neighbors = fg.cn;
    final_state->variable_neighbors = fg.vn;
    final_state->forward.assign(n, {});
    final_state->backward.assign(m, {});
    for (int v = 0; v < n; ++v) {
      const int deg = static_cast<int>(fg.vn[v].size());
      final_state->forward[v].resize(deg);
      for (int j = 0; j < deg; ++j) {
        Eigen::VectorXd msg(ps);
        const float* src = &fwd[static_cast<std::size_t>(fg.voff[v] + j) * ps];
        for (int jj = 0; jj < ps; ++jj) msg(jj) = src[jj];
        final_state->forward[v][j] = msg / msg.sum();
      }
    }
    for (int i = 0; i < m; ++i) {
      const int deg = static_cast<int>(fg.cn[i].size());
      final_state->backward[i].resize(deg);
      for (int j = 0; j < deg; ++j) {
        Eigen::VectorXd msg(ps);
        const float* src = &bwd[static_cast<std::size_t>(fg.coff[i] + j) * ps];
        for (int jj = 0; jj < ps; ++jj) msg(jj) = src[jj];
        const double total = msg.sum();
        final_state->backward[i][j] =
            total > 0.0 ? Eigen::VectorXd(msg / total)
                        : Eigen::VectorXd(Eigen::VectorXd::Constant(
                              ps, 1.0 / ps));
      }
    }
  }
  return out;
}

}  // namespace qnc
