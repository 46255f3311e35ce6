#include "qnc/message_model.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "qnc/linalg.hpp"
#include "qnc/rng.hpp"

namespace qnc {

namespace {
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Per-bin mass of N(0, var) on the grid, tails folded into boundary bins.
void accumulate_gaussian_mass(const Grid& grid, double var, double weight,
                              std::vector<double>& out) {
  const double sigma = std::sqrt(var);
  const double h = grid.spacing();
  double prev = normal_cdf(-grid.half_width / sigma);
  out[0] += weight * prev;  // left tail
  for (int j = 0; j < grid.points; ++j) {
    const double edge = -grid.half_width + (j + 1) * h;
    const double cur = j + 1 == grid.points ? 1.0 : normal_cdf(edge / sigma);
    out[j] += weight * (cur - prev);
    prev = cur;
  }
  out[grid.points - 1] += weight * (1.0 - prev);  // right tail (prev==1 here)
}
}  // namespace

void MessagePrior::validate() const {
  if (n < 1) throw std::invalid_argument("prior: n must be >= 1");
  if (!(k >= 0) || k > n)
    throw std::invalid_argument("prior: k must lie in [0, n]");
  if (!(sigma2_s > 0))
    throw std::invalid_argument("prior: sigma2_s must be positive");
  if (spike_variance() > 1e-3 * sigma2_s)
    throw std::invalid_argument("prior: sigma2_0 must be <= 1e-3 * sigma2_s");
}

SparsifyingTransform random_orthonormal(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("random_orthonormal: n < 1");
  RandomSource rng(seed);
  Eigen::MatrixXd gauss(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gauss(i, j) = rng.normal();
  return {orthonormal_columns(gauss)};
}

MessageEnsemble sample_messages(const MessagePrior& prior,
                                const SparsifyingTransform& phi,
                                std::uint64_t seed) {
  prior.validate();
  if (phi.phi.rows() != prior.n || phi.phi.cols() != prior.n)
    throw std::invalid_argument("sample_messages: phi dimension mismatch");
  RandomSource rng(seed);
  MessageEnsemble ens;
  ens.q.resize(prior.n);
  ens.s.resize(prior.n);
  const double p1 = prior.sparsity_factor();
  const double sigma_s = std::sqrt(prior.sigma2_s);
  for (int v = 0; v < prior.n; ++v) {
    const double u = rng.uniform01();
    const double g = rng.normal();  // drawn unconditionally (nested supports)
    ens.q(v) = u < p1 ? 1 : 0;
    ens.s(v) = ens.q(v) ? sigma_s * g : 0.0;
  }
  ens.x = phi.phi * ens.s;
  return ens;
}

std::vector<double> prior_pdf(const MessagePrior& prior, const Grid& grid) {
  prior.validate();
  grid.validate();
  if (grid.half_width < 6.0 * std::sqrt(prior.sigma2_s) - 1e-12)
    throw std::invalid_argument("prior_pdf: grid narrower than 6 slab sigmas");
  if (grid.spacing() > std::sqrt(prior.spike_variance()))
    throw std::invalid_argument(
        "prior_pdf: grid spacing too coarse to resolve the smoothed spike");

  std::vector<double> pdf(grid.points, 0.0);
  const double p1 = prior.sparsity_factor();
  if (p1 > 0) accumulate_gaussian_mass(grid, prior.sigma2_s, p1, pdf);
  if (p1 < 1)
    accumulate_gaussian_mass(grid, prior.spike_variance(), 1.0 - p1, pdf);
  double sum = 0.0;
  for (double m : pdf) sum += m;
  for (double& m : pdf) m /= sum;
  return pdf;
}

Grid default_grid(const MessagePrior& prior) {
  Grid grid;
  grid.half_width = 8.0 * std::sqrt(prior.sigma2_s);
  const double target = std::sqrt(prior.spike_variance());
  grid.points = 2;
  while (grid.spacing() > target) {
    if (grid.points >= (1 << 22))
      throw std::invalid_argument("default_grid: spike variance too small");
    grid.points <<= 1;
  }
  return grid;
}

void save_ensemble(const MessageEnsemble& ens, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("save_ensemble: cannot open " + path);
  const int n = static_cast<int>(ens.s.size());
  std::fprintf(f, "%d\n", n);
  for (int v = 0; v < n; ++v)
    std::fprintf(f, "%d %d %.17g %.17g\n", v + 1, ens.q(v), ens.s(v),
                 ens.x(v));
  std::fclose(f);
}

MessageEnsemble load_ensemble(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "r");
  if (!f) throw std::runtime_error("load_ensemble: cannot open " + path);
  int n = 0;
  if (std::fscanf(f, "%d", &n) != 1 || n < 1) {
    std::fclose(f);
    throw std::runtime_error("load_ensemble: bad header in " + path);
  }
  MessageEnsemble ens;
  ens.q.resize(n);
  ens.s.resize(n);
  ens.x.resize(n);
  for (int i = 0; i < n; ++i) {
    int v = 0, q = 0;
    double s = 0, x = 0;
    if (std::fscanf(f, "%d %d %lg %lg", &v, &q, &s, &x) != 4 || v < 1 ||
        v > n) {
      std::fclose(f);
      throw std::runtime_error("load_ensemble: bad row in " + path);
    }
    ens.q(v - 1) = q;
    ens.s(v - 1) = s;
    ens.x(v - 1) = x;
  }
  std::fclose(f);
  return ens;
}

}  // namespace qnc
