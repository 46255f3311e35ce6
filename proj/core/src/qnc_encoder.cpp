#include "qnc/qnc_encoder.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

#include "qnc/linalg.hpp"
#include "qnc/rng.hpp"

namespace qnc {

Eigen::VectorXd SparseRows::apply(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(rows);
  for (int r = 0; r < rows; ++r)
    for (const auto& [c, val] : entries[r]) out(r) += val * v(c);
  return out;
}

Eigen::MatrixXd SparseRows::left_apply(const Eigen::MatrixXd& y) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(y.rows(), cols);
  for (int r = 0; r < rows; ++r)
    for (const auto& [c, val] : entries[r]) out.col(c) += val * y.col(r);
  return out;
}

Eigen::MatrixXd SparseRows::dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (const auto& [c, val] : entries[r]) out(r, c) = val;
  return out;
}

namespace {
// F(t) * M for dense M (used by the Omega recursion).
Eigen::MatrixXd apply_rows(const SparseRows& f, const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(f.rows, m.cols());
  for (int r = 0; r < f.rows; ++r)
    for (const auto& [c, val] : f.entries[r]) out.row(r) += val * m.row(c);
  return out;
}

Eigen::MatrixXd omega_base(const CoefficientSchedule& sched) {
  Eigen::MatrixXd omega =
      Eigen::MatrixXd::Zero(sched.edge_count, sched.n);
  for (int e = 0; e < sched.edge_count; ++e)
    omega(e, sched.edge_tail[e] - 1) = sched.alpha2(e);
  return omega;
}

}  // namespace

long long quantizer_levels(int L, double capacity) {
  const double lv = std::exp2(L * capacity);
  long long levels = std::llround(lv);
  if (std::abs(lv - static_cast<double>(levels)) > 1e-9)
    levels = static_cast<long long>(std::floor(lv));
  levels -= levels % 2;  // midrise structure needs an even count
  if (levels < 2)
    throw std::invalid_argument("quantizer_levels: L*C must be >= 1");
  return levels;
}

Eigen::MatrixXd local_orthonormal_block(int out_degree, int in_degree,
                                        RandomSource& rng) {
  Eigen::MatrixXd gauss(out_degree, in_degree);
  for (int i = 0; i < out_degree; ++i)
    for (int j = 0; j < in_degree; ++j) gauss(i, j) = rng.normal();
  return out_degree <= in_degree
             ? Eigen::MatrixXd(
                   orthonormal_columns(gauss.transpose()).transpose())
             : orthonormal_columns(gauss);
}

CoefficientSchedule generate_coefficients(const NetworkGraph& g, int T,
                                          std::uint64_t seed) {
  if (T < 2) throw std::invalid_argument("generate_coefficients: T < 2");
  g.validate();
  const int m = g.edge_count();
  RandomSource rng(seed);

  CoefficientSchedule sched;
  sched.T = T;
  sched.n = g.n;
  sched.edge_count = m;
  sched.gateway_in = g.in_of(g.gateway);
  sched.edge_tail.resize(m);
  sched.edge_capacity.resize(m);
  for (int e = 0; e < m; ++e) {
    sched.edge_tail[e] = g.edges[e].tail;
    sched.edge_capacity[e] = g.edges[e].capacity;
  }

  Eigen::VectorXd alpha_raw(m);
  for (int e = 0; e < m; ++e) alpha_raw(e) = rng.normal();
  sched.alpha2 = alpha_raw;

  sched.f.reserve(T - 1);
  for (int t = 2; t <= T; ++t) {
    SparseRows f;
    f.rows = m;
    f.cols = m;
    f.entries.resize(m);
    // Locally orthonormal beta blocks, one per node with both in- and
    // out-edges: orthonormal rows when |Out| <= |In|, columns otherwise.
    for (NodeId v = 1; v <= g.n; ++v) {
      const auto& out = g.out_of(v);
      const auto& in = g.in_of(v);
      if (out.empty() || in.empty()) continue;
      const int ro = static_cast<int>(out.size());
      const int ci = static_cast<int>(in.size());
      Eigen::MatrixXd block = local_orthonormal_block(ro, ci, rng);
      for (int i = 0; i < ro; ++i) {
        auto& row = f.entries[out[i]];
        row.reserve(ci);
        for (int j = 0; j < ci; ++j) row.emplace_back(in[j], block(i, j));
      }
    }
    // Unit l2 norm per row of [F(t) | A(t)]; zero rows are left alone.
    for (int e = 0; e < m; ++e) {
      double sq = t == 2 ? alpha_raw(e) * alpha_raw(e) : 0.0;
      for (const auto& [c, val] : f.entries[e]) sq += val * val;
      if (sq <= 0.0) continue;
      const double inv = 1.0 / std::sqrt(sq);
      for (auto& [c, val] : f.entries[e]) val *= inv;
      if (t == 2) sched.alpha2(e) = alpha_raw(e) * inv;
    }
    sched.f.push_back(std::move(f));
  }
  return sched;
}

Eigen::MatrixXd transfer_coefficients(const CoefficientSchedule& sched,
                                      int t) {
  if (t < 2 || t > sched.T)
    throw std::invalid_argument("transfer_coefficients: t out of range");
  Eigen::MatrixXd omega = omega_base(sched);
  for (int tau = 3; tau <= t; ++tau) omega = apply_rows(sched.F(tau), omega);
  return omega;
}

QuantizerSet design_quantizers(const CoefficientSchedule& sched,
                               const MessagePrior& prior, int L) {
  prior.validate();
  if (prior.n != sched.n)
    throw std::invalid_argument("design_quantizers: prior/schedule mismatch");
  if (L < 1) throw std::invalid_argument("design_quantizers: L < 1");

  QuantizerSet qs;
  qs.T = sched.T;
  qs.q.resize(sched.T - 1);
  const double power = prior.message_power();  // (k/n) sigma2_s
  Eigen::MatrixXd omega = omega_base(sched);
  for (int t = 2; t <= sched.T; ++t) {
    if (t > 2) omega = apply_rows(sched.F(t), omega);
    auto& slot = qs.q[t - 2];
    slot.resize(sched.edge_count);
    for (int e = 0; e < sched.edge_count; ++e) {
      EdgeQuantizer& eq = slot[e];
      eq.levels = quantizer_levels(L, sched.edge_capacity[e]);
      const double var = power * omega.row(e).squaredNorm();
      eq.range = var > 0 ? 4.0 * std::sqrt(var) : 0.0;
      eq.step = eq.range > 0 ? 2.0 * eq.range / eq.levels : 0.0;
    }
  }
  return qs;
}

double EdgeQuantizer::quantize(double u, bool* clipped) const {
  if (degenerate()) {
    if (clipped) *clipped = u != 0.0;
    return 0.0;
  }
  if (clipped) *clipped = u < -range || u > range;
  auto idx = static_cast<long long>(std::floor((u + range) / step));
  idx = std::max(0LL, std::min(levels - 1, idx));
  return -range + (idx + 0.5) * step;
}

SimulationTrace simulate(const NetworkGraph& g,
                         const CoefficientSchedule& sched,
                         const QuantizerSet* quantizers,
                         const Eigen::VectorXd& x, int T) {
  if (x.size() != sched.n || g.n != sched.n ||
      g.edge_count() != sched.edge_count)
    throw std::invalid_argument("simulate: dimension mismatch");
  if (T < 2 || T > sched.T || (quantizers && quantizers->T < T))
    throw std::invalid_argument("simulate: T out of range");

  const int m = sched.edge_count;
  const int d = sched.in_degree();
  SimulationTrace tr;
  tr.y = Eigen::MatrixXd::Zero(m, T);
  tr.n = Eigen::MatrixXd::Zero(m, T - 1);
  tr.z = Eigen::MatrixXd::Zero(d, T - 1);
  tr.clips_per_slot.assign(T - 1, 0);

  Eigen::VectorXd y_prev = Eigen::VectorXd::Zero(m);
  for (int t = 2; t <= T; ++t) {
    Eigen::VectorXd u = sched.F(t).apply(y_prev);
    if (t == 2)
      for (int e = 0; e < m; ++e)
        u(e) += sched.alpha2(e) * x(sched.edge_tail[e] - 1);
    Eigen::VectorXd y_cur(m);
    for (int e = 0; e < m; ++e) {
      if (quantizers) {
        bool clip = false;
        const double out = quantizers->at(t, e).quantize(u(e), &clip);
        y_cur(e) = out;
        tr.n(e, t - 2) = out - u(e);
        if (clip) {
          ++tr.clip_count;
          ++tr.clips_per_slot[t - 2];
        }
      } else {
        y_cur(e) = u(e);  // infinite-resolution mode, N = 0
      }
    }
    tr.y.col(t - 1) = y_cur;
    for (int i = 0; i < d; ++i) tr.z(i, t - 2) = y_cur(sched.gateway_in[i]);
    y_prev.swap(y_cur);
  }
  return tr;
}

Eigen::VectorXd SimulationTrace::z_tot(int upto_t) const {
  const int d = static_cast<int>(z.rows());
  Eigen::VectorXd out((upto_t - 1) * d);
  for (int t = 2; t <= upto_t; ++t) out.segment((t - 2) * d, d) = z.col(t - 2);
  return out;
}

void save_trace_text(const SimulationTrace& trace, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("save_trace_text: cannot open " + path);
  const int T = static_cast<int>(trace.y.cols());
  for (int t = 2; t <= T; ++t)
    for (int e = 0; e < trace.y.rows(); ++e)
      std::fprintf(f, "%d %d %.17g %.17g\n", t, e, trace.y(e, t - 1),
                   trace.n(e, t - 2));
  std::fclose(f);
}

namespace {
void write_matrix(std::FILE* f, const Eigen::MatrixXd& m) {
  const std::int64_t dims[2] = {m.rows(), m.cols()};
  std::fwrite(dims, sizeof dims[0], 2, f);
  std::fwrite(m.data(), sizeof(double), m.size(), f);
}

Eigen::MatrixXd read_matrix(std::FILE* f) {
  std::int64_t dims[2];
  if (std::fread(dims, sizeof dims[0], 2, f) != 2)
    throw std::runtime_error("trace: truncated matrix header");
  Eigen::MatrixXd m(dims[0], dims[1]);
  if (std::fread(m.data(), sizeof(double), m.size(), f) !=
      static_cast<std::size_t>(m.size()))
    throw std::runtime_error("trace: truncated matrix data");
  return m;
}
}  // namespace

void save_trace_binary(const SimulationTrace& trace, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("save_trace_binary: cannot open " + path);
  const char magic[8] = {'Q', 'N', 'C', 'T', 'R', 'C', '0', '1'};
  std::fwrite(magic, 1, sizeof magic, f);
  write_matrix(f, trace.y);
  write_matrix(f, trace.n);
  write_matrix(f, trace.z);
  std::fwrite(&trace.clip_count, sizeof trace.clip_count, 1, f);
  const std::int64_t slots =
      static_cast<std::int64_t>(trace.clips_per_slot.size());
  std::fwrite(&slots, sizeof slots, 1, f);
  std::fwrite(trace.clips_per_slot.data(), sizeof(long long), slots, f);
  std::fclose(f);
}

SimulationTrace load_trace_binary(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("load_trace_binary: cannot open " + path);
  char magic[8];
  SimulationTrace tr;
  try {
    if (std::fread(magic, 1, sizeof magic, f) != sizeof magic ||
        std::memcmp(magic, "QNCTRC01", 8) != 0)
      throw std::runtime_error("load_trace_binary: bad magic in " + path);
    tr.y = read_matrix(f);
    tr.n = read_matrix(f);
    tr.z = read_matrix(f);
    std::int64_t slots = 0;
    if (std::fread(&tr.clip_count, sizeof tr.clip_count, 1, f) != 1 ||
        std::fread(&slots, sizeof slots, 1, f) != 1)
      throw std::runtime_error("load_trace_binary: truncated " + path);
    tr.clips_per_slot.resize(slots);
    if (std::fread(tr.clips_per_slot.data(), sizeof(long long), slots, f) !=
        static_cast<std::size_t>(slots))
      throw std::runtime_error("load_trace_binary: truncated " + path);
  } catch (...) {
    std::fclose(f);
    throw;
  }
  std::fclose(f);
  return tr;
}

}  // namespace qnc
