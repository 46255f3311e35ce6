#include "qnc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

#include <json.hpp>

#include "qnc/decoders.hpp"
#include "qnc/forwarding.hpp"
#include "qnc/grid.hpp"
#include "qnc/measurement.hpp"
#include "qnc/message_model.hpp"
#include "qnc/network.hpp"
#include "qnc/qnc_encoder.hpp"
#include "qnc/rng.hpp"
#include "qnc/whitening.hpp"

namespace qnc {

const char* const kRowsCsvHeader =
    "trial,edge_count,sparsity_factor,decoder,L,T,delay_channel_uses,"
    "snr_db,iterations,converged,clip_count,error";
const char* const kCurvesCsvHeader = "decoder,snr_db_threshold,delay_channel_uses";

namespace {

[[noreturn]] void fail_config(const std::string& msg) {
  throw std::invalid_argument("experiment config: " + msg);
}

std::string sanitize_field(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config.

void ExperimentConfig::validate() const {
  if (n < 2) fail_config("n must be >= 2");
  if (edge_counts.empty()) fail_config("edge_counts must be nonempty");
  for (int ec : edge_counts)
    if (ec < 1 || ec > n * (n - 1))
      fail_config("edge_counts entries must be in [1, n*(n-1)]");
  if (sparsity_factors.empty()) fail_config("sparsity_factors must be nonempty");
  for (double sf : sparsity_factors)
    if (!(sf > 0.0) || sf > 1.0)
      fail_config("sparsity_factors entries must be in (0, 1]");
  if (!(sigma2_s > 0.0)) fail_config("sigma2_s must be positive");
  if (L_sweep.empty()) fail_config("L_sweep must be nonempty");
  for (int L : L_sweep)
    if (L < 1) fail_config("L_sweep entries must be >= 1");
  if (T_max < 2) fail_config("T_max must be >= 2");
  if (decoders.empty()) fail_config("decoders must be nonempty");
  for (const std::string& d : decoders) {
    if (d != "bp" && d != "l1" && d != "oracle")
      fail_config("unknown decoder '" + d + "' (expected bp, l1 or oracle)");
    if (std::count(decoders.begin(), decoders.end(), d) > 1)
      fail_config("duplicate decoder '" + d + "'");
  }
  if (std::find(decoders.begin(), decoders.end(), "oracle") != decoders.end() &&
      n > 14)
    fail_config("oracle decoder requires n <= 14 (2^n support enumeration)");
  if (trials < 1) fail_config("trials must be >= 1");

  const DecoderSettings& ds = decoder;
  if (ds.grid_points < 2 || (ds.grid_points & (ds.grid_points - 1)) != 0)
    fail_config("decoder.grid_points must be a power of two >= 2");
  if (!(ds.grid_width_sigmas >= 6.0))
    fail_config("decoder.grid_width_sigmas must be >= 6 (slab tail coverage)");
  if (!(ds.sigma2_0_factor > 0.0) || ds.sigma2_0_factor > 1e-3)
    fail_config("decoder.sigma2_0_factor must be in (0, 1e-3]");
  // Scale-free form of spacing <= sqrt(sigma2_0): the slab sigma cancels.
  if (2.0 * ds.grid_width_sigmas / ds.grid_points >
      std::sqrt(ds.sigma2_0_factor) + 1e-15)
    fail_config(
        "decoder grid spacing cannot resolve the smoothed spike "
        "(increase grid_points or sigma2_0_factor)");
  if (ds.bp_max_iter < 1) fail_config("decoder.bp_max_iter must be >= 1");
  if (!(ds.bp_damping > 0.0) || ds.bp_damping > 1.0)
    fail_config("decoder.bp_damping must be in (0, 1]");
  for (double t : snr_grid)
    if (!std::isfinite(t)) fail_config("snr_grid entries must be finite");
}

namespace {

using nlohmann::json;

void check_known_keys(const json& j, std::initializer_list<const char*> known,
                      const std::string& where) {
  for (const auto& el : j.items()) {
    bool ok = false;
    for (const char* k : known)
      if (el.key() == k) {
        ok = true;
        break;
      }
    if (!ok) fail_config("unknown key '" + el.key() + "' in " + where);
  }
}

template <typename T>
void read_key(const json& j, const char* key, T& into) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    into = it->template get<T>();
  } catch (const json::exception& e) {
    fail_config(std::string("key '") + key + "': " + e.what());
  }
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  json j;
  try {
    j = json::parse(in, nullptr, /*allow_exceptions=*/true,
                    /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
  try {
    if (!j.is_object()) fail_config("top level must be a JSON object");
    check_known_keys(j,
                     {"n", "edge_counts", "sparsity_factors", "sigma2_s",
                      "L_sweep", "T_max", "decoders", "trials", "master_seed",
                      "decoder", "outputs", "snr_grid"},
                     "top level");
    ExperimentConfig cfg;
    read_key(j, "n", cfg.n);
    read_key(j, "edge_counts", cfg.edge_counts);
    read_key(j, "sparsity_factors", cfg.sparsity_factors);
    read_key(j, "sigma2_s", cfg.sigma2_s);
    read_key(j, "L_sweep", cfg.L_sweep);
    read_key(j, "T_max", cfg.T_max);
    read_key(j, "decoders", cfg.decoders);
    read_key(j, "trials", cfg.trials);
    read_key(j, "master_seed", cfg.master_seed);
    if (auto it = j.find("decoder"); it != j.end()) {
      if (!it->is_object()) fail_config("'decoder' must be an object");
      check_known_keys(*it,
                       {"grid_points", "grid_width_sigmas", "sigma2_0_factor",
                        "bp_max_iter", "bp_damping", "bp_eps_rec"},
                       "'decoder'");
      read_key(*it, "grid_points", cfg.decoder.grid_points);
      read_key(*it, "grid_width_sigmas", cfg.decoder.grid_width_sigmas);
      read_key(*it, "sigma2_0_factor", cfg.decoder.sigma2_0_factor);
      read_key(*it, "bp_max_iter", cfg.decoder.bp_max_iter);
      read_key(*it, "bp_damping", cfg.decoder.bp_damping);
      read_key(*it, "bp_eps_rec", cfg.decoder.bp_eps_rec);
    }
    if (auto it = j.find("outputs"); it != j.end()) {
      if (!it->is_object()) fail_config("'outputs' must be an object");
      check_known_keys(*it, {"rows_csv", "curves_csv", "plot_svg"},
                       "'outputs'");
      read_key(*it, "rows_csv", cfg.outputs.rows_csv);
      read_key(*it, "curves_csv", cfg.outputs.curves_csv);
      read_key(*it, "plot_svg", cfg.outputs.plot_svg);
    }
    read_key(j, "snr_grid", cfg.snr_grid);
    cfg.validate();
    return cfg;
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string(e.what()) + " [" + path + "]");
  }
}

// ---------------------------------------------------------------------------
// Sweep execution.

namespace {

struct WorkItem {
  int edge_count = 0;
  double sparsity = 0.0;
  int trial = 0;
};

constexpr int kMaxSampleAttempts = 64;

std::vector<ResultRow> run_item(const ExperimentConfig& cfg,
                                const WorkItem& it) {
  MessagePrior prior;
  prior.n = cfg.n;
  prior.k = it.sparsity * cfg.n;
  prior.sigma2_s = cfg.sigma2_s;
  prior.sigma2_0 = cfg.decoder.sigma2_0_factor * cfg.sigma2_s;
  prior.validate();

  const std::uint64_t base =
      derive_seed(cfg.master_seed, static_cast<std::uint64_t>(it.edge_count),
                  std::bit_cast<std::uint64_t>(it.sparsity),
                  static_cast<std::uint64_t>(it.trial));

  NetworkGraph g;
  RoutingTree rt;
  bool reachable = false;
  for (int attempt = 0; attempt < kMaxSampleAttempts && !reachable; ++attempt) {
    g = generate_random_network(
        cfg.n, it.edge_count,
        derive_seed(base, SeedPurpose::kGraph,
                    static_cast<std::uint64_t>(attempt)));
    rt = shortest_paths(g);
    reachable = rt.all_reachable();
  }
  if (!reachable)
    throw std::runtime_error("no fully reachable deployment in 64 attempts");

  const SparsifyingTransform phi =
      random_orthonormal(cfg.n, derive_seed(base, SeedPurpose::kTransform));
  // Condition on a nonzero realization: an empty support leaves nothing to
  // reconstruct (SNR undefined), so degenerate draws are redrawn.
  MessageEnsemble ens;
  bool nonzero = false;
  for (int attempt = 0; attempt < kMaxSampleAttempts && !nonzero; ++attempt) {
    ens = sample_messages(prior, phi,
                          derive_seed(base, SeedPurpose::kMessages,
                                      static_cast<std::uint64_t>(attempt)));
    nonzero = ens.x.squaredNorm() > 0.0;
  }
  if (!nonzero)
    throw std::runtime_error("no nonzero message ensemble in 64 attempts");

  const CoefficientSchedule sched = generate_coefficients(
      g, cfg.T_max, derive_seed(base, SeedPurpose::kCoefficients));

  Grid grid;
  grid.half_width = cfg.decoder.grid_width_sigmas * std::sqrt(cfg.sigma2_s);
  grid.points = cfg.decoder.grid_points;

  std::vector<ResultRow> rows;
  ResultRow proto;
  proto.trial = it.trial;
  proto.edge_count = it.edge_count;
  proto.sparsity_factor = it.sparsity;

  for (int L : cfg.L_sweep) {
    const QuantizerSet quants = design_quantizers(sched, prior, L);
    const SimulationTrace trace = simulate(g, sched, &quants, ens.x, cfg.T_max);
    // clip_prefix[T] = encoder clips over slots 2..T.
    std::vector<long long> clip_prefix(static_cast<std::size_t>(cfg.T_max) + 1,
                                       0);
    for (int T = 2; T <= cfg.T_max; ++T)
      clip_prefix[T] = clip_prefix[T - 1] + trace.clips_per_slot[T - 2];

    for (int T = 2; T <= cfg.T_max; ++T) {
      const MeasurementSystem ms =
          build_measurement_system(sched, g, &quants, prior, T);
      const WhitenedSystem ws = whiten(ms, trace.z_tot(T), phi);
      for (const std::string& dec : cfg.decoders) {
        DecodeResult r;
        if (dec == "bp")
          r = bp_decode(ws, prior, grid, cfg.decoder.bp_eps_rec,
                        cfg.decoder.bp_max_iter, cfg.decoder.bp_damping);
        else if (dec == "l1")
          r = l1_decode(ws, default_l1_epsilon(ms.m()));
        else
          r = exact_mmse_oracle(ws, prior);
        ResultRow row = proto;
        row.decoder = dec;
        row.L = L;
        row.T = T;
        row.delay_channel_uses = static_cast<long long>(L) * (T - 1);
        row.snr_db = snr(ens.x, r.x_hat);
        row.iterations = r.iterations;
        row.converged = r.converged;
        row.clip_count = clip_prefix[T];
        rows.push_back(std::move(row));
      }
    }

    const ForwardingResult fwd = simulate_forwarding(g, rt, ens.x, L, prior);
    ResultRow row = proto;
    row.decoder = "forwarding";
    row.L = L;
    row.T = 0;
    row.delay_channel_uses = fwd.delay_channel_uses(L);
    row.snr_db = snr(ens.x, fwd.x_hat);
    row.iterations = 0;
    row.converged = true;
    row.clip_count = fwd.clip_count;
    rows.push_back(std::move(row));
  }
  return rows;
}

ResultRow error_row(const WorkItem& it, const std::string& what) {
  ResultRow row;
  row.trial = it.trial;
  row.edge_count = it.edge_count;
  row.sparsity_factor = it.sparsity;
  row.decoder = "error";
  row.snr_db = std::numeric_limits<double>::quiet_NaN();
  row.error = what;
  return row;
}

}  // namespace

int resolve_worker_count(std::size_t item_count) {
  long long count = item_count == 0 ? 1
                                    : static_cast<long long>(std::min<std::size_t>(
                                          item_count, 1u << 20));
  const unsigned hw = std::thread::hardware_concurrency();
  if (hw > 0) count = std::min(count, static_cast<long long>(hw));
  if (const char* s = std::getenv("QNC_MAX_WORKERS"); s != nullptr && *s) {
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end != nullptr && end != s && *end == '\0')
      count = std::min(count, static_cast<long long>(std::max(v, 1L)));
  }
  return static_cast<int>(std::max(count, 1LL));
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<WorkItem> items;
  for (int ec : cfg.edge_counts)
    for (double sf : cfg.sparsity_factors)
      for (int t = 0; t < cfg.trials; ++t) items.push_back({ec, sf, t});

  std::vector<std::vector<ResultRow>> per_item(items.size());
  std::atomic<std::size_t> next{0};
  auto drain = [&cfg, &items, &per_item, &next] {
    for (std::size_t i; (i = next.fetch_add(1)) < items.size();) {
      try {
        per_item[i] = run_item(cfg, items[i]);
      } catch (const std::exception& e) {
        per_item[i] = {error_row(items[i], e.what())};
      } catch (...) {
        per_item[i] = {error_row(items[i], "unknown failure")};
      }
    }
  };

  const int workers = resolve_worker_count(items.size());
  if (workers <= 1) {
    drain();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(drain);
    for (std::thread& th : pool) th.join();
  }

  std::vector<ResultRow> rows;
  std::size_t total = 0;
  for (const auto& block : per_item) total += block.size();
  rows.reserve(total);
  for (auto& block : per_item)
    for (ResultRow& r : block) rows.push_back(std::move(r));
  return rows;
}

// ---------------------------------------------------------------------------
// Curves.

std::vector<CurvePoint> best_delay_per_quality(
    const std::vector<ResultRow>& rows, const std::vector<double>& snr_grid) {
  struct Acc {
    double snr_sum = 0.0;
    double delay_sum = 0.0;
    long long count = 0;
  };
  // decoder -> (L, T) -> accumulated trials.
  std::map<std::string, std::map<std::pair<int, int>, Acc>> groups;
  for (const ResultRow& r : rows) {
    if (r.decoder == "error" || !std::isfinite(r.snr_db)) continue;
    Acc& a = groups[r.decoder][{r.L, r.T}];
    a.snr_sum += r.snr_db;
    a.delay_sum += static_cast<double>(r.delay_channel_uses);
    ++a.count;
  }

  std::vector<CurvePoint> out;
  for (const auto& [dec, by_cfg] : groups) {
    for (double thr : snr_grid) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& [key, a] : by_cfg) {
        (void)key;
        const double mean_snr = a.snr_sum / static_cast<double>(a.count);
        if (mean_snr >= thr)
          best = std::min(best, a.delay_sum / static_cast<double>(a.count));
      }
      if (std::isfinite(best)) out.push_back({dec, thr, best});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV.

std::string rows_csv_text(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << kRowsCsvHeader << '\n';
  for (const ResultRow& r : rows) {
    out << r.trial << ',' << r.edge_count << ',' << fmt_g17(r.sparsity_factor)
        << ',' << sanitize_field(r.decoder) << ',' << r.L << ',' << r.T << ','
        << r.delay_channel_uses << ',' << fmt_g17(r.snr_db) << ','
        << r.iterations << ',' << (r.converged ? 1 : 0) << ',' << r.clip_count
        << ',' << sanitize_field(r.error) << '\n';
  }
  return out.str();
}

std::string curves_csv_text(const std::vector<CurvePoint>& points) {
  std::ostringstream out;
  out << kCurvesCsvHeader << '\n';
  for (const CurvePoint& p : points)
    out << sanitize_field(p.decoder) << ',' << fmt_g17(p.snr_db_threshold)
        << ',' << fmt_g17(p.delay_channel_uses) << '\n';
  return out.str();
}

namespace {

void dump_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  out.flush();
  if (!out.good()) throw std::runtime_error("write failed: " + path);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

[[noreturn]] void fail_parse(const std::string& path, int lineno,
                             const std::string& msg) {
  throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + msg);
}

double parse_double(const std::string& tok, const std::string& path,
                    int lineno) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size())
    fail_parse(path, lineno, "bad number '" + tok + "'");
  return v;
}

long long parse_ll(const std::string& tok, const std::string& path,
                   int lineno) {
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (tok.empty() || end != tok.c_str() + tok.size())
    fail_parse(path, lineno, "bad integer '" + tok + "'");
  return v;
}

}  // namespace

void write_rows_csv(const std::string& path,
                    const std::vector<ResultRow>& rows) {
  dump_file(path, rows_csv_text(rows));
}

std::vector<ResultRow> read_rows_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kRowsCsvHeader)
    throw std::runtime_error(path + ": missing or unexpected rows header");
  std::vector<ResultRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 12)
      fail_parse(path, lineno, "expected 12 fields, got " +
                                   std::to_string(f.size()));
    ResultRow r;
    r.trial = static_cast<int>(parse_ll(f[0], path, lineno));
    r.edge_count = static_cast<int>(parse_ll(f[1], path, lineno));
    r.sparsity_factor = parse_double(f[2], path, lineno);
    r.decoder = f[3];
    r.L = static_cast<int>(parse_ll(f[4], path, lineno));
    r.T = static_cast<int>(parse_ll(f[5], path, lineno));
    r.delay_channel_uses = parse_ll(f[6], path, lineno);
    r.snr_db = parse_double(f[7], path, lineno);
    r.iterations = static_cast<int>(parse_ll(f[8], path, lineno));
    const long long conv = parse_ll(f[9], path, lineno);
    if (conv != 0 && conv != 1)
      fail_parse(path, lineno, "converged must be 0 or 1");
    r.converged = conv == 1;
    r.clip_count = parse_ll(f[10], path, lineno);
    r.error = f[11];
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_curves_csv(const std::string& path,
                      const std::vector<CurvePoint>& points) {
  dump_file(path, curves_csv_text(points));
}

std::vector<CurvePoint> read_curves_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kCurvesCsvHeader)
    throw std::runtime_error(path + ": missing or unexpected curves header");
  std::vector<CurvePoint> points;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 3)
      fail_parse(path, lineno,
                 "expected 3 fields, got " + std::to_string(f.size()));
    CurvePoint p;
    p.decoder = f[0];
    p.snr_db_threshold = parse_double(f[1], path, lineno);
    p.delay_channel_uses = parse_double(f[2], path, lineno);
    points.push_back(std::move(p));
  }
  return points;
}

// ---------------------------------------------------------------------------
// SVG.

namespace {

double nice_step(double range, int target_ticks) {
  if (!(range > 0.0)) return 1.0;
  const double raw = range / std::max(target_ticks, 1);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double f : {1.0, 2.0, 5.0})
    if (f * mag >= raw) return f * mag;
  return 10.0 * mag;
}

}  // namespace

void write_delay_snr_svg(const std::string& path,
                         const std::vector<CurvePoint>& points) {
  // Series per decoder, each sorted by threshold (then delay for stability).
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  for (const CurvePoint& p : points)
    series[p.decoder].push_back({p.snr_db_threshold, p.delay_channel_uses});
  for (auto& [name, pts] : series) {
    (void)name;
    std::sort(pts.begin(), pts.end());
  }

  double dmax = 1.0;
  double tmin = 0.0, tmax = 1.0;
  if (!points.empty()) {
    dmax = 0.0;
    tmin = std::numeric_limits<double>::infinity();
    tmax = -tmin;
    for (const CurvePoint& p : points) {
      dmax = std::max(dmax, p.delay_channel_uses);
      tmin = std::min(tmin, p.snr_db_threshold);
      tmax = std::max(tmax, p.snr_db_threshold);
    }
    dmax = std::max(dmax * 1.05, 1.0);
    if (tmax - tmin < 1e-12) {
      tmin -= 1.0;
      tmax += 1.0;
    } else {
      const double pad = 0.05 * (tmax - tmin);
      tmin -= pad;
      tmax += pad;
    }
  }

  const double kW = 880.0, kH = 560.0;
  const double px0 = 85.0, px1 = 645.0, py0 = 58.0, py1 = kH - 72.0;
  auto sx = [&](double d) { return px0 + d / dmax * (px1 - px0); };
  auto sy = [&](double t) {
    return py1 - (t - tmin) / (tmax - tmin) * (py1 - py0);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
      << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << ' ' << kH
      << "\">\n"
      << "<rect width=\"" << kW << "\" height=\"" << kH
      << "\" fill=\"white\"/>\n"
      << "<text x=\"" << (px0 + px1) / 2
      << "\" y=\"30\" font-family=\"sans-serif\" font-size=\"17\" "
         "text-anchor=\"middle\">Best delivery delay per reconstruction "
         "quality</text>\n";

  // Grid lines and ticks.
  const double dx = nice_step(dmax, 7);
  for (double v = 0.0; v <= dmax + 1e-9 * dmax; v += dx) {
    const double x = sx(v);
    svg << "<line x1=\"" << x << "\" y1=\"" << py0 << "\" x2=\"" << x
        << "\" y2=\"" << py1 << "\" stroke=\"#e0e0e0\"/>\n"
        << "<text x=\"" << x << "\" y=\"" << py1 + 20
        << "\" font-family=\"sans-serif\" font-size=\"12\" "
           "text-anchor=\"middle\">"
        << fmt_g(v) << "</text>\n";
  }
  const double dy = nice_step(tmax - tmin, 6);
  for (double v = std::ceil(tmin / dy) * dy; v <= tmax + 1e-9 * (tmax - tmin);
       v += dy) {
    const double y = sy(v);
    svg << "<line x1=\"" << px0 << "\" y1=\"" << y << "\" x2=\"" << px1
        << "\" y2=\"" << y << "\" stroke=\"#e0e0e0\"/>\n"
        << "<text x=\"" << px0 - 8 << "\" y=\"" << y + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\" "
           "text-anchor=\"end\">"
        << fmt_g(v) << "</text>\n";
  }

  // Axes and labels.
  svg << "<line x1=\"" << px0 << "\" y1=\"" << py1 << "\" x2=\"" << px1
      << "\" y2=\"" << py1 << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << px0 << "\" y1=\"" << py0 << "\" x2=\"" << px0
      << "\" y2=\"" << py1 << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << (px0 + px1) / 2 << "\" y=\"" << kH - 26
      << "\" font-family=\"sans-serif\" font-size=\"14\" "
         "text-anchor=\"middle\">delivery delay (channel uses)</text>\n"
      << "<text x=\"24\" y=\"" << (py0 + py1) / 2
      << "\" font-family=\"sans-serif\" font-size=\"14\" "
         "text-anchor=\"middle\" transform=\"rotate(-90 24 "
      << (py0 + py1) / 2 << ")\">SNR threshold (dB)</text>\n";

  static const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                         "#9467bd", "#ff7f0e", "#17becf"};
  constexpr int kPaletteSize = 6;
  int si = 0;
  for (const auto& [name, pts] : series) {
    const char* color = kPalette[si % kPaletteSize];
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"";
    for (const auto& [thr, delay] : pts)
      svg << sx(delay) << ',' << sy(thr) << ' ';
    svg << "\"/>\n";
    for (const auto& [thr, delay] : pts)
      svg << "<circle cx=\"" << sx(delay) << "\" cy=\"" << sy(thr)
          << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
    const double ly = py0 + 12 + 24.0 * si;
    svg << "<line x1=\"" << px1 + 22 << "\" y1=\"" << ly << "\" x2=\""
        << px1 + 52 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n"
        << "<circle cx=\"" << px1 + 37 << "\" cy=\"" << ly
        << "\" r=\"3.5\" fill=\"" << color << "\"/>\n"
        << "<text x=\"" << px1 + 60 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"13\">" << name
        << "</text>\n";
    ++si;
  }
  if (points.empty())
    svg << "<text x=\"" << (px0 + px1) / 2 << "\" y=\"" << (py0 + py1) / 2
        << "\" font-family=\"sans-serif\" font-size=\"14\" fill=\"#808080\" "
           "text-anchor=\"middle\">no curve points</text>\n";
  svg << "</svg>\n";

  dump_file(path, svg.str());
}

void emit_outputs(const std::vector<ResultRow>& rows,
                  const std::vector<CurvePoint>& curves,
                  const OutputPaths& paths) {
  if (!paths.rows_csv.empty()) write_rows_csv(paths.rows_csv, rows);
  if (!paths.curves_csv.empty()) write_curves_csv(paths.curves_csv, curves);
  if (!paths.plot_svg.empty()) write_delay_snr_svg(paths.plot_svg, curves);
}

}  // namespace qnc
