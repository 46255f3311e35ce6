#include "qnc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"

using namespace qnc;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.n = 12;
  cfg.edge_counts = {48};
  cfg.sparsity_factors = {0.25};
  cfg.sigma2_s = 5.0;
  cfg.L_sweep = {8};
  cfg.T_max = 3;
  cfg.decoders = {"l1"};
  cfg.trials = 1;
  cfg.master_seed = 20260815;
  return cfg;
}

ResultRow make_row(const char* decoder, int L, int T, long long delay,
                   double snr_db, int trial = 0) {
  ResultRow r;
  r.trial = trial;
  r.edge_count = 48;
  r.sparsity_factor = 0.25;
  r.decoder = decoder;
  r.L = L;
  r.T = T;
  r.delay_channel_uses = delay;
  r.snr_db = snr_db;
  r.iterations = 1;
  r.converged = true;
  return r;
}

bool rows_equal(const ResultRow& a, const ResultRow& b) {
  return a.trial == b.trial && a.edge_count == b.edge_count &&
         a.sparsity_factor == b.sparsity_factor && a.decoder == b.decoder &&
         a.L == b.L && a.T == b.T &&
         a.delay_channel_uses == b.delay_channel_uses && a.snr_db == b.snr_db &&
         a.iterations == b.iterations && a.converged == b.converged &&
         a.clip_count == b.clip_count && a.error == b.error;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct TempPath {
  std::string path;
  explicit TempPath(std::string p) : path(std::move(p)) {}
  ~TempPath() { std::remove(path.c_str()); }
};

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("counting contract: one trial, l1 only, L={8}, T_max=3") {
  const std::vector<ResultRow> rows = run_experiment(tiny_config());
  // Two QNC rows (T = 2, 3) followed by exactly one forwarding row.
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].decoder == "l1");
  CHECK(rows[0].T == 2);
  CHECK(rows[0].delay_channel_uses == 8);
  CHECK(rows[1].decoder == "l1");
  CHECK(rows[1].T == 3);
  CHECK(rows[1].delay_channel_uses == 16);
  CHECK(rows[2].decoder == "forwarding");
  CHECK(rows[2].T == 0);
  CHECK(rows[2].delay_channel_uses % 8 == 0);
  CHECK(rows[2].delay_channel_uses >= 8);
  CHECK(rows[2].snr_db > 10.0);
  for (const ResultRow& r : rows) {
    CHECK(r.trial == 0);
    CHECK(r.edge_count == 48);
    CHECK(r.sparsity_factor == 0.25);
    CHECK(std::isfinite(r.snr_db));
    CHECK(r.error.empty());
  }
}

TEST_CASE("same master seed gives identical rows at any worker count") {
  ExperimentConfig cfg = tiny_config();
  cfg.trials = 3;
  cfg.T_max = 4;
  cfg.decoders = {"bp", "l1"};
  REQUIRE(setenv("QNC_MAX_WORKERS", "1", 1) == 0);
  const std::vector<ResultRow> serial = run_experiment(cfg);
  REQUIRE(setenv("QNC_MAX_WORKERS", "3", 1) == 0);
  const std::vector<ResultRow> pooled = run_experiment(cfg);
  REQUIRE(unsetenv("QNC_MAX_WORKERS") == 0);
  REQUIRE(serial.size() == pooled.size());
  for (std::size_t i = 0; i < serial.size(); ++i)
    CHECK(rows_equal(serial[i], pooled[i]));
  for (const ResultRow& r : serial) CHECK(r.decoder != "error");
}

TEST_CASE("child seeds are tied to the trial index, not the trial count") {
  ExperimentConfig one = tiny_config();
  ExperimentConfig two = tiny_config();
  two.trials = 2;
  const std::vector<ResultRow> rows_one = run_experiment(one);
  const std::vector<ResultRow> rows_two = run_experiment(two);
  REQUIRE(rows_two.size() == 2 * rows_one.size());
  for (std::size_t i = 0; i < rows_one.size(); ++i)
    CHECK(rows_equal(rows_one[i], rows_two[i]));
  CHECK(rows_two[rows_one.size()].trial == 1);
}

TEST_CASE("QNC delay is L*(T-1); forwarding delay is a slot multiple of L") {
  ExperimentConfig cfg = tiny_config();
  cfg.L_sweep = {4, 8};
  cfg.T_max = 4;
  cfg.trials = 2;
  cfg.decoders = {"l1", "oracle"};
  const std::vector<ResultRow> rows = run_experiment(cfg);
  // Per trial: 2 L * (3 T * 2 decoders + 1 forwarding) = 14 rows.
  REQUIRE(rows.size() == 28);
  int qnc_rows = 0, fwd_rows = 0;
  for (const ResultRow& r : rows) {
    if (r.decoder == "forwarding") {
      ++fwd_rows;
      CHECK(r.T == 0);
      CHECK(r.delay_channel_uses % r.L == 0);
      CHECK(r.delay_channel_uses / r.L >= 1);
    } else {
      ++qnc_rows;
      CHECK((r.decoder == "l1" || r.decoder == "oracle"));
      CHECK(r.T >= 2);
      CHECK(r.T <= 4);
      CHECK(r.delay_channel_uses ==
            static_cast<long long>(r.L) * (r.T - 1));
    }
  }
  CHECK(qnc_rows == 24);
  CHECK(fwd_rows == 4);
}

TEST_CASE("failed work items yield one error row and do not abort the sweep") {
  ExperimentConfig cfg = tiny_config();
  // One edge on twelve nodes can never reach the gateway from every node.
  cfg.edge_counts = {1, 48};
  const std::vector<ResultRow> rows = run_experiment(cfg);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].decoder == "error");
  CHECK(rows[0].edge_count == 1);
  CHECK(!rows[0].error.empty());
  CHECK(!std::isfinite(rows[0].snr_db));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].decoder != "error");
    CHECK(rows[i].edge_count == 48);
  }
}

TEST_CASE("best delay: singleton and infeasible thresholds") {
  const std::vector<ResultRow> rows = {make_row("l1", 4, 26, 100, 10.0)};
  const std::vector<CurvePoint> pts = best_delay_per_quality(rows, {5.0});
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].decoder == "l1");
  CHECK(pts[0].snr_db_threshold == 5.0);
  CHECK(pts[0].delay_channel_uses == 100.0);
  CHECK(best_delay_per_quality(rows, {12.0}).empty());
}

TEST_CASE("best delay: trial means per (L, T) group and min over groups") {
  std::vector<ResultRow> rows;
  rows.push_back(make_row("bp", 4, 6, 20, 5.0, 0));
  rows.push_back(make_row("bp", 4, 6, 20, 15.0, 1));  // group mean 10 dB
  rows.push_back(make_row("bp", 8, 2, 8, 1.0, 0));
  rows.push_back(make_row("bp", 8, 2, 8, 3.0, 1));  // group mean 2 dB
  const std::vector<CurvePoint> pts =
      best_delay_per_quality(rows, {2.0, 10.0, 10.5});
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].snr_db_threshold == 2.0);
  CHECK(pts[0].delay_channel_uses == 8.0);  // cheaper group qualifies at 2 dB
  CHECK(pts[1].snr_db_threshold == 10.0);
  CHECK(pts[1].delay_channel_uses == 20.0);  // only the 10 dB group remains
}

TEST_CASE("best delay: error rows and non-finite SNRs are ignored") {
  std::vector<ResultRow> rows = {make_row("l1", 4, 3, 8, 7.0)};
  ResultRow err = make_row("error", 0, 0, 0, 0.0);
  err.snr_db = std::numeric_limits<double>::quiet_NaN();
  rows.push_back(err);
  ResultRow inf_row = make_row("l1", 4, 2, 4, 0.0);
  inf_row.snr_db = std::numeric_limits<double>::infinity();
  rows.push_back(inf_row);
  const std::vector<CurvePoint> pts = best_delay_per_quality(rows, {5.0});
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].decoder == "l1");
  CHECK(pts[0].delay_channel_uses == 8.0);
}

TEST_CASE("best delay: non-decreasing in the threshold on generated data") {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  std::vector<ResultRow> rows;
  for (const char* dec : {"bp", "l1"}) {
    for (int L : {2, 4, 8}) {
      for (int T = 2; T <= 12; ++T) {
        const long long delay = static_cast<long long>(L) * (T - 1);
        for (int trial = 0; trial < 3; ++trial) {
          const double snr_db =
              3.0 * std::log2(static_cast<double>(delay)) + jitter(gen);
          rows.push_back(make_row(dec, L, T, delay, snr_db, trial));
        }
      }
    }
  }
  std::vector<double> grid;
  for (int t = 0; t <= 20; ++t) grid.push_back(static_cast<double>(t));
  const std::vector<CurvePoint> pts = best_delay_per_quality(rows, grid);
  std::map<std::string, double> last_delay;
  std::map<std::string, double> last_thr;
  for (const CurvePoint& p : pts) {
    if (last_delay.count(p.decoder)) {
      CHECK(p.snr_db_threshold > last_thr[p.decoder]);
      CHECK(p.delay_channel_uses >= last_delay[p.decoder]);
    }
    last_delay[p.decoder] = p.delay_channel_uses;
    last_thr[p.decoder] = p.snr_db_threshold;
  }

  // Brute-force reference on the same rows.
  struct Acc {
    double s = 0, d = 0;
    int c = 0;
  };
  std::map<std::string, std::map<std::pair<int, int>, Acc>> ref;
  for (const ResultRow& r : rows) {
    Acc& a = ref[r.decoder][{r.L, r.T}];
    a.s += r.snr_db;
    a.d += static_cast<double>(r.delay_channel_uses);
    ++a.c;
  }
  for (const CurvePoint& p : pts) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [key, a] : ref[p.decoder]) {
      (void)key;
      if (a.s / a.c >= p.snr_db_threshold) best = std::min(best, a.d / a.c);
    }
    CHECK(p.delay_channel_uses == best);
  }
}

TEST_CASE("rows CSV round-trips every field exactly") {
  std::vector<ResultRow> rows;
  ResultRow a = make_row("bp", 4, 7, 24, 12.345678901234567, 3);
  a.sparsity_factor = 1.0 / 3.0;
  a.iterations = 50;
  a.converged = false;
  a.clip_count = 1234567890123LL;
  rows.push_back(a);
  ResultRow b = make_row("forwarding", 8, 0, 64, -3.0e-17, 0);
  b.sparsity_factor = 0.05;
  rows.push_back(b);
  ResultRow c = make_row("error", 0, 0, 0, 0.0);
  c.snr_db = 2.2250738585072014e-308;  // smallest normal double
  c.error = "simulated failure";
  rows.push_back(c);

  TempPath tmp("harness_rows_roundtrip.csv");
  write_rows_csv(tmp.path, rows);
  const std::string text = slurp(tmp.path);
  CHECK(text.substr(0, text.find('\n')) == kRowsCsvHeader);
  CHECK(text == rows_csv_text(rows));

  const std::vector<ResultRow> back = read_rows_csv(tmp.path);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    CHECK(rows_equal(rows[i], back[i]));
}

TEST_CASE("empty rows and curves produce header-only files") {
  TempPath rows_tmp("harness_rows_empty.csv");
  write_rows_csv(rows_tmp.path, {});
  CHECK(slurp(rows_tmp.path) == std::string(kRowsCsvHeader) + "\n");
  CHECK(read_rows_csv(rows_tmp.path).empty());

  TempPath curves_tmp("harness_curves_empty.csv");
  write_curves_csv(curves_tmp.path, {});
  CHECK(slurp(curves_tmp.path) == std::string(kCurvesCsvHeader) + "\n");
  CHECK(read_curves_csv(curves_tmp.path).empty());
}

TEST_CASE("curves CSV column contract and round-trip") {
  CHECK(std::string(kCurvesCsvHeader) ==
        "decoder,snr_db_threshold,delay_channel_uses");
  const std::vector<CurvePoint> pts = {{"bp", 2.0, 8.0},
                                       {"forwarding", 2.0, 52.0 / 3.0}};
  TempPath tmp("harness_curves_roundtrip.csv");
  write_curves_csv(tmp.path, pts);
  const std::vector<CurvePoint> back = read_curves_csv(tmp.path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].decoder == "bp");
  CHECK(back[0].snr_db_threshold == 2.0);
  CHECK(back[0].delay_channel_uses == 8.0);
  CHECK(back[1].decoder == "forwarding");
  CHECK(back[1].delay_channel_uses == 52.0 / 3.0);
}

TEST_CASE("error text is sanitized so rows stay one line") {
  ResultRow r = make_row("error", 0, 0, 0, 0.0);
  r.error = "bad, thing\r\nnext";
  TempPath tmp("harness_rows_sanitize.csv");
  write_rows_csv(tmp.path, {r});
  const std::string text = slurp(tmp.path);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  const std::vector<ResultRow> back = read_rows_csv(tmp.path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].error == "bad; thing;;next");
}

TEST_CASE("readers reject missing files, bad headers and bad fields") {
  CHECK_THROWS_AS(read_rows_csv("harness_does_not_exist.csv"),
                  std::runtime_error);
  TempPath tmp("harness_rows_bad.csv");
  {
    std::ofstream out(tmp.path);
    out << "wrong,header\n";
  }
  CHECK_THROWS_AS(read_rows_csv(tmp.path), std::runtime_error);
  {
    std::ofstream out(tmp.path);
    out << kRowsCsvHeader << "\n1,2\n";
  }
  CHECK_THROWS_AS(read_rows_csv(tmp.path), std::runtime_error);
  {
    std::ofstream out(tmp.path);
    out << kRowsCsvHeader << "\nx,48,0.25,l1,8,2,8,1.0,1,1,0,\n";
  }
  CHECK_THROWS_AS(read_rows_csv(tmp.path), std::runtime_error);
  CHECK_THROWS_AS(write_rows_csv("no_such_dir/rows.csv", {}),
                  std::runtime_error);
}

TEST_CASE("config validation rejects each violated invariant") {
  CHECK_NOTHROW(tiny_config().validate());
  auto expect_reject = [](auto mutate) {
    ExperimentConfig cfg = tiny_config();
    mutate(cfg);
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  };
  expect_reject([](ExperimentConfig& c) { c.n = 1; });
  expect_reject([](ExperimentConfig& c) { c.edge_counts.clear(); });
  expect_reject([](ExperimentConfig& c) { c.edge_counts = {0}; });
  expect_reject([](ExperimentConfig& c) { c.edge_counts = {12 * 11 + 1}; });
  expect_reject([](ExperimentConfig& c) { c.sparsity_factors.clear(); });
  expect_reject([](ExperimentConfig& c) { c.sparsity_factors = {0.0}; });
  expect_reject([](ExperimentConfig& c) { c.sparsity_factors = {1.5}; });
  expect_reject([](ExperimentConfig& c) { c.sigma2_s = 0.0; });
  expect_reject([](ExperimentConfig& c) { c.L_sweep.clear(); });
  expect_reject([](ExperimentConfig& c) { c.L_sweep = {0}; });
  expect_reject([](ExperimentConfig& c) { c.T_max = 1; });
  expect_reject([](ExperimentConfig& c) { c.decoders.clear(); });
  expect_reject([](ExperimentConfig& c) { c.decoders = {"amp"}; });
  expect_reject([](ExperimentConfig& c) { c.decoders = {"l1", "l1"}; });
  expect_reject([](ExperimentConfig& c) {
    c.n = 20;
    c.edge_counts = {80};
    c.decoders = {"oracle"};
  });
  expect_reject([](ExperimentConfig& c) { c.trials = 0; });
  expect_reject([](ExperimentConfig& c) { c.decoder.grid_points = 100; });
  expect_reject([](ExperimentConfig& c) { c.decoder.grid_width_sigmas = 4.0; });
  expect_reject([](ExperimentConfig& c) { c.decoder.sigma2_0_factor = 0.0; });
  expect_reject([](ExperimentConfig& c) { c.decoder.sigma2_0_factor = 2e-3; });
  expect_reject([](ExperimentConfig& c) {
    c.decoder.grid_points = 128;  // spacing too coarse for the spike
    c.decoder.grid_width_sigmas = 12.0;
  });
  expect_reject([](ExperimentConfig& c) { c.decoder.bp_max_iter = 0; });
  expect_reject([](ExperimentConfig& c) { c.decoder.bp_damping = 0.0; });
  expect_reject([](ExperimentConfig& c) { c.decoder.bp_damping = 1.5; });
  expect_reject([](ExperimentConfig& c) {
    c.snr_grid = {std::numeric_limits<double>::quiet_NaN()};
  });
}

TEST_CASE("JSON config: load, defaults, comments, and rejection paths") {
  TempPath tmp("harness_config.json");
  {
    std::ofstream out(tmp.path);
    out << "{\n"
           "  // comment line\n"
           "  \"n\": 12,\n"
           "  \"edge_counts\": [48, 60],\n"
           "  \"sparsity_factors\": [0.25],\n"
           "  \"sigma2_s\": 5.0,\n"
           "  \"L_sweep\": [4, 8],\n"
           "  \"T_max\": 3,\n"
           "  \"decoders\": [\"bp\", \"l1\"],\n"
           "  \"trials\": 2,\n"
           "  \"master_seed\": 12345678901234567890,\n"
           "  \"decoder\": {\"grid_points\": 1024, \"bp_damping\": 0.25},\n"
           "  \"outputs\": {\"rows_csv\": \"r.csv\"},\n"
           "  \"snr_grid\": [3, 9]\n"
           "}\n";
  }
  const ExperimentConfig cfg = load_experiment_config(tmp.path);
  CHECK(cfg.n == 12);
  CHECK(cfg.edge_counts == std::vector<int>{48, 60});
  CHECK(cfg.sparsity_factors == std::vector<double>{0.25});
  CHECK(cfg.L_sweep == std::vector<int>{4, 8});
  CHECK(cfg.T_max == 3);
  CHECK(cfg.decoders == std::vector<std::string>{"bp", "l1"});
  CHECK(cfg.trials == 2);
  CHECK(cfg.master_seed == 12345678901234567890ULL);
  CHECK(cfg.decoder.grid_points == 1024);
  CHECK(cfg.decoder.bp_damping == 0.25);
  CHECK(cfg.decoder.bp_max_iter == 50);  // untouched default
  CHECK(cfg.outputs.rows_csv == "r.csv");
  CHECK(cfg.outputs.curves_csv.empty());
  CHECK(cfg.snr_grid == std::vector<double>{3.0, 9.0});

  auto write_and_load = [&](const std::string& body) {
    std::ofstream out(tmp.path);
    out << body;
    out.close();
    return load_experiment_config(tmp.path);
  };
  CHECK_THROWS_AS(write_and_load("{ not json"), std::invalid_argument);
  CHECK_THROWS_AS(write_and_load("[1, 2]"), std::invalid_argument);
  CHECK_THROWS_AS(write_and_load("{\"bogus\": 1}"), std::invalid_argument);
  CHECK_THROWS_AS(write_and_load("{\"trials\": \"many\"}"),
                  std::invalid_argument);
  CHECK_THROWS_AS(write_and_load("{\"decoder\": {\"typo\": 1}}"),
                  std::invalid_argument);
  // Valid JSON, invalid semantics (empty lists by default).
  CHECK_THROWS_AS(write_and_load("{\"n\": 12}"), std::invalid_argument);
  CHECK_THROWS_AS(load_experiment_config("harness_no_such_config.json"),
                  std::runtime_error);
}

TEST_CASE("SVG plot contains the expected structure") {
  const std::vector<CurvePoint> pts = {
      {"bp", 2.0, 8.0},   {"bp", 6.0, 16.0},       {"l1", 2.0, 4.0},
      {"l1", 6.0, 20.0},  {"forwarding", 2.0, 18.0}};
  TempPath tmp("harness_plot.svg");
  write_delay_snr_svg(tmp.path, pts);
  const std::string svg = slurp(tmp.path);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find(">bp<") != std::string::npos);
  CHECK(svg.find(">l1<") != std::string::npos);
  CHECK(svg.find(">forwarding<") != std::string::npos);
  CHECK(svg.find("SNR threshold (dB)") != std::string::npos);

  TempPath empty_tmp("harness_plot_empty.svg");
  write_delay_snr_svg(empty_tmp.path, {});
  const std::string empty_svg = slurp(empty_tmp.path);
  CHECK(empty_svg.rfind("<svg", 0) == 0);
  CHECK(empty_svg.find("no curve points") != std::string::npos);
}

TEST_CASE("emit_outputs writes exactly the requested artifacts") {
  const std::vector<ResultRow> rows = {make_row("l1", 4, 2, 4, 9.0)};
  const std::vector<CurvePoint> curves = best_delay_per_quality(rows, {5.0});
  OutputPaths paths;
  paths.rows_csv = "harness_emit_rows.csv";
  paths.plot_svg = "harness_emit_plot.svg";
  TempPath rows_tmp(paths.rows_csv);
  TempPath svg_tmp(paths.plot_svg);
  emit_outputs(rows, curves, paths);
  CHECK(read_rows_csv(paths.rows_csv).size() == 1);
  CHECK(slurp(paths.plot_svg).rfind("<svg", 0) == 0);
  std::ifstream missing("harness_emit_curves.csv");
  CHECK(!missing.is_open());  // empty curves path was skipped
}

TEST_CASE("resolve_worker_count honors the item count and the env cap") {
  REQUIRE(unsetenv("QNC_MAX_WORKERS") == 0);
  CHECK(resolve_worker_count(0) == 1);
  CHECK(resolve_worker_count(1) == 1);
  REQUIRE(setenv("QNC_MAX_WORKERS", "2", 1) == 0);
  CHECK(resolve_worker_count(100) <= 2);
  CHECK(resolve_worker_count(100) >= 1);
  REQUIRE(setenv("QNC_MAX_WORKERS", "-3", 1) == 0);
  CHECK(resolve_worker_count(100) == 1);  // clamped to one worker
  REQUIRE(setenv("QNC_MAX_WORKERS", "garbage", 1) == 0);
  const int uncapped = resolve_worker_count(100);
  REQUIRE(unsetenv("QNC_MAX_WORKERS") == 0);
  CHECK(uncapped == resolve_worker_count(100));  // malformed cap ignored
}

}  // TEST_SUITE
