#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qnc {

// ---------------------------------------------------------------------------
// Experiment harness: Monte-Carlo sweeps over random deployments, block
// lengths L and decode times T; best-delay-per-quality curve extraction; CSV
// and SVG emission.  Everything is deterministic under a fixed master seed,
// including under concurrent execution (child seeds are derived from the
// work-item coordinates, never from completion order).

// Decoder knobs applied uniformly across the sweep.  The reconstruction grid
// is shared by all BP decodes; its half width scales with the slab sigma so
// one setting serves every sparsity factor.
struct DecoderSettings {
  int grid_points = 512;           // power of two
  double grid_width_sigmas = 6.0;  // half_width = this * sqrt(sigma2_s)
  double sigma2_0_factor = 1e-3;   // sigma2_0 = this * sigma2_s
  int bp_max_iter = 50;
  double bp_damping = 0.5;   // in (0, 1]
  double bp_eps_rec = -1.0;  // < 0 -> library default
};

// Artifact destinations; an empty path skips that artifact.
struct OutputPaths {
  std::string rows_csv;
  std::string curves_csv;
  std::string plot_svg;
};

struct ExperimentConfig {
  int n = 100;
  std::vector<int> edge_counts;          // |E| values, e.g. {400, 800, 1200}
  std::vector<double> sparsity_factors;  // k/n values in (0, 1]
  double sigma2_s = 5.0;
  std::vector<int> L_sweep;
  int T_max = 25;                      // decode times sweep T = 2..T_max
  std::vector<std::string> decoders;   // subset of {"bp", "l1", "oracle"}
  int trials = 50;
  std::uint64_t master_seed = 1;

  DecoderSettings decoder;
  OutputPaths outputs;
  std::vector<double> snr_grid = {2, 4, 6, 8, 10, 12};  // dB thresholds

  // Throws std::invalid_argument on any violated invariant (empty lists,
  // trials < 1, unknown decoder names, oracle with n > 14, knobs that the
  // decoders would reject, ...).
  void validate() const;
};

// Reads a JSON config file mirroring ExperimentConfig (keys named exactly as
// the fields; "decoder" and "outputs" are nested objects).  Missing keys keep
// their defaults; unknown keys are rejected.  The returned config has been
// validated.  // comments are permitted in the file.
ExperimentConfig load_experiment_config(const std::string& path);

// One evaluated (deployment, decoder, L, T) point.  decoder is one of the
// configured QNC decoders, "forwarding" for the store-and-forward baseline
// (T = 0, one row per L), or "error" when a work item failed (all numeric
// fields zero, snr_db = nan, the message in `error`).
struct ResultRow {
  int trial = 0;
  int edge_count = 0;
  double sparsity_factor = 0.0;
  std::string decoder;
  int L = 0;
  int T = 0;
  long long delay_channel_uses = 0;  // QNC: L*(T-1); forwarding: L*slots
  double snr_db = 0.0;
  int iterations = 0;
  bool converged = false;
  long long clip_count = 0;  // QNC: encoder clips up to T; forwarding: sources
  std::string error;
};

// Runs the full sweep: for every (edge_count, sparsity_factor, trial) work
// item, samples a deployment (graph redrawn until the gateway is reachable
// from every node) plus messages, then for each L simulates QNC once to T_max
// and decodes every prefix T = 2..T_max with each configured decoder, and
// runs the forwarding baseline once per L.  Work items execute on a bounded
// worker pool (see resolve_worker_count); a failed item contributes a single
// error row instead of aborting the sweep.  Row order is deterministic:
// items in (edge_count, sparsity_factor, trial) loop order, within an item
// L-major, then T, then configured decoder order, with the forwarding row
// after each L block.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

// Worker count used for `item_count` work items: min(item_count, hardware
// concurrency, QNC_MAX_WORKERS).  The env var must be a positive integer;
// malformed values are ignored, values < 1 are clamped to 1.
int resolve_worker_count(std::size_t item_count);

struct CurvePoint {
  std::string decoder;
  double snr_db_threshold = 0.0;
  double delay_channel_uses = 0.0;
};

// Fig. 2-style quality/delay tradeoff: rows are grouped per decoder by the
// (L, T) configuration, each group averaging snr_db and delay over trials;
// for every threshold in snr_grid the minimum mean delay over groups with
// mean SNR >= threshold is emitted per decoder.  Thresholds nobody reaches
// produce no point.  Error rows and non-finite SNRs are ignored.  Points are
// emitted decoder-major (alphabetical), thresholds in the given order; for
// an ascending snr_grid each decoder's delays are non-decreasing.
std::vector<CurvePoint> best_delay_per_quality(
    const std::vector<ResultRow>& rows, const std::vector<double>& snr_grid);

// ---------------------------------------------------------------------------
// CSV / SVG emission.  Doubles are printed with %.17g so values round-trip
// exactly through the readers; `error` text is sanitized (commas, newlines
// and CRs become ';') to keep rows single-line and comma-splittable.

// Fixed rows header:
//   trial,edge_count,sparsity_factor,decoder,L,T,delay_channel_uses,
//   snr_db,iterations,converged,clip_count,error   (one line, no spaces)
extern const char* const kRowsCsvHeader;
// Fixed curves header: decoder,snr_db_threshold,delay_channel_uses
extern const char* const kCurvesCsvHeader;

// CSV content as a string (header line + one line per element).
std::string rows_csv_text(const std::vector<ResultRow>& rows);
std::string curves_csv_text(const std::vector<CurvePoint>& points);

// Empty containers produce a header-only file.  I/O failures throw
// std::runtime_error naming the path.
void write_rows_csv(const std::string& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_rows_csv(const std::string& path);
void write_curves_csv(const std::string& path,
                      const std::vector<CurvePoint>& points);
std::vector<CurvePoint> read_curves_csv(const std::string& path);

// Self-contained SVG: delay (channel uses) on x, SNR threshold (dB) on y,
// one marked polyline per decoder series plus a legend.
void write_delay_snr_svg(const std::string& path,
                         const std::vector<CurvePoint>& points);

// Writes rows/curves/plot to whichever paths are nonempty.
void emit_outputs(const std::vector<ResultRow>& rows,
                  const std::vector<CurvePoint>& curves,
                  const OutputPaths& paths);

}  // namespace qnc
