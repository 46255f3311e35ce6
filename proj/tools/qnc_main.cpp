// Command-line front end for the QNC experiment harness:
//   qnc run    --config cfg.json          full sweep -> rows/curves/plot
//   qnc curves --input rows.csv --snr-grid 2,4,..  curve extraction
//   qnc plot   --input curves.csv --out plot.svg   SVG rendering

#include <chrono>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <qnc/harness.hpp>

namespace {

int run_command(const std::string& config_path) {
  const qnc::ExperimentConfig cfg = qnc::load_experiment_config(config_path);
  const std::size_t items = cfg.edge_counts.size() *
                            cfg.sparsity_factors.size() *
                            static_cast<std::size_t>(cfg.trials);
  std::printf("sweep: %zu work items on %d workers\n", items,
              qnc::resolve_worker_count(items));
  std::fflush(stdout);

  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<qnc::ResultRow> rows = qnc::run_experiment(cfg);
  const std::vector<qnc::CurvePoint> curves =
      qnc::best_delay_per_quality(rows, cfg.snr_grid);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  long long failed = 0;
  for (const qnc::ResultRow& r : rows)
    if (r.decoder == "error") ++failed;

  qnc::emit_outputs(rows, curves, cfg.outputs);
  std::printf("rows: %zu (%lld failed work items)\n", rows.size(), failed);
  std::printf("curve points: %zu\n", curves.size());
  std::printf("elapsed: %.1f s\n", elapsed);
  if (!cfg.outputs.rows_csv.empty())
    std::printf("wrote %s\n", cfg.outputs.rows_csv.c_str());
  if (!cfg.outputs.curves_csv.empty())
    std::printf("wrote %s\n", cfg.outputs.curves_csv.c_str());
  if (!cfg.outputs.plot_svg.empty())
    std::printf("wrote %s\n", cfg.outputs.plot_svg.c_str());
  return 0;
}

int curves_command(const std::string& rows_path,
                   const std::vector<double>& snr_grid,
                   const std::string& output_path) {
  const std::vector<qnc::ResultRow> rows = qnc::read_rows_csv(rows_path);
  const std::vector<qnc::CurvePoint> points =
      qnc::best_delay_per_quality(rows, snr_grid);
  if (output_path.empty()) {
    std::fputs(qnc::curves_csv_text(points).c_str(), stdout);
  } else {
    qnc::write_curves_csv(output_path, points);
    std::printf("wrote %s (%zu points)\n", output_path.c_str(), points.size());
  }
  return 0;
}

int plot_command(const std::string& curves_path, const std::string& out_path) {
  const std::vector<qnc::CurvePoint> points = qnc::read_curves_csv(curves_path);
  qnc::write_delay_snr_svg(out_path, points);
  std::printf("wrote %s (%zu points)\n", out_path.c_str(), points.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantized-network-coding experiment harness"};
  app.require_subcommand(1);
  app.footer(
      "Environment:\n"
      "  QNC_MAX_WORKERS  positive integer cap on the run worker pool\n"
      "                   (default: hardware concurrency)");

  std::string config_path;
  CLI::App* run = app.add_subcommand(
      "run", "Run a sweep from a JSON config and emit CSV/SVG artifacts");
  run->add_option("--config", config_path, "JSON experiment config file")
      ->required()
      ->check(CLI::ExistingFile);

  std::string rows_path;
  std::vector<double> snr_grid;
  std::string curves_output;
  CLI::App* curves = app.add_subcommand(
      "curves", "Compute best-delay-per-quality curves from a rows CSV");
  curves->add_option("--input", rows_path, "rows CSV produced by `run`")
      ->required()
      ->check(CLI::ExistingFile);
  curves
      ->add_option("--snr-grid", snr_grid,
                   "SNR thresholds in dB (comma separated)")
      ->required()
      ->delimiter(',');
  curves->add_option("--output", curves_output,
                     "curves CSV destination (stdout when omitted)");

  std::string plot_input, plot_output;
  CLI::App* plot = app.add_subcommand(
      "plot", "Render a curves CSV as an SVG delay/quality chart");
  plot->add_option("--input", plot_input, "curves CSV")
      ->required()
      ->check(CLI::ExistingFile);
  plot->add_option("--out", plot_output, "SVG destination")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_command(config_path);
    if (curves->parsed())
      return curves_command(rows_path, snr_grid, curves_output);
    return plot_command(plot_input, plot_output);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
