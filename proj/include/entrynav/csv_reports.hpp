#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "entrynav/monte_carlo.hpp"

namespace entrynav {

// 12 significant digits, locale independent, round-trips through strtod.
std::string format_number(double value);

// Mode tag used in filenames and the rmse.csv mode column.
std::string mode_tag(GainMode mode);

void write_truth_csv(const std::filesystem::path& file, const RunHistory& h);
void write_estimate_csv(const std::filesystem::path& file, const RunHistory& h);
void write_sensitivity_csv(const std::filesystem::path& file,
                           const RunHistory& h);
void write_perturbation_csv(const std::filesystem::path& file,
                            const RunHistory& h);
void write_error_bounds_csv(const std::filesystem::path& file,
                            const RunHistory& h);
void write_rmse_csv(const std::filesystem::path& file,
                    const MonteCarloReport& report);
void write_nme_csv(const std::filesystem::path& file,
                   const MonteCarloReport& report);
void write_summary_csv(const std::filesystem::path& file,
                       const MonteCarloReport& report);

// Writes every report the inputs allow into out_dir (created if absent).
// Null pointers and empty reports still produce header-only files for the
// aggregate set so downstream plotting never sees a missing file.
void emit_reports(const std::optional<MonteCarloReport>& report,
                  const RunHistory* ekf_run, const RunHistory* adekf_run,
                  const std::filesystem::path& out_dir);

// Minimal reader for round-trip tests; cells keep their text form.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  double number(std::size_t row, std::size_t col) const;
};

CsvTable read_csv(const std::filesystem::path& file);

}  // namespace entrynav
