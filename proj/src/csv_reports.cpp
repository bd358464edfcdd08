#include "entrynav/csv_reports.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "entrynav/errors.hpp"

namespace entrynav {

namespace {

constexpr std::array<const char*, 6> kStateUnit = {
    "radius_m",      "velocity_m_s", "fpa_rad",
    "longitude_rad", "latitude_rad", "azimuth_rad"};

constexpr std::array<const char*, 6> kStateBare = {
    "radius", "velocity", "fpa", "longitude", "latitude", "azimuth"};

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out)
    throw FilterError("cannot open report file for writing: " + file.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& file) {
  out.flush();
  if (!out) throw FilterError("write failed for report file: " + file.string());
}

}  // namespace

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::general, 12);
  if (res.ec != std::errc())
    throw FilterError("number formatting failed");
  return std::string(buf.data(), res.ptr);
}

std::string mode_tag(GainMode mode) {
  switch (mode) {
    case GainMode::kEkf:
      return "ekf";
    case GainMode::kAdekf:
      return "adekf";
    case GainMode::kDekf:
      return "dekf";
  }
  return "unknown";
}

void write_truth_csv(const std::filesystem::path& file, const RunHistory& h) {
  auto out = open_out(file);
  out << "epoch_s";
  for (const char* s : kStateUnit) out << ",truth_" << s;
  out << '\n';
  for (std::size_t k = 0; k < h.epochs.size(); ++k) {
    out << format_number(h.epochs[k]);
    for (int i = 0; i < 6; ++i) out << ',' << format_number(h.truth[k](i));
    out << '\n';
  }
  finish(out, file);
}

void write_estimate_csv(const std::filesystem::path& file,
                        const RunHistory& h) {
  auto out = open_out(file);
  out << "epoch_s";
  for (const char* s : kStateUnit) out << ",estimate_" << s;
  out << '\n';
  for (std::size_t k = 0; k < h.epochs.size(); ++k) {
    out << format_number(h.epochs[k]);
    for (int i = 0; i < 6; ++i) out << ',' << format_number(h.estimate[k](i));
    out << '\n';
  }
  finish(out, file);
}

void write_sensitivity_csv(const std::filesystem::path& file,
                           const RunHistory& h) {
  auto out = open_out(file);
  out << "epoch_s";
  for (const char* s : kStateUnit)
    out << ",sens_" << s << "_c1,sens_" << s << "_c2";
  out << '\n';
  for (std::size_t k = 0; k < h.epochs.size(); ++k) {
    out << format_number(h.epochs[k]);
    for (int i = 0; i < 6; ++i)
      out << ',' << format_number(h.sensitivity[k](i, 0)) << ','
          << format_number(h.sensitivity[k](i, 1));
    out << '\n';
  }
  finish(out, file);
}

void write_perturbation_csv(const std::filesystem::path& file,
                            const RunHistory& h) {
  auto out = open_out(file);
  out << "epoch_s";
  for (const char* s : kStateUnit)
    out << ",pert_" << s << "_c1,pert_" << s << "_c2";
  out << '\n';
  for (std::size_t k = 0; k < h.epochs.size(); ++k) {
    out << format_number(h.epochs[k]);
    for (int i = 0; i < 6; ++i)
      out << ',' << format_number(h.perturbation[k](i, 0)) << ','
          << format_number(h.perturbation[k](i, 1));
    out << '\n';
  }
  finish(out, file);
}

void write_error_bounds_csv(const std::filesystem::path& file,
                            const RunHistory& h) {
  auto out = open_out(file);
  out << "epoch_s";
  for (const char* s : kStateUnit)
    out << ",error_" << s << ",bound3_" << s;
  out << '\n';
  for (std::size_t k = 0; k < h.epochs.size(); ++k) {
    out << format_number(h.epochs[k]);
    for (int i = 0; i < 6; ++i) {
      const double e = h.estimate[k](i) - h.truth[k](i);
      const double b = 3.0 * std::sqrt(std::max(h.cov_diag[k](i), 0.0));
      out << ',' << format_number(e) << ',' << format_number(b);
    }
    out << '\n';
  }
  finish(out, file);
}

void write_rmse_csv(const std::filesystem::path& file,
                    const MonteCarloReport& report) {
  auto out = open_out(file);
  out << "mode,epoch_s";
  for (const char* s : kStateUnit) out << ",rmse_" << s;
  out << '\n';
  const std::array<GainMode, 2> modes = {GainMode::kEkf, GainMode::kAdekf};
  for (int m = 0; m < 2; ++m) {
    const auto& series = report.rmse[m];
    for (std::size_t k = 0; k < series.size(); ++k) {
      out << mode_tag(modes[m]) << ',' << format_number(report.epochs[k]);
      for (int i = 0; i < 6; ++i) out << ',' << format_number(series[k](i));
      out << '\n';
    }
  }
  finish(out, file);
}

void write_nme_csv(const std::filesystem::path& file,
                   const MonteCarloReport& report) {
  auto out = open_out(file);
  out << "mode,epoch_s";
  for (const char* s : kStateBare) out << ",nme_" << s;
  out << ",threshold\n";
  const std::array<GainMode, 2> modes = {GainMode::kEkf, GainMode::kAdekf};
  for (int m = 0; m < 2; ++m) {
    const auto& series = report.nme[m];
    for (std::size_t k = 0; k < series.size(); ++k) {
      out << mode_tag(modes[m]) << ',' << format_number(report.epochs[k]);
      for (int i = 0; i < 6; ++i) out << ',' << format_number(series[k](i));
      out << ',' << format_number(report.nme_threshold[m]) << '\n';
    }
  }
  finish(out, file);
}

void write_summary_csv(const std::filesystem::path& file,
                       const MonteCarloReport& report) {
  auto out = open_out(file);
  out << "mode,runs_total,runs_diverged,nme_threshold,worst_cov_health";
  for (const char* s : kStateBare) out << ",capture_" << s;
  for (const char* s : kStateUnit) out << ",final_rmse_" << s;
  out << '\n';
  const std::array<GainMode, 2> modes = {GainMode::kEkf, GainMode::kAdekf};
  for (int m = 0; m < 2; ++m) {
    if (report.rmse[m].empty()) continue;
    out << mode_tag(modes[m]) << ',' << report.runs_total << ','
        << report.runs_diverged[m] << ','
        << format_number(report.nme_threshold[m]) << ','
        << format_number(report.worst_cov_health[m]);
    for (int i = 0; i < 6; ++i)
      out << ',' << format_number(report.capture_fraction[m](i));
    const Vec6& last = report.rmse[m].back();
    for (int i = 0; i < 6; ++i) out << ',' << format_number(last(i));
    out << '\n';
  }
  finish(out, file);
}

void emit_reports(const std::optional<MonteCarloReport>& report,
                  const RunHistory* ekf_run, const RunHistory* adekf_run,
                  const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const RunHistory* any_run = ekf_run ? ekf_run : adekf_run;
  if (any_run) write_truth_csv(out_dir / "truth.csv", *any_run);
  for (const RunHistory* run : {ekf_run, adekf_run}) {
    if (!run) continue;
    const std::string tag = mode_tag(run->mode);
    write_estimate_csv(out_dir / ("estimate_" + tag + ".csv"), *run);
    write_sensitivity_csv(out_dir / ("sensitivity_" + tag + ".csv"), *run);
    write_perturbation_csv(out_dir / ("perturbation_" + tag + ".csv"), *run);
    write_error_bounds_csv(out_dir / ("error_3sigma_" + tag + ".csv"), *run);
  }
  if (report) {
    write_rmse_csv(out_dir / "rmse.csv", *report);
    write_nme_csv(out_dir / "nme.csv", *report);
    write_summary_csv(out_dir / "summary.csv", *report);
  }
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  const std::string& cell = rows.at(row).at(col);
  double value = 0.0;
  const auto res =
      std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
    throw FilterError("csv cell is not a number: '" + cell + "'");
  return value;
}

CsvTable read_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw FilterError("cannot open csv file: " + file.string());
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

}  // namespace entrynav
