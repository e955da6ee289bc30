#pragma once

#include <string>
#include <vector>

// Sweep output: one row per (grid value, mode), '.' decimal, '\n' endings,
// column order fixed: sweep_var, energy, time, conv_error, K0, K1..KN, B,
// gamma_param, rho_param, status, then mode as a trailing tag.

namespace fledge::io {

struct SweepRow {
  double sweep_value = 0.0;
  double energy = 0.0;
  double time = 0.0;
  double conv_error = 0.0;
  std::vector<double> iterations;  // K0..KN, empty when infeasible
  double batch = 0.0;
  double gamma_param = 0.0;
  double rho_param = 0.0;   // 0 marks "not applicable"
  std::string status;
  std::string mode;
};

std::string sweep_csv_header(int workers);
std::string sweep_csv_line(const SweepRow& row, int workers);
void write_sweep_csv(const std::string& path, int workers, const std::vector<SweepRow>& rows);

}  // namespace fledge::io
