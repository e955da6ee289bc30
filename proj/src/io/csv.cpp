#include "fledge/io/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace fledge::io {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

std::string sweep_csv_header(int workers) {
  std::string h = "sweep_var,energy,time,conv_error,K0";
  for (int n = 1; n <= workers; ++n) h += ",K" + std::to_string(n);
  h += ",B,gamma_param,rho_param,status,mode";
  return h;
}

std::string sweep_csv_line(const SweepRow& row, int workers) {
  std::string line = fmt(row.sweep_value);
  bool has_params = static_cast<int>(row.iterations.size()) == workers + 1;
  auto cell = [&](double v, bool present) { line += ","; line += present ? fmt(v) : ""; };
  cell(row.energy, has_params);
  cell(row.time, has_params);
  cell(row.conv_error, has_params);
  for (int n = 0; n <= workers; ++n) cell(has_params ? row.iterations[n] : 0.0, has_params);
  cell(row.batch, has_params);
  cell(row.gamma_param, has_params);
  cell(row.rho_param, has_params && row.rho_param != 0.0);
  line += "," + row.status + "," + row.mode;
  return line;
}

void write_sweep_csv(const std::string& path, int workers, const std::vector<SweepRow>& rows) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);  // '\n' endings, no locale
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << sweep_csv_header(workers) << "\n";
  for (const auto& row : rows) out << sweep_csv_line(row, workers) << "\n";
}

}  // namespace fledge::io
