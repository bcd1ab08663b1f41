#include "pvsim/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pvsim {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("atomic_write: cannot open " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

std::string trace_to_csv(const SimTrace& trace) {
  std::string out = "t,g,t_cell,v_pv,i_pv,p_pv,duty,v_out,i_l,p_mpp_oracle\n";
  for (const auto& r : trace.rows) {
    out += format_double(r.t) + ',' + format_double(r.g) + ',' + format_double(r.t_cell) + ',' +
           format_double(r.v_pv) + ',' + format_double(r.i_pv) + ',' + format_double(r.p_pv) +
           ',' + format_double(r.duty) + ',' + format_double(r.v_out) + ',' +
           format_double(r.i_l) + ',' + format_double(r.p_mpp_oracle) + '\n';
  }
  return out;
}

std::string dataset_to_csv(const Dataset& data) {
  std::string out = "g,t,v_mpp,i_mpp\n";
  for (const auto& r : data.rows) {
    out += format_double(r.g) + ',' + format_double(r.t) + ',' + format_double(r.v_mpp) + ',' +
           format_double(r.i_mpp) + '\n';
  }
  return out;
}

Dataset dataset_from_csv(const std::string& content) {
  Dataset data;
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line) || line != "g,t,v_mpp,i_mpp") {
    throw std::runtime_error("dataset_from_csv: unexpected header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    DatasetRow row{};
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &row.g, &row.t, &row.v_mpp, &row.i_mpp) != 4) {
      throw std::runtime_error("dataset_from_csv: malformed row: " + line);
    }
    data.rows.push_back(row);
  }
  return data;
}

namespace {

std::string settle_text(const std::optional<double>& s) {
  return s ? format_double(*s) : std::string("not_settled");
}

std::string settle_csv(const std::optional<double>& s) {
  return s ? format_double(*s) : std::string("nan");
}

}  // namespace

std::string metrics_to_text(const Metrics& m) {
  std::string out;
  out += "settle_time_s = " + settle_text(m.settle_time) + '\n';
  out += "tracking_efficiency = " + format_double(m.tracking_efficiency) + '\n';
  out += "steady_state_power_w = " + format_double(m.steady_state_power) + '\n';
  for (std::size_t k = 0; k < m.segments.size(); ++k) {
    const auto& s = m.segments[k];
    const std::string p = "segment_" + std::to_string(k) + '_';
    out += p + "t_begin_s = " + format_double(s.t_begin) + '\n';
    out += p + "t_end_s = " + format_double(s.t_end) + '\n';
    out += p + "steady_state_power_w = " + format_double(s.steady_state_power) + '\n';
    out += p + "chatter_w = " + format_double(s.chatter) + '\n';
    out += p + "settle_time_s = " + settle_text(s.settle_time) + '\n';
  }
  return out;
}

std::string comparison_to_csv(const Comparison& c) {
  std::string out =
      "controller,settle_time_s,tracking_efficiency,steady_state_power_w,"
      "segment,seg_t_begin_s,seg_t_end_s,seg_steady_state_power_w,seg_chatter_w,seg_settle_time_s\n";
  for (const auto& row : c.rows) {
    const auto& m = row.metrics;
    for (std::size_t k = 0; k < m.segments.size(); ++k) {
      const auto& s = m.segments[k];
      out += to_string(row.kind) + ',' + settle_csv(m.settle_time) + ',' +
             format_double(m.tracking_efficiency) + ',' + format_double(m.steady_state_power) +
             ',' + std::to_string(k) + ',' + format_double(s.t_begin) + ',' +
             format_double(s.t_end) + ',' + format_double(s.steady_state_power) + ',' +
             format_double(s.chatter) + ',' + settle_csv(s.settle_time) + '\n';
    }
  }
  return out;
}

std::string metrics_table(const Comparison& c) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %-14s %-12s %-12s %-10s\n", "controller", "settle_time_s",
                "efficiency", "steady_w", "chatter_w");
  out += buf;
  for (const auto& row : c.rows) {
    const auto& m = row.metrics;
    const double chatter = m.segments.empty() ? 0.0 : m.segments.back().chatter;
    std::snprintf(buf, sizeof buf, "%-10s %-14s %-12.6g %-12.6g %-10.4g\n",
                  to_string(row.kind).c_str(), settle_text(m.settle_time).c_str(),
                  m.tracking_efficiency, m.steady_state_power, chatter);
    out += buf;
  }
  return out;
}

std::string curve_to_csv(const PanelParams& params, const EnvConditions& env, int points) {
  const double v_oc = open_circuit_voltage(params, env);
  std::string out = "v,i,p\n";
  for (int k = 0; k < points; ++k) {
    const double v = v_oc * k / (points - 1);
    const double i = solve_current(params, env, v);
    out += format_double(v) + ',' + format_double(i) + ',' + format_double(v * i) + '\n';
  }
  return out;
}

std::string inverter_trace_to_csv(const std::vector<InverterTraceRow>& rows) {
  std::string out = "t,u_an,u_bn,u_cn,i_a,i_b,i_c\n";
  for (const auto& r : rows) {
    out += format_double(r.t) + ',' + format_double(r.u_an) + ',' + format_double(r.u_bn) + ',' +
           format_double(r.u_cn) + ',' + format_double(r.i_a) + ',' + format_double(r.i_b) + ',' +
           format_double(r.i_c) + '\n';
  }
  return out;
}

}  // namespace pvsim
