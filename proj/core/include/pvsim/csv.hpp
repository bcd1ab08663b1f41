#pragma once

#include <filesystem>
#include <string>

#include "pvsim/neural.hpp"
#include "pvsim/sim.hpp"

namespace pvsim {

/// Shortest-round-trip style formatting with a fixed precision so repeated
/// runs emit byte-identical files.
std::string format_double(double x);

/// Write-then-rename so interrupted runs never leave truncated files.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string trace_to_csv(const SimTrace& trace);
std::string dataset_to_csv(const Dataset& data);
Dataset dataset_from_csv(const std::string& content);

std::string metrics_to_text(const Metrics& m);
/// Long-format rows: controller,segment columns; one row per segment.
std::string comparison_to_csv(const Comparison& c);
std::string metrics_table(const Comparison& c);

std::string curve_to_csv(const PanelParams& params, const EnvConditions& env, int points);
std::string inverter_trace_to_csv(const std::vector<InverterTraceRow>& rows);

}  // namespace pvsim
