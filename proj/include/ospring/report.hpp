#pragma once

#include <string>
#include <vector>

#include "ospring/budget.hpp"
#include "ospring/config.hpp"

namespace ospring {

// Deterministic float formatting for reports: %.12e, byte-stable across runs.
std::string fmt(double v);

// Comment block every report starts with: tool line, config hash, constants
// in use, and the sign/normalization conventions the numbers assume.
std::vector<std::string> report_header(const SystemConfig& cfg,
                                       const std::string& title);

std::string budget_csv(const SystemConfig& cfg, BudgetMode mode,
                       const std::vector<double>& omegas);

std::string cavity_dump_csv(const SystemConfig& cfg,
                            const std::vector<double>& omegas);

std::string closed_loop_csv(const SystemConfig& cfg,
                            const FeedbackKernel& kernel,
                            const std::vector<double>& omegas);

std::string temperature_summary(const SystemConfig& cfg,
                                const TemperatureReport& rep);

// Log-spaced grid in Hz converted to rad/s.
std::vector<double> log_grid_omega(double f_min_hz, double f_max_hz,
                                   int points);

}  // namespace ospring
