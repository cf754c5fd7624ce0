#pragma once

#include "gdglmm/diagnostics.hpp"
#include "gdglmm/postprocess.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace gdglmm {

/// Six significant digits, the precision of every summary file.
std::string format_number(double value);
/// Shortest representation that round-trips (raw draw dumps).
std::string format_exact(double value);

void write_summary(std::ostream& out, const std::vector<ParameterDiagnostics>& rows);
void write_diagnostics(std::ostream& out, const std::vector<ParameterDiagnostics>& rows);
void write_trace(std::ostream& out, const std::vector<std::string>& names,
                 const Eigen::MatrixXd& draws, bool exact);
void write_curve(std::ostream& out, const CurveSummary& curve,
                 const std::vector<std::string>& coordinate_names);
void write_sir(std::ostream& out, const std::vector<RegionSummary>& regions);
void write_sensitivity(std::ostream& out, const SensitivityTable& table);
void write_matrix(std::ostream& out, const std::vector<std::string>& names, const Eigen::MatrixXd& m);

/// Reads a trace/draws file back: header names and rows.
void read_trace(std::istream& in, std::vector<std::string>& names, Eigen::MatrixXd& draws);

}  // namespace gdglmm
