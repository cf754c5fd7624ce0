#include "gdglmm/output.hpp"

#include "gdglmm/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace gdglmm {

namespace {

std::string quoted(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                in_quotes = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(std::move(field));
    return out;
}

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    return buf;
}

std::string format_exact(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

void write_summary(std::ostream& out, const std::vector<ParameterDiagnostics>& rows) {
    out << "parameter,mean,sd,q2.5,q50,q97.5\n";
    for (const auto& r : rows) {
        out << quoted(r.name) << ',' << format_number(r.summary.mean) << ',' << format_number(r.summary.sd) << ','
            << format_number(r.summary.q025) << ',' << format_number(r.summary.q500) << ','
            << format_number(r.summary.q975) << '\n';
    }
}

void write_diagnostics(std::ostream& out, const std::vector<ParameterDiagnostics>& rows) {
    out << "parameter,sqrt_rhat,ess,mc_se\n";
    for (const auto& r : rows) {
        out << quoted(r.name) << ',' << format_number(r.rhat) << ',' << format_number(r.ess) << ','
            << format_number(r.mc_se) << '\n';
    }
}

void write_trace(std::ostream& out, const std::vector<std::string>& names, const Eigen::MatrixXd& draws, bool exact) {
    out << "iteration";
    for (const auto& n : names) out << ',' << quoted(n);
    out << '\n';
    for (Eigen::Index t = 0; t < draws.rows(); ++t) {
        out << t + 1;
        for (Eigen::Index j = 0; j < draws.cols(); ++j) out << ',' << (exact ? format_exact(draws(t, j)) : format_number(draws(t, j)));
        out << '\n';
    }
}

void write_curve(std::ostream& out, const CurveSummary& curve, const std::vector<std::string>& coordinate_names) {
    for (const auto& n : coordinate_names) out << quoted(n) << ',';
    out << "mean,lo,hi\n";
    for (std::size_t i = 0; i < curve.mean.size(); ++i) {
        for (double x : curve.grid[i]) out << format_number(x) << ',';
        out << format_number(curve.mean[i]) << ',' << format_number(curve.lower[i]) << ','
            << format_number(curve.upper[i]) << '\n';
    }
}

void write_sir(std::ostream& out, const std::vector<RegionSummary>& regions) {
    out << "region,mean,lo,hi,expected\n";
    for (const auto& r : regions) {
        out << quoted(r.region) << ',' << format_number(r.sir.mean) << ',' << format_number(r.sir.q025) << ','
            << format_number(r.sir.q975) << ',' << format_number(r.expected) << '\n';
    }
}

void write_sensitivity(std::ostream& out, const SensitivityTable& table) {
    out << "parameter,prior,pct_delta_mean,pct_delta_width\n";
    for (const auto& r : table.rows) {
        out << quoted(r.parameter) << ',' << quoted(r.prior) << ',' << format_number(r.pct_delta_mean) << ','
            << format_number(r.pct_delta_width) << '\n';
    }
}

void write_matrix(std::ostream& out, const std::vector<std::string>& names, const Eigen::MatrixXd& m) {
    for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << quoted(names[j]);
    out << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_exact(m(i, j));
        out << '\n';
    }
}

void read_trace(std::istream& in, std::vector<std::string>& names, Eigen::MatrixXd& draws) {
    std::string line;
    if (!std::getline(in, line)) throw Error("data", "missing-header", "draw file is empty");
    auto header = split_csv_line(line);
    if (header.empty() || header.front() != "iteration") throw Error("data", "malformed", "draw file must start with an iteration column");
    names.assign(header.begin() + 1, header.end());
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw Error("data", "ragged", "ragged row at line " + std::to_string(line_no) + " of draw file");
        }
        std::vector<double> row(names.size());
        for (std::size_t j = 0; j < names.size(); ++j) {
            const std::string& f = fields[j + 1];
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc() || ptr != f.data() + f.size()) {
                throw Error("data", "non-numeric", "non-numeric draw '" + f + "' at line " + std::to_string(line_no));
            }
            row[j] = v;
        }
        rows.push_back(std::move(row));
    }
    draws.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < names.size(); ++j) draws(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
}

}  // namespace gdglmm
