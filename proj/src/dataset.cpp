#include "gdglmm/dataset.hpp"

#include "gdglmm/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace gdglmm {

namespace {

bool parse_real(const std::string& text, double& out) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    if (begin == end) return false;
    const char* first = text.data() + begin;
    const char* last = text.data() + end;
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

// Splits one record, honouring quotes. Returns false at end of input.
bool read_record(std::istream& in, char delimiter, std::vector<std::string>& fields, std::size_t& line) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    char ch;
    while (in.get(ch)) {
        any = true;
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get(ch);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line;
                field.push_back(ch);
            }
            continue;
        }
        if (ch == '"') {
            in_quotes = true;
        } else if (ch == delimiter) {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch == '\r') {
            // tolerated before \n
        } else if (ch == '\n') {
            ++line;
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(ch);
        }
    }
    if (in_quotes) throw Error("data", "malformed", "unterminated quoted field near line " + std::to_string(line));
    if (!any) return false;
    fields.push_back(std::move(field));
    return true;
}

void categorize(Column& column) {
    column.kind = ColumnKind::categorical;
    column.values.clear();
    column.levels.clear();
    column.codes.clear();
    std::map<std::string, int> index;
    for (const auto& cell : column.cells) {
        auto [it, inserted] = index.emplace(cell, static_cast<int>(column.levels.size()));
        if (inserted) column.levels.push_back(cell);
        column.codes.push_back(it->second);
    }
}

}  // namespace

bool Column::is_indicator() const {
    if (kind != ColumnKind::numeric) return false;
    for (double v : values) {
        if (v != 0.0 && v != 1.0) return false;
    }
    return true;
}

bool Dataset::has(const std::string& name) const {
    for (const auto& c : columns_) {
        if (c.name == name) return true;
    }
    return false;
}

const Column& Dataset::column(const std::string& name) const {
    for (const auto& c : columns_) {
        if (c.name == name) return c;
    }
    throw Error("data", "missing-column", "missing column '" + name + "'");
}

const std::vector<double>& Dataset::numeric(const std::string& name) const {
    const Column& c = column(name);
    if (c.kind != ColumnKind::numeric) {
        for (std::size_t r = 0; r < c.cells.size(); ++r) {
            double v;
            if (!parse_real(c.cells[r], v)) {
                throw Error("data", "non-numeric",
                            "non-numeric value '" + c.cells[r] + "' in numeric column '" + name + "' (row " +
                                std::to_string(r + 1) + ")");
            }
        }
        throw Error("data", "non-numeric", "column '" + name + "' is categorical but a numeric column is required");
    }
    return c.values;
}

Factor Dataset::factor(const std::string& name) const {
    const Column& c = column(name);
    if (c.kind == ColumnKind::categorical) return {c.levels, c.codes};
    Column copy = c;
    categorize(copy);
    return {copy.levels, copy.codes};
}

void Dataset::add(Column column) {
    if (has(column.name)) throw Error("data", "duplicate-column", "duplicate column '" + column.name + "'");
    if (!columns_.empty() && column.cells.size() != rows_) {
        throw Error("data", "ragged", "column '" + column.name + "' has the wrong number of rows");
    }
    rows_ = column.cells.size();
    columns_.push_back(std::move(column));
}

void Dataset::set_values(const std::string& name, std::vector<double> values) {
    for (auto& c : columns_) {
        if (c.name == name) {
            if (values.size() != rows_) throw Error("data", "ragged", "replacement column has the wrong length");
            c.kind = ColumnKind::numeric;
            c.values = std::move(values);
            return;
        }
    }
    throw Error("data", "missing-column", "missing column '" + name + "'");
}

Column make_numeric_column(std::string name, std::vector<double> values) {
    Column c;
    c.name = std::move(name);
    c.kind = ColumnKind::numeric;
    c.cells.reserve(values.size());
    for (double v : values) {
        char buf[32];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
        c.cells.emplace_back(buf, ptr);
    }
    c.values = std::move(values);
    return c;
}

Column make_categorical_column(std::string name, std::vector<std::string> cells) {
    Column c;
    c.name = std::move(name);
    c.cells = std::move(cells);
    categorize(c);
    return c;
}

Dataset load_dataset(std::istream& in, const std::set<std::string>& categorical, char delimiter) {
    std::size_t line = 1;
    std::vector<std::string> header;
    if (!read_record(in, delimiter, header, line) || (header.size() == 1 && header[0].empty())) {
        throw Error("data", "missing-header", "data has no header row");
    }
    std::vector<Column> columns(header.size());
    for (std::size_t j = 0; j < header.size(); ++j) {
        columns[j].name = header[j];
        if (header[j].empty()) throw Error("data", "missing-header", "empty column name in header position " + std::to_string(j + 1));
    }

    std::vector<std::string> fields;
    std::size_t record = 1;
    while (true) {
        const std::size_t at = line;
        if (!read_record(in, delimiter, fields, line)) break;
        ++record;
        if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
        if (fields.size() != header.size()) {
            throw Error("data", "ragged",
                        "ragged row at line " + std::to_string(at) + ": expected " + std::to_string(header.size()) +
                            " fields, found " + std::to_string(fields.size()));
        }
        for (std::size_t j = 0; j < fields.size(); ++j) columns[j].cells.push_back(std::move(fields[j]));
    }

    Dataset data;
    for (auto& c : columns) {
        bool numeric = categorical.count(c.name) == 0;
        if (numeric) {
            c.values.reserve(c.cells.size());
            for (const auto& cell : c.cells) {
                double v;
                if (!parse_real(cell, v)) {
                    numeric = false;
                    break;
                }
                c.values.push_back(v);
            }
        }
        if (numeric) {
            c.kind = ColumnKind::numeric;
        } else {
            categorize(c);
        }
        data.add(std::move(c));
    }
    return data;
}

Dataset load_dataset_file(const std::string& path, const std::set<std::string>& categorical) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("data", "unreadable", "cannot open data file '" + path + "'");
    return load_dataset(in, categorical);
}

}  // namespace gdglmm
