#pragma once

#include <cstddef>
#include <istream>
#include <set>
#include <string>
#include <vector>

namespace gdglmm {

enum class ColumnKind { numeric, categorical };

struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    std::vector<std::string> cells;   // raw text, every kind
    std::vector<double> values;       // numeric columns only
    std::vector<std::string> levels;  // categorical: first-appearance order
    std::vector<int> codes;           // categorical: index into levels

    /// Numeric column whose values are all 0 or 1.
    bool is_indicator() const;
};

/// Group labels of any column: the level list in first-appearance order and a
/// per-row code. Numeric columns are grouped by their cell text.
struct Factor {
    std::vector<std::string> levels;
    std::vector<int> codes;
};

/// Column-oriented rectangular table.
class Dataset {
public:
    Dataset() = default;

    std::size_t rows() const { return rows_; }
    std::size_t columns() const { return columns_.size(); }
    bool has(const std::string& name) const;
    /// Throws Error{"data", "missing-column"} naming the column.
    const Column& column(const std::string& name) const;
    const std::vector<Column>& all() const { return columns_; }

    /// Numeric values; throws Error{"data", "non-numeric"} for categorical columns.
    const std::vector<double>& numeric(const std::string& name) const;
    Factor factor(const std::string& name) const;

    void add(Column column);
    void set_values(const std::string& name, std::vector<double> values);

private:
    std::vector<Column> columns_;
    std::size_t rows_ = 0;
};

Column make_numeric_column(std::string name, std::vector<double> values);
Column make_categorical_column(std::string name, std::vector<std::string> cells);

/// RFC-4180 style delimited text with a header row. A column is numeric when
/// every cell parses as a finite real, unless it is named in `categorical`.
Dataset load_dataset(std::istream& in, const std::set<std::string>& categorical = {},
                     char delimiter = ',');
Dataset load_dataset_file(const std::string& path, const std::set<std::string>& categorical = {});

}  // namespace gdglmm
