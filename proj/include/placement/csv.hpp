#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "placement/common.hpp"

namespace placement::csv {

// Shortest decimal text that round-trips the exact double.
std::string fmt(double v);

class Writer {
public:
    explicit Writer(const std::string& path);
    void comment(const std::string& line); // "# ..." provenance header
    void row(const std::vector<std::string>& cells);
    void close();

private:
    std::ofstream out_;
    std::string path_;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int col(const std::string& name) const; // throws validation_error
    bool has_col(const std::string& name) const;
};

// Reads a simple comma-separated file; '#' lines before the header are
// skipped. Errors name the row and field.
Table read(const std::string& path);

double parse_double(const Table& t, std::size_t row, int col);
long parse_long(const Table& t, std::size_t row, int col);

} // namespace placement::csv
