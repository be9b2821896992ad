#include "placement/csv.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>

namespace placement::csv {

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

Writer::Writer(const std::string& path) : out_(path), path_(path) {
    if (!out_) throw validation_error("cannot open '" + path + "' for writing");
}

void Writer::comment(const std::string& line) { out_ << "# " << line << "\n"; }

void Writer::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
}

void Writer::close() {
    out_.close();
    if (!out_) throw validation_error("failed writing '" + path_ + "'");
}

int Table::col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    throw validation_error("missing column '" + name + "'");
}

bool Table::has_col(const std::string& name) const {
    for (const auto& h : header)
        if (h == name) return true;
    return false;
}

Table read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open '" + path + "'");
    Table t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#' && t.header.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            cells.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (t.header.empty()) {
            t.header = std::move(cells);
        } else {
            if (cells.size() != t.header.size())
                throw validation_error(path + ": row " + std::to_string(lineno) + " has " +
                                       std::to_string(cells.size()) + " fields, expected " +
                                       std::to_string(t.header.size()));
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

double parse_double(const Table& t, std::size_t row, int col) {
    const std::string& s = t.rows[row][col];
    const char* b = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(b, &end);
    if (end == b || *end != '\0')
        throw validation_error("row " + std::to_string(row + 2) + ", field '" +
                               t.header[col] + "': not a number: '" + s + "'");
    return v;
}

long parse_long(const Table& t, std::size_t row, int col) {
    const std::string& s = t.rows[row][col];
    long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw validation_error("row " + std::to_string(row + 2) + ", field '" +
                               t.header[col] + "': not an integer: '" + s + "'");
    return v;
}

} // namespace placement::csv
