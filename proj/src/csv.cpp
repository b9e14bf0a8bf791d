#include "shl0/csv.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "shl0/errors.hpp"

namespace shl0 {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (cell.empty() || end != begin + cell.size())
        throw ParseError("row " + std::to_string(row) + ", column '" + column +
                         "': cannot parse '" + cell + "' as a number");
    return v;
}

}  // namespace

IngestResult ingest_csv(const std::string& path, const std::string& response_column,
                        const std::string& trials_column) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    std::vector<std::string> header = split_row(line);

    auto find = [&](const std::string& name) -> int {
        auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : static_cast<int>(it - header.begin());
    };
    const int y_col = find(response_column);
    if (y_col < 0) throw ConfigError("response column '" + response_column + "' not found");
    int trials_col = -1;
    if (!trials_column.empty()) {
        trials_col = find(trials_column);
        if (trials_col < 0) throw ConfigError("trials column '" + trials_column + "' not found");
    }

    std::vector<std::vector<double>> rows;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split_row(line);
        if (cells.size() != header.size())
            throw ParseError("row " + std::to_string(row_no) + ": expected " +
                             std::to_string(header.size()) + " cells, got " +
                             std::to_string(cells.size()));
        std::vector<double> vals(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c)
            vals[c] = parse_cell(cells[c], row_no, header[c]);
        rows.push_back(std::move(vals));
    }
    const int n = static_cast<int>(rows.size());
    if (n < 2) throw ParseError(path + ": need at least two data rows");

    IngestResult out;
    VecX<double> y(n);
    for (int i = 0; i < n; ++i) y[i] = rows[static_cast<std::size_t>(i)][y_col];
    if (trials_col >= 0) {
        out.trials.resize(n);
        for (int i = 0; i < n; ++i) out.trials[i] = rows[static_cast<std::size_t>(i)][trials_col];
    }

    std::vector<int> keep;
    std::vector<std::string> names;
    for (int c = 0; c < static_cast<int>(header.size()); ++c) {
        if (c == y_col || c == trials_col) continue;
        double lo = rows[0][c], hi = rows[0][c];
        for (int i = 1; i < n; ++i) {
            lo = std::min(lo, rows[static_cast<std::size_t>(i)][c]);
            hi = std::max(hi, rows[static_cast<std::size_t>(i)][c]);
        }
        if (hi - lo < 1e-12 * (1.0 + std::abs(hi))) {
            out.dropped.push_back(header[c]);
            std::cerr << "warning: dropping constant column '" << header[c] << "'\n";
            continue;
        }
        keep.push_back(c);
        names.push_back(header[c]);
    }
    if (keep.empty()) throw ConfigError(path + ": no usable predictor columns");

    MatX<double> x(n, static_cast<int>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
        for (int i = 0; i < n; ++i) x(i, static_cast<int>(j)) = rows[static_cast<std::size_t>(i)][keep[j]];

    out.data = Dataset<double>::standardize(std::move(y), std::move(x), std::move(names));
    return out;
}

}  // namespace shl0
