#pragma once
// Minimal CSV emitter: UTF-8, LF line endings, header row, %.17g doubles so
// values round-trip exactly.

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace kpzlab {

using CsvCell = std::variant<long long, double, std::string>;

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header)
        : out_(path, std::ios::binary), ncols_(header.size()) {
        if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) out_ << ',';
            out_ << header[i];
        }
        out_ << '\n';
    }

    void row(const std::vector<CsvCell>& cells) {
        if (cells.size() != ncols_)
            throw std::invalid_argument("CsvWriter: row width does not match header");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            if (std::holds_alternative<long long>(cells[i])) {
                out_ << std::get<long long>(cells[i]);
            } else if (std::holds_alternative<double>(cells[i])) {
                char buf[40];
                std::snprintf(buf, sizeof buf, "%.17g", std::get<double>(cells[i]));
                out_ << buf;
            } else {
                out_ << std::get<std::string>(cells[i]);
            }
        }
        out_ << '\n';
    }

    void flush() { out_.flush(); }

private:
    std::ofstream out_;
    std::size_t ncols_;
};

} // namespace kpzlab
