#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "srbridge/errors.hpp"

namespace srb {

// Minimal CSV writer: UTF-8, comma separators, '.' decimal point, one header
// row. Doubles are printed with 17 significant digits so files round-trip
// bit-exactly.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns) : out_(path) {
        if (!out_) throw ConfigError("cannot write file '" + path + "'");
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i) out_ << ',';
            out_ << columns[i];
        }
        out_ << '\n';
        ncols_ = columns.size();
    }

    void field(long v) {
        sep();
        out_ << v;
    }

    void field(double v) {
        sep();
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out_ << buf;
    }

    void field(const std::string& v) {
        sep();
        out_ << v;
    }

    void end_row() {
        if (col_ != ncols_) throw ConfigError("csv row has wrong number of fields");
        out_ << '\n';
        col_ = 0;
    }

private:
    void sep() {
        if (col_) out_ << ',';
        ++col_;
    }

    std::ofstream out_;
    std::size_t ncols_ = 0;
    std::size_t col_ = 0;
};

}  // namespace srb
