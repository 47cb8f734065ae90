#include "rheston/csv.hpp"

#include "rheston/errors.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace rheston {

std::string format_csv_value(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

std::string to_csv(const CsvTable& table) {
    std::string out;
    for (size_t i = 0; i < table.header.size(); ++i) {
        if (i) out += ',';
        out += table.header[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw ConfigError("csv: row width differs from header");
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_csv_value(row[i]);
        }
        out += '\n';
    }
    return out;
}

CsvTable parse_csv(std::string_view text) {
    CsvTable table;
    size_t pos = 0;
    bool first = true;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.empty()) continue;

        std::vector<std::string_view> fields;
        size_t f = 0;
        while (true) {
            auto comma = line.find(',', f);
            if (comma == std::string_view::npos) {
                fields.push_back(line.substr(f));
                break;
            }
            fields.push_back(line.substr(f, comma - f));
            f = comma + 1;
        }
        if (first) {
            for (auto fv : fields) table.header.emplace_back(fv);
            first = false;
            continue;
        }
        if (fields.size() != table.header.size()) throw ConfigError("csv: ragged row");
        std::vector<double> row;
        row.reserve(fields.size());
        for (auto fv : fields) {
            std::string tmp(fv);
            char* end = nullptr;
            const double v = std::strtod(tmp.c_str(), &end);
            if (end != tmp.c_str() + tmp.size() || tmp.empty())
                throw ConfigError("csv: non-numeric field '" + tmp + "'");
            row.push_back(v);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_text_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw ConfigError("write failed: " + path);
}

} // namespace rheston
