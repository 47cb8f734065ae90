#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rheston {

// Rectangular numeric table with a header row. Values are emitted with 9
// significant digits, '.' decimal point, ',' separator and '\n' line endings,
// so that a fixed input always produces byte-identical output.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

std::string format_csv_value(double x);

std::string to_csv(const CsvTable& table);

// Parses text produced by to_csv (or any comma-separated numeric table with a
// header). Throws ConfigError on ragged rows or non-numeric fields.
CsvTable parse_csv(std::string_view text);

void write_text_file(const std::string& path, std::string_view contents);

} // namespace rheston
