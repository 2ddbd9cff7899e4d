#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace simbench {

/// Formats a double as the shortest decimal string that round-trips to the
/// exact same bit pattern. Used for every numeric value we persist, so that
/// emitted files are byte-stable and re-parsing loses nothing.
std::string format_double(double value);

/// Parses a double previously written by format_double (round-trip exact).
double parse_double(const std::string& text);

/// Minimal CSV emission: joins cells with commas and a trailing '\n'.
/// Cells are expected to be comma- and quote-free (all of ours are).
void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);

/// Splits one CSV line written by write_csv_row.
std::vector<std::string> split_csv_row(const std::string& line);

} // namespace simbench
