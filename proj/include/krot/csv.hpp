#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace krot::csv {

// Shortest decimal string that round-trips to the same double. Uses '.' as
// the decimal separator regardless of locale.
std::string format_double(double x);

std::string format_int(long long x);
std::string format_index(Eigen::Index x);
std::string format_bool(bool x);

// RFC 4180 escaping: fields containing commas, quotes, or newlines are
// quoted, with embedded quotes doubled.
std::string escape(const std::string& field);

// One CSV line terminated by LF. Fields must already be escaped if they
// need it; the format_* helpers never produce characters that do.
std::string join_row(const std::vector<std::string>& fields);

}  // namespace krot::csv
