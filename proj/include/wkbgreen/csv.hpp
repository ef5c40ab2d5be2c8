#pragma once

#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>

namespace wkbgreen::csv {

/// Shortest round-trip decimal form ('.' separator, locale independent).
std::string number(double value);

/// Quotes a field when it contains a comma, quote or line break.
std::string field(std::string_view text);

void header(std::ostream& out, std::initializer_list<std::string_view> columns);
void row(std::ostream& out, std::initializer_list<double> values);

}  // namespace wkbgreen::csv
