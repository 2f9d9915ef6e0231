#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace plab::csv {

/// Quotes the field when it holds a comma, quote or line break.
std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);
/// Splits one line, honouring double-quoted fields.
std::vector<std::string> split(std::string_view line);

}  // namespace plab::csv
