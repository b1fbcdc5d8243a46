#pragma once

#include <string>
#include <vector>

namespace feigen {

// Exit codes: 0 success, 1 failed precondition or numerical error, 2 usage.
int cli_dispatch(int argc, const char* const* argv);
int cli_dispatch(const std::vector<std::string>& args);

// Range "a..b" (inclusive) or a single integer.
std::pair<int, int> parse_level_range(const std::string& text);

// Evaluates an arithmetic expression in the variable m, e.g. "2^-m" or "1/m".
double evaluate_sequence_expr(const std::string& expr, double m);

}  // namespace feigen
