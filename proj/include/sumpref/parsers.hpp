#pragma once

#include <string>
#include <vector>

#include "sumpref/types.hpp"

namespace sumpref {

// Parses facts from numbered lines ("1.", "1)", "1 -"), optionally preceded
// by a "Facts:" header. Output is re-indexed 1..M; blank and non-numbered
// lines are ignored. Throws EmptyFactList when nothing parses.
std::vector<AtomicFact> parse_fact_list(const std::string& response);

// Case-insensitive match on the first label word occurring in the response.
// Throws UnrecognizedLabel when none of entailed/neutral/contradicted occurs.
NliVerdict parse_nli_label(const std::string& response);

enum class BinaryVerdict { Yes, No };

// Case-insensitive match of the leading token against yes/no.
// Throws UnrecognizedLabel otherwise.
BinaryVerdict parse_binary_verdict(const std::string& response);

}  // namespace sumpref
