#include "sumpref/parsers.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace sumpref {

namespace {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Accepts "1.", "1)", "1-", and spaced variants like "1 -". Returns the fact
// text after the numbering, or empty when the line is not a numbered item.
std::string_view strip_numbering(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i == 0) return {};
  while (i < line.size() && line[i] == ' ') ++i;
  if (i >= line.size()) return {};
  char sep = line[i];
  if (sep != '.' && sep != ')' && sep != '-') return {};
  return trim(line.substr(i + 1));
}

}  // namespace

const char* to_string(NliVerdict verdict) {
  switch (verdict) {
    case NliVerdict::Entailed: return "entailed";
    case NliVerdict::Neutral: return "neutral";
    case NliVerdict::Contradicted: return "contradicted";
  }
  return "?";
}

std::vector<AtomicFact> parse_fact_list(const std::string& response) {
  std::vector<AtomicFact> facts;
  std::istringstream lines(response);
  std::string raw_line;
  while (std::getline(lines, raw_line)) {
    std::string_view line = trim(raw_line);
    if (line.empty()) continue;
    if (to_lower(line) == "facts:") continue;
    std::string_view text = strip_numbering(line);
    if (text.empty()) continue;
    facts.push_back(AtomicFact{std::string(text), static_cast<int>(facts.size()) + 1});
  }
  if (facts.empty()) throw EmptyFactList("no numbered facts found in response");
  return facts;
}

NliVerdict parse_nli_label(const std::string& response) {
  const std::string lowered = to_lower(response);
  struct Candidate {
    NliVerdict verdict;
    const char* word;
  };
  static constexpr Candidate kCandidates[] = {
      {NliVerdict::Entailed, "entailed"},
      {NliVerdict::Neutral, "neutral"},
      {NliVerdict::Contradicted, "contradicted"},
  };
  std::size_t best_pos = std::string::npos;
  NliVerdict best = NliVerdict::Neutral;
  for (const auto& candidate : kCandidates) {
    std::size_t pos = lowered.find(candidate.word);
    if (pos != std::string::npos && pos < best_pos) {
      best_pos = pos;
      best = candidate.verdict;
    }
  }
  if (best_pos == std::string::npos) {
    throw UnrecognizedLabel("no entailed/neutral/contradicted label in response");
  }
  return best;
}

BinaryVerdict parse_binary_verdict(const std::string& response) {
  std::string_view rest = trim(response);
  std::size_t end = 0;
  while (end < rest.size() && std::isalpha(static_cast<unsigned char>(rest[end]))) ++end;
  const std::string token = to_lower(rest.substr(0, end));
  if (token == "yes") return BinaryVerdict::Yes;
  if (token == "no") return BinaryVerdict::No;
  throw UnrecognizedLabel("leading token is neither yes nor no");
}

}  // namespace sumpref
