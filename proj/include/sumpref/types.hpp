#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sumpref/errors.hpp"

namespace sumpref {

// One source document flowing through the pipeline. Ids are unique within a
// corpus; text is non-empty after whitespace trimming (enforced at load).
struct Document {
  std::string id;
  std::string text;
};

enum class SummaryOrigin { Initial, Refined };

// A generated summary. Refined summaries keep the sample_index of the
// initial summary they were derived from.
struct Summary {
  std::string text;
  SummaryOrigin origin = SummaryOrigin::Initial;
  int sample_index = 0;
};

// Hallucination score s. Binary strategy yields an unbounded log-ratio,
// fine-grained yields a fraction in [0,1]; s > 0 marks a summary unfaithful.
class HallucinationScore {
 public:
  explicit HallucinationScore(double value) : value_(value) {
    if (!std::isfinite(value)) {
      throw PreconditionViolation("hallucination score must be finite");
    }
  }
  double value() const { return value_; }

 private:
  double value_;
};

// One minimal self-contained statement extracted from a summary. Indices
// within one extraction are 1..M contiguous.
struct AtomicFact {
  std::string text;
  int index = 1;
};

enum class NliVerdict { Entailed, Neutral, Contradicted };

const char* to_string(NliVerdict verdict);

// Fixed feedback sentences shared by both critique strategies.
inline constexpr const char* kFaithfulSentence = "The summary is faithful.";
inline constexpr const char* kUnfaithfulSentence = "The summary is unfaithful.";
inline constexpr const char* kUnsupportedHeader =
    "The following statements are not supported by the document:";

// Textual critique feedback c. unsupported_facts is empty for the binary
// strategy and holds every non-entailed fact for the fine-grained one.
struct CritiqueFeedback {
  std::string text;
  std::vector<AtomicFact> unsupported_facts;
};

// True iff the feedback flags the summary as unfaithful (s > 0 case).
inline bool reports_unfaithfulness(const CritiqueFeedback& feedback) {
  return feedback.text != kFaithfulSentence;
}

enum class DecodeMode { Sample, Greedy };

// Decoding controls for one completion call. Greedy mode is the
// deterministic proxy used wherever beam search is out of reach: it forces
// temperature 0 and a single choice.
struct GenerationParams {
  double temperature = 1.0;
  double top_p = 0.95;
  int max_tokens = 160;
  int n = 1;
  std::optional<std::int64_t> seed;
  DecodeMode decode_mode = DecodeMode::Sample;

  double effective_temperature() const {
    return decode_mode == DecodeMode::Greedy ? 0.0 : temperature;
  }
  int effective_n() const { return decode_mode == DecodeMode::Greedy ? 1 : n; }

  void validate() const {
    if (temperature < 0.0) throw PreconditionViolation("temperature must be >= 0");
    if (top_p <= 0.0 || top_p > 1.0) throw PreconditionViolation("top_p must be in (0,1]");
    if (max_tokens <= 0) throw PreconditionViolation("max_tokens must be > 0");
    if (n < 1) throw PreconditionViolation("n must be >= 1");
  }
};

}  // namespace sumpref
