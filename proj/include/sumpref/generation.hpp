#pragma once

#include <vector>

#include "sumpref/gateway.hpp"
#include "sumpref/prompts.hpp"
#include "sumpref/types.hpp"

namespace sumpref {

// Everything a refinement call needs: the comment must be the critique
// feedback produced for exactly this summary.
struct RefinementInput {
  Document document;
  Summary summary;
  CritiqueFeedback comment;
};

// Draws n summaries for the document (origin Initial, sample_index 0..n-1).
// Backends that support multi-choice requests get one batched call;
// otherwise one call per sample with tags "summ/<id>/<i>".
std::vector<Summary> generate_summaries(LlmClient& client, const PromptSet& prompts,
                                        const Document& document, int n,
                                        const GenerationParams& params);

// One refinement pass guided by the critique comment. Only valid when the
// comment reports unfaithfulness; the result keeps the source sample_index.
Summary refine_summary(LlmClient& client, const PromptSet& prompts,
                       const RefinementInput& input, const GenerationParams& params);

}  // namespace sumpref
