#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "sumpref/gateway.hpp"
#include "sumpref/pipeline.hpp"
#include "sumpref/prefloss.hpp"
#include "sumpref/prompts.hpp"

namespace sumpref {

// Everything a run needs, combined from the config file and CLI overrides.
// The fingerprint is a stable hash of the canonicalized settings and appears
// in every manifest and report.
struct RunConfig {
  BackendConfig backend;
  PipelineOptions pipeline;
  LossParams loss;
  std::map<std::string, std::string> prompt_overrides;  // keyed by template name
  std::string fingerprint;
};

// Parses the INI-style config text. Sections: [backend], [pipeline],
// [generation], [loss], [prompts]. Values are bare scalars, "quoted strings"
// with ${ENV} interpolation, or triple-quoted multiline strings. Unknown
// sections and keys are rejected.
RunConfig parse_config(const std::string& text);

RunConfig load_config_file(const std::string& path);

// Recomputes config.fingerprint from the canonical serialization.
void refresh_fingerprint(RunConfig& config);

// Default templates with any [prompts] overrides applied.
PromptSet prompts_for(const RunConfig& config);

}  // namespace sumpref
