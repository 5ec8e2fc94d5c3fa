#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "sumpref/errors.hpp"

namespace sumpref {

// The five prompt slots used by the pipeline.
enum class TemplateName { Summ, CritiqueBin, AtomicFact, Nli, Refine };

inline constexpr std::array<TemplateName, 5> kAllTemplates = {
    TemplateName::Summ, TemplateName::CritiqueBin, TemplateName::AtomicFact,
    TemplateName::Nli, TemplateName::Refine};

const char* to_string(TemplateName name);
std::optional<TemplateName> template_name_from_string(std::string_view key);

// A prompt body with {Name} placeholders. Literal braces are written as
// {{ and }}; the default bodies contain no braces outside placeholders.
struct PromptTemplate {
  TemplateName name;
  std::string body;
};

// Substitutes every {Name} placeholder from bindings. Unbound placeholders
// raise MissingBinding; extra bindings are ignored.
std::string render_prompt(const PromptTemplate& tmpl,
                          const std::map<std::string, std::string>& bindings);

// The default template bodies, overridable per-name from a config file so
// the tool runs with zero external files.
class PromptSet {
 public:
  PromptSet();

  const PromptTemplate& get(TemplateName name) const;
  void override_body(TemplateName name, std::string body);

 private:
  std::array<PromptTemplate, 5> templates_;
};

}  // namespace sumpref
