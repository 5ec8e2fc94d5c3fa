#include "sumpref/prompts.hpp"

#include <cctype>

namespace sumpref {

namespace {

constexpr const char* kSummBody =
    "Document:\n"
    "{Document}\n"
    "\n"
    "Please write a brief summary for the given document. The summary should "
    "be one sentence.";

constexpr const char* kCritiqueBinBody =
    "Below is a document and a corresponding summary. Please determine "
    "whether the summary contains hallucinated information that is not "
    "supported by the document.\n"
    "Document:\n"
    "{Document}\n"
    "Summary:\n"
    "{Summary}\n"
    "\n"
    "State the final answer exactly as either 'Yes' (if hallucinated "
    "information is found) or 'No' (if not). Do not provide any additional "
    "information.";

constexpr const char* kAtomicFactBody =
    "Given the following sentence, list all simple facts it contains. Each "
    "fact should be a minimal statement that expresses a single piece of "
    "information. Each fact must be written so it makes sense by itself, "
    "without relying on the context.\n"
    "Sentence: {Sentence}\n"
    "Answer in the following format:\n"
    "\n"
    "Facts:\n"
    "1.\n"
    "2.\n"
    "...";

constexpr const char* kNliBody =
    "Given the context, determine if the statement is entailed or "
    "contradicted or neutral.\n"
    "Context: {Context}\n"
    "Statement: {Statement}\n"
    "Answer with \"Entailed\", \"Contradicted\" or \"Neutral\"";

constexpr const char* kRefineBody =
    "You will be given a document, a summary, and comment on the summary. "
    "Your task is to revise the summary given the comment. Please make sure "
    "you address all the suggestions by only making the least amount of "
    "changes.\n"
    "Document:\n"
    "{Document}\n"
    "Summary:\n"
    "{Summary}\n"
    "Comment:\n"
    "{Comment}\n"
    "Please check the document for the correct information and make "
    "appropriate edits.";

const char* default_body(TemplateName name) {
  switch (name) {
    case TemplateName::Summ: return kSummBody;
    case TemplateName::CritiqueBin: return kCritiqueBinBody;
    case TemplateName::AtomicFact: return kAtomicFactBody;
    case TemplateName::Nli: return kNliBody;
    case TemplateName::Refine: return kRefineBody;
  }
  return "";
}

bool is_placeholder_char(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

const char* to_string(TemplateName name) {
  switch (name) {
    case TemplateName::Summ: return "summ";
    case TemplateName::CritiqueBin: return "critique_bin";
    case TemplateName::AtomicFact: return "atomic_fact";
    case TemplateName::Nli: return "nli";
    case TemplateName::Refine: return "refine";
  }
  return "?";
}

std::optional<TemplateName> template_name_from_string(std::string_view key) {
  for (TemplateName name : kAllTemplates) {
    if (key == to_string(name)) return name;
  }
  return std::nullopt;
}

std::string render_prompt(const PromptTemplate& tmpl,
                          const std::map<std::string, std::string>& bindings) {
  const std::string& body = tmpl.body;
  std::string out;
  out.reserve(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (c == '{') {
      if (i + 1 < body.size() && body[i + 1] == '{') {
        out.push_back('{');
        ++i;
        continue;
      }
      std::size_t j = i + 1;
      while (j < body.size() && is_placeholder_char(body[j])) ++j;
      if (j > i + 1 && j < body.size() && body[j] == '}') {
        std::string name = body.substr(i + 1, j - i - 1);
        auto it = bindings.find(name);
        if (it == bindings.end()) throw MissingBinding(name);
        out += it->second;
        i = j;
        continue;
      }
      out.push_back('{');  // lone brace, not a placeholder
    } else if (c == '}') {
      if (i + 1 < body.size() && body[i + 1] == '}') ++i;
      out.push_back('}');
    } else {
      out.push_back(c);
    }
  }
  return out;
}

PromptSet::PromptSet() {
  std::size_t slot = 0;
  for (TemplateName name : kAllTemplates) {
    templates_[slot++] = PromptTemplate{name, default_body(name)};
  }
}

const PromptTemplate& PromptSet::get(TemplateName name) const {
  return templates_[static_cast<std::size_t>(name)];
}

void PromptSet::override_body(TemplateName name, std::string body) {
  templates_[static_cast<std::size_t>(name)].body = std::move(body);
}

}  // namespace sumpref
