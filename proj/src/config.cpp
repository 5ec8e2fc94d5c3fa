#include "sumpref/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "sumpref/hashing.hpp"

namespace sumpref {

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  std::size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

// Replaces every ${NAME} with the value of that environment variable.
std::string interpolate_env(const std::string& value) {
  std::string out;
  std::size_t pos = 0;
  while (pos < value.size()) {
    std::size_t open = value.find("${", pos);
    if (open == std::string::npos) {
      out += value.substr(pos);
      break;
    }
    out += value.substr(pos, open - pos);
    std::size_t close = value.find('}', open + 2);
    if (close == std::string::npos) {
      throw ConfigError("unterminated ${...} in config value");
    }
    const std::string name = value.substr(open + 2, close - open - 2);
    const char* env = std::getenv(name.c_str());
    if (env == nullptr) {
      throw ConfigError("environment variable '" + name +
                        "' referenced in config is not set");
    }
    out += env;
    pos = close + 1;
  }
  return out;
}

struct RawValue {
  std::string text;
  bool quoted = false;
};

class ConfigParser {
 public:
  explicit ConfigParser(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines_.push_back(std::move(line));
  }

  void parse(RunConfig& config) {
    std::string section;
    while (index_ < lines_.size()) {
      const std::string line = trim(lines_[index_]);
      if (line.empty() || line[0] == '#' || line[0] == ';') {
        ++index_;
        continue;
      }
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError("malformed section header: " + line);
        section = line.substr(1, line.size() - 2);
        if (section != "backend" && section != "pipeline" &&
            section != "generation" && section != "loss" && section != "prompts") {
          throw ConfigError("unknown config section [" + section + "]");
        }
        ++index_;
        continue;
      }
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("expected key = value, got: " + line);
      }
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw ConfigError("empty key in line: " + line);
      if (section.empty()) {
        throw ConfigError("key '" + key + "' appears before any [section]");
      }
      RawValue value = read_value(trim(line.substr(eq + 1)));
      apply(config, section, key, value);
    }
  }

 private:
  // Consumes the value starting on the current line; advances index_ past it.
  RawValue read_value(const std::string& first) {
    ++index_;
    if (first.rfind("\"\"\"", 0) == 0) {
      std::string rest = first.substr(3);
      if (rest.size() >= 3 && rest.substr(rest.size() - 3) == "\"\"\"") {
        return {interpolate_env(rest.substr(0, rest.size() - 3)), true};
      }
      std::string content = rest;
      bool closed = false;
      while (index_ < lines_.size()) {
        std::string line = lines_[index_++];
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t terminator = line.rfind("\"\"\"");
        if (terminator != std::string::npos &&
            trim(line.substr(terminator + 3)).empty()) {
          content += '\n' + line.substr(0, terminator);
          closed = true;
          break;
        }
        content += '\n' + line;
      }
      if (!closed) throw ConfigError("unterminated triple-quoted string");
      // TOML-style: the newline right after the opening delimiter is dropped,
      // everything else between the delimiters is literal.
      if (!content.empty() && content.front() == '\n') content.erase(0, 1);
      return {interpolate_env(content), true};
    }
    if (!first.empty() && first.front() == '"') {
      if (first.size() < 2 || first.back() != '"') {
        throw ConfigError("unterminated quoted string: " + first);
      }
      return {interpolate_env(first.substr(1, first.size() - 2)), true};
    }
    if (first.empty()) throw ConfigError("missing value after '='");
    return {first, false};
  }

  static bool parse_bool(const std::string& key, const RawValue& value) {
    if (value.text == "true") return true;
    if (value.text == "false") return false;
    throw ConfigError("key '" + key + "' expects true or false");
  }

  static std::int64_t parse_int(const std::string& key, const RawValue& value) {
    try {
      std::size_t used = 0;
      const std::int64_t parsed = std::stoll(value.text, &used);
      if (used != value.text.size()) throw std::invalid_argument("trailing");
      return parsed;
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "' expects an integer, got '" +
                        value.text + "'");
    }
  }

  static double parse_double(const std::string& key, const RawValue& value) {
    try {
      std::size_t used = 0;
      const double parsed = std::stod(value.text, &used);
      if (used != value.text.size()) throw std::invalid_argument("trailing");
      return parsed;
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "' expects a number, got '" +
                        value.text + "'");
    }
  }

  void apply(RunConfig& config, const std::string& section,
             const std::string& key, const RawValue& value) {
    if (section == "backend") {
      apply_backend(config.backend, key, value);
    } else if (section == "pipeline") {
      apply_pipeline(config.pipeline, key, value);
    } else if (section == "generation") {
      apply_generation(config.pipeline.generation, key, value);
    } else if (section == "loss") {
      apply_loss(config.loss, key, value);
    } else {
      if (!template_name_from_string(key)) {
        throw ConfigError("unknown template '" + key + "' in [prompts]");
      }
      config.prompt_overrides[key] = value.text;
    }
  }

  void apply_backend(BackendConfig& backend, const std::string& key,
                     const RawValue& value) {
    if (key == "kind") {
      if (value.text == "openai") {
        backend.kind = BackendKind::OpenAiCompatible;
      } else if (value.text == "scripted_mock") {
        backend.kind = BackendKind::ScriptedMock;
      } else {
        throw ConfigError("backend.kind must be openai or scripted_mock");
      }
    } else if (key == "base_url") {
      backend.base_url = value.text;
    } else if (key == "model") {
      backend.model = value.text;
    } else if (key == "api_key_env") {
      backend.api_key_env = value.text;
    } else if (key == "timeout_s") {
      backend.timeout_s = parse_double(key, value);
    } else if (key == "max_retries") {
      backend.max_retries = static_cast<int>(parse_int(key, value));
    } else if (key == "retry_backoff_s") {
      backend.retry_backoff_s = parse_double(key, value);
    } else if (key == "max_concurrency") {
      backend.max_concurrency = static_cast<int>(parse_int(key, value));
    } else if (key == "script_path") {
      backend.script_path = value.text;
    } else {
      throw ConfigError("unknown key '" + key + "' in [backend]");
    }
  }

  void apply_pipeline(PipelineOptions& pipeline, const std::string& key,
                      const RawValue& value) {
    if (key == "samples_per_doc") {
      pipeline.samples_per_doc = static_cast<int>(parse_int(key, value));
      if (pipeline.samples_per_doc < 1) {
        throw ConfigError("samples_per_doc must be >= 1");
      }
    } else if (key == "critique_strategy") {
      if (value.text == "binary") {
        pipeline.critique_strategy = CritiqueStrategy::Binary;
      } else if (value.text == "fine_grained") {
        pipeline.critique_strategy = CritiqueStrategy::FineGrained;
      } else {
        throw ConfigError("critique_strategy must be binary or fine_grained");
      }
    } else if (key == "selection") {
      if (value.text == "extreme") {
        pipeline.selection = SelectionStrategy::Extreme;
      } else if (value.text == "random") {
        pipeline.selection = SelectionStrategy::Random;
      } else if (value.text == "single_beam") {
        pipeline.selection = SelectionStrategy::SingleBeam;
      } else if (value.text == "critique_only") {
        pipeline.selection = SelectionStrategy::CritiqueOnly;
      } else {
        throw ConfigError(
            "selection must be extreme, random, single_beam or critique_only");
      }
    } else if (key == "workers") {
      pipeline.workers = static_cast<int>(parse_int(key, value));
      if (pipeline.workers < 1) throw ConfigError("workers must be >= 1");
    } else if (key == "rng_seed") {
      pipeline.rng_seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "allow_identical_pairs") {
      pipeline.allow_identical_pairs = parse_bool(key, value);
    } else if (key == "enforce_single_sentence") {
      pipeline.enforce_single_sentence = parse_bool(key, value);
    } else if (key == "max_parse_retries") {
      pipeline.critique.max_parse_retries = static_cast<int>(parse_int(key, value));
      if (pipeline.critique.max_parse_retries < 0) {
        throw ConfigError("max_parse_retries must be >= 0");
      }
    } else {
      throw ConfigError("unknown key '" + key + "' in [pipeline]");
    }
  }

  void apply_generation(GenerationParams& generation, const std::string& key,
                        const RawValue& value) {
    if (key == "temperature") {
      generation.temperature = parse_double(key, value);
    } else if (key == "top_p") {
      generation.top_p = parse_double(key, value);
    } else if (key == "max_tokens") {
      generation.max_tokens = static_cast<int>(parse_int(key, value));
    } else if (key == "seed") {
      generation.seed = parse_int(key, value);
    } else if (key == "decode_mode") {
      if (value.text == "sample") {
        generation.decode_mode = DecodeMode::Sample;
      } else if (value.text == "greedy") {
        generation.decode_mode = DecodeMode::Greedy;
      } else {
        throw ConfigError("decode_mode must be sample or greedy");
      }
    } else {
      throw ConfigError("unknown key '" + key + "' in [generation]");
    }
    try {
      generation.validate();
    } catch (const PreconditionViolation& ex) {
      throw ConfigError(std::string("invalid [generation] settings: ") + ex.what());
    }
  }

  void apply_loss(LossParams& loss, const std::string& key, const RawValue& value) {
    if (key == "beta") {
      loss.beta = parse_double(key, value);
    } else if (key == "alpha") {
      loss.alpha = parse_double(key, value);
    } else {
      throw ConfigError("unknown key '" + key + "' in [loss]");
    }
    try {
      loss.validate();
    } catch (const PreconditionViolation& ex) {
      throw ConfigError(std::string("invalid [loss] settings: ") + ex.what());
    }
  }

  std::vector<std::string> lines_;
  std::size_t index_ = 0;
};

nlohmann::ordered_json canonical_json(const RunConfig& config) {
  nlohmann::ordered_json out;
  auto& backend = out["backend"];
  backend["kind"] =
      config.backend.kind == BackendKind::OpenAiCompatible ? "openai"
                                                           : "scripted_mock";
  backend["base_url"] = config.backend.base_url.value_or("");
  backend["model"] = config.backend.model;
  backend["api_key_env"] = config.backend.api_key_env.value_or("");
  backend["timeout_s"] = config.backend.timeout_s;
  backend["max_retries"] = config.backend.max_retries;
  backend["retry_backoff_s"] = config.backend.retry_backoff_s;
  backend["max_concurrency"] = config.backend.max_concurrency;
  backend["script_path"] = config.backend.script_path.value_or("");

  auto& pipeline = out["pipeline"];
  pipeline["samples_per_doc"] = config.pipeline.samples_per_doc;
  pipeline["critique_strategy"] = to_string(config.pipeline.critique_strategy);
  pipeline["selection"] = to_string(config.pipeline.selection);
  pipeline["workers"] = config.pipeline.workers;
  pipeline["rng_seed"] = config.pipeline.rng_seed;
  pipeline["allow_identical_pairs"] = config.pipeline.allow_identical_pairs;
  pipeline["enforce_single_sentence"] = config.pipeline.enforce_single_sentence;
  pipeline["max_parse_retries"] = config.pipeline.critique.max_parse_retries;

  auto& generation = out["generation"];
  generation["temperature"] = config.pipeline.generation.temperature;
  generation["top_p"] = config.pipeline.generation.top_p;
  generation["max_tokens"] = config.pipeline.generation.max_tokens;
  generation["seed"] = config.pipeline.generation.seed
                           ? nlohmann::ordered_json(*config.pipeline.generation.seed)
                           : nlohmann::ordered_json(nullptr);
  generation["decode_mode"] =
      config.pipeline.generation.decode_mode == DecodeMode::Greedy ? "greedy"
                                                                   : "sample";

  auto& loss = out["loss"];
  loss["beta"] = config.loss.beta;
  loss["alpha"] = config.loss.alpha;

  auto& prompts = out["prompts"];
  prompts = nlohmann::ordered_json::object();
  for (const auto& [key, body] : config.prompt_overrides) prompts[key] = body;
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  ConfigParser parser(text);
  parser.parse(config);
  if (config.pipeline.selection == SelectionStrategy::CritiqueOnly &&
      config.pipeline.samples_per_doc < 2) {
    throw ConfigError("critique_only selection requires samples_per_doc >= 2");
  }
  refresh_fingerprint(config);
  return config;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(buffer.str());
  } catch (const ConfigError& ex) {
    throw ConfigError(path + ": " + ex.what());
  }
}

void refresh_fingerprint(RunConfig& config) {
  config.fingerprint = to_hex(fnv1a64(canonical_json(config).dump()));
}

PromptSet prompts_for(const RunConfig& config) {
  PromptSet prompts;
  for (const auto& [key, body] : config.prompt_overrides) {
    prompts.override_body(*template_name_from_string(key), body);
  }
  return prompts;
}

}  // namespace sumpref
