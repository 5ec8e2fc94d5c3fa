#include <doctest.h>

#include <cstdlib>

#include "sumpref/config.hpp"

using namespace sumpref;

namespace {

const char* kFullConfig = R"cfg(
# full example
[backend]
kind = "scripted_mock"
model = "local"
script_path = "script.json"
timeout_s = 12.5
max_retries = 3
retry_backoff_s = 0.01
max_concurrency = 6

[pipeline]
samples_per_doc = 5
critique_strategy = "binary"
selection = "random"
workers = 3
rng_seed = 99
allow_identical_pairs = true
enforce_single_sentence = true
max_parse_retries = 1

[generation]
temperature = 0.8
top_p = 0.9
max_tokens = 120
decode_mode = "sample"

[loss]
beta = 0.25
alpha = 0.5
)cfg";

}  // namespace

TEST_CASE("parse_config maps every section onto the run config") {
  const RunConfig config = parse_config(kFullConfig);
  CHECK(config.backend.kind == BackendKind::ScriptedMock);
  CHECK(config.backend.model == "local");
  CHECK(config.backend.script_path == "script.json");
  CHECK(config.backend.timeout_s == 12.5);
  CHECK(config.backend.max_retries == 3);
  CHECK(config.backend.max_concurrency == 6);
  CHECK(config.pipeline.samples_per_doc == 5);
  CHECK(config.pipeline.critique_strategy == CritiqueStrategy::Binary);
  CHECK(config.pipeline.selection == SelectionStrategy::Random);
  CHECK(config.pipeline.workers == 3);
  CHECK(config.pipeline.rng_seed == 99);
  CHECK(config.pipeline.allow_identical_pairs);
  CHECK(config.pipeline.enforce_single_sentence);
  CHECK(config.pipeline.critique.max_parse_retries == 1);
  CHECK(config.pipeline.generation.temperature == 0.8);
  CHECK(config.pipeline.generation.max_tokens == 120);
  CHECK(config.loss.beta == 0.25);
  CHECK(config.loss.alpha == 0.5);
  CHECK(config.fingerprint.size() == 16);
}

TEST_CASE("unknown keys are rejected with their name") {
  try {
    parse_config("[pipeline]\nsamples_per_docs = 4\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& ex) {
    CHECK(std::string(ex.what()).find("samples_per_docs") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("[nope]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("orphan = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[backend]\nkind = \"weird\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[loss]\nbeta = 0\n"), ConfigError);
}

TEST_CASE("quoted strings interpolate environment variables") {
  setenv("SUMPREF_TEST_URL", "http://mirror:8000", 1);
  const RunConfig config = parse_config(
      "[backend]\nkind = \"openai\"\nbase_url = \"${SUMPREF_TEST_URL}/v1x\"\n");
  CHECK(config.backend.base_url == "http://mirror:8000/v1x");

  unsetenv("SUMPREF_TEST_MISSING");
  CHECK_THROWS_AS(
      parse_config("[backend]\nmodel = \"${SUMPREF_TEST_MISSING}\"\n"),
      ConfigError);
}

TEST_CASE("prompt overrides accept multiline bodies") {
  const RunConfig config = parse_config(
      "[prompts]\n"
      "summ = \"\"\"\n"
      "Short prompt for {Document}\n"
      "line two\n"
      "\"\"\"\n");
  const PromptSet prompts = prompts_for(config);
  CHECK(prompts.get(TemplateName::Summ).body ==
        "Short prompt for {Document}\nline two\n");
  // The other templates keep their defaults.
  CHECK(prompts.get(TemplateName::Nli).body ==
        PromptSet().get(TemplateName::Nli).body);
}

TEST_CASE("unknown prompt names are rejected") {
  CHECK_THROWS_AS(parse_config("[prompts]\nsumarize = \"x\"\n"), ConfigError);
}

TEST_CASE("the fingerprint is stable under reordering and sensitive to values") {
  const RunConfig a = parse_config("[pipeline]\nworkers = 2\nrng_seed = 5\n");
  const RunConfig b = parse_config("[pipeline]\nrng_seed = 5\nworkers = 2\n");
  CHECK(a.fingerprint == b.fingerprint);

  const RunConfig c = parse_config("[pipeline]\nworkers = 2\nrng_seed = 6\n");
  CHECK(a.fingerprint != c.fingerprint);
}

TEST_CASE("single-line triple-quoted values work") {
  const RunConfig config =
      parse_config("[prompts]\nnli = \"\"\"inline {Context} {Statement}\"\"\"\n");
  CHECK(config.prompt_overrides.at("nli") == "inline {Context} {Statement}");
}

TEST_CASE("load_config_file reports missing files as ConfigError") {
  CHECK_THROWS_AS(load_config_file("/nonexistent/sumpref.conf"), ConfigError);
}

TEST_CASE("critique_only selection needs at least two samples per doc") {
  CHECK_THROWS_AS(
      parse_config("[pipeline]\nselection = \"critique_only\"\nsamples_per_doc = 1\n"),
      ConfigError);
  CHECK_NOTHROW(
      parse_config("[pipeline]\nselection = \"critique_only\"\nsamples_per_doc = 2\n"));
}
