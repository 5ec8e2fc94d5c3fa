#include "sumpref/commands.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace sumpref {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<Document> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus: " + path);
  return load_corpus_jsonl(in);
}

ordered_json manifest_json(const DatasetManifest& manifest) {
  ordered_json out;
  out["records_written"] = manifest.records_written;
  out["documents_skipped"] = manifest.documents_skipped;
  out["skip_reasons"] = manifest.skip_reasons;
  out["samples_skipped"] = manifest.samples_skipped;
  out["config_fingerprint"] = manifest.config_fingerprint;
  return out;
}

// Maps the shared error taxonomy onto exit codes; `body` does the work.
template <typename Body>
int guarded(std::ostream& err, const char* command, Body body) {
  try {
    return body();
  } catch (const ConfigError& ex) {
    err << command << ": config error: " << ex.what() << '\n';
    return kExitConfig;
  } catch (const DuplicateId& ex) {
    err << command << ": " << ex.what() << '\n';
    return kExitIo;
  } catch (const IoError& ex) {
    err << command << ": " << ex.what() << '\n';
    return kExitIo;
  } catch (const EmptyDataset& ex) {
    err << command << ": " << ex.what() << '\n';
    return kExitIo;
  } catch (const TransportError& ex) {
    err << command << ": backend unreachable: " << ex.what() << '\n';
    return kExitBackend;
  } catch (const ScriptExhausted& ex) {
    err << command << ": backend script exhausted: " << ex.what() << '\n';
    return kExitBackend;
  } catch (const Error& ex) {
    err << command << ": " << ex.what() << '\n';
    return 1;
  }
}

}  // namespace

int cmd_construct(const RunConfig& config, const ConstructPaths& paths,
                  std::ostream& out, std::ostream& err) {
  return guarded(err, "construct", [&] {
    const std::vector<Document> corpus = read_corpus(paths.corpus);
    if (corpus.empty()) throw IoError("corpus has no documents: " + paths.corpus);

    const std::unique_ptr<LlmClient> client = make_client(config.backend);
    const PromptSet prompts = prompts_for(config);
    Pipeline pipeline(*client, prompts, config.pipeline);

    std::ofstream pref_out(paths.preferences_out, std::ios::trunc);
    if (!pref_out) {
      throw IoError("cannot open output for writing: " + paths.preferences_out);
    }
    std::ofstream sft_out;
    std::ofstream trace_out;
    ConstructSinks sinks;
    sinks.preferences = &pref_out;
    if (paths.sft_out) {
      sft_out.open(*paths.sft_out, std::ios::trunc);
      if (!sft_out) throw IoError("cannot open SFT output: " + *paths.sft_out);
      sinks.sft = &sft_out;
    }
    if (paths.trace_out) {
      trace_out.open(*paths.trace_out, std::ios::trunc);
      if (!trace_out) throw IoError("cannot open trace output: " + *paths.trace_out);
      sinks.trace = &trace_out;
    }

    const DatasetManifest manifest =
        pipeline.construct_dataset(corpus, sinks, config.fingerprint);
    out << manifest_json(manifest).dump(2) << '\n';
    return manifest.records_written > 0 ? kExitOk : kExitNoRecords;
  });
}

int cmd_score(const RunConfig& config, const std::string& pairs_path,
              std::ostream& out, std::ostream& err) {
  return guarded(err, "score", [&] {
    std::ifstream in(pairs_path);
    if (!in) throw IoError("cannot open pairs file: " + pairs_path);
    const auto pairs = load_pairs_jsonl(in);

    const std::unique_ptr<LlmClient> client = make_client(config.backend);
    const PromptSet prompts = prompts_for(config);
    Pipeline pipeline(*client, prompts, config.pipeline);
    const Pipeline::ScoreReport report =
        pipeline.score_corpus(pairs, config.pipeline.critique_strategy);

    ordered_json payload;
    ordered_json entries = ordered_json::array();
    for (const Pipeline::ScoreEntry& entry : report.entries) {
      ordered_json record;
      record["id"] = entry.id;
      if (entry.result) {
        record["score"] = entry.result->score.value();
        record["feedback"] = entry.result->feedback.text;
      } else {
        record["score"] = nullptr;
        record["error"] = entry.error.value_or("unknown");
      }
      entries.push_back(std::move(record));
    }
    payload["pairs"] = std::move(entries);
    payload["mean_score"] =
        report.mean ? ordered_json(*report.mean) : ordered_json(nullptr);
    payload["failures"] = report.failures;
    payload["config_fingerprint"] = config.fingerprint;
    out << payload.dump(2) << '\n';
    return kExitOk;
  });
}

int cmd_refine(const RunConfig& config, const std::string& corpus_path,
               const std::string& refined_out, std::ostream& out,
               std::ostream& err) {
  return guarded(err, "refine", [&] {
    const std::vector<Document> corpus = read_corpus(corpus_path);
    if (corpus.empty()) throw IoError("corpus has no documents: " + corpus_path);

    const std::unique_ptr<LlmClient> client = make_client(config.backend);
    const PromptSet prompts = prompts_for(config);
    Pipeline pipeline(*client, prompts, config.pipeline);

    std::ofstream file(refined_out, std::ios::trunc);
    if (!file) throw IoError("cannot open output for writing: " + refined_out);

    std::int64_t refined_count = 0;
    for (const Document& document : corpus) {
      const Pipeline::RefineOutcome outcome = pipeline.refine_at_inference(
          document, config.pipeline.critique_strategy);
      if (outcome.warning) {
        err << "refine: " << document.id << ": " << *outcome.warning << '\n';
      }
      if (outcome.refined) ++refined_count;
      ordered_json record;
      record["id"] = document.id;
      record["summary"] = outcome.summary.text;
      record["was_refined"] = outcome.refined;
      if (!(file << record.dump() << '\n')) {
        throw IoError("failed writing refined summaries");
      }
    }
    out << "refined " << refined_count << " of " << corpus.size()
        << " summaries (config " << config.fingerprint << ")\n";
    return kExitOk;
  });
}

int cmd_train_toy(const RunConfig& config, const std::string& prefs_path,
                  const std::optional<std::string>& report_path, int steps,
                  double lr, std::ostream& out, std::ostream& err) {
  return guarded(err, "train-toy", [&] {
    std::ifstream in(prefs_path);
    if (!in) throw IoError("cannot open preferences: " + prefs_path);
    const ToyDataset dataset = toy_dataset_from_jsonl(in);

    ToyPolicy policy(static_cast<int>(dataset.prompt_ids.size()),
                     dataset.candidates_per_prompt);
    const TrainReport report =
        train_toy(policy, dataset.examples, config.loss, steps, lr);

    ordered_json payload;
    payload["final_loss"] = report.final_loss;
    payload["final_accuracy"] = report.final_accuracy;
    payload["loss_curve"] = report.loss_curve;
    payload["accuracy_curve"] = report.accuracy_curve;
    payload["pairs_dropped"] = dataset.pairs_dropped;
    payload["config_fingerprint"] = config.fingerprint;
    if (report_path) {
      std::ofstream file(*report_path, std::ios::trunc);
      if (!file || !(file << payload.dump(2) << '\n')) {
        throw IoError("cannot write report: " + *report_path);
      }
    }
    out << payload.dump(2) << '\n';
    return kExitOk;
  });
}

int cmd_inspect(const std::string& trace_path, std::ostream& out,
                std::ostream& err) {
  return guarded(err, "inspect", [&] {
    std::ifstream in(trace_path);
    if (!in) throw IoError("cannot open trace: " + trace_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      ordered_json record;
      try {
        record = ordered_json::parse(line);
      } catch (const nlohmann::json::exception& ex) {
        throw IoError("trace line " + std::to_string(line_no) +
                      " is not valid JSON: " + ex.what());
      }
      out << record.value("id", "?") << " #" << record.value("sample_index", -1);
      if (record.contains("score") && record["score"].is_number()) {
        out << "  score=" << record["score"].get<double>();
      } else {
        out << "  score=-";
      }
      if (record.contains("skip_reason") && record["skip_reason"].is_string()) {
        out << "  skipped(" << record["skip_reason"].get<std::string>() << ")";
      }
      out << '\n';
      out << "  initial: " << record.value("initial", "") << '\n';
      if (record.contains("verdicts") && record["verdicts"].is_array()) {
        for (const auto& verdict : record["verdicts"]) {
          out << "    [" << verdict.value("label", "?") << "] "
              << verdict.value("fact", "") << '\n';
        }
      }
      if (record.contains("feedback") && record["feedback"].is_string()) {
        out << "  feedback: " << record["feedback"].get<std::string>() << '\n';
      }
      if (record.contains("refined") && record["refined"].is_string()) {
        out << "  refined: " << record["refined"].get<std::string>() << '\n';
      }
    }
    return kExitOk;
  });
}

}  // namespace sumpref
