#include "sumpref/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <future>
#include <istream>
#include <mutex>
#include <ostream>
#include <random>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "sumpref/hashing.hpp"

namespace sumpref {

using ordered_json = nlohmann::ordered_json;

const char* to_string(SelectionStrategy strategy) {
  switch (strategy) {
    case SelectionStrategy::Extreme: return "extreme";
    case SelectionStrategy::Random: return "random";
    case SelectionStrategy::SingleBeam: return "single_beam";
    case SelectionStrategy::CritiqueOnly: return "critique_only";
  }
  return "?";
}

std::pair<std::size_t, std::size_t> extreme_indices(std::span<const double> scores) {
  if (scores.empty()) throw EmptyPool("no scores to select from");
  std::size_t i_min = 0;
  std::size_t i_max = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] < scores[i_min]) i_min = i;
    if (scores[i] > scores[i_max]) i_max = i;
  }
  return {i_min, i_max};
}

std::optional<std::pair<std::size_t, std::size_t>> select_critique_only_indices(
    std::span<const double> scores) {
  auto [i_min, i_max] = extreme_indices(scores);
  if (scores[i_min] == scores[i_max]) return std::nullopt;
  return std::make_pair(i_min, i_max);
}

namespace {

std::vector<double> pool_scores(const TripletCandidatePool& pool) {
  std::vector<double> scores;
  scores.reserve(pool.entries.size());
  for (const PoolEntry& entry : pool.entries) scores.push_back(entry.score.value());
  return scores;
}

PreferenceTriplet assemble_triplet(const Document& document,
                                   const PoolEntry& chosen_entry,
                                   const PoolEntry& rejected_entry,
                                   SelectionStrategy strategy, int n_samples,
                                   CritiqueStrategy critique_strategy) {
  PreferenceTriplet triplet;
  triplet.document_id = document.id;
  triplet.document = document.text;
  triplet.chosen = chosen_entry.refined.text;
  triplet.rejected = rejected_entry.initial.text;
  triplet.meta = TripletMeta{to_string(strategy), chosen_entry.score.value(),
                             rejected_entry.score.value(), n_samples,
                             to_string(critique_strategy)};
  return triplet;
}

}  // namespace

PreferenceTriplet select_extreme(const TripletCandidatePool& pool,
                                 const Document& document, int n_samples,
                                 CritiqueStrategy critique_strategy) {
  if (pool.entries.empty()) throw EmptyPool("cannot select from an empty pool");
  const auto scores = pool_scores(pool);
  auto [i_min, i_max] = extreme_indices(scores);
  return assemble_triplet(document, pool.entries[i_min], pool.entries[i_max],
                          SelectionStrategy::Extreme, n_samples, critique_strategy);
}

PreferenceTriplet select_random(const TripletCandidatePool& pool,
                                const Document& document, std::uint64_t rng_seed,
                                int n_samples, CritiqueStrategy critique_strategy) {
  if (pool.entries.empty()) throw EmptyPool("cannot select from an empty pool");
  std::mt19937_64 rng(rng_seed);
  const std::size_t size = pool.entries.size();
  const std::size_t rejected_idx = static_cast<std::size_t>(rng() % size);
  const std::size_t chosen_idx = static_cast<std::size_t>(rng() % size);
  return assemble_triplet(document, pool.entries[chosen_idx],
                          pool.entries[rejected_idx], SelectionStrategy::Random,
                          n_samples, critique_strategy);
}

SftRecord emit_sft_targets(const TripletCandidatePool& pool,
                           const Document& document) {
  if (pool.entries.empty()) throw EmptyPool("cannot emit SFT from an empty pool");
  const auto scores = pool_scores(pool);
  const std::size_t i_min = extreme_indices(scores).first;
  return SftRecord{document.id, document.text, pool.entries[i_min].refined.text};
}

bool is_single_sentence(const std::string& text) {
  int terminators = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    const bool at_end = i + 1 == text.size();
    if (at_end || std::isspace(static_cast<unsigned char>(text[i + 1]))) {
      ++terminators;
    }
  }
  return terminators <= 1;
}

// --- Pipeline ---

struct Pipeline::SampleOutcome {
  int sample_index = 0;
  Summary initial;
  std::optional<CritiqueResult> critique;
  std::optional<Summary> refined;
  std::optional<std::string> skip_reason;
  bool errored = false;
  bool transport = false;
};

struct Pipeline::DocOutcome {
  std::optional<std::string> pref_line;
  std::optional<std::string> sft_line;
  std::vector<std::string> trace_lines;
  std::optional<std::string> skip_reason;
  std::map<std::string, std::int64_t> sample_skips;
  bool transport_failure = false;
};

Pipeline::Pipeline(LlmClient& client, const PromptSet& prompts,
                   PipelineOptions options)
    : client_(client), prompts_(prompts), options_(std::move(options)) {}

// Critique (and refinement, when requested and s > 0) for one initial
// summary. Failures never escape; they are classified into skip reasons.
Pipeline::SampleOutcome Pipeline::run_sample(const Document& document,
                                             const Summary& initial,
                                             CritiqueStrategy strategy,
                                             bool refine_unfaithful) const {
  SampleOutcome outcome;
  outcome.sample_index = initial.sample_index;
  outcome.initial = initial;

  if (options_.enforce_single_sentence && !is_single_sentence(initial.text)) {
    outcome.skip_reason = "not_single_sentence";
    return outcome;
  }

  Critic critic(client_, prompts_, options_.critique);
  try {
    outcome.critique = critic.critique(document, initial, strategy);
  } catch (const TransportError&) {
    outcome.skip_reason = "transport_error";
    outcome.errored = true;
    outcome.transport = true;
    return outcome;
  } catch (const CritiqueFailed&) {
    outcome.skip_reason = "critique_failed";
    outcome.errored = true;
    return outcome;
  } catch (const Error&) {
    outcome.skip_reason = "backend_error";
    outcome.errored = true;
    return outcome;
  }

  if (!refine_unfaithful || outcome.critique->score.value() <= 0.0) {
    return outcome;
  }
  RefinementInput input{document, outcome.initial, outcome.critique->feedback};
  try {
    outcome.refined.emplace(
        refine_summary(client_, prompts_, input, options_.refinement));
  } catch (const TransportError&) {
    outcome.skip_reason = "transport_error";
    outcome.errored = true;
    outcome.transport = true;
    outcome.critique.reset();
  } catch (const Error&) {
    outcome.skip_reason = "refine_failed";
    outcome.errored = true;
    outcome.critique.reset();
  }
  return outcome;
}

std::vector<Pipeline::SampleOutcome> Pipeline::run_samples(
    const Document& document, int n, CritiqueStrategy strategy,
    bool refine_unfaithful, const GenerationParams& generation_params) const {
  const std::vector<Summary> initials =
      generate_summaries(client_, prompts_, document, n, generation_params);

  std::vector<SampleOutcome> outcomes(initials.size());
  if (client_.max_concurrency() > 1 && initials.size() > 1) {
    std::vector<std::future<SampleOutcome>> futures;
    futures.reserve(initials.size());
    for (const Summary& initial : initials) {
      futures.push_back(std::async(std::launch::async, [&, initial] {
        return run_sample(document, initial, strategy, refine_unfaithful);
      }));
    }
    for (std::size_t i = 0; i < futures.size(); ++i) outcomes[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < initials.size(); ++i) {
      outcomes[i] = run_sample(document, initials[i], strategy, refine_unfaithful);
    }
  }
  return outcomes;
}

Pipeline::PoolBuild Pipeline::build_candidate_pool(const Document& document,
                                                   int n,
                                                   CritiqueStrategy strategy) const {
  if (n < 1) throw PreconditionViolation("samples per document must be >= 1");
  const std::vector<SampleOutcome> outcomes =
      run_samples(document, n, strategy, true, options_.generation);

  PoolBuild build;
  build.pool.document_id = document.id;
  for (const SampleOutcome& outcome : outcomes) {
    if (outcome.skip_reason) ++build.sample_skips[*outcome.skip_reason];
    if (outcome.errored) {
      ++build.samples_errored;
      if (outcome.transport) ++build.transport_errors;
      continue;
    }
    if (!outcome.critique || outcome.critique->score.value() <= 0.0) continue;
    if (!outcome.refined) continue;
    build.pool.entries.push_back(PoolEntry{outcome.initial, *outcome.refined,
                                           outcome.critique->score,
                                           outcome.critique->feedback});
  }
  if (build.samples_errored == n) {
    throw DocumentFailed("every sample of document '" + document.id + "' errored");
  }
  return build;
}

struct Pipeline::SelectionResult {
  std::optional<PreferenceTriplet> triplet;
  std::vector<SampleOutcome> outcomes;
  int errored = 0;
  int transport = 0;
  std::optional<std::string> skip_reason;  // set when triplet is absent
};

Pipeline::SelectionResult Pipeline::single_beam_impl(
    const Document& document, CritiqueStrategy strategy) const {
  GenerationParams greedy = options_.generation;
  greedy.decode_mode = DecodeMode::Greedy;
  SelectionResult result;
  result.outcomes = run_samples(document, 1, strategy, true, greedy);
  const SampleOutcome& outcome = result.outcomes.front();
  if (outcome.errored) {
    result.errored = 1;
    result.transport = outcome.transport ? 1 : 0;
    result.skip_reason = "document_failed";
    return result;
  }
  if (!outcome.critique || outcome.critique->score.value() <= 0.0 ||
      !outcome.refined) {
    result.skip_reason = "faithful_initial";
    return result;
  }
  if (!options_.allow_identical_pairs &&
      outcome.refined->text == outcome.initial.text) {
    result.skip_reason = "identical_pair";
    return result;
  }
  PoolEntry entry{outcome.initial, *outcome.refined, outcome.critique->score,
                  outcome.critique->feedback};
  result.triplet = assemble_triplet(document, entry, entry,
                                    SelectionStrategy::SingleBeam, 1, strategy);
  return result;
}

std::optional<PreferenceTriplet> Pipeline::select_single_beam(
    const Document& document, CritiqueStrategy strategy) const {
  SelectionResult result = single_beam_impl(document, strategy);
  if (result.errored > 0) {
    throw CritiqueFailed(
        "single-beam sample failed: " +
        result.outcomes.front().skip_reason.value_or("unknown"));
  }
  return std::move(result.triplet);
}

Pipeline::SelectionResult Pipeline::critique_only_impl(
    const Document& document, int n, CritiqueStrategy strategy) const {
  if (n < 2) throw PreconditionViolation("critique-only selection requires n >= 2");
  SelectionResult result;
  result.outcomes = run_samples(document, n, strategy, false, options_.generation);
  std::vector<const SampleOutcome*> scored;
  for (const SampleOutcome& outcome : result.outcomes) {
    if (outcome.critique) {
      scored.push_back(&outcome);
    } else if (outcome.errored) {
      ++result.errored;
      if (outcome.transport) ++result.transport;
    }
  }
  if (result.errored == n) {
    result.skip_reason = "document_failed";
    return result;
  }
  if (scored.empty()) {
    result.skip_reason = "no_score_spread";
    return result;
  }

  std::vector<double> scores;
  scores.reserve(scored.size());
  for (const SampleOutcome* outcome : scored) {
    scores.push_back(outcome->critique->score.value());
  }
  const auto picked = select_critique_only_indices(scores);
  if (!picked) {
    result.skip_reason = "no_score_spread";
    return result;
  }

  PreferenceTriplet triplet;
  triplet.document_id = document.id;
  triplet.document = document.text;
  triplet.chosen = scored[picked->first]->initial.text;
  triplet.rejected = scored[picked->second]->initial.text;
  triplet.meta = TripletMeta{to_string(SelectionStrategy::CritiqueOnly),
                             scores[picked->first], scores[picked->second], n,
                             to_string(strategy)};
  result.triplet = std::move(triplet);
  return result;
}

std::optional<PreferenceTriplet> Pipeline::select_critique_only(
    const Document& document, int n, CritiqueStrategy strategy) const {
  SelectionResult result = critique_only_impl(document, n, strategy);
  if (result.errored == n) {
    throw DocumentFailed("every sample of document '" + document.id + "' errored");
  }
  return std::move(result.triplet);
}

namespace {

ordered_json trace_record(const std::string& document_id,
                          const Pipeline::SampleOutcome& outcome) {
  ordered_json record;
  record["id"] = document_id;
  record["sample_index"] = outcome.sample_index;
  record["initial"] = outcome.initial.text;
  if (outcome.critique) {
    record["score"] = outcome.critique->score.value();
    ordered_json verdicts = ordered_json::array();
    for (const auto& [fact, verdict] : outcome.critique->fact_verdicts) {
      verdicts.push_back({{"fact", fact.text}, {"label", to_string(verdict)}});
    }
    record["verdicts"] = std::move(verdicts);
    record["feedback"] = outcome.critique->feedback.text;
  } else {
    record["score"] = nullptr;
    record["verdicts"] = ordered_json::array();
    record["feedback"] = nullptr;
  }
  record["refined"] =
      outcome.refined ? ordered_json(outcome.refined->text) : ordered_json(nullptr);
  record["skip_reason"] = outcome.skip_reason ? ordered_json(*outcome.skip_reason)
                                              : ordered_json(nullptr);
  return record;
}

}  // namespace

Pipeline::DocOutcome Pipeline::process_document(const Document& document) const {
  DocOutcome doc;
  const int n = options_.samples_per_doc;
  const CritiqueStrategy strategy = options_.critique_strategy;

  auto finish_with_triplet = [&](const PreferenceTriplet& triplet) {
    if (!options_.allow_identical_pairs && triplet.chosen == triplet.rejected) {
      doc.skip_reason = "identical_pair";
      return;
    }
    doc.pref_line = triplet_to_jsonl(triplet);
  };

  try {
    switch (options_.selection) {
      case SelectionStrategy::Extreme:
      case SelectionStrategy::Random: {
        const std::vector<SampleOutcome> outcomes =
            run_samples(document, n, strategy, true, options_.generation);
        TripletCandidatePool pool;
        pool.document_id = document.id;
        int errored = 0;
        int transport = 0;
        for (const SampleOutcome& outcome : outcomes) {
          doc.trace_lines.push_back(trace_record(document.id, outcome).dump());
          if (outcome.skip_reason) ++doc.sample_skips[*outcome.skip_reason];
          if (outcome.errored) {
            ++errored;
            if (outcome.transport) ++transport;
            continue;
          }
          if (!outcome.critique || outcome.critique->score.value() <= 0.0) continue;
          if (!outcome.refined) continue;
          pool.entries.push_back(PoolEntry{outcome.initial, *outcome.refined,
                                           outcome.critique->score,
                                           outcome.critique->feedback});
        }
        if (errored == n) {
          doc.skip_reason = "document_failed";
          doc.transport_failure = transport == errored;
          return doc;
        }
        if (pool.entries.empty()) {
          doc.skip_reason = "all_faithful";
          return doc;
        }
        const PreferenceTriplet triplet =
            options_.selection == SelectionStrategy::Extreme
                ? select_extreme(pool, document, n, strategy)
                : select_random(pool, document,
                                options_.rng_seed ^ fnv1a64(document.id), n,
                                strategy);
        finish_with_triplet(triplet);
        if (doc.pref_line) {
          doc.sft_line = sft_to_jsonl(emit_sft_targets(pool, document));
        }
        return doc;
      }
      case SelectionStrategy::SingleBeam:
      case SelectionStrategy::CritiqueOnly: {
        SelectionResult result =
            options_.selection == SelectionStrategy::SingleBeam
                ? single_beam_impl(document, strategy)
                : critique_only_impl(document, n, strategy);
        for (const SampleOutcome& outcome : result.outcomes) {
          doc.trace_lines.push_back(trace_record(document.id, outcome).dump());
          if (outcome.skip_reason) ++doc.sample_skips[*outcome.skip_reason];
        }
        if (!result.triplet) {
          doc.skip_reason = result.skip_reason.value_or("no_score_spread");
          doc.transport_failure =
              result.errored > 0 && result.transport == result.errored &&
              doc.skip_reason == "document_failed";
          return doc;
        }
        finish_with_triplet(*result.triplet);
        return doc;
      }
    }
  } catch (const TransportError&) {
    doc.skip_reason = "document_failed";
    doc.transport_failure = true;
  } catch (const Error&) {
    doc.skip_reason = "document_failed";
  }
  return doc;
}

DatasetManifest Pipeline::construct_dataset(const std::vector<Document>& corpus,
                                            const ConstructSinks& sinks,
                                            const std::string& config_fingerprint) const {
  if (corpus.empty()) throw PreconditionViolation("corpus must be non-empty");
  if (sinks.preferences == nullptr) {
    throw PreconditionViolation("construct_dataset needs a preferences sink");
  }
  {
    std::set<std::string> seen;
    for (const Document& document : corpus) {
      if (!seen.insert(document.id).second) {
        throw DuplicateId("duplicate document id: " + document.id);
      }
    }
  }

  DatasetManifest manifest;
  manifest.config_fingerprint = config_fingerprint;

  std::mutex emit_mu;
  std::map<std::size_t, DocOutcome> pending;
  std::size_t next_emit = 0;
  std::int64_t transport_failed_docs = 0;

  auto write_line = [](std::ostream* out, const std::string& line) {
    if (out == nullptr) return;
    if (!(*out << line << '\n')) {
      throw IoError("failed writing output record");
    }
  };

  // Releases buffered outcomes in corpus order; called under emit_mu.
  auto emit_ready = [&] {
    for (auto it = pending.find(next_emit); it != pending.end();
         it = pending.find(next_emit)) {
      DocOutcome& out = it->second;
      if (out.pref_line) {
        write_line(sinks.preferences, *out.pref_line);
        if (out.sft_line) write_line(sinks.sft, *out.sft_line);
        ++manifest.records_written;
      } else {
        ++manifest.documents_skipped;
        ++manifest.skip_reasons[out.skip_reason.value_or("unknown")];
      }
      for (const std::string& line : out.trace_lines) {
        write_line(sinks.trace, line);
      }
      for (const auto& [reason, count] : out.sample_skips) {
        manifest.samples_skipped[reason] += count;
      }
      if (out.transport_failure) ++transport_failed_docs;
      pending.erase(it);
      ++next_emit;
    }
  };

  const int worker_count = std::max(
      1, std::min<int>(options_.workers, static_cast<int>(corpus.size())));
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr fatal;
  std::mutex fatal_mu;

  auto worker = [&] {
    for (;;) {
      const std::size_t index = cursor.fetch_add(1);
      if (index >= corpus.size()) return;
      try {
        DocOutcome outcome = process_document(corpus[index]);
        std::lock_guard lock(emit_mu);
        pending[index] = std::move(outcome);
        emit_ready();
      } catch (...) {
        std::lock_guard lock(fatal_mu);
        if (!fatal) fatal = std::current_exception();
        return;
      }
    }
  };

  if (worker_count == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(worker_count));
    for (int i = 0; i < worker_count; ++i) threads.emplace_back(worker);
    for (std::thread& thread : threads) thread.join();
  }
  if (fatal) std::rethrow_exception(fatal);

  sinks.preferences->flush();
  if (!sinks.preferences->good()) {
    throw IoError("failed flushing preference output");
  }
  if (transport_failed_docs == static_cast<std::int64_t>(corpus.size())) {
    throw TransportError(
        "backend unreachable: every document failed with transport errors");
  }
  return manifest;
}

Pipeline::RefineOutcome Pipeline::refine_at_inference(
    const Document& document, CritiqueStrategy strategy) const {
  GenerationParams greedy = options_.generation;
  greedy.decode_mode = DecodeMode::Greedy;
  const Summary initial =
      generate_summaries(client_, prompts_, document, 1, greedy).front();

  Critic critic(client_, prompts_, options_.critique);
  CritiqueResult critique = binary_result_from_logprobs(0.0, 0.0);
  try {
    critique = critic.critique(document, initial, strategy);
  } catch (const Error& ex) {
    return RefineOutcome{initial, false,
                         std::string("critique failed, returning initial: ") +
                             ex.what()};
  }
  if (critique.score.value() <= 0.0) {
    return RefineOutcome{initial, false, std::nullopt};
  }
  try {
    Summary refined =
        refine_summary(client_, prompts_,
                       RefinementInput{document, initial, critique.feedback},
                       options_.refinement);
    return RefineOutcome{std::move(refined), true, std::nullopt};
  } catch (const Error& ex) {
    return RefineOutcome{initial, false,
                         std::string("refinement failed, returning initial: ") +
                             ex.what()};
  }
}

Pipeline::ScoreReport Pipeline::score_corpus(
    const std::vector<std::pair<Document, Summary>>& pairs,
    CritiqueStrategy strategy) const {
  ScoreReport report;
  Critic critic(client_, prompts_, options_.critique);
  double total = 0.0;
  std::int64_t successes = 0;
  for (const auto& [document, summary] : pairs) {
    ScoreEntry entry;
    entry.id = document.id;
    try {
      entry.result = critic.critique(document, summary, strategy);
      total += entry.result->score.value();
      ++successes;
    } catch (const Error& ex) {
      entry.error = ex.what();
      ++report.failures;
    }
    report.entries.push_back(std::move(entry));
  }
  if (successes > 0) report.mean = total / static_cast<double>(successes);
  return report;
}

// --- JSONL ---

namespace {

ordered_json parse_line(const std::string& line, std::size_t line_no,
                        const char* what) {
  try {
    return ordered_json::parse(line);
  } catch (const nlohmann::json::exception& ex) {
    throw IoError(std::string(what) + " line " + std::to_string(line_no) +
                  " is not valid JSON: " + ex.what());
  }
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

std::string required_string(const ordered_json& record, const char* key,
                            std::size_t line_no, const char* what) {
  if (!record.contains(key) || !record.at(key).is_string()) {
    throw IoError(std::string(what) + " line " + std::to_string(line_no) +
                  " is missing string field '" + key + "'");
  }
  return record.at(key).get<std::string>();
}

bool all_whitespace(const std::string& text) {
  return std::all_of(text.begin(), text.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

std::vector<Document> load_corpus_jsonl(std::istream& in) {
  std::vector<Document> corpus;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const ordered_json record = parse_line(line, line_no, "corpus");
    Document document;
    document.id = required_string(record, "id", line_no, "corpus");
    document.text = required_string(record, "document", line_no, "corpus");
    if (document.id.empty()) {
      throw IoError("corpus line " + std::to_string(line_no) + " has an empty id");
    }
    if (all_whitespace(document.text)) {
      throw IoError("corpus line " + std::to_string(line_no) +
                    " has an empty document text");
    }
    if (!seen.insert(document.id).second) {
      throw DuplicateId("duplicate document id: " + document.id);
    }
    corpus.push_back(std::move(document));
  }
  return corpus;
}

std::vector<std::pair<Document, Summary>> load_pairs_jsonl(std::istream& in) {
  std::vector<std::pair<Document, Summary>> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const ordered_json record = parse_line(line, line_no, "pairs");
    Document document;
    document.id = required_string(record, "id", line_no, "pairs");
    document.text = required_string(record, "document", line_no, "pairs");
    Summary summary{required_string(record, "summary", line_no, "pairs"),
                    SummaryOrigin::Initial, 0};
    pairs.emplace_back(std::move(document), std::move(summary));
  }
  return pairs;
}

std::string triplet_to_jsonl(const PreferenceTriplet& triplet) {
  ordered_json record;
  record["id"] = triplet.document_id;
  record["document"] = triplet.document;
  record["chosen"] = triplet.chosen;
  record["rejected"] = triplet.rejected;
  ordered_json meta;
  meta["strategy"] = triplet.meta.strategy;
  meta["chosen_source_score"] = triplet.meta.chosen_source_score;
  meta["rejected_score"] = triplet.meta.rejected_score;
  meta["n_samples"] = triplet.meta.n_samples;
  meta["critique_strategy"] = triplet.meta.critique_strategy;
  record["meta"] = std::move(meta);
  return record.dump();
}

PreferenceTriplet triplet_from_jsonl(const std::string& line) {
  const ordered_json record = parse_line(line, 1, "preferences");
  PreferenceTriplet triplet;
  triplet.document_id = required_string(record, "id", 1, "preferences");
  triplet.document = required_string(record, "document", 1, "preferences");
  triplet.chosen = required_string(record, "chosen", 1, "preferences");
  triplet.rejected = required_string(record, "rejected", 1, "preferences");
  if (!record.contains("meta") || !record.at("meta").is_object()) {
    throw IoError("preference record is missing its meta object");
  }
  const ordered_json& meta = record.at("meta");
  try {
    triplet.meta.strategy = meta.at("strategy").get<std::string>();
    triplet.meta.chosen_source_score = meta.at("chosen_source_score").get<double>();
    triplet.meta.rejected_score = meta.at("rejected_score").get<double>();
    triplet.meta.n_samples = meta.at("n_samples").get<int>();
    triplet.meta.critique_strategy = meta.at("critique_strategy").get<std::string>();
  } catch (const nlohmann::json::exception& ex) {
    throw IoError(std::string("preference record has a malformed meta object: ") +
                  ex.what());
  }
  return triplet;
}

std::string sft_to_jsonl(const SftRecord& record) {
  ordered_json out;
  out["id"] = record.document_id;
  out["document"] = record.document;
  out["target"] = record.target;
  return out.dump();
}

}  // namespace sumpref
