#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sumpref/critique.hpp"
#include "sumpref/generation.hpp"
#include "sumpref/types.hpp"

namespace sumpref {

// One unfaithful initial summary with its refinement and critique outputs.
struct PoolEntry {
  Summary initial;
  Summary refined;
  HallucinationScore score;
  CritiqueFeedback feedback;
};

// The per-document candidate lists, ordered by initial.sample_index; every
// entry has score > 0.
struct TripletCandidatePool {
  std::string document_id;
  std::vector<PoolEntry> entries;
};

struct TripletMeta {
  std::string strategy;
  double chosen_source_score = 0.0;
  double rejected_score = 0.0;
  int n_samples = 0;
  std::string critique_strategy;
};

struct PreferenceTriplet {
  std::string document_id;
  std::string document;
  std::string chosen;
  std::string rejected;
  TripletMeta meta;
};

struct SftRecord {
  std::string document_id;
  std::string document;
  std::string target;
};

struct DatasetManifest {
  std::int64_t records_written = 0;
  std::int64_t documents_skipped = 0;
  std::map<std::string, std::int64_t> skip_reasons;
  std::map<std::string, std::int64_t> samples_skipped;
  std::string config_fingerprint;
};

enum class SelectionStrategy { Extreme, Random, SingleBeam, CritiqueOnly };

const char* to_string(SelectionStrategy strategy);

// First-occurrence argmin/argmax over the scores.
std::pair<std::size_t, std::size_t> extreme_indices(std::span<const double> scores);

// Chosen/rejected index pair for the critique-only variant, or nullopt when
// every score is equal (no preference signal).
std::optional<std::pair<std::size_t, std::size_t>> select_critique_only_indices(
    std::span<const double> scores);

// chosen = refinement of the lowest-scoring entry, rejected = initial of the
// highest-scoring one; ties go to the lowest sample_index.
PreferenceTriplet select_extreme(const TripletCandidatePool& pool,
                                 const Document& document, int n_samples,
                                 CritiqueStrategy critique_strategy);

// rejected uniform over initials, chosen uniform and independent over
// refinements, both from a generator seeded with rng_seed.
PreferenceTriplet select_random(const TripletCandidatePool& pool,
                                const Document& document, std::uint64_t rng_seed,
                                int n_samples, CritiqueStrategy critique_strategy);

// The supervised-tuning target: the same chosen summary extreme selection
// would pick.
SftRecord emit_sft_targets(const TripletCandidatePool& pool,
                           const Document& document);

struct PipelineOptions {
  int samples_per_doc = 4;
  CritiqueStrategy critique_strategy = CritiqueStrategy::FineGrained;
  SelectionStrategy selection = SelectionStrategy::Extreme;
  GenerationParams generation{};  // sampling defaults for initial summaries
  GenerationParams refinement{1.0, 0.95, 160, 1, std::nullopt, DecodeMode::Greedy};
  CritiqueOptions critique{};
  int workers = 1;
  std::uint64_t rng_seed = 0;
  bool allow_identical_pairs = false;
  bool enforce_single_sentence = false;
};

// Output streams for construct_dataset; sft and trace may be null.
struct ConstructSinks {
  std::ostream* preferences = nullptr;
  std::ostream* sft = nullptr;
  std::ostream* trace = nullptr;
};

class Pipeline {
 public:
  Pipeline(LlmClient& client, const PromptSet& prompts, PipelineOptions options);

  struct PoolBuild {
    TripletCandidatePool pool;
    std::map<std::string, std::int64_t> sample_skips;
    int samples_errored = 0;
    int transport_errors = 0;
  };

  // Everything observed for one sample; exposed for tracing.
  struct SampleOutcome;

  // Summarize -> critique per sample; samples with s > 0 get one refinement
  // and become pool entries, faithful ones are discarded, failed ones are
  // counted. Throws DocumentFailed when every sample errored.
  PoolBuild build_candidate_pool(const Document& document, int n,
                                 CritiqueStrategy strategy) const;

  // One greedy summary; when unfaithful, one greedy refinement forms the
  // pair. Returns nullopt for a faithful initial (or an identical pair under
  // the drop rule).
  std::optional<PreferenceTriplet> select_single_beam(
      const Document& document, CritiqueStrategy strategy) const;

  // Critiques n initial summaries without refinement; lowest scorer becomes
  // chosen, highest rejected. Returns nullopt when all scores are equal.
  std::optional<PreferenceTriplet> select_critique_only(
      const Document& document, int n, CritiqueStrategy strategy) const;

  // Runs the full loop over the corpus, streaming records in corpus order
  // regardless of worker completion order.
  DatasetManifest construct_dataset(const std::vector<Document>& corpus,
                                    const ConstructSinks& sinks,
                                    const std::string& config_fingerprint) const;

  struct RefineOutcome {
    Summary summary;
    bool refined = false;
    std::optional<std::string> warning;
  };

  // Greedy summary plus at most one critique-guided refinement pass; on
  // critique failure the initial summary is returned with a warning.
  RefineOutcome refine_at_inference(const Document& document,
                                    CritiqueStrategy strategy) const;

  struct ScoreEntry {
    std::string id;
    std::optional<CritiqueResult> result;
    std::optional<std::string> error;
  };
  struct ScoreReport {
    std::vector<ScoreEntry> entries;
    std::optional<double> mean;  // over successes; absent when none
    std::int64_t failures = 0;
  };

  ScoreReport score_corpus(const std::vector<std::pair<Document, Summary>>& pairs,
                           CritiqueStrategy strategy) const;

  const PipelineOptions& options() const { return options_; }

 private:
  struct DocOutcome;
  struct SelectionResult;

  DocOutcome process_document(const Document& document) const;
  SampleOutcome run_sample(const Document& document, const Summary& initial,
                           CritiqueStrategy strategy, bool refine_unfaithful) const;
  std::vector<SampleOutcome> run_samples(const Document& document, int n,
                                         CritiqueStrategy strategy,
                                         bool refine_unfaithful,
                                         const GenerationParams& generation_params) const;
  SelectionResult single_beam_impl(const Document& document,
                                   CritiqueStrategy strategy) const;
  SelectionResult critique_only_impl(const Document& document, int n,
                                     CritiqueStrategy strategy) const;

  LlmClient& client_;
  const PromptSet& prompts_;
  PipelineOptions options_;
};

// Sentence heuristic used by the enforce_single_sentence flag: counts
// terminator punctuation followed by whitespace or end of text.
bool is_single_sentence(const std::string& text);

// --- JSONL interfaces ---

// Corpus: one {"id", "document"} object per line. Throws DuplicateId on
// repeated ids and IoError on malformed lines.
std::vector<Document> load_corpus_jsonl(std::istream& in);

// Scoring input: one {"id", "document", "summary"} object per line.
std::vector<std::pair<Document, Summary>> load_pairs_jsonl(std::istream& in);

std::string triplet_to_jsonl(const PreferenceTriplet& triplet);
PreferenceTriplet triplet_from_jsonl(const std::string& line);
std::string sft_to_jsonl(const SftRecord& record);

}  // namespace sumpref
