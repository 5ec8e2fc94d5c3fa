#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "sumpref/config.hpp"

namespace sumpref {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitBackend = 4;
inline constexpr int kExitNoRecords = 5;

struct ConstructPaths {
  std::string corpus;
  std::string preferences_out;
  std::optional<std::string> sft_out;
  std::optional<std::string> trace_out;
};

// Runs the full dataset-construction loop and prints the manifest JSON to
// `out`. Nonzero exit iff zero records were written or a fatal error hit.
int cmd_construct(const RunConfig& config, const ConstructPaths& paths,
                  std::ostream& out, std::ostream& err);

// Scores (document, summary) pairs and prints per-pair scores plus the mean.
int cmd_score(const RunConfig& config, const std::string& pairs_path,
              std::ostream& out, std::ostream& err);

// Critique-and-refine pass over a corpus; writes one refined summary per
// document to refined_out.
int cmd_refine(const RunConfig& config, const std::string& corpus_path,
               const std::string& refined_out, std::ostream& out,
               std::ostream& err);

// Imports a preference JSONL into the toy policy and trains it; prints the
// training report and optionally writes it to report_path.
int cmd_train_toy(const RunConfig& config, const std::string& prefs_path,
                  const std::optional<std::string>& report_path, int steps,
                  double lr, std::ostream& out, std::ostream& err);

// Pretty-prints a trace file produced by construct --trace.
int cmd_inspect(const std::string& trace_path, std::ostream& out,
                std::ostream& err);

}  // namespace sumpref
