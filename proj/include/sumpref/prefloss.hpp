#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sumpref/errors.hpp"

namespace sumpref {

// The four log-probabilities of one preference example: trained policy and
// frozen reference, each evaluated on the chosen and rejected response.
struct LogProbPair {
  double policy_chosen;
  double policy_rejected;
  double ref_chosen;
  double ref_rejected;
};

struct LossParams {
  double beta = 0.1;   // scaling factor on the log-ratio margin
  double alpha = 1.0;  // weight of the NLL term on the chosen response

  void validate() const {
    if (beta <= 0.0) throw PreconditionViolation("beta must be > 0");
    if (alpha < 0.0) throw PreconditionViolation("alpha must be >= 0");
  }
};

// log(sigmoid(z)) in a branchful form that never overflows.
double log_sigmoid(double z);

// Per-example loss: the negated maximization objective
//   L = -log sigmoid(beta * ((pc - rc) - (pr - rr))) - alpha * pc
// where pc/pr are policy log-probs and rc/rr reference log-probs.
double dpo_nll_loss(const LogProbPair& pair, const LossParams& params);

// One training pair: candidate indices within the prompt's candidate set.
struct PreferenceExample {
  int prompt;
  int chosen;
  int rejected;
};

// Per-prompt categorical policy over a closed candidate set. The logits
// matrix (num_prompts x K) is the trainable parameter; the reference logits
// are frozen at construction.
class ToyPolicy {
 public:
  // Policy and reference both start at the given logits (zeros = uniform).
  ToyPolicy(int num_prompts, int candidates_per_prompt,
            std::vector<double> logits = {});

  int num_prompts() const { return num_prompts_; }
  int candidates_per_prompt() const { return k_; }

  double logit(int prompt, int candidate) const;
  void set_logit(int prompt, int candidate, double value);
  std::vector<double>& logits() { return logits_; }
  const std::vector<double>& logits() const { return logits_; }
  const std::vector<double>& reference_logits() const { return reference_; }

  // Row-wise log-softmax of the trainable / reference logits.
  std::vector<double> log_softmax_row(int prompt) const;
  std::vector<double> reference_log_softmax_row(int prompt) const;

  LogProbPair log_probs(const PreferenceExample& example) const;

 private:
  int num_prompts_;
  int k_;
  std::vector<double> logits_;
  std::vector<double> reference_;
};

// Mean per-example loss over the dataset.
double dpo_nll_batch_loss(const ToyPolicy& policy,
                          const std::vector<PreferenceExample>& dataset,
                          const LossParams& params);

// Exact analytic gradient of the batch loss with respect to every logit,
// in the same row-major layout as ToyPolicy::logits().
std::vector<double> dpo_nll_grad(const ToyPolicy& policy,
                                 const std::vector<PreferenceExample>& dataset,
                                 const LossParams& params);

// Central-difference verification of dpo_nll_grad. Returns the max over
// coordinates of |analytic - numeric| / max(1e-8, |numeric|).
double check_gradient(const ToyPolicy& policy,
                      const std::vector<PreferenceExample>& dataset,
                      const LossParams& params, double epsilon);

// Fraction of examples where the policy strictly prefers the chosen
// candidate.
double pairwise_accuracy(const ToyPolicy& policy,
                         const std::vector<PreferenceExample>& dataset);

struct TrainReport {
  std::vector<double> loss_curve;      // loss before each step, plus final
  std::vector<double> accuracy_curve;  // matching pairwise accuracies
  double final_loss = 0.0;
  double final_accuracy = 0.0;
};

// Plain gradient descent on the policy logits. Throws NonFiniteLoss with
// diagnostics if the loss leaves the finite range.
TrainReport train_toy(ToyPolicy& policy,
                      const std::vector<PreferenceExample>& dataset,
                      const LossParams& params, int steps, double lr);

// A preference dataset lifted from the pipeline's JSONL output: distinct
// document ids become prompts, chosen/rejected strings become candidates
// (deduplicated per prompt). Pairs with identical strings are dropped.
struct ToyDataset {
  std::vector<std::string> prompt_ids;
  std::vector<std::vector<std::string>> candidates;  // per prompt
  std::vector<PreferenceExample> examples;
  int candidates_per_prompt = 2;  // max over prompts, >= 2
  int pairs_dropped = 0;
};

ToyDataset toy_dataset_from_jsonl(std::istream& in);

}  // namespace sumpref
