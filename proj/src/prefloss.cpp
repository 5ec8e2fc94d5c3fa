#include "sumpref/prefloss.hpp"

#include <algorithm>
#include <cmath>
#include <istream>

#include <nlohmann/json.hpp>

namespace sumpref {

double log_sigmoid(double z) {
  return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

double dpo_nll_loss(const LogProbPair& pair, const LossParams& params) {
  params.validate();
  const double margin = (pair.policy_chosen - pair.ref_chosen) -
                        (pair.policy_rejected - pair.ref_rejected);
  return -log_sigmoid(params.beta * margin) - params.alpha * pair.policy_chosen;
}

namespace {

std::vector<double> log_softmax(const double* row, int k) {
  const double max_logit = *std::max_element(row, row + k);
  double sum = 0.0;
  for (int i = 0; i < k; ++i) sum += std::exp(row[i] - max_logit);
  const double log_z = max_logit + std::log(sum);
  std::vector<double> out(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = row[i] - log_z;
  return out;
}

void validate_example(const ToyPolicy& policy, const PreferenceExample& example) {
  if (example.prompt < 0 || example.prompt >= policy.num_prompts() ||
      example.chosen < 0 || example.chosen >= policy.candidates_per_prompt() ||
      example.rejected < 0 || example.rejected >= policy.candidates_per_prompt()) {
    throw IndexOutOfRange("preference example indexes outside the policy");
  }
  if (example.chosen == example.rejected) {
    throw PreconditionViolation("chosen and rejected indices must differ");
  }
}

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                  : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

ToyPolicy::ToyPolicy(int num_prompts, int candidates_per_prompt,
                     std::vector<double> logits)
    : num_prompts_(num_prompts), k_(candidates_per_prompt) {
  if (num_prompts_ < 1) throw PreconditionViolation("need at least one prompt");
  if (k_ < 2) throw PreconditionViolation("need at least two candidates per prompt");
  const std::size_t size =
      static_cast<std::size_t>(num_prompts_) * static_cast<std::size_t>(k_);
  if (logits.empty()) {
    logits.assign(size, 0.0);
  } else if (logits.size() != size) {
    throw PreconditionViolation("logits size does not match num_prompts x K");
  }
  logits_ = logits;
  reference_ = std::move(logits);
}

double ToyPolicy::logit(int prompt, int candidate) const {
  return logits_[static_cast<std::size_t>(prompt) * k_ + candidate];
}

void ToyPolicy::set_logit(int prompt, int candidate, double value) {
  logits_[static_cast<std::size_t>(prompt) * k_ + candidate] = value;
}

std::vector<double> ToyPolicy::log_softmax_row(int prompt) const {
  return log_softmax(logits_.data() + static_cast<std::size_t>(prompt) * k_, k_);
}

std::vector<double> ToyPolicy::reference_log_softmax_row(int prompt) const {
  return log_softmax(reference_.data() + static_cast<std::size_t>(prompt) * k_, k_);
}

LogProbPair ToyPolicy::log_probs(const PreferenceExample& example) const {
  validate_example(*this, example);
  const auto policy_row = log_softmax_row(example.prompt);
  const auto ref_row = reference_log_softmax_row(example.prompt);
  return LogProbPair{policy_row[static_cast<std::size_t>(example.chosen)],
                     policy_row[static_cast<std::size_t>(example.rejected)],
                     ref_row[static_cast<std::size_t>(example.chosen)],
                     ref_row[static_cast<std::size_t>(example.rejected)]};
}

double dpo_nll_batch_loss(const ToyPolicy& policy,
                          const std::vector<PreferenceExample>& dataset,
                          const LossParams& params) {
  params.validate();
  if (dataset.empty()) throw EmptyDataset("batch loss over an empty dataset");
  double total = 0.0;
  for (const PreferenceExample& example : dataset) {
    total += dpo_nll_loss(policy.log_probs(example), params);
  }
  return total / static_cast<double>(dataset.size());
}

std::vector<double> dpo_nll_grad(const ToyPolicy& policy,
                                 const std::vector<PreferenceExample>& dataset,
                                 const LossParams& params) {
  params.validate();
  if (dataset.empty()) throw EmptyDataset("gradient over an empty dataset");
  const int k = policy.candidates_per_prompt();
  std::vector<double> grad(policy.logits().size(), 0.0);
  const double scale = 1.0 / static_cast<double>(dataset.size());

  for (const PreferenceExample& example : dataset) {
    validate_example(policy, example);
    const auto lp = policy.log_softmax_row(example.prompt);
    const auto ref = policy.reference_log_softmax_row(example.prompt);
    const std::size_t c = static_cast<std::size_t>(example.chosen);
    const std::size_t r = static_cast<std::size_t>(example.rejected);
    const double margin = (lp[c] - ref[c]) - (lp[r] - ref[r]);
    const double one_minus_sigma = 1.0 - sigmoid(params.beta * margin);

    // dL/d lp[c] and dL/d lp[r]; every other lp has zero direct coefficient.
    const double coeff_c = -params.beta * one_minus_sigma - params.alpha;
    const double coeff_r = params.beta * one_minus_sigma;

    // Chain rule through log-softmax: d lp[i] / d logit[j] = [i==j] - p[j],
    // so row gradient = direct coefficients minus softmax times their sum.
    double* row = grad.data() + static_cast<std::size_t>(example.prompt) * k;
    const double coeff_sum = coeff_c + coeff_r;
    for (int j = 0; j < k; ++j) {
      row[j] -= scale * coeff_sum * std::exp(lp[static_cast<std::size_t>(j)]);
    }
    row[c] += scale * coeff_c;
    row[r] += scale * coeff_r;
  }
  return grad;
}

double check_gradient(const ToyPolicy& policy,
                      const std::vector<PreferenceExample>& dataset,
                      const LossParams& params, double epsilon) {
  if (epsilon < 1e-6 || epsilon > 1e-2) {
    throw PreconditionViolation("epsilon must be in [1e-6, 1e-2]");
  }
  const std::vector<double> analytic = dpo_nll_grad(policy, dataset, params);
  ToyPolicy probe = policy;
  double max_rel_error = 0.0;
  for (std::size_t i = 0; i < probe.logits().size(); ++i) {
    const double saved = probe.logits()[i];
    probe.logits()[i] = saved + epsilon;
    const double plus = dpo_nll_batch_loss(probe, dataset, params);
    probe.logits()[i] = saved - epsilon;
    const double minus = dpo_nll_batch_loss(probe, dataset, params);
    probe.logits()[i] = saved;
    const double numeric = (plus - minus) / (2.0 * epsilon);
    const double rel =
        std::abs(analytic[i] - numeric) / std::max(1e-8, std::abs(numeric));
    max_rel_error = std::max(max_rel_error, rel);
  }
  return max_rel_error;
}

double pairwise_accuracy(const ToyPolicy& policy,
                         const std::vector<PreferenceExample>& dataset) {
  if (dataset.empty()) throw EmptyDataset("accuracy over an empty dataset");
  std::size_t correct = 0;
  for (const PreferenceExample& example : dataset) {
    if (policy.logit(example.prompt, example.chosen) >
        policy.logit(example.prompt, example.rejected)) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

TrainReport train_toy(ToyPolicy& policy,
                      const std::vector<PreferenceExample>& dataset,
                      const LossParams& params, int steps, double lr) {
  if (steps < 0) throw PreconditionViolation("steps must be >= 0");
  if (lr <= 0.0) throw PreconditionViolation("lr must be > 0");
  TrainReport report;
  report.loss_curve.reserve(static_cast<std::size_t>(steps) + 1);
  report.accuracy_curve.reserve(static_cast<std::size_t>(steps) + 1);

  auto record = [&](int step) {
    const double loss = dpo_nll_batch_loss(policy, dataset, params);
    if (!std::isfinite(loss)) {
      throw NonFiniteLoss("loss became non-finite at step " + std::to_string(step));
    }
    report.loss_curve.push_back(loss);
    report.accuracy_curve.push_back(pairwise_accuracy(policy, dataset));
  };

  record(0);
  for (int step = 0; step < steps; ++step) {
    const std::vector<double> grad = dpo_nll_grad(policy, dataset, params);
    for (std::size_t i = 0; i < grad.size(); ++i) {
      policy.logits()[i] -= lr * grad[i];
    }
    record(step + 1);
  }
  report.final_loss = report.loss_curve.back();
  report.final_accuracy = report.accuracy_curve.back();
  return report;
}

ToyDataset toy_dataset_from_jsonl(std::istream& in) {
  ToyDataset dataset;
  std::map<std::string, std::size_t> prompt_index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw IoError("preferences line " + std::to_string(line_no) +
                    " is not valid JSON: " + ex.what());
    }
    std::string id, chosen, rejected;
    try {
      id = record.at("id").get<std::string>();
      chosen = record.at("chosen").get<std::string>();
      rejected = record.at("rejected").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw IoError("preferences line " + std::to_string(line_no) +
                    " needs id/chosen/rejected strings");
    }
    if (chosen == rejected) {
      ++dataset.pairs_dropped;
      continue;
    }
    auto [it, inserted] = prompt_index.try_emplace(id, dataset.prompt_ids.size());
    if (inserted) {
      dataset.prompt_ids.push_back(id);
      dataset.candidates.emplace_back();
    }
    const std::size_t prompt = it->second;
    auto candidate_index = [&](const std::string& text) {
      auto& pool = dataset.candidates[prompt];
      auto found = std::find(pool.begin(), pool.end(), text);
      if (found != pool.end()) return static_cast<int>(found - pool.begin());
      pool.push_back(text);
      return static_cast<int>(pool.size()) - 1;
    };
    PreferenceExample example;
    example.prompt = static_cast<int>(prompt);
    example.chosen = candidate_index(chosen);
    example.rejected = candidate_index(rejected);
    dataset.examples.push_back(example);
  }
  if (dataset.examples.empty()) {
    throw EmptyDataset("no usable preference pairs in input");
  }
  std::size_t widest = 2;
  for (const auto& pool : dataset.candidates) {
    widest = std::max(widest, pool.size());
  }
  dataset.candidates_per_prompt = static_cast<int>(widest);
  return dataset;
}

}  // namespace sumpref
