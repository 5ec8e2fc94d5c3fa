// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sumpref/config.hpp"
#include "sumpref/critique.hpp"
#include "sumpref/pipeline.hpp"
#include "sumpref/prefloss.hpp"
#include "sumpref/prompts.hpp"
#include "sumpref/scripted_mock.hpp"

using namespace sumpref;
using nlohmann::json;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
  if (!condition) throw Failure(message);
}

std::string fixture(const std::string& name) {
  return std::string(FIXTURES_DIR) + "/" + name;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// --- 1. fine-grained score equals the brute-force non-entailed fraction ---

void check_fine_grained_exactness() {
  std::mt19937 rng(101);
  const Document document{"doc", "Context text for every NLI call."};
  const Summary summary{"The summary under critique.", SummaryOrigin::Initial, 0};
  const char* labels[] = {"Entailed", "Neutral", "Contradicted"};
  const PromptSet prompts;

  for (int round = 0; round < 1000; ++round) {
    const std::size_t m = 1 + rng() % 100;
    std::vector<int> verdicts(m);
    json playbook = json::array();
    std::string facts = "Facts:";
    for (std::size_t j = 0; j < m; ++j) {
      facts += "\n" + std::to_string(j + 1) + ". Fact " + std::to_string(j + 1) + ".";
    }
    playbook.push_back({{"tag", "facts/doc/0"}, {"text", facts}});
    for (std::size_t j = 0; j < m; ++j) {
      verdicts[j] = static_cast<int>(rng() % 3);
      playbook.push_back({{"tag", "nli/doc/0/" + std::to_string(j + 1)},
                          {"text", labels[verdicts[j]]}});
    }
    ScriptedMockClient mock(playbook);
    Critic critic(mock, prompts);
    const CritiqueResult result = critic.critique_fine_grained(document, summary);

    std::size_t not_entailed = 0;
    for (int verdict : verdicts) {
      if (verdict != 0) ++not_entailed;
    }
    const double expected =
        static_cast<double>(not_entailed) / static_cast<double>(m);
    require(result.score.value() == expected,
            "score mismatch at round " + std::to_string(round));
    require(result.fact_verdicts.size() == m, "verdict count mismatch");
  }
}

// --- 2. binary score sign and antisymmetry ---

void check_binary_sign_antisymmetry() {
  std::mt19937 rng(202);
  std::uniform_real_distribution<double> dist(-9.0, -1e-3);
  const Document document{"doc", "Context."};
  const Summary summary{"Summary.", SummaryOrigin::Initial, 0};
  const PromptSet prompts;

  auto critique_with = [&](double lp_yes, double lp_no) {
    const json playbook = json::array(
        {{{"tag", "critique/doc/0"},
          {"text", "?"},
          {"top_logprobs", {{"Yes", lp_yes}, {"No", lp_no}}}}});
    ScriptedMockClient mock(playbook);
    Critic critic(mock, prompts);
    return critic.critique_binary(document, summary);
  };

  for (int round = 0; round < 1000; ++round) {
    const double lp_yes = dist(rng);
    const double lp_no = dist(rng);
    const CritiqueResult forward = critique_with(lp_yes, lp_no);
    const CritiqueResult swapped = critique_with(lp_no, lp_yes);
    require((forward.score.value() > 0.0) == (lp_yes > lp_no),
            "sign mismatch at round " + std::to_string(round));
    require(forward.score.value() == -swapped.score.value(),
            "antisymmetry violated at round " + std::to_string(round));
    require(reports_unfaithfulness(forward.feedback) ==
                (forward.score.value() > 0.0),
            "feedback/sign mismatch");
  }
}

// --- shared construct helper for criteria 3 and 8 ---

std::string run_construct(int workers, SelectionStrategy selection) {
  RunConfig config;
  config.backend.kind = BackendKind::ScriptedMock;
  config.backend.script_path = fixture("accept_script.json");
  config.backend.max_concurrency = workers > 1 ? 8 : 1;
  config.pipeline.samples_per_doc = 4;
  config.pipeline.critique_strategy = CritiqueStrategy::Binary;
  config.pipeline.selection = selection;
  config.pipeline.workers = workers;
  config.pipeline.rng_seed = 7;
  refresh_fingerprint(config);

  auto client = make_client(config.backend);
  const PromptSet prompts;
  Pipeline pipeline(*client, prompts, config.pipeline);

  std::ifstream corpus_in(fixture("accept_corpus.jsonl"));
  const std::vector<Document> corpus = load_corpus_jsonl(corpus_in);

  std::ostringstream preferences;
  ConstructSinks sinks{&preferences, nullptr, nullptr};
  pipeline.construct_dataset(corpus, sinks, config.fingerprint);
  return preferences.str();
}

// --- 3. Algorithm-1 fixture run matches the hand-computed golden file ---

void check_construct_golden() {
  const std::string produced = run_construct(2, SelectionStrategy::Extreme);
  const std::string golden = read_file(fixture("accept_golden.jsonl"));
  require(produced == golden,
          "construct output differs from the golden file (" +
              std::to_string(produced.size()) + " vs " +
              std::to_string(golden.size()) + " bytes)");
}

// --- 4. selection ops match brute-force argmin/argmax scans ---

void check_selection_oracle() {
  std::mt19937 rng(404);
  const Document document{"p", "pool document"};

  for (int round = 0; round < 1000; ++round) {
    const std::size_t size = 1 + rng() % 64;
    std::vector<double> scores;
    TripletCandidatePool pool;
    pool.document_id = "p";
    for (std::size_t i = 0; i < size; ++i) {
      // Coarse lattice so ties occur regularly.
      const double score = (1.0 + static_cast<double>(rng() % 16)) / 8.0;
      scores.push_back(score);
      const int index = static_cast<int>(i);
      pool.entries.push_back(
          PoolEntry{Summary{"i" + std::to_string(i), SummaryOrigin::Initial, index},
                    Summary{"r" + std::to_string(i), SummaryOrigin::Refined, index},
                    HallucinationScore(score),
                    CritiqueFeedback{"The summary is unfaithful.", {}}});
    }

    // Independent scan: first-occurrence argmin and argmax.
    std::size_t bf_min = 0;
    std::size_t bf_max = 0;
    for (std::size_t i = 1; i < size; ++i) {
      if (scores[i] < scores[bf_min]) bf_min = i;
      if (scores[i] > scores[bf_max]) bf_max = i;
    }

    const PreferenceTriplet triplet =
        select_extreme(pool, document, static_cast<int>(size),
                       CritiqueStrategy::Binary);
    require(triplet.chosen == "r" + std::to_string(bf_min),
            "extreme chosen index mismatch at round " + std::to_string(round));
    require(triplet.rejected == "i" + std::to_string(bf_max),
            "extreme rejected index mismatch at round " + std::to_string(round));

    const auto picked = select_critique_only_indices(scores);
    if (scores[bf_min] == scores[bf_max]) {
      require(!picked.has_value(), "critique-only should be absent on flat scores");
    } else {
      require(picked.has_value(), "critique-only unexpectedly absent");
      require(picked->first == bf_min && picked->second == bf_max,
              "critique-only index mismatch at round " + std::to_string(round));
    }
  }
}

// --- 5. Eq-3 point values ---

void check_loss_point_values() {
  const double zero_margin =
      dpo_nll_loss(LogProbPair{-1.0, -1.0, -1.0, -1.0}, LossParams{1.0, 0.0});
  require(std::abs(zero_margin - 0.6931471805599453) < 1e-9,
          "zero-margin loss is not log 2");

  const double margin_two =
      dpo_nll_loss(LogProbPair{-0.5, -1.0, -2.5, -1.0}, LossParams{1.0, 0.0});
  require(std::abs(margin_two - 0.126928) < 1e-6,
          "margin-2 loss is not -log sigmoid(2)");
}

// --- 6. analytic gradient vs central finite differences ---

void check_gradient_oracle() {
  std::mt19937 rng(606);
  std::normal_distribution<double> dist(0.0, 1.0);
  double worst = 0.0;
  for (int round = 0; round < 100; ++round) {
    const int prompts = 1 + static_cast<int>(rng() % 5);
    const int k = 2 + static_cast<int>(rng() % 4);
    std::vector<double> logits(static_cast<std::size_t>(prompts) * k);
    for (double& value : logits) value = dist(rng);
    ToyPolicy policy(prompts, k, logits);
    for (double& value : policy.logits()) value += 0.5 * dist(rng);

    std::vector<PreferenceExample> dataset;
    for (int prompt = 0; prompt < prompts; ++prompt) {
      const int chosen = static_cast<int>(rng() % k);
      int rejected = static_cast<int>(rng() % k);
      while (rejected == chosen) rejected = static_cast<int>(rng() % k);
      dataset.push_back(PreferenceExample{prompt, chosen, rejected});
    }
    const LossParams params{0.05 + (rng() % 100) / 50.0, (rng() % 100) / 50.0};
    worst = std::max(worst, check_gradient(policy, dataset, params, 1e-4));
  }
  require(worst < 1e-5, "max relative gradient error " + std::to_string(worst));
}

// --- 7. toy preference learning on the synthetic benchmark ---

void check_toy_training() {
  std::mt19937 rng(42);
  std::normal_distribution<double> dist(0.0, 0.3);
  const int prompts = 50;
  const int k = 4;
  std::vector<double> logits(static_cast<std::size_t>(prompts) * k);
  for (double& value : logits) value = dist(rng);
  ToyPolicy policy(prompts, k, logits);

  std::vector<PreferenceExample> dataset;
  for (int prompt = 0; prompt < prompts; ++prompt) {
    const int chosen = static_cast<int>(rng() % k);
    int rejected = static_cast<int>(rng() % k);
    while (rejected == chosen) rejected = static_cast<int>(rng() % k);
    dataset.push_back(PreferenceExample{prompt, chosen, rejected});
  }

  const TrainReport report =
      train_toy(policy, dataset, LossParams{0.1, 1.0}, 500, 0.1);
  require(report.final_accuracy >= 0.95,
          "final accuracy " + std::to_string(report.final_accuracy));
  require(report.final_loss < report.loss_curve.front(),
          "final loss did not drop below the initial loss");
}

// --- 8. determinism under concurrency ---

void check_worker_determinism() {
  const std::string extreme_1 = run_construct(1, SelectionStrategy::Extreme);
  const std::string extreme_8 = run_construct(8, SelectionStrategy::Extreme);
  require(extreme_1 == extreme_8, "extreme output differs across worker counts");

  const std::string random_1 = run_construct(1, SelectionStrategy::Random);
  const std::string random_8 = run_construct(8, SelectionStrategy::Random);
  require(random_1 == random_8, "random output differs across worker counts");
  require(!random_1.empty(), "random selection wrote nothing");
}

// --- 9. preference JSONL round-trips losslessly ---

void check_round_trip() {
  const std::string golden = read_file(fixture("accept_golden.jsonl"));
  std::istringstream lines(golden);
  std::string line;
  std::string reserialized;
  while (std::getline(lines, line)) {
    const PreferenceTriplet triplet = triplet_from_jsonl(line);
    reserialized += triplet_to_jsonl(triplet) + "\n";
  }
  require(reserialized == golden, "round-tripped bytes differ from the golden file");
}

// --- 10. default prompt templates byte-match their fixtures ---

void check_prompt_fidelity() {
  const PromptSet prompts;
  for (TemplateName name : kAllTemplates) {
    const std::string golden =
        read_file(fixture(std::string("prompts/") + to_string(name) + ".txt"));
    require(prompts.get(name).body == golden,
            std::string("template body mismatch: ") + to_string(name));
  }
}

struct Criterion {
  const char* name;
  double budget_s;  // 0 = no stated budget
  std::function<void()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"fine-grained score equals brute-force fraction (1000 sets)", 1.0,
       check_fine_grained_exactness},
      {"binary score sign and exact antisymmetry (1000 pairs)", 1.0,
       check_binary_sign_antisymmetry},
      {"fixture corpus reproduces the golden preference file", 5.0,
       check_construct_golden},
      {"selection matches brute-force argmin/argmax with ties (1000 pools)", 1.0,
       check_selection_oracle},
      {"loss point values: log 2 and -log sigmoid(2)", 0.0,
       check_loss_point_values},
      {"analytic gradient vs central differences < 1e-5 (100 instances)", 10.0,
       check_gradient_oracle},
      {"toy trainer reaches >= 0.95 pairwise accuracy", 10.0, check_toy_training},
      {"construct output identical with 1 and 8 workers", 10.0,
       check_worker_determinism},
      {"preference JSONL round-trips byte-identically", 0.0, check_round_trip},
      {"default templates byte-match the transcribed fixtures", 0.0,
       check_prompt_fidelity},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const Criterion& criterion = criteria[i];
    const auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      criterion.run();
    } catch (const std::exception& ex) {
      error = ex.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (error.empty() && criterion.budget_s > 0.0 &&
        elapsed > criterion.budget_s) {
      error = "over time budget (" + std::to_string(elapsed) + "s > " +
              std::to_string(criterion.budget_s) + "s)";
    }
    if (error.empty()) {
      std::printf("[%2zu/10] PASS  %s (%.2fs)\n", i + 1, criterion.name, elapsed);
    } else {
      std::printf("[%2zu/10] FAIL  %s: %s\n", i + 1, criterion.name,
                  error.c_str());
      ++failures;
    }
  }
  if (failures == 0) {
    std::printf("all 10 acceptance criteria passed\n");
  } else {
    std::printf("%d acceptance criteria FAILED\n", failures);
  }
  return failures == 0 ? 0 : 1;
}
