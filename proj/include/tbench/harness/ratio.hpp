#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tbench/stats/descriptive.hpp"
#include "tbench/stats/tests.hpp"

namespace tbench {

/// Accuracy samples collected for one candidate test ratio by repeated
/// fresh-split experiments, plus the SEM convergence record.
struct RatioCandidate {
  std::string label;       // e.g. "10%"
  double test_ratio = 0.0;
  stats::SampleGroup samples;
  int chosen_n = 0;
  bool converged = false;  // sem <= tau reached before n_max
  std::vector<stats::SemCurvePoint> sem_curve;

  std::string to_json() const;
  static RatioCandidate from_json(const std::string& json_text);
};

/// Runs one split+train+test experiment and returns the test accuracy.
/// Each (ratio, replicate) pair must derive its own seed.
using RatioTrainerFn =
    std::function<double(const std::string& label, double ratio, int replicate)>;

/// Repeats the experiment per ratio until the SEM of the collected
/// accuracies drops to tau (and n >= n_min), or n_max is reached — in which
/// case the candidate is flagged unconverged but kept. Ratios run as
/// independent parallel tasks.
std::vector<RatioCandidate> sample_size_procedure(
    const std::vector<std::pair<std::string, double>>& ratios,
    const RatioTrainerFn& trainer, double tau, int n_min, int n_max,
    int parallelism);

struct TrailRecord {
  std::string stage;    // normality | homogeneity | omnibus | pairwise
  std::string subject;  // group label, test name, or "A vs B"
  stats::TestResult result;
};

enum class DecisionBranch { parametric, nonparametric };
const char* to_string(DecisionBranch b);

struct RatioDecision {
  std::vector<TrailRecord> trail;
  DecisionBranch branch = DecisionBranch::parametric;
  bool homogeneous = true;
  bool omnibus_significant = false;
  std::vector<std::string> candidate_labels;  // statistically indistinguishable best
  std::string selected_label;
  double selected_ratio = 0.0;

  std::string to_json() const;
};

/// The tests the decision consumes, abstracted so the logic can run either
/// on live sample groups or on a recorded trail of p-values.
class RatioTestRunner {
public:
  virtual ~RatioTestRunner() = default;
  virtual stats::TestResult normality(std::size_t group) = 0;
  virtual stats::TestResult homogeneity() = 0;
  virtual stats::TestResult omnibus(DecisionBranch branch, bool homogeneous) = 0;
  virtual stats::TestResult pairwise(std::size_t top, std::size_t other,
                                     DecisionBranch branch, bool homogeneous) = 0;
};

struct GroupSummary {
  std::string label;
  double ratio = 0.0;
  double mean = 0.0;
};

/// Decision procedure: per-group normality; if all normal, homogeneity then
/// ANOVA (Welch variant when heteroscedastic); otherwise Kruskal-Wallis.
/// If the omnibus is significant, the top-mean group is compared one-tailed
/// against every other (t test or Mann-Whitney per branch); the candidate
/// set is the top group plus every group the comparison could not separate.
/// Otherwise all groups are candidates. Selection: smallest test ratio.
RatioDecision select_split_ratio_with_runner(const std::vector<GroupSummary>& groups,
                                             RatioTestRunner& runner, double alpha);

/// Live variant computing the tests from the candidates' samples.
RatioDecision select_split_ratio(const std::vector<RatioCandidate>& candidates,
                                 double alpha);

/// Replays a recorded trail (JSON with per-group normality p-values, a
/// homogeneity p, an omnibus p, and pairwise p per non-top group).
class RecordedTestRunner : public RatioTestRunner {
public:
  static RecordedTestRunner from_json(const std::string& json_text);
  const std::vector<GroupSummary>& groups() const { return groups_; }
  double alpha() const { return alpha_; }

  stats::TestResult normality(std::size_t group) override;
  stats::TestResult homogeneity() override;
  stats::TestResult omnibus(DecisionBranch branch, bool homogeneous) override;
  stats::TestResult pairwise(std::size_t top, std::size_t other,
                             DecisionBranch branch, bool homogeneous) override;

private:
  std::vector<GroupSummary> groups_;
  double alpha_ = stats::kDefaultAlpha;
  std::vector<double> normality_p_;
  double homogeneity_p_ = 1.0;
  double omnibus_p_ = 1.0;
  std::vector<double> pairwise_p_;  // indexed by group; top's entry unused
};

}  // namespace tbench
