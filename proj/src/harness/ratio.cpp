#include "tbench/harness/ratio.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "tbench/error.hpp"
#include "tbench/harness/parallel.hpp"

namespace tbench {

namespace {

using nlohmann::json;

json trail_to_json(const std::vector<TrailRecord>& trail) {
  json arr = json::array();
  for (const auto& r : trail) {
    arr.push_back({{"stage", r.stage},
                   {"subject", r.subject},
                   {"result", json::parse(r.result.to_json())}});
  }
  return arr;
}

}  // namespace

const char* to_string(DecisionBranch b) {
  return b == DecisionBranch::parametric ? "parametric" : "nonparametric";
}

std::string RatioCandidate::to_json() const {
  json j;
  j["label"] = label;
  j["test_ratio"] = test_ratio;
  j["accuracies"] = samples.values;
  j["chosen_n"] = chosen_n;
  j["converged"] = converged;
  json curve = json::array();
  for (const auto& p : sem_curve) curve.push_back({{"n", p.n}, {"sem", p.sem}});
  j["sem_curve"] = curve;
  return j.dump();
}

RatioCandidate RatioCandidate::from_json(const std::string& text) {
  json j = json::parse(text);
  RatioCandidate c;
  c.label = j.at("label").get<std::string>();
  c.test_ratio = j.at("test_ratio").get<double>();
  c.samples.label = c.label;
  c.samples.values = j.at("accuracies").get<std::vector<double>>();
  c.chosen_n = j.at("chosen_n").get<int>();
  c.converged = j.at("converged").get<bool>();
  for (const auto& p : j.at("sem_curve"))
    c.sem_curve.push_back({p.at("n").get<int>(), p.at("sem").get<double>()});
  return c;
}

std::vector<RatioCandidate> sample_size_procedure(
    const std::vector<std::pair<std::string, double>>& ratios,
    const RatioTrainerFn& trainer, double tau, int n_min, int n_max,
    int parallelism) {
  if (n_min < 3) throw ConfigError("sample_size_procedure: n_min must be >= 3");
  if (n_max < n_min) throw ConfigError("sample_size_procedure: n_max < n_min");
  if (tau <= 0.0) throw ConfigError("sample_size_procedure: tau must be > 0");

  return parallel_map<RatioCandidate>(
      ratios.size(), parallelism, [&](std::size_t i) {
        const auto& [label, ratio] = ratios[i];
        RatioCandidate c;
        c.label = label;
        c.test_ratio = ratio;
        c.samples.label = label;

        for (int rep = 0; rep < n_max; ++rep) {
          c.samples.values.push_back(trainer(label, ratio, rep));
          int n = static_cast<int>(c.samples.values.size());
          if (n >= n_min && stats::sem(c.samples.values) <= tau) {
            c.converged = true;
            break;
          }
        }
        c.chosen_n = static_cast<int>(c.samples.values.size());
        c.sem_curve = stats::sem_curve(c.samples.values);
        return c;
      });
}

std::string RatioDecision::to_json() const {
  json j;
  j["trail"] = trail_to_json(trail);
  j["branch"] = tbench::to_string(branch);
  j["homogeneous"] = homogeneous;
  j["omnibus_significant"] = omnibus_significant;
  j["candidate_labels"] = candidate_labels;
  j["selected_label"] = selected_label;
  j["selected_ratio"] = selected_ratio;
  return j.dump();
}

RatioDecision select_split_ratio_with_runner(const std::vector<GroupSummary>& groups,
                                             RatioTestRunner& runner, double alpha) {
  if (groups.size() < 2)
    throw ConfigError("select_split_ratio: need >= 2 candidate groups");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("select_split_ratio: alpha must be in (0,1)");

  RatioDecision d;

  bool all_normal = true;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    stats::TestResult r = runner.normality(i);
    d.trail.push_back({"normality", groups[i].label, r});
    if (r.reject_null) all_normal = false;
  }
  d.branch = all_normal ? DecisionBranch::parametric : DecisionBranch::nonparametric;

  if (d.branch == DecisionBranch::parametric) {
    stats::TestResult h = runner.homogeneity();
    d.trail.push_back({"homogeneity", "all groups", h});
    d.homogeneous = !h.reject_null;
  }
  stats::TestResult om = runner.omnibus(d.branch, d.homogeneous);
  d.trail.push_back({"omnibus", om.test_name, om});
  d.omnibus_significant = om.reject_null;

  std::size_t top = 0;
  for (std::size_t i = 1; i < groups.size(); ++i)
    if (groups[i].mean > groups[top].mean) top = i;

  std::vector<std::size_t> candidates;
  if (d.omnibus_significant) {
    candidates.push_back(top);
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (i == top) continue;
      stats::TestResult pr = runner.pairwise(top, i, d.branch, d.homogeneous);
      d.trail.push_back(
          {"pairwise", groups[top].label + " vs " + groups[i].label, pr});
      if (!pr.reject_null) candidates.push_back(i);
    }
    std::sort(candidates.begin(), candidates.end());
  } else {
    for (std::size_t i = 0; i < groups.size(); ++i) candidates.push_back(i);
  }

  std::size_t selected = candidates.front();
  for (std::size_t i : candidates)
    if (groups[i].ratio < groups[selected].ratio) selected = i;

  for (std::size_t i : candidates) d.candidate_labels.push_back(groups[i].label);
  d.selected_label = groups[selected].label;
  d.selected_ratio = groups[selected].ratio;
  return d;
}

namespace {

// Live runner backed by the stats module.
class SampleTestRunner : public RatioTestRunner {
public:
  SampleTestRunner(const std::vector<RatioCandidate>& candidates, double alpha)
      : alpha_(alpha) {
    for (const auto& c : candidates) groups_.push_back(c.samples);
  }

  stats::TestResult normality(std::size_t g) override {
    return stats::shapiro_wilk(groups_[g], alpha_);
  }
  stats::TestResult homogeneity() override {
    return stats::levene(groups_, alpha_);
  }
  stats::TestResult omnibus(DecisionBranch branch, bool homogeneous) override {
    if (branch == DecisionBranch::nonparametric)
      return stats::kruskal_wallis(groups_, alpha_);
    return homogeneous ? stats::anova_oneway(groups_, alpha_)
                       : stats::welch_anova(groups_, alpha_);
  }
  stats::TestResult pairwise(std::size_t top, std::size_t other,
                             DecisionBranch branch, bool homogeneous) override {
    if (branch == DecisionBranch::nonparametric)
      return stats::mann_whitney_one_tailed(groups_[top], groups_[other], alpha_);
    return stats::t_test_one_tailed(groups_[top], groups_[other], alpha_,
                                    /*pooled=*/homogeneous);
  }

private:
  std::vector<stats::SampleGroup> groups_;
  double alpha_;
};

}  // namespace

RatioDecision select_split_ratio(const std::vector<RatioCandidate>& candidates,
                                 double alpha) {
  for (const auto& c : candidates) {
    if (c.samples.values.size() < 3)
      throw DegenerateSampleError("select_split_ratio: candidate '" + c.label +
                                  "' has fewer than 3 samples");
  }
  std::vector<GroupSummary> groups;
  for (const auto& c : candidates)
    groups.push_back({c.label, c.test_ratio, stats::mean(c.samples.values)});
  SampleTestRunner runner(candidates, alpha);
  return select_split_ratio_with_runner(groups, runner, alpha);
}

RecordedTestRunner RecordedTestRunner::from_json(const std::string& text) {
  json j = json::parse(text);
  RecordedTestRunner r;
  if (j.contains("alpha")) r.alpha_ = j.at("alpha").get<double>();
  for (const auto& g : j.at("groups")) {
    GroupSummary s;
    s.label = g.at("label").get<std::string>();
    s.ratio = g.at("ratio").get<double>();
    s.mean = g.at("mean").get<double>();
    r.groups_.push_back(s);
  }
  r.normality_p_.resize(r.groups_.size());
  r.pairwise_p_.assign(r.groups_.size(), 1.0);
  for (std::size_t i = 0; i < r.groups_.size(); ++i) {
    const std::string& label = r.groups_[i].label;
    r.normality_p_[i] = j.at("normality_p").at(label).get<double>();
    if (j.at("pairwise_p").contains(label))
      r.pairwise_p_[i] = j.at("pairwise_p").at(label).get<double>();
  }
  r.homogeneity_p_ = j.at("homogeneity_p").get<double>();
  r.omnibus_p_ = j.at("omnibus_p").get<double>();
  return r;
}

stats::TestResult RecordedTestRunner::normality(std::size_t group) {
  return stats::make_result("recorded:normality", 0.0, normality_p_[group], alpha_);
}

stats::TestResult RecordedTestRunner::homogeneity() {
  return stats::make_result("recorded:homogeneity", 0.0, homogeneity_p_, alpha_);
}

stats::TestResult RecordedTestRunner::omnibus(DecisionBranch, bool) {
  return stats::make_result("recorded:omnibus", 0.0, omnibus_p_, alpha_);
}

stats::TestResult RecordedTestRunner::pairwise(std::size_t, std::size_t other,
                                               DecisionBranch, bool) {
  return stats::make_result("recorded:pairwise", 0.0, pairwise_p_[other], alpha_);
}

}  // namespace tbench
