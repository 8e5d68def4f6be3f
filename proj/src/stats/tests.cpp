#include "tbench/stats/tests.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "tbench/error.hpp"
#include "tbench/stats/special.hpp"

namespace tbench::stats {

namespace {

double poly(const double* c, int n, double x) {
  double v = c[0];
  double xp = 1.0;
  for (int i = 1; i < n; ++i) {
    xp *= x;
    v += c[i] * xp;
  }
  return v;
}

void require_group_sizes(std::span<const SampleGroup> groups, std::size_t min_n,
                         const char* who) {
  if (groups.size() < 2)
    throw DegenerateSampleError(std::string(who) + ": needs >= 2 groups");
  for (const auto& g : groups) {
    if (g.values.size() < min_n)
      throw DegenerateSampleError(std::string(who) + ": group '" + g.label +
                                  "' has fewer than " + std::to_string(min_n) +
                                  " values");
  }
}

// Midranks of the pooled sample plus the tie-size list (t_j counts).
std::vector<double> midranks(const std::vector<double>& pooled_sorted,
                             std::vector<std::size_t>* tie_sizes) {
  std::size_t n = pooled_sorted.size();
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled_sorted[j + 1] == pooled_sorted[i]) ++j;
    double r = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) ranks[k] = r;
    if (tie_sizes && j > i) tie_sizes->push_back(j - i + 1);
    i = j + 1;
  }
  return ranks;
}

double rank_of(const std::vector<double>& pooled_sorted,
               const std::vector<double>& ranks, double value) {
  auto it = std::lower_bound(pooled_sorted.begin(), pooled_sorted.end(), value);
  return ranks[static_cast<std::size_t>(it - pooled_sorted.begin())];
}

}  // namespace

std::string TestResult::to_json() const {
  nlohmann::json j;
  j["test"] = test_name;
  j["statistic"] = statistic;
  j["p_value"] = p_value;
  j["alpha"] = alpha;
  j["reject_null"] = reject_null;
  return j.dump();
}

TestResult TestResult::from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  TestResult r;
  r.test_name = j.at("test").get<std::string>();
  r.statistic = j.at("statistic").get<double>();
  r.p_value = j.at("p_value").get<double>();
  r.alpha = j.at("alpha").get<double>();
  r.reject_null = j.at("reject_null").get<bool>();
  return r;
}

TestResult make_result(std::string name, double statistic, double p_value,
                       double alpha) {
  TestResult r;
  r.test_name = std::move(name);
  r.statistic = statistic;
  r.p_value = std::clamp(p_value, 0.0, 1.0);
  r.alpha = alpha;
  r.reject_null = r.p_value < alpha;
  return r;
}

// Royston (1995), applied statistics algorithm AS R94. Coefficient
// polynomials and the three p-value regimes (exact n=3, gamma transform for
// n<=11, lognormal for n>=12) follow the published algorithm.
TestResult shapiro_wilk(const SampleGroup& group, double alpha) {
  static const double c1[6] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
  static const double c2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
  static const double c3[4] = {0.5440, -0.39978, 0.025054, -6.714e-4};
  static const double c4[4] = {1.3822, -0.77857, 0.062767, -0.0020322};
  static const double c5[4] = {-1.5861, -0.31082, -0.083751, 0.0038915};
  static const double c6[3] = {-0.4803, -0.082676, 0.0030302};
  static const double g[2] = {-2.273, 0.459};

  std::size_t n = group.values.size();
  if (n < 3 || n > 5000)
    throw DegenerateSampleError("shapiro_wilk: n must be in [3, 5000], got " +
                                std::to_string(n));

  std::vector<double> x = group.values;
  std::sort(x.begin(), x.end());
  double range = x.back() - x.front();
  if (range <= 0.0)
    throw DegenerateSampleError("shapiro_wilk: all values identical in group '" +
                                group.label + "'");

  double an = static_cast<double>(n);
  std::size_t nn2 = n / 2;
  std::vector<double> a(nn2);

  if (n == 3) {
    a[0] = std::sqrt(0.5);
  } else {
    double summ2 = 0.0;
    for (std::size_t i = 0; i < nn2; ++i) {
      a[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / (an + 0.25));
      summ2 += a[i] * a[i];
    }
    summ2 *= 2.0;
    double ssumm2 = std::sqrt(summ2);
    double rsn = 1.0 / std::sqrt(an);
    double a1 = poly(c1, 6, rsn) - a[0] / ssumm2;
    std::size_t i1;
    double fac;
    if (n > 5) {
      i1 = 2;
      double a2 = -a[1] / ssumm2 + poly(c2, 6, rsn);
      fac = std::sqrt((summ2 - 2.0 * a[0] * a[0] - 2.0 * a[1] * a[1]) /
                      (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[1] = a2;
    } else {
      i1 = 1;
      fac = std::sqrt((summ2 - 2.0 * a[0] * a[0]) / (1.0 - 2.0 * a1 * a1));
    }
    a[0] = a1;
    for (std::size_t i = i1; i < nn2; ++i) a[i] = -a[i] / fac;
  }

  // W as the squared correlation between the sorted data and the
  // antisymmetric coefficient vector.
  double sa = 0.0, sx = 0.0;
  {
    std::size_t j = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      sx += x[i] / range;
      if (i != j) {
        double sign = i < j ? -1.0 : 1.0;
        sa += sign * a[std::min(i, j)];
      }
      if (j == 0) break;
      --j;
    }
  }
  sa /= static_cast<double>(n);
  sx /= static_cast<double>(n);
  double ssa = 0.0, ssx = 0.0, sax = 0.0;
  {
    std::size_t j = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      double asa;
      if (i != j) {
        double sign = i < j ? -1.0 : 1.0;
        asa = sign * a[std::min(i, j)] - sa;
      } else {
        asa = -sa;
      }
      double xsx = x[i] / range - sx;
      ssa += asa * asa;
      ssx += xsx * xsx;
      sax += asa * xsx;
      if (j == 0) break;
      --j;
    }
  }
  double ssassx = std::sqrt(ssa * ssx);
  double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
  double w = 1.0 - w1;

  double pw;
  if (n == 3) {
    constexpr double kPi6 = 1.90985931710274;   // 6/pi
    constexpr double kStqr = 1.04719755119660;  // asin(sqrt(3/4))
    pw = kPi6 * (std::asin(std::sqrt(w)) - kStqr);
    pw = std::clamp(pw, 0.0, 1.0);
  } else {
    double y = std::log(w1);
    double xx = std::log(an);
    double m, s;
    if (n <= 11) {
      double gamma = poly(g, 2, an);
      if (y >= gamma) {
        pw = 1e-19;
        return make_result("shapiro_wilk", w, pw, alpha);
      }
      y = -std::log(gamma - y);
      m = poly(c3, 4, an);
      s = std::exp(poly(c4, 4, an));
    } else {
      m = poly(c5, 4, xx);
      s = std::exp(poly(c6, 3, xx));
    }
    pw = 1.0 - normal_cdf((y - m) / s);
  }
  return make_result("shapiro_wilk", w, pw, alpha);
}

TestResult levene(std::span<const SampleGroup> groups, double alpha) {
  require_group_sizes(groups, 2, "levene");
  std::size_t k = groups.size();
  double total_n = 0.0;

  // Z_ij = |x_ij - group mean| (mean-centered variant).
  std::vector<std::vector<double>> z(k);
  std::vector<double> zbar_i(k);
  double zbar = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double mi = mean(groups[i].values);
    z[i].reserve(groups[i].values.size());
    for (double v : groups[i].values) z[i].push_back(std::fabs(v - mi));
    zbar_i[i] = mean(z[i]);
    zbar += zbar_i[i] * static_cast<double>(z[i].size());
    total_n += static_cast<double>(z[i].size());
  }
  zbar /= total_n;

  double numer = 0.0, denom = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    numer += static_cast<double>(z[i].size()) * (zbar_i[i] - zbar) * (zbar_i[i] - zbar);
    for (double v : z[i]) denom += (v - zbar_i[i]) * (v - zbar_i[i]);
  }
  if (denom <= 0.0)
    throw DegenerateSampleError("levene: zero within-group spread everywhere");

  double kk = static_cast<double>(k);
  double w = (total_n - kk) / (kk - 1.0) * numer / denom;
  double p = 1.0 - f_cdf(w, kk - 1.0, total_n - kk);
  return make_result("levene", w, p, alpha);
}

TestResult anova_oneway(std::span<const SampleGroup> groups, double alpha) {
  require_group_sizes(groups, 2, "anova");
  std::size_t k = groups.size();
  double total_n = 0.0, grand_sum = 0.0;
  for (const auto& gr : groups) {
    total_n += static_cast<double>(gr.values.size());
    for (double v : gr.values) grand_sum += v;
  }
  double grand_mean = grand_sum / total_n;

  double ss_between = 0.0, ss_within = 0.0;
  for (const auto& gr : groups) {
    double mi = mean(gr.values);
    double ni = static_cast<double>(gr.values.size());
    ss_between += ni * (mi - grand_mean) * (mi - grand_mean);
    for (double v : gr.values) ss_within += (v - mi) * (v - mi);
  }
  if (ss_within <= 0.0)
    throw DegenerateSampleError("anova: zero within-group variance everywhere");

  double kk = static_cast<double>(k);
  double f = (ss_between / (kk - 1.0)) / (ss_within / (total_n - kk));
  double p = 1.0 - f_cdf(f, kk - 1.0, total_n - kk);
  return make_result("anova_oneway", f, p, alpha);
}

TestResult welch_anova(std::span<const SampleGroup> groups, double alpha) {
  require_group_sizes(groups, 2, "welch_anova");
  std::size_t k = groups.size();
  double kk = static_cast<double>(k);

  double w_sum = 0.0, xw_sum = 0.0;
  std::vector<double> w(k), m(k), n(k);
  for (std::size_t i = 0; i < k; ++i) {
    n[i] = static_cast<double>(groups[i].values.size());
    m[i] = mean(groups[i].values);
    double s = sample_std(groups[i].values);
    if (s <= 0.0)
      throw DegenerateSampleError("welch_anova: zero variance in group '" +
                                  groups[i].label + "'");
    w[i] = n[i] / (s * s);
    w_sum += w[i];
    xw_sum += w[i] * m[i];
  }
  double mw = xw_sum / w_sum;

  double a = 0.0, lambda = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    a += w[i] * (m[i] - mw) * (m[i] - mw);
    double frac = (1.0 - w[i] / w_sum);
    lambda += frac * frac / (n[i] - 1.0);
  }
  a /= (kk - 1.0);
  double b = 1.0 + 2.0 * (kk - 2.0) / (kk * kk - 1.0) * lambda;
  double f = a / b;
  double df2 = (kk * kk - 1.0) / (3.0 * lambda);
  double p = 1.0 - f_cdf(f, kk - 1.0, df2);
  return make_result("welch_anova", f, p, alpha);
}

TestResult t_test_one_tailed(const SampleGroup& a, const SampleGroup& b,
                             double alpha, bool pooled) {
  if (a.values.size() < 2 || b.values.size() < 2)
    throw DegenerateSampleError("t_test: both groups need n >= 2");
  double na = static_cast<double>(a.values.size());
  double nb = static_cast<double>(b.values.size());
  double ma = mean(a.values), mb = mean(b.values);
  double sa = sample_std(a.values), sb = sample_std(b.values);

  double t, df;
  if (pooled) {
    double sp2 = ((na - 1.0) * sa * sa + (nb - 1.0) * sb * sb) / (na + nb - 2.0);
    if (sp2 <= 0.0)
      throw DegenerateSampleError("t_test: zero pooled variance");
    t = (ma - mb) / std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
    df = na + nb - 2.0;
  } else {
    double va = sa * sa / na, vb = sb * sb / nb;
    if (va + vb <= 0.0)
      throw DegenerateSampleError("t_test: zero variance in both groups");
    t = (ma - mb) / std::sqrt(va + vb);
    df = (va + vb) * (va + vb) /
         (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  }
  double p = 1.0 - student_t_cdf(t, df);
  return make_result(pooled ? "t_test_one_tailed" : "welch_t_one_tailed", t, p,
                     alpha);
}

TestResult mann_whitney_one_tailed(const SampleGroup& a, const SampleGroup& b,
                                   double alpha) {
  if (a.values.size() < 2 || b.values.size() < 2)
    throw DegenerateSampleError("mann_whitney: both groups need n >= 2");
  double na = static_cast<double>(a.values.size());
  double nb = static_cast<double>(b.values.size());
  double n = na + nb;

  std::vector<double> pooled;
  pooled.reserve(a.values.size() + b.values.size());
  pooled.insert(pooled.end(), a.values.begin(), a.values.end());
  pooled.insert(pooled.end(), b.values.begin(), b.values.end());
  std::sort(pooled.begin(), pooled.end());
  std::vector<std::size_t> ties;
  std::vector<double> ranks = midranks(pooled, &ties);

  double r1 = 0.0;
  for (double v : a.values) r1 += rank_of(pooled, ranks, v);
  double u1 = r1 - na * (na + 1.0) / 2.0;

  double tie_term = 0.0;
  for (std::size_t t : ties) {
    double td = static_cast<double>(t);
    tie_term += td * td * td - td;
  }
  double var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (var <= 0.0)
    throw DegenerateSampleError("mann_whitney: all pooled values identical");

  // Continuity correction pulls the statistic half a step toward the mean.
  double z = (u1 - na * nb / 2.0 - 0.5) / std::sqrt(var);
  double p = 1.0 - normal_cdf(z);
  return make_result("mann_whitney_one_tailed", u1, p, alpha);
}

TestResult kruskal_wallis(std::span<const SampleGroup> groups, double alpha) {
  require_group_sizes(groups, 2, "kruskal_wallis");
  std::size_t k = groups.size();

  std::vector<double> pooled;
  for (const auto& g : groups)
    pooled.insert(pooled.end(), g.values.begin(), g.values.end());
  double n = static_cast<double>(pooled.size());
  std::sort(pooled.begin(), pooled.end());
  std::vector<std::size_t> ties;
  std::vector<double> ranks = midranks(pooled, &ties);

  double h = 0.0;
  for (const auto& g : groups) {
    double ri = 0.0;
    for (double v : g.values) ri += rank_of(pooled, ranks, v);
    h += ri * ri / static_cast<double>(g.values.size());
  }
  h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);

  double tie_term = 0.0;
  for (std::size_t t : ties) {
    double td = static_cast<double>(t);
    tie_term += td * td * td - td;
  }
  double correction = 1.0 - tie_term / (n * n * n - n);
  if (correction <= 0.0)
    throw DegenerateSampleError("kruskal_wallis: all pooled values identical");
  h /= correction;

  double p = 1.0 - chi2_cdf(h, static_cast<double>(k) - 1.0);
  return make_result("kruskal_wallis", h, p, alpha);
}

}  // namespace tbench::stats
