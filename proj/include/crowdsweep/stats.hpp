#pragma once

#include <string>
#include <vector>

namespace crowdsweep {

// 1-based ranks; tied values share the mean of the ranks they occupy.
std::vector<double> average_ranks(const std::vector<double>& values);

struct SpearmanResult {
  double rho = 0.0;
  double p_value = 1.0;
  bool defined = true;  // false when either input is constant after ranking
};

// Rank correlation with a two-sided t-approximation p-value.
// Requires xs.size() == ys.size() >= 3.
SpearmanResult spearman(const std::vector<double>& xs,
                        const std::vector<double>& ys);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// P(|T| >= |t|) for Student's t with dof degrees of freedom.
double student_t_two_sided_p(double t, double dof);

// One (method, level) aggregate of a metric. count == 0 marks an absent
// point (no trial produced the metric at that level).
struct LevelStat {
  std::string method;
  int level_index = 0;
  double mean = 0.0;
  double stddev = 0.0;
  int count = 0;
};

struct CorrelationReport {
  std::string factor;
  std::string metric;
  double rho = 0.0;
  double p_value = 1.0;
  bool defined = true;
  bool insufficient = false;  // fewer than 3 usable points
  int n_points = 0;
  std::string scheme = "method-by-level-means";
  std::vector<LevelStat> table;  // all input rows, absent ones included
};

// Pools (level_index, mean) points across methods and runs spearman on
// them. Absent points are dropped pairwise before correlating.
CorrelationReport correlate_experiment(std::vector<LevelStat> rows,
                                       std::string factor,
                                       std::string metric);

}  // namespace crowdsweep
