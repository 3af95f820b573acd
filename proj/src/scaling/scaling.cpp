#include "lfqa/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <queue>
#include <set>

#include "lfqa/error.hpp"
#include "lfqa/optimize.hpp"
#include "lfqa/rng.hpp"
#include "lfqa/stats.hpp"

namespace lfqa {

int ComparisonMatrix::index_of(const std::string& id) const {
  const auto it = std::find(condition_ids.begin(), condition_ids.end(), id);
  return it == condition_ids.end() ? -1 : static_cast<int>(it - condition_ids.begin());
}

int ComparisonMatrix::intern(const std::string& id) {
  const int existing = index_of(id);
  if (existing >= 0) return existing;
  condition_ids.push_back(id);
  for (auto& row : counts) row.push_back(0);
  counts.emplace_back(condition_ids.size(), 0);
  return static_cast<int>(condition_ids.size()) - 1;
}

void ComparisonMatrix::add(const std::string& observer, int i, int j, int winner) {
  const int n = static_cast<int>(size());
  if (i < 0 || j < 0 || i >= n || j >= n || i == j || (winner != i && winner != j)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid comparison record");
  }
  observer_records.push_back({observer, i, j, winner});
  counts[winner][winner == i ? j : i] += 1;
}

ComparisonMatrix make_comparison_matrix(std::vector<std::string> condition_ids) {
  ComparisonMatrix cm;
  const std::size_t n = condition_ids.size();
  cm.condition_ids = std::move(condition_ids);
  cm.counts.assign(n, std::vector<int>(n, 0));
  return cm;
}

void recount(ComparisonMatrix& cm) {
  std::vector<ObserverRecord> records = std::move(cm.observer_records);
  cm.observer_records.clear();
  cm.counts.assign(cm.size(), std::vector<int>(cm.size(), 0));
  for (const ObserverRecord& r : records) cm.add(r.observer_id, r.i, r.j, r.winner);
}

void check_connected(const ComparisonMatrix& cm) {
  const std::size_t n = cm.size();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "comparison matrix has no conditions");
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> frontier;
  seen[0] = true;
  frontier.push(0);
  while (!frontier.empty()) {
    const std::size_t a = frontier.front();
    frontier.pop();
    for (std::size_t b = 0; b < n; ++b) {
      if (!seen[b] && cm.counts[a][b] + cm.counts[b][a] > 0) {
        seen[b] = true;
        frontier.push(b);
      }
    }
  }
  std::string missing;
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i]) continue;
    missing += (missing.empty() ? "" : ", ") + cm.condition_ids[i];
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::kDisconnected, "comparison graph disconnected: {" + missing +
                                              "} not linked to reference '" +
                                              cm.condition_ids[0] + "'");
  }
}

double negative_log_posterior(const ComparisonMatrix& cm, std::span<const double> free_q,
                              std::vector<double>* gradient, const ScaleOptions& options) {
  const std::size_t n = cm.size();
  auto q = [&](std::size_t i) { return i == 0 ? 0.0 : free_q[i - 1]; };
  std::vector<double> g(n, 0.0);
  double nll = 0.0;
  const double inv_sigma = 1.0 / options.sigma_jod;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const int wins = cm.counts[i][j];
      const int losses = cm.counts[j][i];
      if (wins + losses == 0) continue;
      const double z = (q(i) - q(j)) * inv_sigma;
      // d/dz of the log likelihood of this pair.
      double dz = 0.0;
      if (wins > 0) {
        nll -= wins * log_normal_cdf(z);
        dz += wins * normal_hazard(z);
      }
      if (losses > 0) {
        nll -= losses * log_normal_cdf(-z);
        dz -= losses * normal_hazard(-z);
      }
      g[i] -= dz * inv_sigma;
      g[j] += dz * inv_sigma;
    }
  }
  const double inv_var = 1.0 / (options.prior_std * options.prior_std);
  for (std::size_t i = 1; i < n; ++i) {
    nll += 0.5 * q(i) * q(i) * inv_var;
    g[i] += q(i) * inv_var;
  }
  if (gradient != nullptr) gradient->assign(g.begin() + 1, g.end());
  return nll;
}

JodScale scale_jod(const ComparisonMatrix& cm, const ScaleOptions& options,
                   std::span<const double> start) {
  check_connected(cm);
  const std::size_t n = cm.size();
  std::vector<double> x0(n - 1, 0.0);
  if (!start.empty()) {
    if (start.size() != n - 1) {
      throw Error(ErrorCode::kInvalidArgument, "start needs one value per non-reference condition");
    }
    x0.assign(start.begin(), start.end());
  }
  BfgsOptions bfgs;
  bfgs.gradient_tolerance = options.gradient_tolerance;
  const OptimizeResult r = minimize_bfgs(
      [&](const std::vector<double>& x, std::vector<double>& grad) {
        return negative_log_posterior(cm, x, &grad, options);
      },
      x0, bfgs);
  JodScale scale;
  scale.condition_ids = cm.condition_ids;
  scale.jod.push_back(0.0);
  scale.jod.insert(scale.jod.end(), r.x.begin(), r.x.end());
  scale.ci_low = scale.jod;
  scale.ci_high = scale.jod;
  scale.variance.assign(n, 0.0);
  return scale;
}

std::vector<std::string> observers(const ComparisonMatrix& cm) {
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const ObserverRecord& r : cm.observer_records) {
    if (seen.insert(r.observer_id).second) ids.push_back(r.observer_id);
  }
  return ids;
}

BootstrapReplicates bootstrap_replicates(const ComparisonMatrix& cm, int replicates,
                                         std::uint64_t seed, const ScaleOptions& options) {
  if (replicates < 2) throw Error(ErrorCode::kInvalidArgument, "bootstrap needs B >= 2");
  const std::vector<std::string> ids = observers(cm);
  if (ids.empty()) throw Error(ErrorCode::kInvalidArgument, "bootstrap needs observer records");
  std::map<std::string, std::vector<const ObserverRecord*>> by_observer;
  for (const ObserverRecord& r : cm.observer_records) by_observer[r.observer_id].push_back(&r);

  BootstrapReplicates out;
  Rng rng(seed);
  for (int b = 0; b < replicates; ++b) {
    ComparisonMatrix sample = make_comparison_matrix(cm.condition_ids);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const std::string& who = ids[rng.below(ids.size())];
      for (const ObserverRecord* r : by_observer[who]) {
        sample.counts[r->winner][r->winner == r->i ? r->j : r->i] += 1;
      }
    }
    try {
      out.jod.push_back(scale_jod(sample, options).jod);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDisconnected) throw;
      ++out.skipped;
    }
  }
  return out;
}

JodScale bootstrap_ci(const ComparisonMatrix& cm, int replicates, std::uint64_t seed,
                      const ScaleOptions& options) {
  JodScale scale = scale_jod(cm, options);
  const BootstrapReplicates reps = bootstrap_replicates(cm, replicates, seed, options);
  scale.replicates = static_cast<int>(reps.jod.size());
  scale.skipped_replicates = reps.skipped;
  if (reps.jod.size() < 2) return scale;
  for (std::size_t c = 0; c < cm.size(); ++c) {
    std::vector<double> values;
    values.reserve(reps.jod.size());
    for (const auto& r : reps.jod) values.push_back(r[c]);
    scale.ci_low[c] = std::min(percentile(values, 0.025), scale.jod[c]);
    scale.ci_high[c] = std::max(percentile(values, 0.975), scale.jod[c]);
    scale.variance[c] = sample_variance(values);
  }
  return scale;
}

std::string Condition::id() const {
  return level == 0 ? "reference" : kind + "_" + std::to_string(level);
}

Condition condition_from_id(const std::string& id) {
  if (id == "reference") return {"", 0};
  const auto pos = id.rfind('_');
  if (pos == std::string::npos || pos == 0 || pos + 1 == id.size()) {
    throw Error(ErrorCode::kInvalidArgument, "bad condition id '" + id + "'");
  }
  try {
    std::size_t used = 0;
    const int level = std::stoi(id.substr(pos + 1), &used);
    if (used != id.size() - pos - 1 || level < 1) throw std::invalid_argument("level");
    return {id.substr(0, pos), level};
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, "bad condition id '" + id + "'");
  }
}

std::vector<ScheduledPair> schedule_pairs(const std::vector<Condition>& conditions,
                                          const SchedulePolicy& policy) {
  // Kinds in order of first appearance, each with its sorted distinct levels.
  std::vector<std::string> kinds;
  std::map<std::string, std::set<int>> levels;
  for (const Condition& c : conditions) {
    if (c.level == 0) continue;
    if (c.level < 0) throw Error(ErrorCode::kInvalidArgument, "negative severity level");
    if (!levels.count(c.kind)) kinds.push_back(c.kind);
    levels[c.kind].insert(c.level);
  }
  std::vector<ScheduledPair> pairs;
  for (const std::string& kind : kinds) {
    Condition previous{kind, 0};
    for (int level : levels[kind]) {
      pairs.push_back({previous, Condition{kind, level}, false});
      previous = Condition{kind, level};
    }
  }
  Rng rng(policy.seed);
  if (policy.shuffle) {
    for (std::size_t i = pairs.size(); i > 1; --i) {
      std::swap(pairs[i - 1], pairs[rng.below(i)]);
    }
  }
  if (policy.randomize_sides) {
    for (ScheduledPair& p : pairs) p.side_swap = rng.coin();
  }
  return pairs;
}

ComparisonMatrix simulate_observers(const std::vector<std::string>& condition_ids,
                                    std::span<const double> true_jod,
                                    const std::vector<std::pair<int, int>>& pairs,
                                    int observer_count, int repetitions, std::uint64_t seed,
                                    double sigma_jod) {
  if (true_jod.size() != condition_ids.size()) {
    throw Error(ErrorCode::kInvalidArgument, "one true JOD per condition required");
  }
  ComparisonMatrix cm = make_comparison_matrix(condition_ids);
  Rng rng(seed);
  char name[32];
  for (int o = 0; o < observer_count; ++o) {
    std::snprintf(name, sizeof name, "obs_%03d", o);
    for (const auto& [i, j] : pairs) {
      const double p = normal_cdf((true_jod[i] - true_jod[j]) / sigma_jod);
      for (int r = 0; r < repetitions; ++r) cm.add(name, i, j, rng.uniform() < p ? i : j);
    }
  }
  return cm;
}

}  // namespace lfqa
