#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lfqa {

// One 2AFC trial between conditions i and j; `winner` is i or j.
struct ObserverRecord {
  std::string observer_id;
  int i = 0;
  int j = 0;
  int winner = 0;

  bool operator==(const ObserverRecord&) const = default;
};

struct ComparisonMatrix {
  // Index 0 is the reference.
  std::vector<std::string> condition_ids;
  // counts[i][j]: how often i was preferred over j.
  std::vector<std::vector<int>> counts;
  std::vector<ObserverRecord> observer_records;

  std::size_t size() const { return condition_ids.size(); }
  int index_of(const std::string& id) const;  // -1 when absent
  // Adds the condition if needed and returns its index.
  int intern(const std::string& id);
  void add(const std::string& observer, int i, int j, int winner);
};

ComparisonMatrix make_comparison_matrix(std::vector<std::string> condition_ids);
// Rebuilds counts from observer_records; throws on out-of-range records.
void recount(ComparisonMatrix& cm);
// Throws kDisconnected naming every condition that no chain of compared
// pairs links to the reference.
void check_connected(const ComparisonMatrix& cm);

struct JodScale {
  std::vector<std::string> condition_ids;
  std::vector<double> jod;
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  // Bootstrap variance per condition (0 until bootstrap_ci fills it).
  std::vector<double> variance;
  int replicates = 0;
  int skipped_replicates = 0;
};

// Scale unit: 1 JOD separates conditions preferred 75% of the time.
inline constexpr double kSigmaJod = 1.482602218505602;

struct ScaleOptions {
  double sigma_jod = kSigmaJod;
  double prior_std = 10.0;
  double gradient_tolerance = 1e-6;
};

// Negative log posterior over the non-reference scores q[1..n-1] (q[0] = 0),
// with its gradient; exposed for tests.
double negative_log_posterior(const ComparisonMatrix& cm, std::span<const double> free_q,
                              std::vector<double>* gradient, const ScaleOptions& options);

// Maximum-likelihood Thurstone Case V scaling anchored at the reference.
// `start` optionally seeds the non-reference scores.
JodScale scale_jod(const ComparisonMatrix& cm, const ScaleOptions& options = {},
                   std::span<const double> start = {});

// Distinct observer ids in order of first appearance.
std::vector<std::string> observers(const ComparisonMatrix& cm);

// JOD vectors of bootstrap replicates that resample observers with
// replacement; disconnected replicates are skipped and counted.
struct BootstrapReplicates {
  std::vector<std::vector<double>> jod;
  int skipped = 0;
};
BootstrapReplicates bootstrap_replicates(const ComparisonMatrix& cm, int replicates,
                                         std::uint64_t seed, const ScaleOptions& options = {});

// scale_jod plus 2.5/97.5 percentile intervals (widened if needed so that
// they always contain the point estimate) and bootstrap variances.
JodScale bootstrap_ci(const ComparisonMatrix& cm, int replicates, std::uint64_t seed,
                      const ScaleOptions& options = {});

struct Condition {
  std::string kind;
  int level = 0;  // 0 = reference

  std::string id() const;
  bool operator==(const Condition&) const = default;
};
Condition condition_from_id(const std::string& id);

struct ScheduledPair {
  Condition first;
  Condition second;
  // Display `second` on the left.
  bool side_swap = false;
};

struct SchedulePolicy {
  std::uint64_t seed = 0;
  bool shuffle = true;
  bool randomize_sides = true;
};

// Neighboring-level pairs per kind (reference vs first level, then each level
// vs the next), shuffled and side-randomized by the policy seed.
std::vector<ScheduledPair> schedule_pairs(const std::vector<Condition>& conditions,
                                          const SchedulePolicy& policy);

// Monte-Carlo Case V observers: each observer answers every pair
// `repetitions` times, preferring i with probability Phi((q_i - q_j) / sigma).
ComparisonMatrix simulate_observers(const std::vector<std::string>& condition_ids,
                                    std::span<const double> true_jod,
                                    const std::vector<std::pair<int, int>>& pairs,
                                    int observer_count, int repetitions, std::uint64_t seed,
                                    double sigma_jod = kSigmaJod);

}  // namespace lfqa
