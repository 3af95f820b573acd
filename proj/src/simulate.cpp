#include "lfqa/simulate.hpp"

#include <cmath>
#include <cstdio>

#include "lfqa/error.hpp"
#include "lfqa/io.hpp"
#include "lfqa/rng.hpp"
#include "lfqa/scaling.hpp"
#include "lfqa/stats.hpp"

namespace lfqa {

namespace fs = std::filesystem;

namespace {

void check_shapes(const LightField& ref, const LightField& test) {
  if (ref.view_count() != test.view_count() || ref.width() != test.width() ||
      ref.height() != test.height()) {
    throw Error(ErrorCode::kDimensionMismatch, "light fields differ in shape");
  }
}

double view_mse(const LightField& ref, const LightField& test) {
  double sum = 0.0;
  std::size_t n = 0;
  for (int w = 0; w < ref.view_count(); ++w) {
    const auto& a = ref.views[w].data;
    const auto& b = test.views[w].data;
    for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
    n += a.size();
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

}  // namespace

double angular_mse(const LightField& ref, const LightField& test) {
  check_shapes(ref, test);
  double sum = 0.0;
  std::size_t n = 0;
  for (int w = 0; w + 1 < ref.view_count(); ++w) {
    const auto& a0 = ref.views[w].data;
    const auto& a1 = ref.views[w + 1].data;
    const auto& b0 = test.views[w].data;
    const auto& b1 = test.views[w + 1].data;
    for (std::size_t i = 0; i < a0.size(); ++i) {
      const double d = (b1[i] - b0[i]) - (a1[i] - a0[i]);
      sum += d * d;
    }
    n += a0.size();
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double true_jod(const LightField& ref, const LightField& test, const TruthModel& model) {
  check_shapes(ref, test);
  const double d = view_mse(ref, test) + model.angular_weight * angular_mse(ref, test);
  return -model.alpha * std::log1p(d / model.tau);
}

SimulatedStudy simulate_study(const fs::path& dataset_root, const SimulationOptions& options) {
  if (options.observers < 1 || options.repetitions < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one observer and repetition");
  }
  const DatasetIndex index = load_index(dataset_root);
  SimulatedStudy out;
  Rng rng(options.seed);
  char name[32];
  for (const std::string& scene : index.scenes()) {
    const IndexEntry* ref_entry = index.find(scene, "reference");
    if (ref_entry == nullptr) {
      throw Error(ErrorCode::kNotFound, "scene '" + scene + "' has no reference");
    }
    const LightField ref = load_light_field(dataset_root / ref_entry->path);
    std::map<std::string, double> truth;
    std::vector<Condition> conditions;
    for (const IndexEntry& e : index.conditions) {
      if (e.scene != scene) continue;
      truth[e.id] = e.level == 0 ? 0.0
                                 : true_jod(ref, load_light_field(dataset_root / e.path),
                                            options.model);
      out.truth.push_back({scene, e.id, truth[e.id], truth[e.id], truth[e.id], 0.0});
      conditions.push_back(e.level == 0 ? Condition{"", 0} : Condition{e.kind, e.level});
    }
    SchedulePolicy policy;
    policy.shuffle = false;
    policy.randomize_sides = false;
    const std::vector<ScheduledPair> pairs = schedule_pairs(conditions, policy);
    for (int o = 0; o < options.observers; ++o) {
      std::snprintf(name, sizeof name, "obs_%03d", o);
      for (const ScheduledPair& p : pairs) {
        const std::string a = p.first.id();
        const std::string b = p.second.id();
        const double pa = normal_cdf((truth[a] - truth[b]) / kSigmaJod);
        for (int r = 0; r < options.repetitions; ++r) {
          out.comparisons.push_back({name, scene, a, b, rng.uniform() < pa ? a : b});
        }
      }
    }
  }
  return out;
}

}  // namespace lfqa
