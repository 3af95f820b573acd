#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lfqa/dataset.hpp"
#include "lfqa/light_field.hpp"
#include "lfqa/report.hpp"

namespace lfqa {

// Stand-in for human judgments when no study data exist:
//   JOD = -alpha * ln(1 + (mse_views + angular_weight * mse_angular) / tau)
// where mse_angular compares differences between neighboring views, so
// flicker and ghosting along the angular axis cost more than plain pixel
// error.
struct TruthModel {
  double alpha = 1.2;
  double tau = 2e-3;
  double angular_weight = 1.0;
};

double angular_mse(const LightField& ref, const LightField& test);
double true_jod(const LightField& ref, const LightField& test, const TruthModel& model);

struct SimulationOptions {
  int observers = 40;
  int repetitions = 1;
  std::uint64_t seed = 0;
  TruthModel model;
};

struct SimulatedStudy {
  std::vector<ComparisonRow> comparisons;
  // (scene, condition id) -> model JOD
  std::vector<JodRow> truth;
};

// Simulated 2AFC answers over the neighboring-level design of every scene in
// a distorted dataset tree.
SimulatedStudy simulate_study(const std::filesystem::path& dataset_root,
                              const SimulationOptions& options);

}  // namespace lfqa
