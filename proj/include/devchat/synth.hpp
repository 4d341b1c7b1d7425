#pragma once

// Seeded synthetic data with planted signal, for tests and demonstrations.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "devchat/model.hpp"
#include "devchat/taxonomy.hpp"

namespace devchat::synth {

// ---------------------------------------------------------------------------
// Design matrices
// ---------------------------------------------------------------------------

struct DesignSpec {
  std::size_t rows = 8000;
  double intercept = -0.5;
  std::vector<double> slopes{1.0, -0.8, 0.6};  // one per signal feature
  std::size_t noise_features = 0;              // appended with zero slope
  std::vector<double> group_intercepts{-1.0, -0.3, 0.3, 1.0};
};

struct PlantedDesign {
  DesignMatrix dm;
  DesignSpec spec;
};

// Standard-normal features, groups assigned uniformly at random, outcome
// drawn from logistic(intercept + x'slopes + u_group).
PlantedDesign planted_design(const DesignSpec& spec, std::uint64_t seed);

// Area under the ROC curve of the true success probability, integrating
// over standard-normal features and equally likely groups.
double bayes_auc(const DesignSpec& spec);

// Multiplies `spec.slopes` by the factor that makes bayes_auc hit `target`.
// Throws ValidationError when the target is out of reach.
DesignSpec calibrate_slopes(DesignSpec spec, double target);

// ---------------------------------------------------------------------------
// Chat archives
// ---------------------------------------------------------------------------

struct ArchiveSpec {
  std::size_t conversations = 5000;
  double planted_auc = 0.75;
};

// Binary question traits the archive plants; each maps onto extracted
// features deterministically.
struct PlantedTrait {
  std::string name;
  double prevalence;
  double weight;  // before calibration
};

const std::vector<PlantedTrait>& planted_traits();

struct ArchiveResult {
  nlohmann::json archive;          // array of channel objects
  std::vector<LabelSet> golden;    // generator truth, one per conversation
  nlohmann::json truth;            // coefficients, group effects, Bayes AUC
};

ArchiveResult generate_archive(const ArchiveSpec& spec, std::uint64_t seed);

// Exact Bayes AUC of the archive model for a given slope scale.
double archive_bayes_auc(double scale);

}  // namespace devchat::synth
