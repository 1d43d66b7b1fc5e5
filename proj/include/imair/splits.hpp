#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "imair/manifest.hpp"

namespace imair {

/// Subject-level assignment for one evaluation fold. Each list is sorted.
struct SplitPlan {
  std::string fold_id;
  std::vector<std::string> train_subjects;
  std::vector<std::string> val_subjects;
  std::vector<std::string> test_subjects;

  bool operator==(const SplitPlan&) const = default;
};

inline constexpr double kDefaultValFraction = 0.2;
inline constexpr int kDefaultTrainSubjects = 40;

/// Throws DataError if the subject sets overlap, the test set is empty, or
/// a subject is unknown to the manifest.
void validate_plan(const SplitPlan& plan, const Manifest& manifest);

/// One fold per subject ("loso-<subject>"), in sorted subject order. The
/// other subjects are shuffled with a seed derived from `seed` and the test
/// subject id, and the first round(val_fraction * n) of them become
/// validation subjects (at least one subject always remains for training).
std::vector<SplitPlan> loso_splits(const Manifest& manifest,
                                   double val_fraction = kDefaultValFraction,
                                   std::uint64_t seed = 0);

/// Shuffles the subjects; the first `n_train_subjects` form train+val (the
/// first round(val_fraction * n_train_subjects) of those are validation),
/// the rest are test. Fold id is "fixed".
SplitPlan fixed_subject_split(const Manifest& manifest,
                              int n_train_subjects = kDefaultTrainSubjects,
                              double val_fraction = kDefaultValFraction,
                              std::uint64_t seed = 0);

}  // namespace imair
