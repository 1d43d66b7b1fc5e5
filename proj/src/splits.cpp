#include "imair/splits.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "imair/rng.hpp"

namespace imair {

namespace {

void check_fraction(double val_fraction) {
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw UsageError("validation fraction must be in [0, 1)");
  }
}

/// Splits a shuffled group into (train, val), both sorted.
void assign_train_val(std::vector<std::string> group, double val_fraction, SplitPlan& plan) {
  auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(group.size())));
  n_val = std::min(n_val, group.size() - 1);
  plan.val_subjects.assign(group.begin(), group.begin() + static_cast<std::ptrdiff_t>(n_val));
  plan.train_subjects.assign(group.begin() + static_cast<std::ptrdiff_t>(n_val), group.end());
  std::sort(plan.val_subjects.begin(), plan.val_subjects.end());
  std::sort(plan.train_subjects.begin(), plan.train_subjects.end());
}

}  // namespace

void validate_plan(const SplitPlan& plan, const Manifest& manifest) {
  if (plan.test_subjects.empty()) throw DataError(plan.fold_id + ": test set is empty");
  if (plan.train_subjects.empty()) throw DataError(plan.fold_id + ": training set is empty");
  const auto known = manifest.subjects();
  std::set<std::string> seen;
  for (const auto* group : {&plan.train_subjects, &plan.val_subjects, &plan.test_subjects}) {
    for (const auto& s : *group) {
      if (!std::binary_search(known.begin(), known.end(), s)) {
        throw DataError(plan.fold_id + ": unknown subject " + s);
      }
      if (!seen.insert(s).second) {
        throw DataError(plan.fold_id + ": subject " + s + " appears in more than one set");
      }
    }
  }
}

std::vector<SplitPlan> loso_splits(const Manifest& manifest, double val_fraction,
                                   std::uint64_t seed) {
  check_fraction(val_fraction);
  const auto subjects = manifest.subjects();
  if (subjects.size() < 2) {
    throw DataError("leave-one-subject-out needs at least 2 subjects, manifest has " +
                    std::to_string(subjects.size()));
  }
  std::vector<SplitPlan> plans;
  plans.reserve(subjects.size());
  for (const auto& test : subjects) {
    SplitPlan plan;
    plan.fold_id = "loso-" + test;
    plan.test_subjects = {test};
    std::vector<std::string> rest;
    for (const auto& s : subjects) {
      if (s != test) rest.push_back(s);
    }
    Rng rng(mix_seed(seed, hash_string(test)));
    rng.shuffle(std::span<std::string>(rest));
    assign_train_val(std::move(rest), val_fraction, plan);
    plans.push_back(std::move(plan));
  }
  return plans;
}

SplitPlan fixed_subject_split(const Manifest& manifest, int n_train_subjects,
                              double val_fraction, std::uint64_t seed) {
  check_fraction(val_fraction);
  if (n_train_subjects < 1) throw UsageError("number of training subjects must be >= 1");
  auto subjects = manifest.subjects();
  if (subjects.size() <= static_cast<std::size_t>(n_train_subjects)) {
    throw DataError("fixed split needs more than " + std::to_string(n_train_subjects) +
                    " subjects, manifest has " + std::to_string(subjects.size()));
  }
  Rng rng(mix_seed(seed, hash_string("fixed")));
  rng.shuffle(std::span<std::string>(subjects));

  SplitPlan plan;
  plan.fold_id = "fixed";
  const auto cut = subjects.begin() + n_train_subjects;
  plan.test_subjects.assign(cut, subjects.end());
  std::sort(plan.test_subjects.begin(), plan.test_subjects.end());
  assign_train_val({subjects.begin(), cut}, val_fraction, plan);
  return plan;
}

}  // namespace imair
