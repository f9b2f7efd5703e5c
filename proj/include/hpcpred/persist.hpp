#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "hpcpred/features.hpp"
#include "hpcpred/ingest.hpp"
#include "hpcpred/model.hpp"

namespace hpcpred {

// Everything needed to turn a new job into a feature row: the encodings and
// user aggregates seen at training time, plus fallbacks for unseen users.
struct ScoringContext {
  FeatureEncoding encoding;
  AggregateMap aggregates;
  std::map<std::string, Role, std::less<>> user_roles;
  // Unweighted mean of the per-user aggregates of each role's users.
  std::array<std::optional<UserAggregate>, kRoleCount> role_means;
  UserAggregate global_mean;
};

ScoringContext build_scoring_context(std::span<const JobRecord> jobs);

struct PersistedModel {
  TrainedModel model;
  ScoringContext context;
};

// Trains on every job (no holdout), standardizing on all rows.
PersistedModel train_persisted_model(std::span<const JobRecord> jobs, Task task, std::string_view name,
                                     bool with_user_features, const Hyperparameters& hp);

struct JobScore {
  double value = 0;        // regression estimate or predicted class
  double probability = 0;  // classification only
  bool cold_start = false;
  std::string fallback;    // "", "role:<Role>" or "global"
};

// Users missing from the training aggregates get their role's mean
// aggregates, or the global mean when the role was never seen.
JobScore score_job(const PersistedModel& m, const JobRecord& job);

// Self-describing JSON document. Loading reproduces predictions bit for bit.
std::string model_to_json(const PersistedModel& m);
PersistedModel model_from_json(std::string_view text);
void save_model(const PersistedModel& m, const std::string& path);
// Throws MissingModel when the file does not exist.
PersistedModel load_model(const std::string& path);

}  // namespace hpcpred
