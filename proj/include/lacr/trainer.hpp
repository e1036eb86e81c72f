#pragma once

// Margin-loss training of the relation scorer over attitude-consistent
// relations, with negative sampling and ADAM.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lacr/graph.hpp"
#include "lacr/model.hpp"

namespace lacr {

struct RelationInstance {
    std::string mist_id;
    std::string tweet_x_id;
    std::string tweet_y_id;
    RelationType relation = RelationType::Agree;
    StanceLabel stance_x = StanceLabel::Accept;
    StanceLabel stance_y = StanceLabel::Accept;

    bool operator==(const RelationInstance&) const = default;
};

struct TrainConfig {
    KEModelKind model = KEModelKind::TransE;
    std::size_t epochs = 36;
    std::size_t batch_size = 32;
    double peak_lr = 1e-4;
    double warmup_fraction = 0.10;
    double margin = 4.0;
    std::size_t negatives_per_positive = 1;
    std::size_t d = 8;
    std::uint64_t seed = 13;
    std::size_t positive_cap_per_mist_per_epoch = 1000;

    // Throws ConfigError. epochs may be 0 (returns the initialized state).
    void validate() const;
};

// All unordered node pairs of every SMKG, in node order; MisTs with more than
// `cap` pairs contribute a uniform sample of `cap` pairs.
std::vector<RelationInstance> enumerate_positives(const std::vector<Smkg>& smkgs, std::size_t cap,
                                                  std::mt19937_64& rng);

enum class Corruption { ReplaceTail, FlipRelation };

struct NegativeSample {
    RelationInstance instance;  // relation holds the corrupted label r^
    Corruption mode;
};

// Picks one of the two corruptions uniformly; falls back to flipping the
// relation when no replacement tail exists. The result never preserves
// attitude consistency.
NegativeSample sample_negative(const RelationInstance& pos, const Smkg& g, std::mt19937_64& rng);

double margin_loss(double f_pos, double f_neg, double margin);

// Linear warmup from 0 to peak over the first warmup_fraction of the steps,
// then linear decay to 0 at total_steps.
double lr_at(std::uint64_t step, std::uint64_t total_steps, const TrainConfig& cfg);

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

// One bias-corrected ADAM update. Throws TrainingDivergenceError naming the
// parameter if any gradient is non-finite; the state is then left untouched.
void adam_step(ModelState& state, const Parameters& gradients, double lr);

struct TrainingPair {
    RelationInstance positive;
    RelationInstance negative;
};

// Summed margin loss over the pairs. If grad is non-null, d(loss)/d(params)
// is added into it.
double batch_loss(const ModelState& state, const EmbeddingStore& store,
                  std::span<const TrainingPair> pairs, double margin, Parameters* grad);

struct EpochStats {
    std::size_t epoch = 0;
    double mean_loss = 0.0;
    std::size_t pairs = 0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

// Content keys: tweets by tweet id, MisTs by MisT id. Throws DataError before
// any update if a key is missing.
ModelState train(const TrainConfig& cfg, const std::vector<Smkg>& smkgs, const EmbeddingStore& store,
                 const std::vector<MisT>& mists, const EpochCallback& on_epoch = {});

}  // namespace lacr
