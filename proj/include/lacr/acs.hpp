#pragma once

// Attitude Consistency Scores over a MisT's SMKG and its tweets of unknown
// stance (TUSM), stance assignment, and per-MisT threshold calibration.
//
//   ACS^1(x,s)  = mean over SMKG nodes (y,s_y) of f(x, RE(s,s_y), y)
//   ACS^l(x,s)  = sum_{z != x} sum_{s_z} (ACS^{l-1}(z,s_z) + f(x, RE(s,s_z), z)) / (|TUSM|-1)
//   ACS^*(x,s)  = mean of ACS^1..ACS^L
//
// The inner sum over s_z visits both relation types whatever s is, so every
// level l >= 2 gives Accept and Reject the same value; only ACS^1 separates
// them. Levels >= 2 are computed in that exact form, so the equality is
// bitwise.

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lacr/graph.hpp"
#include "lacr/model.hpp"

namespace lacr {

class ScoreMatrix {
public:
    ScoreMatrix() = default;
    ScoreMatrix(std::string mist_id, std::vector<std::string> tusm_ids, std::vector<LabeledTweet> smkg_nodes);

    const std::string& mist_id() const { return mist_id_; }
    const std::vector<std::string>& tusm_ids() const { return tusm_ids_; }
    const std::vector<LabeledTweet>& smkg_nodes() const { return smkg_nodes_; }
    std::size_t tusm_size() const { return tusm_ids_.size(); }
    std::size_t smkg_size() const { return smkg_nodes_.size(); }

    // f(TUSM x, r, SMKG node y)
    double smkg(std::size_t x, std::size_t y, RelationType r) const {
        return smkg_[(x * smkg_size() + y) * 2 + relation_index(r)];
    }
    double& smkg(std::size_t x, std::size_t y, RelationType r) {
        return smkg_[(x * smkg_size() + y) * 2 + relation_index(r)];
    }
    // f(TUSM x, r, TUSM z); the diagonal is unused.
    double tusm(std::size_t x, std::size_t z, RelationType r) const {
        return tusm_[(x * tusm_size() + z) * 2 + relation_index(r)];
    }
    double& tusm(std::size_t x, std::size_t z, RelationType r) {
        return tusm_[(x * tusm_size() + z) * 2 + relation_index(r)];
    }

    std::size_t smkg_entry_count() const { return smkg_.size(); }
    std::size_t tusm_entry_count() const { return tusm_.size(); }

private:
    std::string mist_id_;
    std::vector<std::string> tusm_ids_;
    std::vector<LabeledTweet> smkg_nodes_;
    std::vector<double> smkg_;
    std::vector<double> tusm_;
};

// Scores f(head, r, tail) by tweet id.
using TripleScoreFn = std::function<double(const std::string& head, RelationType r, const std::string& tail)>;

ScoreMatrix pairwise_scores(const TripleScoreFn& f, const Smkg& smkg, const Tusm& tusm);

// Uses the trained encoders and scoring function; each tweet is encoded once.
// Rows may be spread over `jobs` threads. Throws DataError on a missing embedding.
ScoreMatrix pairwise_scores(const ModelState& model, const EmbeddingStore& store, const Smkg& smkg,
                            const Tusm& tusm, unsigned jobs = 1);

// acs[l-1][x][stance_index(s)]
struct ACSTable {
    std::vector<std::vector<std::array<double, 2>>> levels;

    std::size_t depth() const { return levels.size(); }
    double at(std::size_t level, std::size_t x, StanceLabel s) const {
        return levels.at(level - 1).at(x)[stance_index(s)];
    }
};

// Throws UndefinedAcsError when the SMKG is empty.
double acs1(const ScoreMatrix& m, std::size_t x, StanceLabel s);

// Level 1 for every TUSM tweet.
ACSTable acs_level1(const ScoreMatrix& m);

// Appends level l (= table.depth() + 1). Returns false, leaving the table
// unchanged, when |TUSM| < 2 and the level is undefined.
bool acs_l(const ScoreMatrix& m, ACSTable& table, std::size_t l);

// Levels 1..L (or level 1 only when |TUSM| < 2).
ACSTable compute_acs(const ScoreMatrix& m, std::size_t max_depth);

// Mean of the available levels 1..L for (x, s).
double acs_star(const ACSTable& table, std::size_t x, StanceLabel s, std::size_t max_depth);

// NoStance when max(accept, reject) <= threshold; otherwise the argmax, ties
// going to Accept.
StanceLabel assign_stance(double acs_accept, double acs_reject, double threshold);

class ThresholdTable {
public:
    std::map<std::string, double> per_mist;
    double global_fallback = 0.0;

    double lookup(const std::string& mist_id) const {
        auto it = per_mist.find(mist_id);
        return it == per_mist.end() ? global_fallback : it->second;
    }
};

struct ScoredPair {
    std::string tweet_id;
    std::string mist_id;
    double acs_accept = 0.0;
    double acs_reject = 0.0;
};

struct GoldScoredPair {
    ScoredPair scores;
    StanceLabel gold = StanceLabel::NoStance;
};

// Per MisT: sweeps the midpoints between consecutive sorted max-ACS* values
// plus one sentinel below the smallest and one above the largest, keeping the
// threshold with the best Accept/Reject macro F1 (smallest on ties). The
// fallback is the median of the calibrated thresholds, or 0 with no data.
ThresholdTable calibrate_from_scores(const std::vector<GoldScoredPair>& dev);

struct InferOptions {
    std::size_t depth = 32;
    unsigned jobs = 1;
    // Predict NoStance for MisTs whose SMKG is empty instead of failing.
    bool undefined_as_nostance = false;
};

struct TweetMisTPair {
    std::string tweet_id;
    std::string mist_id;
};

// ACS* for every (tweet, MisT) pair; TUSM of a MisT = the pairs naming it.
std::vector<ScoredPair> score_pairs(const ModelState& model, const EmbeddingStore& store,
                                    const std::vector<Smkg>& smkgs,
                                    const std::vector<TweetMisTPair>& pairs, const InferOptions& opts);

ThresholdTable calibrate_thresholds(const ModelState& model, const EmbeddingStore& store,
                                    const std::vector<Smkg>& smkgs, const std::vector<StancePair>& dev,
                                    const InferOptions& opts);

struct Prediction {
    std::string tweet_id;
    std::string mist_id;
    StanceLabel stance = StanceLabel::NoStance;
    double acs_accept = 0.0;
    double acs_reject = 0.0;
};

struct InferenceResult {
    std::vector<Prediction> predictions;
    // Input SMKGs extended with the tweets finalized as Accept/Reject.
    std::vector<Smkg> updated_smkgs;
};

InferenceResult infer(const ModelState& model, const EmbeddingStore& store, const std::vector<Smkg>& smkgs,
                      const std::vector<TweetMisTPair>& tusm_pairs, const ThresholdTable& thresholds,
                      const InferOptions& opts);

}  // namespace lacr
