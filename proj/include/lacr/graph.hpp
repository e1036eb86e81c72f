#pragma once

// Misinformation targets, stance-labelled tweets and the per-target Stance
// Misinformation Knowledge Graph (SMKG).
//
// An SMKG is complete: every pair of same-stance nodes is joined by an
// implicit Agree relation and every pair of opposite-stance nodes by an
// implicit Disagree relation. Relations are never materialized; they are
// recovered from node stances with rtac().

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lacr {

enum class StanceLabel { Accept, Reject, NoStance };

enum class RelationType { Agree, Disagree };

// The stance values that take part in attitude consistency.
inline constexpr std::array<StanceLabel, 2> kStanceValues{StanceLabel::Accept, StanceLabel::Reject};
inline constexpr std::array<RelationType, 2> kRelationTypes{RelationType::Agree, RelationType::Disagree};

constexpr bool is_stance_value(StanceLabel s) { return s != StanceLabel::NoStance; }

// 0 for Accept, 1 for Reject. Precondition: is_stance_value(s).
constexpr std::size_t stance_index(StanceLabel s) { return s == StanceLabel::Accept ? 0 : 1; }
constexpr std::size_t relation_index(RelationType r) { return r == RelationType::Agree ? 0 : 1; }

constexpr RelationType flip(RelationType r) {
    return r == RelationType::Agree ? RelationType::Disagree : RelationType::Agree;
}

std::string_view to_string(StanceLabel s);
std::string_view to_string(RelationType r);
std::optional<StanceLabel> parse_stance(std::string_view text);

// Relation type that preserves attitude consistency between two stances.
// Throws InvalidStanceError if either argument is NoStance.
RelationType rtac(StanceLabel s_x, StanceLabel s_y);

struct MisT {
    std::string id;
    std::string text;
    std::string theme;
    std::string concern;
};

struct TweetNode {
    std::string id;
    std::optional<std::string> text;
    std::string embedding_key;
};

struct LabeledTweet {
    std::string tweet_id;
    StanceLabel stance;

    bool operator==(const LabeledTweet&) const = default;
};

class Smkg {
public:
    Smkg() = default;
    explicit Smkg(std::string mist_id) : mist_id_(std::move(mist_id)) {}

    const std::string& mist_id() const { return mist_id_; }
    const std::vector<LabeledTweet>& nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }

    bool contains(std::string_view tweet_id) const;
    // Implicit relation between nodes i and j.
    RelationType relation(std::size_t i, std::size_t j) const;

private:
    friend Smkg build_smkg(std::string mist_id, const std::vector<LabeledTweet>& labeled);
    friend Smkg update_smkg(const Smkg& g, const std::vector<LabeledTweet>& finalized);

    std::string mist_id_;
    std::vector<LabeledTweet> nodes_;
};

// A (tweet, MisT) pair with a stance, as found in datasets and predictions.
struct StancePair {
    std::string tweet_id;
    std::string mist_id;
    StanceLabel stance = StanceLabel::NoStance;

    bool operator==(const StancePair&) const = default;
};

// Tweets with unknown stance towards one misinformation target.
struct Tusm {
    std::string mist_id;
    std::vector<std::string> tweet_ids;
};

// Keeps the Accept/Reject entries in input order and drops NoStance entries.
// Throws DuplicateNodeError on a repeated tweet id.
Smkg build_smkg(std::string mist_id, const std::vector<LabeledTweet>& labeled);

// Returns g extended with the finalized Accept/Reject entries.
// Throws DuplicateNodeError if a tweet is already a node.
Smkg update_smkg(const Smkg& g, const std::vector<LabeledTweet>& finalized);

}  // namespace lacr
