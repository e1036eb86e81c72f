#include "lacr/graph.hpp"

#include <algorithm>
#include <unordered_set>

#include "lacr/errors.hpp"

namespace lacr {

std::string_view to_string(StanceLabel s) {
    switch (s) {
        case StanceLabel::Accept: return "Accept";
        case StanceLabel::Reject: return "Reject";
        case StanceLabel::NoStance: return "NoStance";
    }
    return "?";
}

std::string_view to_string(RelationType r) {
    return r == RelationType::Agree ? "Agree" : "Disagree";
}

std::optional<StanceLabel> parse_stance(std::string_view text) {
    if (text == "Accept") return StanceLabel::Accept;
    if (text == "Reject") return StanceLabel::Reject;
    if (text == "NoStance") return StanceLabel::NoStance;
    return std::nullopt;
}

RelationType rtac(StanceLabel s_x, StanceLabel s_y) {
    if (!is_stance_value(s_x) || !is_stance_value(s_y)) {
        throw InvalidStanceError("rtac: NoStance is not an attitude-consistency stance value");
    }
    return s_x == s_y ? RelationType::Agree : RelationType::Disagree;
}

bool Smkg::contains(std::string_view tweet_id) const {
    return std::any_of(nodes_.begin(), nodes_.end(),
                       [&](const LabeledTweet& n) { return n.tweet_id == tweet_id; });
}

RelationType Smkg::relation(std::size_t i, std::size_t j) const {
    return rtac(nodes_.at(i).stance, nodes_.at(j).stance);
}

Smkg build_smkg(std::string mist_id, const std::vector<LabeledTweet>& labeled) {
    Smkg g(std::move(mist_id));
    std::unordered_set<std::string> seen;
    for (const auto& entry : labeled) {
        if (!seen.insert(entry.tweet_id).second) {
            throw DuplicateNodeError("duplicate tweet '" + entry.tweet_id + "' for MisT '" +
                                     g.mist_id_ + "'");
        }
        if (is_stance_value(entry.stance)) g.nodes_.push_back(entry);
    }
    return g;
}

Smkg update_smkg(const Smkg& g, const std::vector<LabeledTweet>& finalized) {
    Smkg out = g;
    std::unordered_set<std::string> seen;
    for (const auto& n : g.nodes_) seen.insert(n.tweet_id);
    for (const auto& entry : finalized) {
        if (!seen.insert(entry.tweet_id).second) {
            throw DuplicateNodeError("tweet '" + entry.tweet_id + "' is already in SMKG('" +
                                     g.mist_id_ + "')");
        }
        if (is_stance_value(entry.stance)) out.nodes_.push_back(entry);
    }
    return out;
}

}  // namespace lacr
