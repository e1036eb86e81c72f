#pragma once

// Per-class and macro precision / recall / F1 for stance identification.
// Macro averages run over Accept and Reject only; NoStance is counted in the
// confusion matrix and supports but never averaged.

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lacr/graph.hpp"

namespace lacr {

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
    // Set when the corresponding denominator was 0 and the value defaulted to 0.
    bool precision_undefined = false;
    bool recall_undefined = false;
};

struct MacroMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct EvalReport {
    ClassMetrics accept;
    ClassMetrics reject;
    MacroMetrics macro;
    // Gold counts indexed Accept, Reject, NoStance.
    std::array<std::size_t, 3> support{};
    // confusion[gold][predicted], same index order as support.
    std::array<std::array<std::size_t, 3>, 3> confusion{};
    bool zero_division = false;

    const ClassMetrics& per_class(StanceLabel s) const {
        return s == StanceLabel::Accept ? accept : reject;
    }
};

constexpr std::size_t label_index(StanceLabel s) { return static_cast<std::size_t>(s); }

// Aligned label sequences (gold[i] pairs with pred[i]).
EvalReport evaluate_labels(std::span<const StanceLabel> gold, std::span<const StanceLabel> pred);

// Matches records on (tweet_id, mist_id). Throws AlignmentError listing the
// keys present on one side only, or DataError on duplicate keys.
EvalReport evaluate(const std::vector<StancePair>& gold, const std::vector<StancePair>& pred);

struct ThemeScores {
    double accept_f1 = 0.0;
    double reject_f1 = 0.0;
    std::size_t support = 0;
    EvalReport report;
};

using ThemeReport = std::map<std::string, ThemeScores>;

// evaluate() restricted to the pairs of each theme. Throws DataError when a
// MisT is unknown or has no theme.
ThemeReport evaluate_by_theme(const std::vector<StancePair>& gold, const std::vector<StancePair>& pred,
                              const std::vector<MisT>& mists);

}  // namespace lacr
