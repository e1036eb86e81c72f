#include "lacr/metrics.hpp"

#include <utility>

#include "lacr/errors.hpp"

namespace lacr {

namespace {

ClassMetrics class_metrics(const std::array<std::array<std::size_t, 3>, 3>& confusion, std::size_t k) {
    ClassMetrics c;
    c.true_positives = confusion[k][k];
    for (std::size_t j = 0; j < 3; ++j) {
        if (j == k) continue;
        c.false_positives += confusion[j][k];
        c.false_negatives += confusion[k][j];
    }
    const std::size_t predicted = c.true_positives + c.false_positives;
    const std::size_t actual = c.true_positives + c.false_negatives;
    c.precision_undefined = predicted == 0;
    c.recall_undefined = actual == 0;
    c.precision = predicted ? static_cast<double>(c.true_positives) / static_cast<double>(predicted) : 0.0;
    c.recall = actual ? static_cast<double>(c.true_positives) / static_cast<double>(actual) : 0.0;
    const double denom = c.precision + c.recall;
    c.f1 = denom > 0.0 ? 2.0 * c.precision * c.recall / denom : 0.0;
    return c;
}

using Key = std::pair<std::string, std::string>;

std::map<Key, StanceLabel> index_records(const std::vector<StancePair>& records, const char* side) {
    std::map<Key, StanceLabel> out;
    for (const auto& r : records) {
        if (!out.emplace(Key{r.tweet_id, r.mist_id}, r.stance).second) {
            throw DataError(std::string("duplicate ") + side + " record (" + r.tweet_id + ", " + r.mist_id + ")");
        }
    }
    return out;
}

}  // namespace

EvalReport evaluate_labels(std::span<const StanceLabel> gold, std::span<const StanceLabel> pred) {
    if (gold.size() != pred.size()) {
        throw AlignmentError("gold and predicted label counts differ (" + std::to_string(gold.size()) +
                             " vs " + std::to_string(pred.size()) + ")");
    }
    EvalReport r;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        ++r.confusion[label_index(gold[i])][label_index(pred[i])];
        ++r.support[label_index(gold[i])];
    }
    r.accept = class_metrics(r.confusion, label_index(StanceLabel::Accept));
    r.reject = class_metrics(r.confusion, label_index(StanceLabel::Reject));
    r.macro.precision = (r.accept.precision + r.reject.precision) / 2.0;
    r.macro.recall = (r.accept.recall + r.reject.recall) / 2.0;
    r.macro.f1 = (r.accept.f1 + r.reject.f1) / 2.0;
    r.zero_division = r.accept.precision_undefined || r.accept.recall_undefined ||
                      r.reject.precision_undefined || r.reject.recall_undefined;
    return r;
}

EvalReport evaluate(const std::vector<StancePair>& gold, const std::vector<StancePair>& pred) {
    const auto g = index_records(gold, "gold");
    const auto p = index_records(pred, "predicted");

    std::vector<std::string> problems;
    for (const auto& [key, _] : g) {
        if (!p.count(key)) problems.push_back("missing prediction for (" + key.first + ", " + key.second + ")");
    }
    for (const auto& [key, _] : p) {
        if (!g.count(key)) problems.push_back("no gold label for (" + key.first + ", " + key.second + ")");
    }
    if (!problems.empty()) {
        std::string msg = "gold/prediction key sets differ: " + std::to_string(problems.size()) + " problem(s)";
        for (std::size_t i = 0; i < problems.size() && i < 20; ++i) msg += "\n  " + problems[i];
        throw AlignmentError(msg);
    }

    std::vector<StanceLabel> gl, pl;
    gl.reserve(g.size());
    pl.reserve(g.size());
    for (const auto& [key, label] : g) {
        gl.push_back(label);
        pl.push_back(p.at(key));
    }
    return evaluate_labels(gl, pl);
}

ThemeReport evaluate_by_theme(const std::vector<StancePair>& gold, const std::vector<StancePair>& pred,
                              const std::vector<MisT>& mists) {
    std::map<std::string, std::string> theme_of;
    for (const auto& m : mists) theme_of[m.id] = m.theme;

    auto theme_for = [&](const std::string& mist_id) -> const std::string& {
        auto it = theme_of.find(mist_id);
        if (it == theme_of.end()) throw DataError("unknown MisT '" + mist_id + "'");
        if (it->second.empty()) throw DataError("MisT '" + mist_id + "' has no theme label");
        return it->second;
    };

    // Alignment is checked once over the whole set.
    evaluate(gold, pred);

    std::map<std::string, std::pair<std::vector<StancePair>, std::vector<StancePair>>> split;
    for (const auto& r : gold) split[theme_for(r.mist_id)].first.push_back(r);
    for (const auto& r : pred) split[theme_for(r.mist_id)].second.push_back(r);

    ThemeReport out;
    for (const auto& [theme, sets] : split) {
        ThemeScores t;
        t.report = evaluate(sets.first, sets.second);
        t.accept_f1 = t.report.accept.f1;
        t.reject_f1 = t.report.reject.f1;
        t.support = sets.first.size();
        out.emplace(theme, std::move(t));
    }
    return out;
}

}  // namespace lacr
