#include "lacr/acs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <thread>

#include "lacr/errors.hpp"
#include "lacr/metrics.hpp"

namespace lacr {

namespace {

// Runs body(i) for i in [0, n), striped across up to `jobs` threads.
template <typename Body>
void parallel_for(std::size_t n, unsigned jobs, Body&& body) {
    const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace

ScoreMatrix::ScoreMatrix(std::string mist_id, std::vector<std::string> tusm_ids,
                         std::vector<LabeledTweet> smkg_nodes)
    : mist_id_(std::move(mist_id)),
      tusm_ids_(std::move(tusm_ids)),
      smkg_nodes_(std::move(smkg_nodes)),
      smkg_(tusm_ids_.size() * smkg_nodes_.size() * 2, 0.0),
      tusm_(tusm_ids_.size() * tusm_ids_.size() * 2, 0.0) {}

ScoreMatrix pairwise_scores(const TripleScoreFn& f, const Smkg& smkg, const Tusm& tusm) {
    ScoreMatrix m(smkg.mist_id(), tusm.tweet_ids, smkg.nodes());
    const auto& nodes = smkg.nodes();
    for (std::size_t x = 0; x < m.tusm_size(); ++x) {
        const auto& head = tusm.tweet_ids[x];
        for (RelationType r : kRelationTypes) {
            for (std::size_t y = 0; y < nodes.size(); ++y) m.smkg(x, y, r) = f(head, r, nodes[y].tweet_id);
            for (std::size_t z = 0; z < m.tusm_size(); ++z) {
                if (z != x) m.tusm(x, z, r) = f(head, r, tusm.tweet_ids[z]);
            }
        }
    }
    return m;
}

ScoreMatrix pairwise_scores(const ModelState& model, const EmbeddingStore& store, const Smkg& smkg,
                            const Tusm& tusm, unsigned jobs) {
    ScoreMatrix m(smkg.mist_id(), tusm.tweet_ids, smkg.nodes());
    const MisTScorer scorer(model, smkg.mist_id(), store.content(smkg.mist_id()));

    std::vector<EntityEmbedding> tusm_emb, smkg_emb;
    tusm_emb.reserve(tusm.tweet_ids.size());
    for (const auto& id : tusm.tweet_ids) tusm_emb.push_back(scorer.encode(store.content(id)));
    smkg_emb.reserve(smkg.size());
    for (const auto& n : smkg.nodes()) smkg_emb.push_back(scorer.encode(store.content(n.tweet_id)));

    parallel_for(m.tusm_size(), jobs, [&](std::size_t x) {
        for (RelationType r : kRelationTypes) {
            for (std::size_t y = 0; y < smkg_emb.size(); ++y) m.smkg(x, y, r) = scorer(tusm_emb[x], r, smkg_emb[y]);
            for (std::size_t z = 0; z < tusm_emb.size(); ++z) {
                if (z != x) m.tusm(x, z, r) = scorer(tusm_emb[x], r, tusm_emb[z]);
            }
        }
    });
    return m;
}

double acs1(const ScoreMatrix& m, std::size_t x, StanceLabel s) {
    if (m.smkg_size() == 0) {
        throw UndefinedAcsError("ACS undefined for MisT '" + m.mist_id() + "': its SMKG is empty");
    }
    double sum = 0.0;
    const auto& nodes = m.smkg_nodes();
    for (std::size_t y = 0; y < nodes.size(); ++y) sum += m.smkg(x, y, rtac(s, nodes[y].stance));
    return sum / static_cast<double>(nodes.size());
}

ACSTable acs_level1(const ScoreMatrix& m) {
    ACSTable t;
    auto& level = t.levels.emplace_back(m.tusm_size());
    for (std::size_t x = 0; x < m.tusm_size(); ++x) {
        for (StanceLabel s : kStanceValues) level[x][stance_index(s)] = acs1(m, x, s);
    }
    return t;
}

bool acs_l(const ScoreMatrix& m, ACSTable& table, std::size_t l) {
    if (l < 2 || table.depth() != l - 1) {
        throw std::invalid_argument("acs_l: level " + std::to_string(l) + " needs exactly levels 1.." +
                                    std::to_string(l - 1));
    }
    const std::size_t n = m.tusm_size();
    if (n < 2) return false;

    const auto& prev = table.levels.back();
    double prev_total = 0.0;
    for (const auto& v : prev) prev_total += v[0] + v[1];

    const double divisor = static_cast<double>(n - 1);
    std::vector<std::array<double, 2>> next(n);
    for (std::size_t x = 0; x < n; ++x) {
        const double others = prev_total - (prev[x][0] + prev[x][1]);
        for (StanceLabel s : kStanceValues) {
            double relation_sum = 0.0;
            for (std::size_t z = 0; z < n; ++z) {
                if (z == x) continue;
                // Per z the pair is {agree, disagree} in some order; a + b == b + a exactly.
                relation_sum += m.tusm(x, z, rtac(s, StanceLabel::Accept)) +
                                m.tusm(x, z, rtac(s, StanceLabel::Reject));
            }
            next[x][stance_index(s)] = (others + relation_sum) / divisor;
        }
    }
    table.levels.push_back(std::move(next));
    return true;
}

ACSTable compute_acs(const ScoreMatrix& m, std::size_t max_depth) {
    if (max_depth == 0) throw ConfigError("ACS depth must be at least 1");
    ACSTable t = acs_level1(m);
    for (std::size_t l = 2; l <= max_depth; ++l) {
        if (!acs_l(m, t, l)) break;
    }
    return t;
}

double acs_star(const ACSTable& table, std::size_t x, StanceLabel s, std::size_t max_depth) {
    const std::size_t levels = std::min(max_depth, table.depth());
    if (levels == 0) throw UndefinedAcsError("ACS table has no levels");
    double sum = 0.0;
    for (std::size_t l = 1; l <= levels; ++l) sum += table.at(l, x, s);
    return sum / static_cast<double>(levels);
}

StanceLabel assign_stance(double acs_accept, double acs_reject, double threshold) {
    if (std::max(acs_accept, acs_reject) <= threshold) return StanceLabel::NoStance;
    return acs_accept >= acs_reject ? StanceLabel::Accept : StanceLabel::Reject;
}

ThresholdTable calibrate_from_scores(const std::vector<GoldScoredPair>& dev) {
    ThresholdTable table;
    std::map<std::string, std::vector<const GoldScoredPair*>> by_mist;
    for (const auto& p : dev) by_mist[p.scores.mist_id].push_back(&p);

    std::vector<double> chosen;
    for (const auto& [mist_id, items] : by_mist) {
        std::vector<double> peaks;
        for (const auto* p : items) peaks.push_back(std::max(p->scores.acs_accept, p->scores.acs_reject));
        std::sort(peaks.begin(), peaks.end());
        peaks.erase(std::unique(peaks.begin(), peaks.end()), peaks.end());

        std::vector<double> candidates{peaks.front() - 1.0};
        for (std::size_t i = 0; i + 1 < peaks.size(); ++i) candidates.push_back(0.5 * (peaks[i] + peaks[i + 1]));
        candidates.push_back(peaks.back() + 1.0);

        std::vector<StanceLabel> gold, pred(items.size());
        for (const auto* p : items) gold.push_back(p->gold);

        double best_f1 = -1.0;
        double best_t = candidates.front();
        for (double t : candidates) {
            for (std::size_t i = 0; i < items.size(); ++i) {
                pred[i] = assign_stance(items[i]->scores.acs_accept, items[i]->scores.acs_reject, t);
            }
            const double f1 = evaluate_labels(gold, pred).macro.f1;
            if (f1 > best_f1) {
                best_f1 = f1;
                best_t = t;
            }
        }
        table.per_mist[mist_id] = best_t;
        chosen.push_back(best_t);
    }

    if (!chosen.empty()) {
        std::sort(chosen.begin(), chosen.end());
        const std::size_t mid = chosen.size() / 2;
        table.global_fallback = chosen.size() % 2 ? chosen[mid] : 0.5 * (chosen[mid - 1] + chosen[mid]);
    }
    return table;
}

std::vector<ScoredPair> score_pairs(const ModelState& model, const EmbeddingStore& store,
                                    const std::vector<Smkg>& smkgs, const std::vector<TweetMisTPair>& pairs,
                                    const InferOptions& opts) {
    if (opts.depth == 0) throw ConfigError("ACS depth must be at least 1");

    std::map<std::string, const Smkg*> smkg_of;
    for (const auto& g : smkgs) smkg_of[g.mist_id()] = &g;

    // MisTs in first-appearance order, each with its TUSM.
    std::vector<Tusm> groups;
    std::map<std::string, std::size_t> group_of;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& p : pairs) {
        if (!seen.emplace(p.tweet_id, p.mist_id).second) {
            throw DataError("duplicate pair (" + p.tweet_id + ", " + p.mist_id + ")");
        }
        auto [it, inserted] = group_of.emplace(p.mist_id, groups.size());
        if (inserted) groups.push_back({p.mist_id, {}});
        groups[it->second].tweet_ids.push_back(p.tweet_id);
    }

    std::vector<std::vector<ScoredPair>> per_group(groups.size());
    auto run_group = [&](std::size_t gi) {
        const Tusm& tusm = groups[gi];
        const Smkg empty(tusm.mist_id);
        auto found = smkg_of.find(tusm.mist_id);
        const Smkg& smkg = found == smkg_of.end() ? empty : *found->second;
        for (const auto& id : tusm.tweet_ids) {
            if (smkg.contains(id)) {
                throw DataError("tweet '" + id + "' is both in SMKG('" + tusm.mist_id + "') and in its TUSM");
            }
        }
        auto& out = per_group[gi];
        if (smkg.empty()) {
            if (!opts.undefined_as_nostance) {
                throw UndefinedAcsError("ACS undefined for MisT '" + tusm.mist_id + "': its SMKG is empty");
            }
            const double lowest = std::numeric_limits<double>::lowest();
            for (const auto& id : tusm.tweet_ids) out.push_back({id, tusm.mist_id, lowest, lowest});
            return;
        }
        const ScoreMatrix m = pairwise_scores(model, store, smkg, tusm, 1);
        const ACSTable table = compute_acs(m, opts.depth);
        for (std::size_t x = 0; x < tusm.tweet_ids.size(); ++x) {
            out.push_back({tusm.tweet_ids[x], tusm.mist_id,
                           acs_star(table, x, StanceLabel::Accept, opts.depth),
                           acs_star(table, x, StanceLabel::Reject, opts.depth)});
        }
    };
    parallel_for(groups.size(), opts.jobs, run_group);

    // Back to input order.
    std::map<std::pair<std::string, std::string>, const ScoredPair*> by_key;
    for (const auto& g : per_group) {
        for (const auto& s : g) by_key[{s.tweet_id, s.mist_id}] = &s;
    }
    std::vector<ScoredPair> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(*by_key.at({p.tweet_id, p.mist_id}));
    return out;
}

ThresholdTable calibrate_thresholds(const ModelState& model, const EmbeddingStore& store,
                                    const std::vector<Smkg>& smkgs, const std::vector<StancePair>& dev,
                                    const InferOptions& opts) {
    std::vector<TweetMisTPair> pairs;
    pairs.reserve(dev.size());
    for (const auto& d : dev) pairs.push_back({d.tweet_id, d.mist_id});
    const auto scored = score_pairs(model, store, smkgs, pairs, opts);

    std::vector<GoldScoredPair> items;
    items.reserve(dev.size());
    for (std::size_t i = 0; i < dev.size(); ++i) items.push_back({scored[i], dev[i].stance});
    return calibrate_from_scores(items);
}

InferenceResult infer(const ModelState& model, const EmbeddingStore& store, const std::vector<Smkg>& smkgs,
                      const std::vector<TweetMisTPair>& tusm_pairs, const ThresholdTable& thresholds,
                      const InferOptions& opts) {
    InferenceResult result;
    const auto scored = score_pairs(model, store, smkgs, tusm_pairs, opts);

    std::map<std::string, std::vector<LabeledTweet>> finalized;
    for (const auto& s : scored) {
        const StanceLabel stance = assign_stance(s.acs_accept, s.acs_reject, thresholds.lookup(s.mist_id));
        result.predictions.push_back({s.tweet_id, s.mist_id, stance, s.acs_accept, s.acs_reject});
        finalized[s.mist_id].push_back({s.tweet_id, stance});
    }
    for (const auto& g : smkgs) {
        auto it = finalized.find(g.mist_id());
        result.updated_smkgs.push_back(it == finalized.end() ? g : update_smkg(g, it->second));
    }
    return result;
}

}  // namespace lacr
