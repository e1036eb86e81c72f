#include "lacr/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "lacr/errors.hpp"

namespace lacr {

void TrainConfig::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("invalid training config: " + what); };
    if (batch_size == 0) fail("batch_size must be positive");
    if (!(peak_lr > 0.0) || !std::isfinite(peak_lr)) fail("peak_lr must be positive");
    if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0)) fail("warmup_fraction must lie in (0,1)");
    if (!(margin > 0.0) || !std::isfinite(margin)) fail("margin must be positive");
    if (negatives_per_positive == 0) fail("negatives_per_positive must be positive");
    if (d == 0) fail("d must be positive");
    if (positive_cap_per_mist_per_epoch == 0) fail("positive_cap_per_mist_per_epoch must be positive");
}

std::vector<RelationInstance> enumerate_positives(const std::vector<Smkg>& smkgs, std::size_t cap,
                                                  std::mt19937_64& rng) {
    std::vector<RelationInstance> out;
    for (const auto& g : smkgs) {
        const auto& nodes = g.nodes();
        const std::size_t n = nodes.size();
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        pairs.reserve(n * (n > 0 ? n - 1 : 0) / 2);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
        }
        if (pairs.size() > cap) {
            std::vector<std::pair<std::size_t, std::size_t>> picked;
            picked.reserve(cap);
            std::sample(pairs.begin(), pairs.end(), std::back_inserter(picked), cap, rng);
            pairs = std::move(picked);
        }
        for (auto [i, j] : pairs) {
            out.push_back({g.mist_id(), nodes[i].tweet_id, nodes[j].tweet_id, g.relation(i, j),
                           nodes[i].stance, nodes[j].stance});
        }
    }
    return out;
}

NegativeSample sample_negative(const RelationInstance& pos, const Smkg& g, std::mt19937_64& rng) {
    std::bernoulli_distribution coin(0.5);
    if (coin(rng)) {
        std::vector<std::size_t> eligible;
        const auto& nodes = g.nodes();
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            if (nodes[k].tweet_id == pos.tweet_x_id) continue;
            if (rtac(nodes[k].stance, pos.stance_x) != pos.relation) eligible.push_back(k);
        }
        if (!eligible.empty()) {
            std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
            const auto& z = nodes[eligible[pick(rng)]];
            RelationInstance neg = pos;
            neg.tweet_y_id = z.tweet_id;
            neg.stance_y = z.stance;
            return {std::move(neg), Corruption::ReplaceTail};
        }
    }
    RelationInstance neg = pos;
    neg.relation = flip(pos.relation);
    return {std::move(neg), Corruption::FlipRelation};
}

double margin_loss(double f_pos, double f_neg, double margin) {
    return std::max(margin - f_pos + f_neg, 0.0);
}

double lr_at(std::uint64_t step, std::uint64_t total_steps, const TrainConfig& cfg) {
    if (total_steps == 0) throw ConfigError("learning-rate schedule needs at least one step");
    if (step > total_steps) throw ConfigError("step beyond the end of the schedule");
    const double s = static_cast<double>(step);
    const double total = static_cast<double>(total_steps);
    const double warm = cfg.warmup_fraction * total;
    if (s <= warm) return cfg.peak_lr * (s / warm);
    return cfg.peak_lr * (total - s) / (total - warm);
}

void adam_step(ModelState& state, const Parameters& gradients, double lr) {
    const auto grads = blocks(gradients);
    auto params = blocks(state.params);
    auto m1 = blocks(state.first_moment);
    auto m2 = blocks(state.second_moment);
    if (grads.size() != params.size()) throw ShapeError("adam_step: gradient blocks do not match parameters");
    for (std::size_t b = 0; b < grads.size(); ++b) {
        if (grads[b].values.size() != params[b].values.size()) {
            throw ShapeError("adam_step: gradient shape mismatch for " + params[b].name);
        }
        for (std::size_t i = 0; i < grads[b].values.size(); ++i) {
            if (!std::isfinite(grads[b].values[i])) {
                throw TrainingDivergenceError("non-finite gradient for " + params[b].name + "[" +
                                              std::to_string(i) + "]");
            }
        }
    }

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(kAdamBeta1, t);
    const double c2 = 1.0 - std::pow(kAdamBeta2, t);
    for (std::size_t b = 0; b < grads.size(); ++b) {
        auto g = grads[b].values;
        auto p = params[b].values;
        auto m = m1[b].values;
        auto v = m2[b].values;
        for (std::size_t i = 0; i < g.size(); ++i) {
            m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g[i];
            v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
            const double m_hat = m[i] / c1;
            const double v_hat = v[i] / c2;
            p[i] -= lr * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
        }
    }
}

double batch_loss(const ModelState& state, const EmbeddingStore& store,
                  std::span<const TrainingPair> pairs, double margin, Parameters* grad) {
    std::map<std::string, ContentEmbedding, std::less<>> cache;
    auto content = [&](const std::string& key) -> const ContentEmbedding& {
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, store.content(key)).first;
        return it->second;
    };

    double total = 0.0;
    for (const auto& pair : pairs) {
        const auto& pos = pair.positive;
        const auto& neg = pair.negative;
        const TripleContent pos_triple{pos.mist_id, pos.relation, content(pos.mist_id),
                                       content(pos.tweet_x_id), content(pos.tweet_y_id)};
        const TripleContent neg_triple{neg.mist_id, neg.relation, content(neg.mist_id),
                                       content(neg.tweet_x_id), content(neg.tweet_y_id)};
        const double f_pos = composed_score(state, pos_triple);
        const double f_neg = composed_score(state, neg_triple);
        const double loss = margin_loss(f_pos, f_neg, margin);
        total += loss;
        if (grad != nullptr && loss > 0.0) {
            accumulate_score_gradient(state, pos_triple, -1.0, *grad);
            accumulate_score_gradient(state, neg_triple, 1.0, *grad);
        }
    }
    return total;
}

ModelState train(const TrainConfig& cfg, const std::vector<Smkg>& smkgs, const EmbeddingStore& store,
                 const std::vector<MisT>& mists, const EpochCallback& on_epoch) {
    cfg.validate();

    std::vector<std::string> mist_ids;
    std::set<std::string> seen;
    for (const auto& m : mists) {
        if (seen.insert(m.id).second) mist_ids.push_back(m.id);
    }
    for (const auto& g : smkgs) {
        if (seen.insert(g.mist_id()).second) mist_ids.push_back(g.mist_id());
    }

    std::vector<std::string> missing;
    for (const auto& g : smkgs) {
        if (!store.contains(g.mist_id())) missing.push_back(g.mist_id());
        for (const auto& n : g.nodes()) {
            if (!store.contains(n.tweet_id)) missing.push_back(n.tweet_id);
        }
    }
    if (!missing.empty()) {
        std::string msg = "missing content embeddings for " + std::to_string(missing.size()) + " key(s):";
        for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg += " " + missing[i];
        throw DataError(msg);
    }

    ModelState state = ModelState::initialize(cfg.model, store.dim(), cfg.d, mist_ids, cfg.seed);

    std::map<std::string, const Smkg*, std::less<>> by_mist;
    std::uint64_t per_epoch = 0;
    for (const auto& g : smkgs) {
        by_mist[g.mist_id()] = &g;
        const std::uint64_t n = g.size();
        per_epoch += std::min<std::uint64_t>(n * (n > 0 ? n - 1 : 0) / 2, cfg.positive_cap_per_mist_per_epoch);
    }
    const std::uint64_t batches = (per_epoch + cfg.batch_size - 1) / cfg.batch_size;
    const std::uint64_t total_steps = batches * cfg.epochs;
    if (total_steps == 0) return state;

    std::mt19937_64 rng(cfg.seed ^ 0x5DEECE66DULL);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto positives = enumerate_positives(smkgs, cfg.positive_cap_per_mist_per_epoch, rng);
        std::shuffle(positives.begin(), positives.end(), rng);

        double epoch_loss = 0.0;
        std::size_t epoch_pairs = 0;
        std::vector<TrainingPair> batch;
        for (std::size_t start = 0; start < positives.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(positives.size(), start + cfg.batch_size);
            batch.clear();
            for (std::size_t i = start; i < end; ++i) {
                const Smkg& g = *by_mist.at(positives[i].mist_id);
                for (std::size_t k = 0; k < cfg.negatives_per_positive; ++k) {
                    batch.push_back({positives[i], sample_negative(positives[i], g, rng).instance});
                }
            }
            Parameters grad = zeros_like(state.params);
            epoch_loss += batch_loss(state, store, batch, cfg.margin, &grad);
            epoch_pairs += batch.size();
            adam_step(state, grad, lr_at(state.step + 1, total_steps, cfg));
        }
        if (on_epoch) {
            on_epoch({epoch + 1, epoch_pairs ? epoch_loss / static_cast<double>(epoch_pairs) : 0.0,
                      epoch_pairs});
        }
    }
    return state;
}

}  // namespace lacr
