#include "lacr/model.hpp"

#include <random>

namespace lacr {

namespace {

template <typename P, typename Block>
std::vector<Block> collect_blocks(P& p) {
    std::vector<Block> out;
    auto add_layer = [&](const char* name, auto& layer) {
        out.push_back({std::string(name) + ".weight", layer.weight});
        out.push_back({std::string(name) + ".bias", layer.bias});
    };
    add_layer("m_kepe_agree", p.projection.m_kepe_agree);
    add_layer("m_kepe_disagree", p.projection.m_kepe_disagree);
    add_layer("t_kepe", p.projection.t_kepe);
    if (p.extras.tucker_core) out.push_back({"tucker_core", p.extras.tucker_core->values});
    if (p.extras.transms_alpha) out.push_back({"transms_alpha", p.extras.transms_alpha->values()});
    return out;
}

}  // namespace

std::vector<ParamBlock> blocks(Parameters& p) { return collect_blocks<Parameters, ParamBlock>(p); }

std::vector<ConstParamBlock> blocks(const Parameters& p) {
    return collect_blocks<const Parameters, ConstParamBlock>(p);
}

Parameters zeros_like(const Parameters& p) {
    Parameters z = p;
    for (auto& b : blocks(z)) std::fill(b.values.begin(), b.values.end(), 0.0);
    return z;
}

std::size_t parameter_count(const Parameters& p) {
    std::size_t n = 0;
    for (const auto& b : blocks(p)) n += b.values.size();
    return n;
}

ModelState ModelState::initialize(KEModelKind kind, std::size_t content_dim, std::size_t d,
                                  const std::vector<std::string>& mist_ids, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ModelState s;
    s.kind = kind;
    s.params.projection = ProjectionWeights::random(kind, content_dim, d, rng);
    if (kind == KEModelKind::TuckER) {
        TuckerCore core(d, d);
        std::uniform_real_distribution<double> uni(-0.1, 0.1);
        for (double& v : core.values) v = uni(rng);
        s.params.extras.tucker_core = std::move(core);
    }
    if (kind == KEModelKind::TransMS) s.params.extras.transms_alpha = AlphaTable(mist_ids);
    s.first_moment = zeros_like(s.params);
    s.second_moment = zeros_like(s.params);
    return s;
}

double composed_score(const ModelState& state, const TripleContent& t) {
    const auto& w = state.params.projection;
    const RelationEmbedding rel =
        relation_from_output(w.kind, w.d, w.relation_layer(t.relation).apply(t.mist));
    const EntityEmbedding head = encode_tweet(w, t.head);
    const EntityEmbedding tail = encode_tweet(w, t.tail);
    return score(state.kind, head, rel, tail,
                 resolve_extras(state.kind, state.params.extras, t.mist_id, t.relation));
}

double accumulate_score_gradient(const ModelState& state, const TripleContent& t, double coef,
                                 Parameters& grad) {
    const auto& w = state.params.projection;
    const AffineLayer& rel_layer = w.relation_layer(t.relation);
    const RelationEmbedding rel = relation_from_output(w.kind, w.d, rel_layer.apply(t.mist));
    const EntityEmbedding head = encode_tweet(w, t.head);
    const EntityEmbedding tail = encode_tweet(w, t.tail);
    const ScoringExtras extras = resolve_extras(state.kind, state.params.extras, t.mist_id, t.relation);

    const double value = score(state.kind, head, rel, tail, extras);
    const ScoreGradient g = grad_score(state.kind, head, rel, tail, extras);

    auto scaled = [coef](std::vector<double> v) {
        for (double& x : v) x *= coef;
        return v;
    };
    w.t_kepe.backprop(t.head, scaled(flatten(g.head)), grad.projection.t_kepe);
    w.t_kepe.backprop(t.tail, scaled(flatten(g.tail)), grad.projection.t_kepe);
    rel_layer.backprop(t.mist, scaled(flatten(g.relation)), grad.projection.relation_layer(t.relation));

    if (state.kind == KEModelKind::TuckER) {
        auto& core = grad.extras.tucker_core->values;
        for (std::size_t i = 0; i < core.size(); ++i) core[i] += coef * g.tucker_core[i];
    }
    if (state.kind == KEModelKind::TransMS) {
        const auto slot = grad.extras.transms_alpha->slot(t.mist_id, t.relation);
        grad.extras.transms_alpha->values()[*slot] += coef * g.alpha;
    }
    return value;
}

MisTScorer::MisTScorer(const ModelState& state, std::string_view mist_id,
                       std::span<const double> mist_content)
    : state_(&state), relations_(encode_mist(state.params.projection, mist_content)) {
    for (RelationType r : kRelationTypes) {
        extras_[relation_index(r)] = resolve_extras(state.kind, state.params.extras, mist_id, r);
    }
}

EntityEmbedding MisTScorer::encode(std::span<const double> tweet_content) const {
    return encode_tweet(state_->params.projection, tweet_content);
}

double MisTScorer::operator()(const EntityEmbedding& head, RelationType r,
                              const EntityEmbedding& tail) const {
    return score(state_->kind, head, relations_.get(r), tail, extras_[relation_index(r)]);
}

}  // namespace lacr
