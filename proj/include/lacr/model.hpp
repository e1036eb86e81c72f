#pragma once

// Learnable state of the relation scorer: projection encoders plus the
// model-specific extras (TuckER core, TransMS alphas), and the optimizer
// moments that mirror them.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lacr/encoders.hpp"
#include "lacr/ke_models.hpp"

namespace lacr {

struct Parameters {
    ProjectionWeights projection;
    ModelExtras extras;
};

struct ParamBlock {
    std::string name;
    std::span<double> values;
};

struct ConstParamBlock {
    std::string name;
    std::span<const double> values;
};

// Every trainable array in a fixed order. Two Parameters of the same shape
// yield blocks that correspond index by index.
std::vector<ParamBlock> blocks(Parameters& p);
std::vector<ConstParamBlock> blocks(const Parameters& p);

// Same shapes as p, all values zero.
Parameters zeros_like(const Parameters& p);

std::size_t parameter_count(const Parameters& p);

struct ModelState {
    KEModelKind kind = KEModelKind::TransE;
    Parameters params;
    Parameters first_moment;
    Parameters second_moment;
    std::uint64_t step = 0;

    // Seeded initialization: projection weights uniform in +-1/sqrt(D),
    // TuckER core uniform in [-0.1, 0.1], TransMS alphas 0 for every MisT.
    static ModelState initialize(KEModelKind kind, std::size_t content_dim, std::size_t d,
                                 const std::vector<std::string>& mist_ids, std::uint64_t seed);

    std::size_t d() const { return params.projection.d; }
    std::size_t content_dim() const { return params.projection.content_dim(); }
};

// Content vectors feeding one (head, relation, tail) triple of a MisT.
struct TripleContent {
    std::string_view mist_id;
    RelationType relation = RelationType::Agree;
    std::span<const double> mist;
    std::span<const double> head;
    std::span<const double> tail;
};

// f(T-KEPE(head), M-KEPE_r(mist), T-KEPE(tail)).
double composed_score(const ModelState& state, const TripleContent& triple);

// Adds coef * d(composed_score)/d(params) into grad and returns the score.
double accumulate_score_gradient(const ModelState& state, const TripleContent& triple, double coef,
                                 Parameters& grad);

// Pre-encoded scorer for many triples of one MisT: relation embeddings are
// computed once, tweets on demand by the caller.
class MisTScorer {
public:
    MisTScorer(const ModelState& state, std::string_view mist_id, std::span<const double> mist_content);

    EntityEmbedding encode(std::span<const double> tweet_content) const;
    double operator()(const EntityEmbedding& head, RelationType r, const EntityEmbedding& tail) const;

private:
    const ModelState* state_;
    MisTRelations relations_;
    ScoringExtras extras_[2];
};

}  // namespace lacr
