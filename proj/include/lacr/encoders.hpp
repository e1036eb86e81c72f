#pragma once

// Content embeddings and the projection encoders that map them into
// knowledge-embedding space:
//   M-KEPE: two independent affine heads, MisT content -> agree / disagree relation
//   T-KEPE: one affine map, tweet content -> tweet entity embedding

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lacr/ke_models.hpp"

namespace lacr {

using ContentEmbedding = std::vector<double>;

// Frozen content vectors keyed by tweet id / MisT id. Values are kept as the
// 32-bit floats they are stored as on disk.
class EmbeddingStore {
public:
    EmbeddingStore() = default;
    explicit EmbeddingStore(std::uint32_t dim) : dim_(dim) {}

    std::uint32_t dim() const { return dim_; }
    std::size_t size() const { return keys_.size(); }
    const std::vector<std::string>& keys() const { return keys_; }

    // Throws DataError on duplicate key, wrong dimension or non-finite value.
    void add(std::string key, std::span<const float> values);
    bool contains(std::string_view key) const;
    std::span<const float> raw(std::string_view key) const;
    // Widened to double. Throws DataError if the key is absent.
    ContentEmbedding content(std::string_view key) const;

private:
    std::uint32_t dim_ = 0;
    std::vector<std::string> keys_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::vector<float> values_;
};

// y = W x + b, W stored row-major (out_dim x in_dim).
struct AffineLayer {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    std::vector<double> weight;
    std::vector<double> bias;

    AffineLayer() = default;
    AffineLayer(std::size_t in, std::size_t out)
        : in_dim(in), out_dim(out), weight(in * out, 0.0), bias(out, 0.0) {}

    std::vector<double> apply(std::span<const double> x) const;
    // grad.weight += d_out x^T, grad.bias += d_out.
    void backprop(std::span<const double> x, std::span<const double> d_out, AffineLayer& grad) const;
};

// Output widths of the encoders for a model kind with base dimension d.
std::size_t entity_width(KEModelKind kind, std::size_t d);
std::size_t relation_width(KEModelKind kind, std::size_t d);

struct ProjectionWeights {
    KEModelKind kind = KEModelKind::TransE;
    std::size_t d = 8;
    AffineLayer m_kepe_agree;
    AffineLayer m_kepe_disagree;
    AffineLayer t_kepe;

    // Zero-initialized layers with the shapes `kind` needs.
    static ProjectionWeights zeros(KEModelKind kind, std::size_t content_dim, std::size_t d);
    // Weights uniform in [-1/sqrt(D), 1/sqrt(D)], biases 0.
    static ProjectionWeights random(KEModelKind kind, std::size_t content_dim, std::size_t d,
                                    std::mt19937_64& rng);

    std::size_t content_dim() const { return t_kepe.in_dim; }
    const AffineLayer& relation_layer(RelationType r) const {
        return r == RelationType::Agree ? m_kepe_agree : m_kepe_disagree;
    }
    AffineLayer& relation_layer(RelationType r) {
        return r == RelationType::Agree ? m_kepe_agree : m_kepe_disagree;
    }
};

// Splits a raw encoder output into the embedding layout of `kind`
// (TransD: first half vector, second half projection).
EntityEmbedding entity_from_output(KEModelKind kind, std::size_t d, std::vector<double> out);
RelationEmbedding relation_from_output(KEModelKind kind, std::size_t d, std::vector<double> out);
// Inverse of the above, applied to gradients.
std::vector<double> flatten(const EntityEmbedding& e);
std::vector<double> flatten(const RelationEmbedding& r);

struct MisTRelations {
    RelationEmbedding agree;
    RelationEmbedding disagree;

    const RelationEmbedding& get(RelationType r) const {
        return r == RelationType::Agree ? agree : disagree;
    }
};

MisTRelations encode_mist(const ProjectionWeights& w, std::span<const double> mc);
EntityEmbedding encode_tweet(const ProjectionWeights& w, std::span<const double> tc);

// Deterministic bag-of-n-grams stand-in for a sentence encoder: lowercased
// word unigrams and bigrams are hashed into D signed buckets, then the vector
// is L2-normalized. Empty text gives the zero vector.
ContentEmbedding hash_encode(std::string_view text, std::size_t dim);

}  // namespace lacr
