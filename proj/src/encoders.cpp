#include "lacr/encoders.hpp"

#include <cctype>
#include <cmath>

#include "lacr/errors.hpp"

namespace lacr {

void EmbeddingStore::add(std::string key, std::span<const float> values) {
    if (values.size() != dim_) {
        throw DataError("embedding '" + key + "' has dimension " + std::to_string(values.size()) +
                        ", store dimension is " + std::to_string(dim_));
    }
    for (float v : values) {
        if (!std::isfinite(v)) throw DataError("embedding '" + key + "' has a non-finite value");
    }
    if (index_.count(key) != 0) throw DataError("duplicate embedding key '" + key + "'");
    index_.emplace(key, keys_.size());
    keys_.push_back(std::move(key));
    values_.insert(values_.end(), values.begin(), values.end());
}

bool EmbeddingStore::contains(std::string_view key) const { return index_.find(key) != index_.end(); }

std::span<const float> EmbeddingStore::raw(std::string_view key) const {
    auto it = index_.find(key);
    if (it == index_.end()) throw DataError("no content embedding for key '" + std::string(key) + "'");
    return std::span<const float>(values_).subspan(it->second * dim_, dim_);
}

ContentEmbedding EmbeddingStore::content(std::string_view key) const {
    auto r = raw(key);
    return ContentEmbedding(r.begin(), r.end());
}

std::vector<double> AffineLayer::apply(std::span<const double> x) const {
    if (x.size() != in_dim) {
        throw ShapeError("affine layer expects input of dimension " + std::to_string(in_dim) +
                         ", got " + std::to_string(x.size()));
    }
    std::vector<double> y(bias);
    for (std::size_t o = 0; o < out_dim; ++o) {
        const double* row = &weight[o * in_dim];
        double acc = 0.0;
        for (std::size_t i = 0; i < in_dim; ++i) acc += row[i] * x[i];
        y[o] += acc;
    }
    return y;
}

void AffineLayer::backprop(std::span<const double> x, std::span<const double> d_out,
                           AffineLayer& grad) const {
    for (std::size_t o = 0; o < out_dim; ++o) {
        const double g = d_out[o];
        if (g == 0.0) continue;
        double* row = &grad.weight[o * in_dim];
        for (std::size_t i = 0; i < in_dim; ++i) row[i] += g * x[i];
        grad.bias[o] += g;
    }
}

std::size_t entity_width(KEModelKind kind, std::size_t d) {
    return (kind == KEModelKind::TransD || kind == KEModelKind::RotatE) ? 2 * d : d;
}

std::size_t relation_width(KEModelKind kind, std::size_t d) {
    return kind == KEModelKind::TransD ? 2 * d : d;
}

ProjectionWeights ProjectionWeights::zeros(KEModelKind kind, std::size_t content_dim, std::size_t d) {
    if (content_dim == 0 || d == 0) throw ConfigError("projection dimensions must be positive");
    ProjectionWeights w;
    w.kind = kind;
    w.d = d;
    w.m_kepe_agree = AffineLayer(content_dim, relation_width(kind, d));
    w.m_kepe_disagree = AffineLayer(content_dim, relation_width(kind, d));
    w.t_kepe = AffineLayer(content_dim, entity_width(kind, d));
    return w;
}

ProjectionWeights ProjectionWeights::random(KEModelKind kind, std::size_t content_dim, std::size_t d,
                                            std::mt19937_64& rng) {
    ProjectionWeights w = zeros(kind, content_dim, d);
    const double bound = 1.0 / std::sqrt(static_cast<double>(content_dim));
    std::uniform_real_distribution<double> uni(-bound, bound);
    for (AffineLayer* layer : {&w.m_kepe_agree, &w.m_kepe_disagree, &w.t_kepe}) {
        for (double& v : layer->weight) v = uni(rng);
    }
    return w;
}

EntityEmbedding entity_from_output(KEModelKind kind, std::size_t d, std::vector<double> out) {
    EntityEmbedding e;
    if (kind == KEModelKind::TransD) {
        e.projection.assign(out.begin() + static_cast<std::ptrdiff_t>(d), out.end());
        out.resize(d);
    }
    e.vector = std::move(out);
    return e;
}

RelationEmbedding relation_from_output(KEModelKind kind, std::size_t d, std::vector<double> out) {
    RelationEmbedding r;
    if (kind == KEModelKind::TransD) {
        r.projection.assign(out.begin() + static_cast<std::ptrdiff_t>(d), out.end());
        out.resize(d);
    }
    r.phases = kind == KEModelKind::RotatE;
    r.vector = std::move(out);
    return r;
}

std::vector<double> flatten(const EntityEmbedding& e) {
    std::vector<double> out(e.vector);
    out.insert(out.end(), e.projection.begin(), e.projection.end());
    return out;
}

std::vector<double> flatten(const RelationEmbedding& r) {
    std::vector<double> out(r.vector);
    out.insert(out.end(), r.projection.begin(), r.projection.end());
    return out;
}

MisTRelations encode_mist(const ProjectionWeights& w, std::span<const double> mc) {
    return {relation_from_output(w.kind, w.d, w.m_kepe_agree.apply(mc)),
            relation_from_output(w.kind, w.d, w.m_kepe_disagree.apply(mc))};
}

EntityEmbedding encode_tweet(const ProjectionWeights& w, std::span<const double> tc) {
    return entity_from_output(w.kind, w.d, w.t_kepe.apply(tc));
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c >= 0x80) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

}  // namespace

ContentEmbedding hash_encode(std::string_view text, std::size_t dim) {
    if (dim == 0) throw ConfigError("hash_encode: dimension must be at least 1");
    ContentEmbedding v(dim, 0.0);
    const auto tokens = tokenize(text);
    auto bump = [&](const std::string& gram) {
        const std::uint64_t h = fnv1a(gram);
        v[h % dim] += (h >> 63) ? -1.0 : 1.0;
    };
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        bump(tokens[i]);
        if (i + 1 < tokens.size()) bump(tokens[i] + ' ' + tokens[i + 1]);
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
        for (double& x : v) x /= norm;
    }
    return v;
}

}  // namespace lacr
