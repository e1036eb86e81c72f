#pragma once

// Knowledge-embedding relation scoring functions and their analytic
// gradients. Distances use the L1 norm; for RotatE the norm is the sum of
// componentwise complex moduli.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lacr/graph.hpp"

namespace lacr {

enum class KEModelKind { TransE, TransD, TransMS, TuckER, RotatE };

inline constexpr KEModelKind kAllModelKinds[] = {KEModelKind::TransE, KEModelKind::TransD,
                                                 KEModelKind::TransMS, KEModelKind::TuckER,
                                                 KEModelKind::RotatE};

std::string_view to_string(KEModelKind kind);
// Accepts the CLI spellings (transe, transd, transms, tucker, rotate) and the
// display names, case-insensitively.
std::optional<KEModelKind> parse_model_kind(std::string_view text);

// Tweet embedding. For RotatE `vector` holds 2d reals, interleaved (re, im).
// `projection` is used by TransD only and is empty otherwise.
struct EntityEmbedding {
    std::vector<double> vector;
    std::vector<double> projection;
};

// Relation embedding of one MisT. With `phases` set (RotatE) `vector` holds
// d rotation angles; the relation acts as e^{i*theta} per component.
struct RelationEmbedding {
    std::vector<double> vector;
    std::vector<double> projection;
    bool phases = false;
};

// Core tensor W of shape entity_dim x relation_dim x entity_dim, row-major.
struct TuckerCore {
    std::size_t entity_dim = 0;
    std::size_t relation_dim = 0;
    std::vector<double> values;

    TuckerCore() = default;
    TuckerCore(std::size_t de, std::size_t dr)
        : entity_dim(de), relation_dim(dr), values(de * dr * de, 0.0) {}

    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
        return (i * relation_dim + j) * entity_dim + k;
    }
    double& at(std::size_t i, std::size_t j, std::size_t k) { return values[index(i, j, k)]; }
    double at(std::size_t i, std::size_t j, std::size_t k) const { return values[index(i, j, k)]; }
};

// One scalar per (MisT, RelationType); values laid out [mist][relation].
class AlphaTable {
public:
    AlphaTable() = default;
    explicit AlphaTable(const std::vector<std::string>& mist_ids);

    std::optional<std::size_t> slot(std::string_view mist_id, RelationType r) const;
    const std::vector<std::string>& mist_ids() const { return mist_ids_; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<std::string> mist_ids_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::vector<double> values_;
};

struct ModelExtras {
    std::optional<TuckerCore> tucker_core;     // TuckER only
    std::optional<AlphaTable> transms_alpha;   // TransMS only
};

// Extras resolved for a single triple.
struct ScoringExtras {
    const TuckerCore* tucker_core = nullptr;
    std::optional<double> transms_alpha;
};

// Looks up what `kind` needs for (mist_id, r). Throws MissingParameterError.
ScoringExtras resolve_extras(KEModelKind kind, const ModelExtras& extras, std::string_view mist_id,
                             RelationType r);

double score(KEModelKind kind, const EntityEmbedding& head, const RelationEmbedding& relation,
             const EntityEmbedding& tail, const ScoringExtras& extras);

struct ScoreGradient {
    EntityEmbedding head;
    RelationEmbedding relation;
    EntityEmbedding tail;
    std::vector<double> tucker_core;  // empty unless TuckER
    double alpha = 0.0;               // TransMS only
};

// Analytic partial derivatives of score(). At L1 kinks (a residual component,
// or a RotatE complex residual, exactly zero) the subgradient 0 is used.
ScoreGradient grad_score(KEModelKind kind, const EntityEmbedding& head,
                         const RelationEmbedding& relation, const EntityEmbedding& tail,
                         const ScoringExtras& extras);

// Smallest |residual component| of the triple; used to keep numeric checks
// away from L1 kinks. Returns +inf for TuckER (no kinks).
double min_residual_magnitude(KEModelKind kind, const EntityEmbedding& head,
                              const RelationEmbedding& relation, const EntityEmbedding& tail,
                              const ScoringExtras& extras);

}  // namespace lacr
