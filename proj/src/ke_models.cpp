#include "lacr/ke_models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "lacr/errors.hpp"

namespace lacr {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

[[noreturn]] void shape_error(KEModelKind kind, const std::string& what) {
    throw ShapeError(std::string(to_string(kind)) + ": " + what);
}

void require_size(KEModelKind kind, const std::vector<double>& v, std::size_t n, const char* name) {
    if (v.size() != n) {
        shape_error(kind, std::string(name) + " has dimension " + std::to_string(v.size()) +
                              ", expected " + std::to_string(n));
    }
}

// Validates shapes; returns the per-kind base dimension d.
std::size_t check_shapes(KEModelKind kind, const EntityEmbedding& h, const RelationEmbedding& r,
                         const EntityEmbedding& t, const ScoringExtras& extras) {
    if (r.phases != (kind == KEModelKind::RotatE)) {
        shape_error(kind, "relation phase flag must be set for RotatE only");
    }
    if (kind != KEModelKind::TransD &&
        (!h.projection.empty() || !t.projection.empty() || !r.projection.empty())) {
        shape_error(kind, "projection vectors are only used by TransD");
    }
    switch (kind) {
        case KEModelKind::TransE:
        case KEModelKind::TransMS: {
            const std::size_t d = r.vector.size();
            if (d == 0) shape_error(kind, "empty relation embedding");
            require_size(kind, h.vector, d, "head");
            require_size(kind, t.vector, d, "tail");
            if (kind == KEModelKind::TransMS && !extras.transms_alpha) {
                throw MissingParameterError("TransMS: alpha parameter missing");
            }
            return d;
        }
        case KEModelKind::TransD: {
            const std::size_t d = r.vector.size();
            if (d == 0) shape_error(kind, "empty relation embedding");
            require_size(kind, r.projection, d, "relation projection");
            require_size(kind, h.vector, d, "head");
            require_size(kind, h.projection, d, "head projection");
            require_size(kind, t.vector, d, "tail");
            require_size(kind, t.projection, d, "tail projection");
            return d;
        }
        case KEModelKind::TuckER: {
            if (extras.tucker_core == nullptr) {
                throw MissingParameterError("TuckER: core tensor missing");
            }
            const auto& core = *extras.tucker_core;
            if (core.values.size() != core.entity_dim * core.relation_dim * core.entity_dim) {
                shape_error(kind, "core tensor size does not match its declared shape");
            }
            require_size(kind, h.vector, core.entity_dim, "head");
            require_size(kind, r.vector, core.relation_dim, "relation");
            require_size(kind, t.vector, core.entity_dim, "tail");
            return core.entity_dim;
        }
        case KEModelKind::RotatE: {
            const std::size_t d = r.vector.size();
            if (d == 0) shape_error(kind, "empty relation embedding");
            require_size(kind, h.vector, 2 * d, "head");
            require_size(kind, t.vector, 2 * d, "tail");
            return d;
        }
    }
    shape_error(kind, "unknown model kind");
}

// TransD projected entity: (I + mp * ep^T) e = e + mp * (ep . e).
std::vector<double> transd_project(const std::vector<double>& e, const std::vector<double>& ep,
                                   const std::vector<double>& mp) {
    const double s = dot(ep, e);
    std::vector<double> out(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) out[i] = e[i] + mp[i] * s;
    return out;
}

struct TransMSResidual {
    std::vector<double> r, tanh_ym, tanh_xm;
};

TransMSResidual transms_residual(const std::vector<double>& x, const std::vector<double>& m,
                                 const std::vector<double>& y, double alpha) {
    TransMSResidual out;
    const std::size_t d = m.size();
    out.r.resize(d);
    out.tanh_ym.resize(d);
    out.tanh_xm.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        out.tanh_ym[i] = std::tanh(y[i] * m[i]);
        out.tanh_xm[i] = std::tanh(x[i] * m[i]);
        out.r[i] = -out.tanh_ym[i] * x[i] + m[i] + alpha * x[i] * y[i] - out.tanh_xm[i] * y[i];
    }
    return out;
}

// Complex residual of component k for RotatE: head_k * e^{i theta_k} - tail_k.
struct Complex {
    double re, im;
};

Complex rotate_residual(const std::vector<double>& x, double theta, const std::vector<double>& y,
                        std::size_t k) {
    const double a = x[2 * k], b = x[2 * k + 1];
    const double c = std::cos(theta), s = std::sin(theta);
    return {a * c - b * s - y[2 * k], a * s + b * c - y[2 * k + 1]};
}

}  // namespace

std::string_view to_string(KEModelKind kind) {
    switch (kind) {
        case KEModelKind::TransE: return "TransE";
        case KEModelKind::TransD: return "TransD";
        case KEModelKind::TransMS: return "TransMS";
        case KEModelKind::TuckER: return "TuckER";
        case KEModelKind::RotatE: return "RotatE";
    }
    return "?";
}

std::optional<KEModelKind> parse_model_kind(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "transe") return KEModelKind::TransE;
    if (lower == "transd") return KEModelKind::TransD;
    if (lower == "transms") return KEModelKind::TransMS;
    if (lower == "tucker") return KEModelKind::TuckER;
    if (lower == "rotate") return KEModelKind::RotatE;
    return std::nullopt;
}

AlphaTable::AlphaTable(const std::vector<std::string>& mist_ids) {
    for (const auto& id : mist_ids) {
        if (index_.emplace(id, mist_ids_.size()).second) mist_ids_.push_back(id);
    }
    values_.assign(2 * mist_ids_.size(), 0.0);
}

std::optional<std::size_t> AlphaTable::slot(std::string_view mist_id, RelationType r) const {
    auto it = index_.find(mist_id);
    if (it == index_.end()) return std::nullopt;
    return 2 * it->second + relation_index(r);
}

ScoringExtras resolve_extras(KEModelKind kind, const ModelExtras& extras, std::string_view mist_id,
                             RelationType r) {
    ScoringExtras out;
    if (kind == KEModelKind::TuckER) {
        if (!extras.tucker_core) throw MissingParameterError("TuckER: core tensor missing");
        out.tucker_core = &*extras.tucker_core;
    }
    if (kind == KEModelKind::TransMS) {
        if (!extras.transms_alpha) throw MissingParameterError("TransMS: alpha table missing");
        auto slot = extras.transms_alpha->slot(mist_id, r);
        if (!slot) {
            throw MissingParameterError("TransMS: no alpha for MisT '" + std::string(mist_id) + "'");
        }
        out.transms_alpha = extras.transms_alpha->values()[*slot];
    }
    return out;
}

double score(KEModelKind kind, const EntityEmbedding& head, const RelationEmbedding& relation,
             const EntityEmbedding& tail, const ScoringExtras& extras) {
    const std::size_t d = check_shapes(kind, head, relation, tail, extras);
    const auto& x = head.vector;
    const auto& m = relation.vector;
    const auto& y = tail.vector;
    double norm = 0.0;
    switch (kind) {
        case KEModelKind::TransE:
            for (std::size_t i = 0; i < d; ++i) norm += std::abs(x[i] + m[i] - y[i]);
            return -norm;
        case KEModelKind::TransD: {
            const auto xp = transd_project(x, head.projection, relation.projection);
            const auto yp = transd_project(y, tail.projection, relation.projection);
            for (std::size_t i = 0; i < d; ++i) norm += std::abs(xp[i] + m[i] - yp[i]);
            return -norm;
        }
        case KEModelKind::TransMS: {
            const auto res = transms_residual(x, m, y, *extras.transms_alpha);
            for (double v : res.r) norm += std::abs(v);
            return -norm;
        }
        case KEModelKind::TuckER: {
            const auto& core = *extras.tucker_core;
            double total = 0.0;
            for (std::size_t i = 0; i < core.entity_dim; ++i) {
                for (std::size_t j = 0; j < core.relation_dim; ++j) {
                    const double xm = x[i] * m[j];
                    const double* row = &core.values[core.index(i, j, 0)];
                    for (std::size_t k = 0; k < core.entity_dim; ++k) total += row[k] * xm * y[k];
                }
            }
            return total;
        }
        case KEModelKind::RotatE:
            for (std::size_t k = 0; k < d; ++k) {
                const Complex r = rotate_residual(x, m[k], y, k);
                norm += std::hypot(r.re, r.im);
            }
            return -norm;
    }
    return 0.0;
}

ScoreGradient grad_score(KEModelKind kind, const EntityEmbedding& head,
                         const RelationEmbedding& relation, const EntityEmbedding& tail,
                         const ScoringExtras& extras) {
    const std::size_t d = check_shapes(kind, head, relation, tail, extras);
    const auto& x = head.vector;
    const auto& m = relation.vector;
    const auto& y = tail.vector;

    ScoreGradient g;
    g.head.vector.assign(x.size(), 0.0);
    g.tail.vector.assign(y.size(), 0.0);
    g.relation.vector.assign(m.size(), 0.0);
    g.relation.phases = relation.phases;

    switch (kind) {
        case KEModelKind::TransE:
            for (std::size_t i = 0; i < d; ++i) {
                const double s = sign(x[i] + m[i] - y[i]);
                g.head.vector[i] = -s;
                g.relation.vector[i] = -s;
                g.tail.vector[i] = s;
            }
            break;
        case KEModelKind::TransD: {
            const auto& xp = head.projection;
            const auto& yp = tail.projection;
            const auto& mp = relation.projection;
            const auto px = transd_project(x, xp, mp);
            const auto py = transd_project(y, yp, mp);
            // df/dr where r is the projected residual.
            std::vector<double> dr(d);
            for (std::size_t i = 0; i < d; ++i) dr[i] = -sign(px[i] + m[i] - py[i]);
            const double mp_dr = dot(mp, dr);
            const double xp_x = dot(xp, x);
            const double yp_y = dot(yp, y);
            g.head.projection.assign(d, 0.0);
            g.tail.projection.assign(d, 0.0);
            g.relation.projection.assign(d, 0.0);
            for (std::size_t i = 0; i < d; ++i) {
                g.head.vector[i] = dr[i] + xp[i] * mp_dr;
                g.head.projection[i] = mp_dr * x[i];
                g.tail.vector[i] = -(dr[i] + yp[i] * mp_dr);
                g.tail.projection[i] = -mp_dr * y[i];
                g.relation.vector[i] = dr[i];
                g.relation.projection[i] = dr[i] * (xp_x - yp_y);
            }
            break;
        }
        case KEModelKind::TransMS: {
            const double alpha = *extras.transms_alpha;
            const auto res = transms_residual(x, m, y, alpha);
            for (std::size_t i = 0; i < d; ++i) {
                const double dr = -sign(res.r[i]);
                const double sech2_ym = 1.0 - res.tanh_ym[i] * res.tanh_ym[i];
                const double sech2_xm = 1.0 - res.tanh_xm[i] * res.tanh_xm[i];
                const double dx = -res.tanh_ym[i] + alpha * y[i] - sech2_xm * m[i] * y[i];
                const double dy = -sech2_ym * m[i] * x[i] + alpha * x[i] - res.tanh_xm[i];
                const double dm = 1.0 - sech2_ym * y[i] * x[i] - sech2_xm * x[i] * y[i];
                g.head.vector[i] = dr * dx;
                g.tail.vector[i] = dr * dy;
                g.relation.vector[i] = dr * dm;
                g.alpha += dr * x[i] * y[i];
            }
            break;
        }
        case KEModelKind::TuckER: {
            const auto& core = *extras.tucker_core;
            g.tucker_core.assign(core.values.size(), 0.0);
            for (std::size_t i = 0; i < core.entity_dim; ++i) {
                for (std::size_t j = 0; j < core.relation_dim; ++j) {
                    for (std::size_t k = 0; k < core.entity_dim; ++k) {
                        const std::size_t idx = core.index(i, j, k);
                        const double w = core.values[idx];
                        g.head.vector[i] += w * m[j] * y[k];
                        g.relation.vector[j] += w * x[i] * y[k];
                        g.tail.vector[k] += w * x[i] * m[j];
                        g.tucker_core[idx] = x[i] * m[j] * y[k];
                    }
                }
            }
            break;
        }
        case KEModelKind::RotatE:
            for (std::size_t k = 0; k < d; ++k) {
                const Complex r = rotate_residual(x, m[k], y, k);
                const double mod = std::hypot(r.re, r.im);
                if (mod == 0.0) continue;
                const double u = r.re / mod, v = r.im / mod;  // d|r|/d(re, im)
                const double c = std::cos(m[k]), s = std::sin(m[k]);
                const double a = x[2 * k], b = x[2 * k + 1];
                g.head.vector[2 * k] = -(u * c + v * s);
                g.head.vector[2 * k + 1] = -(-u * s + v * c);
                g.tail.vector[2 * k] = u;
                g.tail.vector[2 * k + 1] = v;
                // d(re)/dtheta = -(a s + b c), d(im)/dtheta = a c - b s
                g.relation.vector[k] = -(u * -(a * s + b * c) + v * (a * c - b * s));
            }
            break;
    }
    return g;
}

double min_residual_magnitude(KEModelKind kind, const EntityEmbedding& head,
                              const RelationEmbedding& relation, const EntityEmbedding& tail,
                              const ScoringExtras& extras) {
    const std::size_t d = check_shapes(kind, head, relation, tail, extras);
    const auto& x = head.vector;
    const auto& m = relation.vector;
    const auto& y = tail.vector;
    double best = std::numeric_limits<double>::infinity();
    switch (kind) {
        case KEModelKind::TransE:
            for (std::size_t i = 0; i < d; ++i) best = std::min(best, std::abs(x[i] + m[i] - y[i]));
            break;
        case KEModelKind::TransD: {
            const auto px = transd_project(x, head.projection, relation.projection);
            const auto py = transd_project(y, tail.projection, relation.projection);
            for (std::size_t i = 0; i < d; ++i) best = std::min(best, std::abs(px[i] + m[i] - py[i]));
            break;
        }
        case KEModelKind::TransMS: {
            const auto res = transms_residual(x, m, y, *extras.transms_alpha);
            for (double v : res.r) best = std::min(best, std::abs(v));
            break;
        }
        case KEModelKind::TuckER:
            break;
        case KEModelKind::RotatE:
            for (std::size_t k = 0; k < d; ++k) {
                const Complex r = rotate_residual(x, m[k], y, k);
                best = std::min(best, std::hypot(r.re, r.im));
            }
            break;
    }
    return best;
}

}  // namespace lacr
