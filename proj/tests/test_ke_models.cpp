#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "lacr/errors.hpp"
#include "lacr/ke_models.hpp"
#include "support.hpp"

using namespace lacr;
using lacr::testing::central_differences;
using lacr::testing::relative_error;

namespace {

EntityEmbedding ent(std::vector<double> v, std::vector<double> p = {}) { return {std::move(v), std::move(p)}; }
RelationEmbedding rel(std::vector<double> v, std::vector<double> p = {}, bool phases = false) {
    return {std::move(v), std::move(p), phases};
}

double l1(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

// Straight transcriptions of the scoring table, used as oracles.
double oracle_transd(const EntityEmbedding& x, const RelationEmbedding& m, const EntityEmbedding& y) {
    const std::size_t d = x.vector.size();
    std::vector<std::vector<double>> mx(d, std::vector<double>(d)), my(d, std::vector<double>(d));
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            mx[i][j] = (i == j ? 1.0 : 0.0) + m.projection[i] * x.projection[j];
            my[i][j] = (i == j ? 1.0 : 0.0) + m.projection[i] * y.projection[j];
        }
    }
    std::vector<double> r(d);
    for (std::size_t i = 0; i < d; ++i) {
        double a = 0.0, b = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            a += mx[i][j] * x.vector[j];
            b += my[i][j] * y.vector[j];
        }
        r[i] = a + m.vector[i] - b;
    }
    return -l1(r);
}

double oracle_transms(const EntityEmbedding& x, const RelationEmbedding& m, const EntityEmbedding& y,
                      double alpha) {
    std::vector<double> r(x.vector.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double xi = x.vector[i], yi = y.vector[i], mi = m.vector[i];
        r[i] = -std::tanh(yi * mi) * xi + mi + alpha * (xi * yi) - std::tanh(xi * mi) * yi;
    }
    return -l1(r);
}

double oracle_tucker(const EntityEmbedding& x, const RelationEmbedding& m, const EntityEmbedding& y,
                     const TuckerCore& w) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.entity_dim; ++i) {
        for (std::size_t j = 0; j < w.relation_dim; ++j) {
            for (std::size_t k = 0; k < w.entity_dim; ++k) {
                s += w.at(i, j, k) * x.vector[i] * m.vector[j] * y.vector[k];
            }
        }
    }
    return s;
}

double oracle_rotate(const EntityEmbedding& x, const RelationEmbedding& m, const EntityEmbedding& y) {
    double s = 0.0;
    for (std::size_t k = 0; k < m.vector.size(); ++k) {
        const std::complex<double> a(x.vector[2 * k], x.vector[2 * k + 1]);
        const std::complex<double> b(y.vector[2 * k], y.vector[2 * k + 1]);
        s += std::abs(a * std::polar(1.0, m.vector[k]) - b);
    }
    return -s;
}

std::vector<double> uniform(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

struct Point {
    EntityEmbedding head, tail;
    RelationEmbedding relation;
    TuckerCore core;
    double alpha = 0.0;
};

Point random_point(KEModelKind kind, std::size_t d, std::mt19937_64& rng) {
    Point p;
    const std::size_t ew = kind == KEModelKind::RotatE ? 2 * d : d;
    p.head.vector = uniform(ew, rng);
    p.tail.vector = uniform(ew, rng);
    p.relation.vector = uniform(d, rng, kind == KEModelKind::RotatE ? -3.0 : -1.0, kind == KEModelKind::RotatE ? 3.0 : 1.0);
    p.relation.phases = kind == KEModelKind::RotatE;
    if (kind == KEModelKind::TransD) {
        p.head.projection = uniform(d, rng);
        p.tail.projection = uniform(d, rng);
        p.relation.projection = uniform(d, rng);
    }
    if (kind == KEModelKind::TuckER) {
        p.core = TuckerCore(d, d);
        p.core.values = uniform(d * d * d, rng);
    }
    p.alpha = uniform(1, rng)[0];
    return p;
}

ScoringExtras extras_of(KEModelKind kind, const Point& p) {
    ScoringExtras e;
    if (kind == KEModelKind::TuckER) e.tucker_core = &p.core;
    if (kind == KEModelKind::TransMS) e.transms_alpha = p.alpha;
    return e;
}

}  // namespace

TEST_SUITE("ke_models") {

TEST_CASE("model names parse") {
    CHECK(parse_model_kind("transe") == KEModelKind::TransE);
    CHECK(parse_model_kind("TuckER") == KEModelKind::TuckER);
    CHECK(parse_model_kind("ROTATE") == KEModelKind::RotatE);
    CHECK_FALSE(parse_model_kind("distmult").has_value());
    for (KEModelKind k : kAllModelKinds) CHECK(parse_model_kind(to_string(k)) == k);
}

TEST_CASE("TransE examples") {
    CHECK(score(KEModelKind::TransE, ent({1, 2}), rel({0, 0}), ent({1, 2}), {}) == 0.0);
    CHECK(score(KEModelKind::TransE, ent({1, 0}), rel({0, 1}), ent({0, 0}), {}) == -2.0);
}

TEST_CASE("TransMS examples") {
    ScoringExtras e;
    e.transms_alpha = 0.0;
    CHECK(score(KEModelKind::TransMS, ent({0.3, -2.0}), rel({0, 0}), ent({1.5, 0.7}), e) == 0.0);
    e.transms_alpha = 1.0;
    CHECK(score(KEModelKind::TransMS, ent({1}), rel({0}), ent({1}), e) == -1.0);
}

TEST_CASE("TuckER examples") {
    TuckerCore w(1, 1);
    w.at(0, 0, 0) = 2.0;
    ScoringExtras e;
    e.tucker_core = &w;
    CHECK(score(KEModelKind::TuckER, ent({3}), rel({5}), ent({7}), e) == 210.0);

    TuckerCore id(2, 1);
    id.at(0, 0, 0) = 1.0;
    id.at(1, 0, 1) = 1.0;
    e.tucker_core = &id;
    const double a = 0.7, b = -1.3, c = 2.1, d = 0.4;
    const EntityEmbedding x = ent({a, b}), y = ent({c, d});
    const RelationEmbedding m = rel({1});
    CHECK(score(KEModelKind::TuckER, x, m, y, e) == doctest::Approx(a * c + b * d).epsilon(1e-15));
    CHECK(score(KEModelKind::TuckER, x, m, y, e) == doctest::Approx(oracle_tucker(x, m, y, id)).epsilon(1e-15));
}

TEST_CASE("TransD examples") {
    const auto x = ent({1, 0}, {1, 0});
    const auto y = ent({2, 0}, {0, 0});
    const auto m = rel({0, 0}, {1, 0});
    CHECK(score(KEModelKind::TransD, x, m, y, {}) == 0.0);
    CHECK(oracle_transd(x, m, y) == 0.0);

    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
        const auto v1 = uniform(5, rng), v2 = uniform(5, rng), r = uniform(5, rng);
        const std::vector<double> zero(5, 0.0);
        CHECK(score(KEModelKind::TransD, ent(v1, zero), rel(r, zero), ent(v2, zero), {}) ==
              score(KEModelKind::TransE, ent(v1), rel(r), ent(v2), {}));
    }
}

TEST_CASE("RotatE examples") {
    const double pi = std::numbers::pi;
    CHECK(score(KEModelKind::RotatE, ent({1, 0}), rel({pi}, {}, true), ent({-1, 0}), {}) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(score(KEModelKind::RotatE, ent({1, 0}), rel({pi / 2}, {}, true), ent({1, 0}), {}) ==
          doctest::Approx(-1.414214).epsilon(1e-6));
}

TEST_CASE("RotatE with zero angles is the modulus distance") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        const auto a = uniform(6, rng), b = uniform(6, rng);
        double expect = 0.0;
        for (std::size_t k = 0; k < 3; ++k) expect -= std::hypot(a[2 * k] - b[2 * k], a[2 * k + 1] - b[2 * k + 1]);
        CHECK(score(KEModelKind::RotatE, ent(a), rel({0, 0, 0}, {}, true), ent(b), {}) == expect);
    }
}

TEST_CASE("RotatE rotation preserves modulus") {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 20; ++i) {
        const auto a = uniform(2, rng);
        const double theta = uniform(1, rng, -3.0, 3.0)[0];
        const std::complex<double> z(a[0], a[1]);
        CHECK(std::abs(std::abs(z * std::polar(1.0, theta)) - std::abs(z)) < 1e-12);
        // head rotated onto itself scaled to zero tail: score is minus its modulus
        CHECK(score(KEModelKind::RotatE, ent(a), rel({theta}, {}, true), ent({0, 0}), {}) ==
              doctest::Approx(-std::abs(z)).epsilon(1e-12));
    }
}

TEST_CASE("scores agree with independent transcriptions") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
        for (KEModelKind kind : kAllModelKinds) {
            const Point p = random_point(kind, 4, rng);
            const double got = score(kind, p.head, p.relation, p.tail, extras_of(kind, p));
            double want = 0.0;
            switch (kind) {
                case KEModelKind::TransE: {
                    std::vector<double> r(4);
                    for (int k = 0; k < 4; ++k) r[k] = p.head.vector[k] + p.relation.vector[k] - p.tail.vector[k];
                    want = -l1(r);
                    break;
                }
                case KEModelKind::TransD: want = oracle_transd(p.head, p.relation, p.tail); break;
                case KEModelKind::TransMS: want = oracle_transms(p.head, p.relation, p.tail, p.alpha); break;
                case KEModelKind::TuckER: want = oracle_tucker(p.head, p.relation, p.tail, p.core); break;
                case KEModelKind::RotatE: want = oracle_rotate(p.head, p.relation, p.tail); break;
            }
            CHECK(got == doctest::Approx(want).epsilon(1e-12));
            if (kind != KEModelKind::TuckER) CHECK(got <= 0.0);
        }
    }
}

TEST_CASE("TuckER is linear in each argument") {
    std::mt19937_64 rng(8);
    const Point p = random_point(KEModelKind::TuckER, 3, rng);
    const auto e = extras_of(KEModelKind::TuckER, p);
    const double base = score(KEModelKind::TuckER, p.head, p.relation, p.tail, e);
    const double a = 2.5;
    auto scaled = [a](std::vector<double> v) {
        for (double& x : v) x *= a;
        return v;
    };
    CHECK(score(KEModelKind::TuckER, ent(scaled(p.head.vector)), p.relation, p.tail, e) ==
          doctest::Approx(a * base).epsilon(1e-12));
    CHECK(score(KEModelKind::TuckER, p.head, rel(scaled(p.relation.vector)), p.tail, e) ==
          doctest::Approx(a * base).epsilon(1e-12));
    CHECK(score(KEModelKind::TuckER, p.head, p.relation, ent(scaled(p.tail.vector)), e) ==
          doctest::Approx(a * base).epsilon(1e-12));
}

TEST_CASE("shape and parameter errors") {
    CHECK_THROWS_AS(score(KEModelKind::TransE, ent({1, 2}), rel({0}), ent({1, 2}), {}), ShapeError);
    CHECK_THROWS_AS(score(KEModelKind::TuckER, ent({1}), rel({1}), ent({1}), {}), MissingParameterError);
    CHECK_THROWS_AS(score(KEModelKind::TransMS, ent({1}), rel({1}), ent({1}), {}), MissingParameterError);
    CHECK_THROWS_AS(score(KEModelKind::RotatE, ent({1, 0}), rel({0}), ent({1, 0}), {}), ShapeError);
    CHECK_THROWS_AS(score(KEModelKind::TransD, ent({1}), rel({1}, {1}), ent({1}, {1}), {}), ShapeError);

    ModelExtras none;
    CHECK_THROWS_AS(resolve_extras(KEModelKind::TuckER, none, "m", RelationType::Agree), MissingParameterError);
    ModelExtras with_alpha;
    with_alpha.transms_alpha = AlphaTable({"m1"});
    CHECK_THROWS_AS(resolve_extras(KEModelKind::TransMS, with_alpha, "m2", RelationType::Agree),
                    MissingParameterError);
    CHECK(resolve_extras(KEModelKind::TransMS, with_alpha, "m1", RelationType::Disagree).transms_alpha == 0.0);
}

TEST_CASE("TransE gradient is minus the residual sign") {
    const auto g = grad_score(KEModelKind::TransE, ent({3, 2}), rel({1, 1}), ent({0, 0}), {});
    CHECK(g.head.vector == std::vector<double>{-1, -1});
    CHECK(g.relation.vector == std::vector<double>{-1, -1});
    CHECK(g.tail.vector == std::vector<double>{1, 1});
}

TEST_CASE("gradient at a kink is zero in that component") {
    const auto g = grad_score(KEModelKind::TransE, ent({1, 2}), rel({0, 1}), ent({1, 0}), {});
    CHECK(g.head.vector[0] == 0.0);
    CHECK(g.head.vector[1] == -1.0);
    const auto h = grad_score(KEModelKind::RotatE, ent({1, 0}), rel({0}, {}, true), ent({1, 0}), {});
    CHECK(h.head.vector == std::vector<double>{0, 0});
    CHECK(h.relation.vector == std::vector<double>{0});
}

TEST_CASE("analytic gradients match central differences") {
    constexpr double kEps = 1e-5;
    constexpr double kTol = 1e-4;
    std::mt19937_64 rng(11);
    for (KEModelKind kind : kAllModelKinds) {
        CAPTURE(to_string(kind));
        int checked = 0;
        while (checked < 100) {
            Point p = random_point(kind, 3, rng);
            if (min_residual_magnitude(kind, p.head, p.relation, p.tail, extras_of(kind, p)) < 1e-3) continue;
            const auto g = grad_score(kind, p.head, p.relation, p.tail, extras_of(kind, p));
            auto f = [&] { return score(kind, p.head, p.relation, p.tail, extras_of(kind, p)); };

            std::vector<double> analytic, numeric;
            auto take = [&](std::vector<double>& x, const std::vector<double>& grad) {
                const auto n = central_differences(x, f, kEps);
                analytic.insert(analytic.end(), grad.begin(), grad.end());
                numeric.insert(numeric.end(), n.begin(), n.end());
            };
            take(p.head.vector, g.head.vector);
            take(p.tail.vector, g.tail.vector);
            take(p.relation.vector, g.relation.vector);
            if (kind == KEModelKind::TransD) {
                take(p.head.projection, g.head.projection);
                take(p.tail.projection, g.tail.projection);
                take(p.relation.projection, g.relation.projection);
            }
            if (kind == KEModelKind::TuckER) take(p.core.values, g.tucker_core);
            if (kind == KEModelKind::TransMS) {
                std::vector<double> a{p.alpha};
                auto fa = [&] { ScoringExtras e; e.transms_alpha = a[0]; return score(kind, p.head, p.relation, p.tail, e); };
                const auto n = central_differences(a, fa, kEps);
                analytic.push_back(g.alpha);
                numeric.push_back(n[0]);
            }
            CHECK(relative_error(analytic, numeric) < kTol);
            ++checked;
        }
    }
}

}
