#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "lacr/errors.hpp"
#include "lacr/pipeline.hpp"
#include "lacr/synth.hpp"
#include "lacr/trainer.hpp"
#include "support.hpp"

using namespace lacr;
using lacr::testing::central_differences;
using lacr::testing::relative_error;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

// Model with every parameter (biases, alphas included) set to random values.
ModelState random_state(KEModelKind kind, std::size_t content_dim, std::size_t d,
                        const std::vector<std::string>& mists, std::uint64_t seed) {
    ModelState s = ModelState::initialize(kind, content_dim, d, mists, seed);
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& b : blocks(s.params)) {
        for (double& v : b.values) v = u(rng);
    }
    return s;
}

double triple_min_residual(const ModelState& s, const TripleContent& t) {
    const auto rels = encode_mist(s.params.projection, t.mist);
    const auto h = encode_tweet(s.params.projection, t.head);
    const auto tl = encode_tweet(s.params.projection, t.tail);
    return min_residual_magnitude(s.kind, h, rels.get(t.relation), tl,
                                  resolve_extras(s.kind, s.params.extras, t.mist_id, t.relation));
}

std::vector<double> flat(const Parameters& p) {
    std::vector<double> out;
    for (const auto& b : blocks(p)) out.insert(out.end(), b.values.begin(), b.values.end());
    return out;
}

// Central differences of f over every parameter of s.
template <class F>
std::vector<double> numeric_gradient(ModelState& s, F&& f, double eps) {
    std::vector<double> out;
    for (auto& b : blocks(s.params)) {
        std::vector<double> view(b.values.begin(), b.values.end());
        std::vector<double> g(view.size());
        for (std::size_t i = 0; i < view.size(); ++i) {
            const double keep = b.values[i];
            b.values[i] = keep + eps;
            const double up = f();
            b.values[i] = keep - eps;
            const double down = f();
            b.values[i] = keep;
            g[i] = (up - down) / (2.0 * eps);
        }
        out.insert(out.end(), g.begin(), g.end());
    }
    return out;
}

Smkg toy_smkg() {
    return build_smkg("m", {{"t1", StanceLabel::Accept}, {"t2", StanceLabel::Accept}, {"t3", StanceLabel::Reject}});
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("composed score gradients match central differences") {
    constexpr double kEps = 1e-5;
    constexpr double kTol = 1e-4;
    std::mt19937_64 rng(31);
    for (KEModelKind kind : kAllModelKinds) {
        CAPTURE(to_string(kind));
        int checked = 0;
        std::uint64_t seed = 100;
        while (checked < 20) {
            ModelState s = random_state(kind, 5, 3, {"m0", "m1"}, seed++);
            const auto mc = random_vector(5, rng), hc = random_vector(5, rng), tc = random_vector(5, rng);
            const RelationType r = checked % 2 ? RelationType::Agree : RelationType::Disagree;
            const TripleContent t{"m1", r, mc, hc, tc};
            if (triple_min_residual(s, t) < 1e-3) continue;
            Parameters grad = zeros_like(s.params);
            const double f0 = accumulate_score_gradient(s, t, 1.0, grad);
            CHECK(f0 == composed_score(s, t));
            const auto numeric = numeric_gradient(s, [&] { return composed_score(s, t); }, kEps);
            CHECK(relative_error(flat(grad), numeric) < kTol);
            ++checked;
        }
    }
}

TEST_CASE("gradient coefficient scales and accumulates") {
    std::mt19937_64 rng(4);
    ModelState s = random_state(KEModelKind::TransMS, 4, 2, {"m"}, 9);
    const auto mc = random_vector(4, rng), hc = random_vector(4, rng), tc = random_vector(4, rng);
    const TripleContent t{"m", RelationType::Agree, mc, hc, tc};
    Parameters once = zeros_like(s.params), twice = zeros_like(s.params);
    accumulate_score_gradient(s, t, -2.0, once);
    accumulate_score_gradient(s, t, -1.0, twice);
    accumulate_score_gradient(s, t, -1.0, twice);
    CHECK(relative_error(flat(once), flat(twice)) < 1e-14);
}

TEST_CASE("margin loss") {
    CHECK(margin_loss(5, 0, 4) == 0.0);
    CHECK(margin_loss(0, 0, 4) == 4.0);
    CHECK(margin_loss(1, -2, 4) == 1.0);
    CHECK(margin_loss(4, 0, 4) == 0.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int i = 0; i < 200; ++i) {
        const double p = u(rng), n = u(rng);
        const double l = margin_loss(p, n, 4.0);
        CHECK(l >= 0.0);
        CHECK((l == 0.0) == (p >= n + 4.0));
    }
}

TEST_CASE("learning-rate schedule") {
    TrainConfig cfg;
    CHECK(lr_at(0, 100, cfg) == 0.0);
    CHECK(lr_at(10, 100, cfg) == cfg.peak_lr);
    CHECK(lr_at(100, 100, cfg) == 0.0);
    CHECK(lr_at(5, 100, cfg) == doctest::Approx(0.5e-4).epsilon(1e-12));
    CHECK(lr_at(55, 100, cfg) == doctest::Approx(0.5e-4).epsilon(1e-12));
    double prev = 0.0;
    for (std::uint64_t s = 1; s <= 100; ++s) {
        const double lr = lr_at(s, 100, cfg);
        CHECK(std::abs(lr - prev) <= cfg.peak_lr / 10.0 + 1e-18);
        CHECK(lr <= cfg.peak_lr);
        prev = lr;
    }
    CHECK_THROWS_AS(lr_at(0, 0, cfg), ConfigError);
    CHECK_THROWS_AS(lr_at(101, 100, cfg), ConfigError);
}

TEST_CASE("config validation") {
    TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.warmup_fraction = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.peak_lr = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("adam with zero gradients only advances the step") {
    ModelState s = ModelState::initialize(KEModelKind::TuckER, 4, 2, {"m"}, 1);
    const auto before = flat(s.params);
    adam_step(s, zeros_like(s.params), 0.1);
    CHECK(flat(s.params) == before);
    CHECK(s.step == 1);
}

TEST_CASE("adam first step moves by about lr") {
    ModelState s = ModelState::initialize(KEModelKind::TransE, 2, 1, {"m"}, 1);
    Parameters g = zeros_like(s.params);
    blocks(g)[0].values[0] = 1.0;
    const double before = s.params.projection.m_kepe_agree.weight[0];
    adam_step(s, g, 0.1);
    const double moved = before - s.params.projection.m_kepe_agree.weight[0];
    CHECK(moved == doctest::Approx(0.1).epsilon(1e-7));
}

TEST_CASE("adam matches a reference implementation") {
    ModelState s = random_state(KEModelKind::TransMS, 3, 2, {"m"}, 5);
    std::vector<double> theta = flat(s.params), m(theta.size(), 0.0), v(theta.size(), 0.0);
    std::mt19937_64 rng(8);
    Parameters g = zeros_like(s.params);
    for (auto& b : blocks(g)) {
        for (double& x : b.values) x = std::uniform_real_distribution<double>(-2, 2)(rng);
    }
    const auto gv = flat(g);
    for (int t = 1; t <= 2; ++t) {
        const double lr = 0.01 * t;
        adam_step(s, g, lr);
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = 0.9 * m[i] + 0.1 * gv[i];
            v[i] = 0.999 * v[i] + 0.001 * gv[i] * gv[i];
            const double mh = m[i] / (1.0 - std::pow(0.9, t));
            const double vh = v[i] / (1.0 - std::pow(0.999, t));
            theta[i] -= lr * mh / (std::sqrt(vh) + 1e-8);
        }
    }
    const auto got = flat(s.params);
    for (std::size_t i = 0; i < theta.size(); ++i) CHECK(std::abs(got[i] - theta[i]) <= 1e-12);
    CHECK(s.step == 2);
}

TEST_CASE("adam refuses non-finite gradients and names the parameter") {
    ModelState s = ModelState::initialize(KEModelKind::TransE, 2, 1, {"m"}, 1);
    const auto before = flat(s.params);
    Parameters g = zeros_like(s.params);
    g.projection.t_kepe.bias[0] = std::numeric_limits<double>::infinity();
    try {
        adam_step(s, g, 0.1);
        FAIL("expected divergence error");
    } catch (const TrainingDivergenceError& e) {
        CHECK(std::string(e.what()).find("t_kepe.bias") != std::string::npos);
    }
    CHECK(flat(s.params) == before);
    CHECK(s.step == 0);
}

TEST_CASE("enumerate_positives") {
    std::mt19937_64 rng(1);
    SUBCASE("complete-graph enumeration") {
        const auto pos = enumerate_positives({toy_smkg()}, 1000, rng);
        REQUIRE(pos.size() == 3);
        CHECK(pos[0].tweet_x_id == "t1");
        CHECK(pos[0].tweet_y_id == "t2");
        CHECK(pos[0].relation == RelationType::Agree);
        CHECK(pos[1].tweet_y_id == "t3");
        CHECK(pos[1].relation == RelationType::Disagree);
        CHECK(pos[2].tweet_x_id == "t2");
        CHECK(pos[2].relation == RelationType::Disagree);
    }
    SUBCASE("single node") {
        CHECK(enumerate_positives({build_smkg("m", {{"t1", StanceLabel::Accept}})}, 1000, rng).empty());
    }
    SUBCASE("cap samples valid distinct pairs") {
        std::vector<LabeledTweet> nodes;
        for (int i = 0; i < 50; ++i) {
            nodes.push_back({"t" + std::to_string(i), i % 3 ? StanceLabel::Accept : StanceLabel::Reject});
        }
        const auto g = build_smkg("m", nodes);
        const auto pos = enumerate_positives({g}, 100, rng);
        CHECK(pos.size() == 100);
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& p : pos) {
            CHECK(p.tweet_x_id != p.tweet_y_id);
            CHECK(p.relation == rtac(p.stance_x, p.stance_y));
            CHECK(seen.insert({p.tweet_x_id, p.tweet_y_id}).second);
        }
    }
}

TEST_CASE("negative sampling") {
    std::mt19937_64 rng(2);
    const auto g = toy_smkg();
    const RelationInstance pos{"m", "t1", "t2", RelationType::Agree, StanceLabel::Accept, StanceLabel::Accept};
    bool saw_replace = false, saw_flip = false;
    for (int i = 0; i < 200; ++i) {
        const auto n = sample_negative(pos, g, rng);
        CHECK(n.instance.relation != rtac(n.instance.stance_x, n.instance.stance_y));
        CHECK(n.instance.tweet_x_id == "t1");
        if (n.mode == Corruption::ReplaceTail) {
            saw_replace = true;
            CHECK(n.instance.tweet_y_id == "t3");
            CHECK(n.instance.relation == RelationType::Agree);
        } else {
            saw_flip = true;
            CHECK(n.instance.tweet_y_id == "t2");
            CHECK(n.instance.relation == RelationType::Disagree);
        }
    }
    CHECK(saw_replace);
    CHECK(saw_flip);

    const auto all_accept = build_smkg("m", {{"t1", StanceLabel::Accept}, {"t2", StanceLabel::Accept}});
    for (int i = 0; i < 50; ++i) {
        const auto n = sample_negative(pos, all_accept, rng);
        CHECK(n.mode == Corruption::FlipRelation);
        CHECK(n.instance.relation == RelationType::Disagree);
    }
}

TEST_CASE("batch loss gradient matches central differences") {
    constexpr double kEps = 1e-5;
    std::mt19937_64 rng(12);
    EmbeddingStore store(4);
    for (const char* key : {"m", "t1", "t2", "t3"}) {
        const auto v = random_vector(4, rng);
        store.add(key, std::vector<float>(v.begin(), v.end()));
    }
    const std::vector<TrainingPair> pairs = {
        {{"m", "t1", "t2", RelationType::Agree, StanceLabel::Accept, StanceLabel::Accept},
         {"m", "t1", "t2", RelationType::Disagree, StanceLabel::Accept, StanceLabel::Accept}},
        {{"m", "t1", "t3", RelationType::Disagree, StanceLabel::Accept, StanceLabel::Reject},
         {"m", "t1", "t2", RelationType::Disagree, StanceLabel::Accept, StanceLabel::Accept}},
    };
    for (KEModelKind kind : kAllModelKinds) {
        CAPTURE(to_string(kind));
        ModelState s = random_state(kind, 4, 2, {"m"}, 77);
        Parameters grad = zeros_like(s.params);
        const double loss = batch_loss(s, store, pairs, 40.0, &grad);
        CHECK(loss > 0.0);
        CHECK(loss == batch_loss(s, store, pairs, 40.0, nullptr));
        const auto numeric = numeric_gradient(s, [&] { return batch_loss(s, store, pairs, 40.0, nullptr); }, kEps);
        CHECK(relative_error(flat(grad), numeric) < 1e-4);
    }
}

TEST_CASE("training") {
    SynthParams sp;
    sp.tweets = 40;
    sp.mists = 2;
    sp.dim = 16;
    const auto data = generate_synthetic(sp);
    const auto smkgs = build_smkgs(data.records, Split::Train, data.mists);
    TrainConfig cfg;
    cfg.epochs = 2;

    SUBCASE("zero epochs returns the initialized state") {
        cfg.epochs = 0;
        const auto s = train(cfg, smkgs, data.store, data.mists);
        std::vector<std::string> ids;
        for (const auto& m : data.mists) ids.push_back(m.id);
        const auto init = ModelState::initialize(cfg.model, 16, cfg.d, ids, cfg.seed);
        CHECK(flat(s.params) == flat(init.params));
        CHECK(s.step == 0);
    }
    SUBCASE("same seed is bitwise reproducible") {
        for (KEModelKind kind : kAllModelKinds) {
            cfg.model = kind;
            const auto a = train(cfg, smkgs, data.store, data.mists);
            const auto b = train(cfg, smkgs, data.store, data.mists);
            CHECK(flat(a.params) == flat(b.params));
            CHECK(a.step > 0);
        }
    }
    SUBCASE("missing content fails before any update") {
        EmbeddingStore partial(16);
        for (const auto& key : data.store.keys()) {
            if (key != "t00001") partial.add(key, data.store.raw(key));
        }
        bool in_smkg = false;
        for (const auto& g : smkgs) in_smkg = in_smkg || g.contains("t00001");
        if (in_smkg) {
            int epochs_seen = 0;
            CHECK_THROWS_AS(train(cfg, smkgs, partial, data.mists, [&](const EpochStats&) { ++epochs_seen; }),
                            DataError);
            CHECK(epochs_seen == 0);
        }
    }
}

TEST_CASE("TransE loss decreases over the first epochs on planted data") {
    const auto data = generate_synthetic(SynthParams{});
    const auto smkgs = build_smkgs(data.records, Split::Train, data.mists);
    TrainConfig cfg;
    std::vector<double> losses;
    cfg.epochs = 36;
    train(cfg, smkgs, data.store, data.mists, [&](const EpochStats& s) { losses.push_back(s.mean_loss); });
    REQUIRE(losses.size() == 36);
    for (std::size_t i = 1; i < 5; ++i) CHECK(losses[i] < losses[i - 1]);
}

}
