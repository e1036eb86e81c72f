#include "lacr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lacr/errors.hpp"

namespace lacr {

namespace {

using Vec = std::vector<double>;

Vec gaussian(std::size_t dim, double scale, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vec v(dim);
    for (double& x : v) x = scale * n(rng);
    return v;
}

void normalize(Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    s = std::sqrt(s);
    if (s > 0.0) {
        for (double& x : v) x /= s;
    }
}

// Unit vector orthogonal to u (u assumed unit length, dim >= 2).
Vec orthogonal_unit(const Vec& u, std::mt19937_64& rng) {
    for (;;) {
        Vec v = gaussian(u.size(), 1.0, rng);
        double proj = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) proj += v[i] * u[i];
        for (std::size_t i = 0; i < u.size(); ++i) v[i] -= proj * u[i];
        double norm = 0.0;
        for (double x : v) norm += x * x;
        if (norm > 1e-12) {
            normalize(v);
            return v;
        }
    }
}

std::vector<float> to_float(const Vec& v) { return std::vector<float>(v.begin(), v.end()); }

const char* const kThemes[] = {"vaccine-safety", "vaccine-ingredients", "vaccine-efficacy"};

}  // namespace

void SynthParams::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("invalid synthetic-data parameters: " + what); };
    if (!(separation >= 0.0) || !std::isfinite(separation)) fail("separation must be >= 0");
    if (tweets < 4) fail("need at least 4 tweets");
    if (mists < 1) fail("need at least 1 MisT");
    if (tweets < 4 * mists) fail("need at least 4 tweets per MisT");
    if (dim < 2) fail("dimension must be at least 2");
    if (!(noise >= 0.0)) fail("noise must be >= 0");
    if (!(nostance_fraction >= 0.0 && nostance_fraction < 1.0)) fail("nostance_fraction must lie in [0,1)");
    if (!(train_fraction > 0.0 && dev_fraction > 0.0 && train_fraction + dev_fraction < 1.0)) {
        fail("train/dev fractions must be positive and leave room for a test split");
    }
}

SynthData generate_synthetic(const SynthParams& p) {
    p.validate();
    std::mt19937_64 rng(p.seed);
    SynthData out;
    out.store = EmbeddingStore(static_cast<std::uint32_t>(p.dim));

    std::size_t next_tweet = 0;
    for (std::size_t mi = 0; mi < p.mists; ++mi) {
        MisT m;
        m.id = "m" + std::to_string(mi);
        m.text = "synthetic misinformation target " + std::to_string(mi);
        m.theme = kThemes[mi % std::size(kThemes)];
        m.concern = m.theme + "/concern-" + std::to_string(mi);

        const Vec mist_vec = gaussian(p.dim, 1.0, rng);
        const Vec centre = gaussian(p.dim, 1.0, rng);
        Vec axis = gaussian(p.dim, 1.0, rng);
        normalize(axis);
        const Vec off_axis = orthogonal_unit(axis, rng);
        out.store.add(m.id, to_float(mist_vec));

        // Tweets of this MisT: round-robin share of the total.
        const std::size_t count = p.tweets / p.mists + (mi < p.tweets % p.mists ? 1 : 0);
        const std::size_t n_none = static_cast<std::size_t>(std::llround(p.nostance_fraction * count));
        const std::size_t n_accept = (count - n_none + 1) / 2;
        std::vector<StanceLabel> stances(count, StanceLabel::Reject);
        std::fill_n(stances.begin(), n_accept, StanceLabel::Accept);
        std::fill_n(stances.begin() + static_cast<std::ptrdiff_t>(n_accept), n_none, StanceLabel::NoStance);
        std::shuffle(stances.begin(), stances.end(), rng);

        // Stratified split per stance so every split sees every class.
        std::vector<Split> splits(count, Split::Test);
        for (StanceLabel s : {StanceLabel::Accept, StanceLabel::Reject, StanceLabel::NoStance}) {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < count; ++i) {
                if (stances[i] == s) idx.push_back(i);
            }
            const auto n_train = static_cast<std::size_t>(std::llround(p.train_fraction * idx.size()));
            const auto n_dev = static_cast<std::size_t>(std::llround(p.dev_fraction * idx.size()));
            for (std::size_t k = 0; k < idx.size(); ++k) {
                splits[idx[k]] = k < n_train ? Split::Train : (k < n_train + n_dev ? Split::Dev : Split::Test);
            }
        }

        for (std::size_t i = 0; i < count; ++i) {
            Vec v = centre;
            double along = 0.0;
            if (stances[i] == StanceLabel::Accept) along = 0.5 * p.separation;
            if (stances[i] == StanceLabel::Reject) along = -0.5 * p.separation;
            const Vec noise = gaussian(p.dim, p.noise / std::sqrt(static_cast<double>(p.dim)), rng);
            for (std::size_t k = 0; k < p.dim; ++k) {
                v[k] += along * axis[k] + noise[k];
                if (stances[i] == StanceLabel::NoStance) v[k] += p.nostance_offset * off_axis[k];
            }
            char id[32];
            std::snprintf(id, sizeof id, "t%05zu", next_tweet++);
            DatasetRecord r;
            r.tweet_id = id;
            r.mist_id = m.id;
            r.stance = stances[i];
            r.split = splits[i];
            out.store.add(r.tweet_id, to_float(v));
            out.records.push_back(std::move(r));
        }
        out.mists.push_back(std::move(m));
    }
    return out;
}

}  // namespace lacr
