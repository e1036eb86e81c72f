#include "lacr/pipeline.hpp"

#include <map>
#include <set>

#include "lacr/errors.hpp"

namespace lacr {

std::vector<Smkg> build_smkgs(const std::vector<DatasetRecord>& records, Split split,
                              const std::vector<MisT>& mists) {
    std::vector<std::string> order;
    std::set<std::string> known;
    for (const auto& m : mists) {
        if (known.insert(m.id).second) order.push_back(m.id);
    }
    std::map<std::string, std::vector<LabeledTweet>> labeled;
    for (const auto& r : records) {
        if (r.split != split) continue;
        if (known.insert(r.mist_id).second) order.push_back(r.mist_id);
        labeled[r.mist_id].push_back({r.tweet_id, r.stance});
    }
    std::vector<Smkg> out;
    for (const auto& id : order) {
        auto it = labeled.find(id);
        out.push_back(build_smkg(id, it == labeled.end() ? std::vector<LabeledTweet>{} : it->second));
    }
    return out;
}

std::vector<StancePair> gold_pairs(const std::vector<DatasetRecord>& records, Split split) {
    std::vector<StancePair> out;
    for (const auto& r : records) {
        if (r.split == split) out.push_back({r.tweet_id, r.mist_id, r.stance});
    }
    return out;
}

std::vector<TweetMisTPair> unlabeled_pairs(const std::vector<DatasetRecord>& records, Split split) {
    std::vector<TweetMisTPair> out;
    for (const auto& r : records) {
        if (r.split == split) out.push_back({r.tweet_id, r.mist_id});
    }
    return out;
}

EmbeddingStore hash_embedding_store(const std::vector<DatasetRecord>& records, const std::vector<MisT>& mists,
                                    std::size_t dim) {
    EmbeddingStore store(static_cast<std::uint32_t>(dim));
    auto add = [&](const std::string& key, const std::string& text) {
        if (store.contains(key)) return;
        const auto v = hash_encode(text, dim);
        store.add(key, std::vector<float>(v.begin(), v.end()));
    };
    for (const auto& m : mists) {
        if (m.text.empty()) throw DataError("MisT '" + m.id + "' has no text to hash-encode");
        add(m.id, m.text);
    }
    for (const auto& r : records) {
        if (!r.text) throw DataError("tweet '" + r.tweet_id + "' has no text to hash-encode");
        add(r.tweet_id, *r.text);
    }
    return store;
}

std::vector<StancePair> to_stance_pairs(const std::vector<Prediction>& predictions) {
    std::vector<StancePair> out;
    out.reserve(predictions.size());
    for (const auto& p : predictions) out.push_back({p.tweet_id, p.mist_id, p.stance});
    return out;
}

PipelineResult run_pipeline(const TrainConfig& cfg, const std::vector<DatasetRecord>& records,
                            const std::vector<MisT>& mists, const EmbeddingStore& store,
                            const InferOptions& opts, const EpochCallback& on_epoch) {
    PipelineResult out;
    const auto smkgs = build_smkgs(records, Split::Train, mists);
    out.model = train(cfg, smkgs, store, mists, on_epoch);
    out.thresholds = calibrate_thresholds(out.model, store, smkgs, gold_pairs(records, Split::Dev), opts);
    out.predictions =
        infer(out.model, store, smkgs, unlabeled_pairs(records, Split::Test), out.thresholds, opts).predictions;
    out.report = evaluate(gold_pairs(records, Split::Test), to_stance_pairs(out.predictions));
    return out;
}

}  // namespace lacr
