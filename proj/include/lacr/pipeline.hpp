#pragma once

// Dataset-level glue shared by the CLI and the acceptance suite.

#include <optional>
#include <string>
#include <vector>

#include "lacr/acs.hpp"
#include "lacr/io.hpp"
#include "lacr/metrics.hpp"
#include "lacr/trainer.hpp"

namespace lacr {

// One SMKG per MisT (in the order of `mists`, then any extra MisT in record
// order) built from the records of `split`.
std::vector<Smkg> build_smkgs(const std::vector<DatasetRecord>& records, Split split,
                              const std::vector<MisT>& mists);

std::vector<StancePair> gold_pairs(const std::vector<DatasetRecord>& records, Split split);
std::vector<TweetMisTPair> unlabeled_pairs(const std::vector<DatasetRecord>& records, Split split);

// Content store for a dataset built with the hashing encoder from tweet and
// MisT texts. Throws DataError when a text is missing.
EmbeddingStore hash_embedding_store(const std::vector<DatasetRecord>& records, const std::vector<MisT>& mists,
                                    std::size_t dim);

std::vector<StancePair> to_stance_pairs(const std::vector<Prediction>& predictions);

struct PipelineResult {
    ModelState model;
    ThresholdTable thresholds;
    std::vector<Prediction> predictions;
    EvalReport report;
};

// train -> calibrate (dev) -> infer (test) -> evaluate, all in memory.
PipelineResult run_pipeline(const TrainConfig& cfg, const std::vector<DatasetRecord>& records,
                            const std::vector<MisT>& mists, const EmbeddingStore& store,
                            const InferOptions& opts, const EpochCallback& on_epoch = {});

}  // namespace lacr
