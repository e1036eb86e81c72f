#pragma once

// Seeded synthetic stance data with planted structure. For every MisT the
// Accept and Reject tweets form two Gaussian clusters whose centres are
// `separation` apart along a random direction; NoStance tweets sit
// `nostance_offset` away from the midpoint, orthogonal to that direction.
// Every tweet gets isotropic Gaussian noise of RMS norm `noise`. With
// separation 0 the two stance clusters coincide (negative control).

#include <cstdint>
#include <vector>

#include "lacr/encoders.hpp"
#include "lacr/graph.hpp"
#include "lacr/io.hpp"

namespace lacr {

struct SynthParams {
    double separation = 5.0;
    std::size_t tweets = 200;
    std::size_t mists = 4;
    std::uint64_t seed = 13;
    std::size_t dim = 128;
    double noise = 1.0;
    double nostance_fraction = 0.2;
    double nostance_offset = 6.0;
    double train_fraction = 0.6;
    double dev_fraction = 0.2;

    // Throws ConfigError on degenerate settings.
    void validate() const;
};

struct SynthData {
    std::vector<DatasetRecord> records;
    std::vector<MisT> mists;
    EmbeddingStore store;
};

SynthData generate_synthetic(const SynthParams& params);

}  // namespace lacr
