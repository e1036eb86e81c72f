#pragma once

// On-disk formats:
//   dataset      JSON lines: {"tweet_id","mist_id","stance","split"[,"text"]}
//   MisT file    JSON lines: {"mist_id","text","theme","concern"}
//   taxonomy     text lines: theme <TAB> concern
//   embeddings   binary store (see write_embedding_store)
//   thresholds   text lines: mist_id <TAB> threshold, plus "*" <TAB> fallback
//   checkpoint   binary container (see write_checkpoint)
//   config       text lines: key = value, '#' starts a comment

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lacr/acs.hpp"
#include "lacr/encoders.hpp"
#include "lacr/graph.hpp"
#include "lacr/metrics.hpp"
#include "lacr/model.hpp"
#include "lacr/trainer.hpp"

namespace lacr {

namespace fs = std::filesystem;

enum class Split { Train, Dev, Test };

std::string_view to_string(Split s);
std::optional<Split> parse_split(std::string_view text);

struct DatasetRecord {
    std::string tweet_id;
    std::string mist_id;
    StanceLabel stance = StanceLabel::NoStance;
    Split split = Split::Train;
    std::optional<std::string> text;

    bool operator==(const DatasetRecord&) const = default;
};

struct ParseIssue {
    std::size_t line = 0;
    std::string message;
};

struct DatasetParse {
    std::vector<DatasetRecord> records;
    std::vector<ParseIssue> issues;
};

// Lenient parse: malformed lines become issues and are skipped.
DatasetParse parse_dataset(const fs::path& path);
// Strict: throws FormatError on the first malformed line.
std::vector<DatasetRecord> read_dataset(const fs::path& path);
void write_dataset(const fs::path& path, const std::vector<DatasetRecord>& records);

std::vector<MisT> read_mists(const fs::path& path);
void write_mists(const fs::path& path, const std::vector<MisT>& mists);

// theme -> concerns
using Taxonomy = std::map<std::string, std::set<std::string>>;
Taxonomy read_taxonomy(const fs::path& path);

inline constexpr char kStoreMagic[4] = {'C', 'V', 'L', 'E'};
inline constexpr std::uint32_t kStoreVersion = 1;

// "CVLE", u32 version, u64 count, u32 dim, then per record: u16 key length,
// key bytes (UTF-8), dim x f32. All integers and floats little-endian.
void write_embedding_store(const fs::path& path, const EmbeddingStore& store);
EmbeddingStore read_embedding_store(const fs::path& path);

void write_thresholds(const fs::path& path, const ThresholdTable& table);
ThresholdTable read_thresholds(const fs::path& path);

inline constexpr char kCheckpointMagic[4] = {'C', 'V', 'L', 'C'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    ModelState state;
    TrainConfig config;
    std::optional<ThresholdTable> thresholds;
};

void write_checkpoint(const fs::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const fs::path& path);

// Flat key/value config. Unknown keys are kept for the caller.
std::map<std::string, std::string> read_config(const fs::path& path);
// Applies the TrainConfig keys present in kv; throws ConfigError on a bad value.
void apply_train_config(const std::map<std::string, std::string>& kv, TrainConfig& cfg);
std::string format_train_config(const TrainConfig& cfg);

struct PredictionRecord {
    std::string tweet_id;
    std::string mist_id;
    StanceLabel stance = StanceLabel::NoStance;
    double acs_accept = 0.0;
    double acs_reject = 0.0;
};

void write_predictions(const fs::path& path, const std::vector<Prediction>& predictions);
std::vector<PredictionRecord> read_predictions(const fs::path& path);

// JSON report: overall metrics, per-theme metrics.
std::string report_json(const EvalReport& report, const ThemeReport& themes);
// One row per (theme, stance): theme,stance,f1,precision,recall,support.
std::string theme_csv(const ThemeReport& themes);

// Writes via a temporary file in the same directory and renames it into place.
void write_file_atomic(const fs::path& path, std::string_view bytes);
std::string read_file(const fs::path& path);

}  // namespace lacr
