#include "lacr/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "lacr/errors.hpp"

namespace lacr {

using nlohmann::json;

namespace {

class ByteWriter {
public:
    void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
    void u16(std::uint16_t v) { le(v, 2); }
    void u32(std::uint32_t v) { le(v, 4); }
    void u64(std::uint64_t v) { le(v, 8); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void bytes(std::string_view s) { out_.append(s); }
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s);
    }
    const std::string& data() const { return out_; }

private:
    void le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    std::string out_;
};

class ByteReader {
public:
    ByteReader(std::string_view data, std::string what) : data_(data), what_(std::move(what)) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    float f32() { return std::bit_cast<float>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string_view bytes(std::size_t n) {
        need(n);
        auto s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::string str() { return std::string(bytes(u32())); }
    bool at_end() const { return pos_ == data_.size(); }

private:
    void need(std::size_t n) {
        if (data_.size() - pos_ < n) throw FormatError(what_ + ": truncated at byte " + std::to_string(pos_));
    }
    std::uint64_t le(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        }
        pos_ += static_cast<std::size_t>(n);
        return v;
    }

    std::string_view data_;
    std::string what_;
    std::size_t pos_ = 0;
};

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || text.empty()) throw ConfigError("invalid number for " + what + ": '" + text + "'");
    return v;
}

std::uint64_t parse_count(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
        v = std::stoull(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || text.empty()) throw ConfigError("invalid count for " + what + ": '" + text + "'");
    return v;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

std::string required_string(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw FormatError(std::string("missing string field '") + key + "'");
    return it->get<std::string>();
}

}  // namespace

std::string_view to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Dev: return "dev";
        case Split::Test: return "test";
    }
    return "?";
}

std::optional<Split> parse_split(std::string_view text) {
    if (text == "train") return Split::Train;
    if (text == "dev") return Split::Dev;
    if (text == "test") return Split::Test;
    return std::nullopt;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    std::random_device rd;
    const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(rd()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw DataError("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw DataError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

DatasetParse parse_dataset(const fs::path& path) {
    DatasetParse out;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        if (trim(lines[i]).empty()) continue;
        std::string tweet;
        try {
            const json j = json::parse(lines[i]);
            if (!j.is_object()) throw FormatError("record is not an object");
            DatasetRecord r;
            r.tweet_id = required_string(j, "tweet_id");
            tweet = r.tweet_id;
            r.mist_id = required_string(j, "mist_id");
            const std::string stance = required_string(j, "stance");
            const auto s = parse_stance(stance);
            if (!s) throw FormatError("unknown stance '" + stance + "' (expected Accept, Reject or NoStance)");
            r.stance = *s;
            const std::string split = required_string(j, "split");
            const auto sp = parse_split(split);
            if (!sp) throw FormatError("unknown split '" + split + "' (expected train, dev or test)");
            r.split = *sp;
            if (auto it = j.find("text"); it != j.end() && !it->is_null()) {
                if (!it->is_string()) throw FormatError("field 'text' must be a string");
                r.text = it->get<std::string>();
            }
            out.records.push_back(std::move(r));
        } catch (const json::exception& e) {
            out.issues.push_back({lineno, std::string("malformed JSON: ") + e.what()});
        } catch (const FormatError& e) {
            const std::string where = tweet.empty() ? "" : "tweet '" + tweet + "': ";
            out.issues.push_back({lineno, where + e.what()});
        }
    }
    return out;
}

std::vector<DatasetRecord> read_dataset(const fs::path& path) {
    auto parsed = parse_dataset(path);
    if (!parsed.issues.empty()) {
        const auto& issue = parsed.issues.front();
        throw FormatError(path.string() + ":" + std::to_string(issue.line) + ": " + issue.message);
    }
    return std::move(parsed.records);
}

void write_dataset(const fs::path& path, const std::vector<DatasetRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        json j = {{"tweet_id", r.tweet_id},
                  {"mist_id", r.mist_id},
                  {"stance", std::string(to_string(r.stance))},
                  {"split", std::string(to_string(r.split))}};
        if (r.text) j["text"] = *r.text;
        out += j.dump() + "\n";
    }
    write_file_atomic(path, out);
}

std::vector<MisT> read_mists(const fs::path& path) {
    std::vector<MisT> out;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        std::string tweet;
        try {
            const json j = json::parse(lines[i]);
            MisT m;
            m.id = required_string(j, "mist_id");
            m.text = j.value("text", "");
            m.theme = j.value("theme", "");
            m.concern = j.value("concern", "");
            out.push_back(std::move(m));
        } catch (const std::exception& e) {
            throw FormatError(path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

void write_mists(const fs::path& path, const std::vector<MisT>& mists) {
    std::string out;
    for (const auto& m : mists) {
        const json j = {{"mist_id", m.id}, {"text", m.text}, {"theme", m.theme}, {"concern", m.concern}};
        out += j.dump() + "\n";
    }
    write_file_atomic(path, out);
}

Taxonomy read_taxonomy(const fs::path& path) {
    Taxonomy t;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string line = trim(lines[i]);
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        const std::string theme = trim(line.substr(0, tab));
        auto& concerns = t[theme];
        if (tab != std::string::npos) concerns.insert(trim(line.substr(tab + 1)));
    }
    return t;
}

void write_embedding_store(const fs::path& path, const EmbeddingStore& store) {
    ByteWriter w;
    w.bytes(std::string_view(kStoreMagic, 4));
    w.u32(kStoreVersion);
    w.u64(store.size());
    w.u32(store.dim());
    for (const auto& key : store.keys()) {
        if (key.size() > 0xFFFF) throw DataError("embedding key longer than 65535 bytes");
        w.u16(static_cast<std::uint16_t>(key.size()));
        w.bytes(key);
        for (float v : store.raw(key)) w.f32(v);
    }
    write_file_atomic(path, w.data());
}

EmbeddingStore read_embedding_store(const fs::path& path) {
    const std::string data = read_file(path);
    ByteReader r(data, path.string());
    if (r.bytes(4) != std::string_view(kStoreMagic, 4)) throw FormatError(path.string() + ": not an embedding store");
    const std::uint32_t version = r.u32();
    if (version != kStoreVersion) {
        throw FormatError(path.string() + ": unsupported store version " + std::to_string(version));
    }
    const std::uint64_t count = r.u64();
    const std::uint32_t dim = r.u32();
    EmbeddingStore store(dim);
    std::vector<float> values(dim);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::string key(r.bytes(r.u16()));
        for (auto& v : values) v = r.f32();
        store.add(std::move(key), values);
    }
    if (!r.at_end()) throw FormatError(path.string() + ": trailing bytes after declared record count");
    return store;
}

void write_thresholds(const fs::path& path, const ThresholdTable& table) {
    std::string out;
    for (const auto& [mist, t] : table.per_mist) out += mist + "\t" + format_double(t) + "\n";
    out += "*\t" + format_double(table.global_fallback) + "\n";
    write_file_atomic(path, out);
}

ThresholdTable read_thresholds(const fs::path& path) {
    ThresholdTable t;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string line = trim(lines[i]);
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw FormatError(path.string() + ":" + std::to_string(i + 1) + ": expected mist_id<TAB>threshold");
        }
        const std::string key = line.substr(0, tab);
        const double v = parse_double(trim(line.substr(tab + 1)), "threshold of " + key);
        if (!std::isfinite(v)) throw FormatError("non-finite threshold for " + key);
        if (key == "*") {
            t.global_fallback = v;
        } else {
            t.per_mist[key] = v;
        }
    }
    return t;
}

std::map<std::string, std::string> read_config(const fs::path& path) {
    std::map<std::string, std::string> kv;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string line = lines[i];
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path.string() + ":" + std::to_string(i + 1) + ": expected key = value");
        }
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

void apply_train_config(const std::map<std::string, std::string>& kv, TrainConfig& cfg) {
    for (const auto& [key, value] : kv) {
        if (key == "model") {
            auto kind = parse_model_kind(value);
            if (!kind) throw ConfigError("unknown model '" + value + "'");
            cfg.model = *kind;
        } else if (key == "epochs") {
            cfg.epochs = parse_count(value, key);
        } else if (key == "batch_size") {
            cfg.batch_size = parse_count(value, key);
        } else if (key == "peak_lr") {
            cfg.peak_lr = parse_double(value, key);
        } else if (key == "warmup_fraction") {
            cfg.warmup_fraction = parse_double(value, key);
        } else if (key == "margin") {
            cfg.margin = parse_double(value, key);
        } else if (key == "negatives_per_positive") {
            cfg.negatives_per_positive = parse_count(value, key);
        } else if (key == "d") {
            cfg.d = parse_count(value, key);
        } else if (key == "seed") {
            cfg.seed = parse_count(value, key);
        } else if (key == "positive_cap_per_mist_per_epoch") {
            cfg.positive_cap_per_mist_per_epoch = parse_count(value, key);
        }
    }
}

std::string format_train_config(const TrainConfig& cfg) {
    std::string s;
    s += "model = " + std::string(to_string(cfg.model)) + "\n";
    s += "epochs = " + std::to_string(cfg.epochs) + "\n";
    s += "batch_size = " + std::to_string(cfg.batch_size) + "\n";
    s += "peak_lr = " + format_double(cfg.peak_lr) + "\n";
    s += "warmup_fraction = " + format_double(cfg.warmup_fraction) + "\n";
    s += "margin = " + format_double(cfg.margin) + "\n";
    s += "negatives_per_positive = " + std::to_string(cfg.negatives_per_positive) + "\n";
    s += "d = " + std::to_string(cfg.d) + "\n";
    s += "seed = " + std::to_string(cfg.seed) + "\n";
    s += "positive_cap_per_mist_per_epoch = " + std::to_string(cfg.positive_cap_per_mist_per_epoch) + "\n";
    return s;
}

namespace {

void write_params(ByteWriter& w, const Parameters& p) {
    const auto bl = blocks(p);
    w.u32(static_cast<std::uint32_t>(bl.size()));
    for (const auto& b : bl) {
        w.str(b.name);
        w.u64(b.values.size());
        for (double v : b.values) w.f64(v);
    }
}

void read_params(ByteReader& r, Parameters& p, const std::string& what) {
    auto bl = blocks(p);
    const std::uint32_t n = r.u32();
    if (n != bl.size()) throw FormatError(what + ": parameter block count mismatch");
    for (auto& b : bl) {
        const std::string name = r.str();
        if (name != b.name) throw FormatError(what + ": expected block '" + b.name + "', found '" + name + "'");
        if (r.u64() != b.values.size()) throw FormatError(what + ": size mismatch for block '" + name + "'");
        for (double& v : b.values) v = r.f64();
    }
}

}  // namespace

void write_checkpoint(const fs::path& path, const Checkpoint& ckpt) {
    const ModelState& s = ckpt.state;
    ByteWriter w;
    w.bytes(std::string_view(kCheckpointMagic, 4));
    w.u32(kCheckpointVersion);
    w.u8(static_cast<std::uint8_t>(s.kind));
    w.u64(s.content_dim());
    w.u64(s.d());
    w.str(format_train_config(ckpt.config));
    w.u64(s.step);
    const auto& alpha = s.params.extras.transms_alpha;
    w.u64(alpha ? alpha->mist_ids().size() : 0);
    if (alpha) {
        for (const auto& id : alpha->mist_ids()) w.str(id);
    }
    write_params(w, s.params);
    write_params(w, s.first_moment);
    write_params(w, s.second_moment);
    w.u8(ckpt.thresholds ? 1 : 0);
    if (ckpt.thresholds) {
        w.u64(ckpt.thresholds->per_mist.size());
        for (const auto& [mist, t] : ckpt.thresholds->per_mist) {
            w.str(mist);
            w.f64(t);
        }
        w.f64(ckpt.thresholds->global_fallback);
    }
    write_file_atomic(path, w.data());
}

Checkpoint read_checkpoint(const fs::path& path) {
    const std::string data = read_file(path);
    const std::string what = path.string();
    ByteReader r(data, what);
    if (r.bytes(4) != std::string_view(kCheckpointMagic, 4)) throw FormatError(what + ": not a checkpoint");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) {
        throw FormatError(what + ": unsupported checkpoint version " + std::to_string(version));
    }
    const std::uint8_t kind_raw = r.u8();
    if (kind_raw > static_cast<std::uint8_t>(KEModelKind::RotatE)) throw FormatError(what + ": unknown model kind");
    const auto kind = static_cast<KEModelKind>(kind_raw);
    const std::uint64_t content_dim = r.u64();
    const std::uint64_t d = r.u64();

    Checkpoint ckpt;
    {
        std::map<std::string, std::string> kv;
        std::istringstream cfg_text(r.str());
        std::string line;
        while (std::getline(cfg_text, line)) {
            const auto eq = line.find('=');
            if (eq != std::string::npos) kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        }
        apply_train_config(kv, ckpt.config);
    }
    const std::uint64_t step = r.u64();
    std::vector<std::string> mist_ids(r.u64());
    for (auto& id : mist_ids) id = r.str();

    ModelState s = ModelState::initialize(kind, content_dim, d, mist_ids, 0);
    s.step = step;
    read_params(r, s.params, what);
    read_params(r, s.first_moment, what);
    read_params(r, s.second_moment, what);
    ckpt.state = std::move(s);

    if (r.u8() != 0) {
        ThresholdTable t;
        const std::uint64_t n = r.u64();
        for (std::uint64_t i = 0; i < n; ++i) {
            std::string mist = r.str();
            t.per_mist[mist] = r.f64();
        }
        t.global_fallback = r.f64();
        ckpt.thresholds = std::move(t);
    }
    if (!r.at_end()) throw FormatError(what + ": trailing bytes");
    return ckpt;
}

void write_predictions(const fs::path& path, const std::vector<Prediction>& predictions) {
    std::string out;
    for (const auto& p : predictions) {
        const json j = {{"tweet_id", p.tweet_id},
                        {"mist_id", p.mist_id},
                        {"stance", std::string(to_string(p.stance))},
                        {"acs_accept", p.acs_accept},
                        {"acs_reject", p.acs_reject}};
        out += j.dump() + "\n";
    }
    write_file_atomic(path, out);
}

std::vector<PredictionRecord> read_predictions(const fs::path& path) {
    std::vector<PredictionRecord> out;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        std::string tweet;
        try {
            const json j = json::parse(lines[i]);
            PredictionRecord p;
            p.tweet_id = required_string(j, "tweet_id");
            p.mist_id = required_string(j, "mist_id");
            const std::string stance = required_string(j, "stance");
            const auto s = parse_stance(stance);
            if (!s) throw FormatError("unknown stance '" + stance + "'");
            p.stance = *s;
            p.acs_accept = j.value("acs_accept", 0.0);
            p.acs_reject = j.value("acs_reject", 0.0);
            out.push_back(std::move(p));
        } catch (const std::exception& e) {
            throw FormatError(path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

namespace {

json class_json(const ClassMetrics& c) {
    return {{"precision", c.precision},
            {"recall", c.recall},
            {"f1", c.f1},
            {"true_positives", c.true_positives},
            {"false_positives", c.false_positives},
            {"false_negatives", c.false_negatives},
            {"precision_undefined", c.precision_undefined},
            {"recall_undefined", c.recall_undefined}};
}

json report_to_json(const EvalReport& r) {
    json confusion = json::object();
    for (StanceLabel g : {StanceLabel::Accept, StanceLabel::Reject, StanceLabel::NoStance}) {
        json row = json::object();
        for (StanceLabel p : {StanceLabel::Accept, StanceLabel::Reject, StanceLabel::NoStance}) {
            row[std::string(to_string(p))] = r.confusion[label_index(g)][label_index(p)];
        }
        confusion[std::string(to_string(g))] = row;
    }
    return {{"per_class", {{"Accept", class_json(r.accept)}, {"Reject", class_json(r.reject)}}},
            {"macro", {{"precision", r.macro.precision}, {"recall", r.macro.recall}, {"f1", r.macro.f1}}},
            {"support",
             {{"Accept", r.support[0]}, {"Reject", r.support[1]}, {"NoStance", r.support[2]}}},
            {"confusion", confusion},
            {"zero_division", r.zero_division}};
}

}  // namespace

std::string report_json(const EvalReport& report, const ThemeReport& themes) {
    json j;
    j["overall"] = report_to_json(report);
    json t = json::object();
    for (const auto& [theme, s] : themes) {
        t[theme] = {{"accept_f1", s.accept_f1},
                    {"reject_f1", s.reject_f1},
                    {"support", s.support},
                    {"report", report_to_json(s.report)}};
    }
    j["themes"] = t;
    return j.dump(2) + "\n";
}

std::string theme_csv(const ThemeReport& themes) {
    std::string out = "theme,stance,f1,precision,recall,support\n";
    for (const auto& [theme, s] : themes) {
        std::string quoted = theme;
        if (quoted.find_first_of(",\"") != std::string::npos) {
            std::string esc;
            for (char c : quoted) {
                if (c == '"') esc += '"';
                esc += c;
            }
            quoted = "\"" + esc + "\"";
        }
        for (StanceLabel st : kStanceValues) {
            const auto& c = s.report.per_class(st);
            out += quoted + "," + std::string(to_string(st)) + "," + format_double(c.f1) + "," +
                   format_double(c.precision) + "," + format_double(c.recall) + "," +
                   std::to_string(s.report.support[label_index(st)]) + "\n";
        }
    }
    return out;
}

}  // namespace lacr
