#ifndef POLITELENS_CORPUS_HPP
#define POLITELENS_CORPUS_HPP

#include <algorithm>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "politelens/common.hpp"

namespace politelens::corpus {

enum class Community { Wiki, SE };

enum class Label { Impolite = 0, Polite = 1 };

inline const char* label_name(Label l) {
    return l == Label::Polite ? "polite" : "impolite";
}

inline Label parse_label(std::string_view s) {
    if (s == "polite") return Label::Polite;
    if (s == "impolite") return Label::Impolite;
    throw DataError("unknown label value: " + std::string(s));
}

/// One community request with its real-valued politeness score.
struct Request {
    std::string id;
    std::string text;
    double score = 0.0;
    Community community = Community::Wiki;
    std::optional<Label> label;  // present when the dataset ships binary labels
};

struct LabeledExample {
    std::string source_id;
    std::string text;
    std::vector<std::string> tokens;
    Label label = Label::Impolite;
    double score = 0.0;  // retained for quartile statistics
};

// ---------------------------------------------------------------------------
// Tokenizer
//
// Rules: lowercase ASCII; split on whitespace; split at word/punctuation
// boundaries; a maximal run of one repeated punctuation character stays a
// single token ("?????" and "..." are one token each, "?!" is two).

inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    };
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (is_space_ascii(c)) {
            flush();
            ++i;
        } else if (is_punct_ascii(c)) {
            flush();
            std::size_t j = i + 1;
            while (j < text.size() && static_cast<unsigned char>(text[j]) == c) ++j;
            out.emplace_back(text.substr(i, j - i));
            i = j;
        } else {
            cur.push_back(lower_ascii(text[i]));
            ++i;
        }
    }
    flush();
    return out;
}

// ---------------------------------------------------------------------------
// Vocabulary: ids 0 and 1 are reserved for PAD and UNK; corpus tokens get
// ids >= 2 in first-occurrence order over the training split.

class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;

    Vocabulary() : tokens_{"<pad>", "<unk>"} {}

    int add(const std::string& token) {
        auto it = index_.find(token);
        if (it != index_.end()) return it->second;
        int id = static_cast<int>(tokens_.size());
        index_.emplace(token, id);
        tokens_.push_back(token);
        return id;
    }

    int id_of(const std::string& token) const {
        auto it = index_.find(token);
        return it == index_.end() ? kUnk : it->second;
    }

    bool contains(const std::string& token) const { return index_.count(token) > 0; }

    const std::string& token_of(int id) const {
        if (id < 0 || id >= static_cast<int>(tokens_.size()))
            throw DataError("token id out of range: " + std::to_string(id));
        return tokens_[static_cast<std::size_t>(id)];
    }

    /// Total id count including the two reserved rows.
    std::size_t size() const { return tokens_.size(); }

    std::uint64_t hash() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (std::size_t i = 0; i < tokens_.size(); ++i) {
            h = fnv1a64(tokens_[i], h);
            h = (h ^ i) * 0x100000001b3ULL;
        }
        return h;
    }

    template <typename ExampleSeq>
    static Vocabulary build(const ExampleSeq& train_examples) {
        Vocabulary v;
        for (const auto& ex : train_examples)
            for (const auto& tok : ex.tokens) v.add(tok);
        return v;
    }

    void save_tsv(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write vocabulary file: " + path);
        for (std::size_t i = 0; i < tokens_.size(); ++i)
            out << tokens_[i] << '\t' << i << '\n';
    }

    static Vocabulary load_tsv(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw DataError("cannot read vocabulary file: " + path);
        Vocabulary v;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw DataError(path + ":" + std::to_string(lineno) + ": expected token<TAB>id");
            std::string token = line.substr(0, tab);
            int id = std::stoi(line.substr(tab + 1));
            if (id <= kUnk) {
                if ((id == kPad && token != "<pad>") || (id == kUnk && token != "<unk>"))
                    throw DataError(path + ":" + std::to_string(lineno) + ": reserved id misuse");
                continue;
            }
            int got = v.add(token);
            if (got != id)
                throw DataError(path + ":" + std::to_string(lineno) + ": non-contiguous id " +
                                std::to_string(id));
        }
        return v;
    }

private:
    std::unordered_map<std::string, int> index_;
    std::vector<std::string> tokens_;
};

// ---------------------------------------------------------------------------
// Corpus files: UTF-8 line-delimited JSON records
//   {"id": "...", "text": "...", "score": -1.13}
// with an optional "label": "polite"|"impolite".

inline std::vector<Request> load_corpus(const std::string& path, Community community) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open corpus file: " + path);
    std::vector<Request> out;
    std::unordered_map<std::string, std::size_t> seen;  // id -> first line
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto where = [&] { return path + ":" + std::to_string(lineno); };
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(where() + ": malformed record: " + e.what());
        }
        if (!j.is_object() || !j.contains("id") || !j.contains("text") || !j.contains("score"))
            throw DataError(where() + ": record must have id, text and score fields");
        if (!j["id"].is_string() || !j["text"].is_string() || !j["score"].is_number())
            throw DataError(where() + ": wrong field type (id/text string, score number)");
        Request r;
        r.id = j["id"].get<std::string>();
        r.text = j["text"].get<std::string>();
        r.score = j["score"].get<double>();
        r.community = community;
        if (j.contains("label")) r.label = parse_label(j["label"].get<std::string>());
        if (trim(r.text).empty()) throw DataError(where() + ": empty text");
        auto [it, inserted] = seen.emplace(r.id, lineno);
        if (!inserted)
            throw DataError(where() + ": duplicate id '" + r.id + "' (first seen at line " +
                            std::to_string(it->second) + ")");
        out.push_back(std::move(r));
    }
    return out;
}

namespace detail {

// Minimal CSV reader handling quoted fields and embedded commas/quotes.
inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline int find_column(const std::vector<std::string>& header,
                       const std::vector<std::string>& candidates) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        std::string h = lower_ascii(trim(header[i]));
        for (const auto& c : candidates)
            if (h == c) return static_cast<int>(i);
    }
    return -1;
}

}  // namespace detail

/// Converter for the original CSV distribution of the request corpora.
/// Column names are matched case-insensitively; the score column is the
/// normalized politeness score.
inline std::vector<Request> load_corpus_csv(const std::string& path, Community community) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open corpus file: " + path);
    std::string line;
    if (!std::getline(in, line)) return {};
    auto header = detail::split_csv_row(line);
    int id_col = detail::find_column(header, {"id", "#id"});
    int text_col = detail::find_column(header, {"request", "text"});
    int score_col = detail::find_column(header, {"normalized score", "normalized_score", "score"});
    if (id_col < 0 || text_col < 0 || score_col < 0)
        throw DataError(path + ": CSV header must name id, request/text and score columns");
    std::vector<Request> out;
    std::unordered_map<std::string, std::size_t> seen;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto fields = detail::split_csv_row(line);
        std::size_t need = static_cast<std::size_t>(std::max({id_col, text_col, score_col})) + 1;
        if (fields.size() < need)
            throw DataError(path + ":" + std::to_string(lineno) + ": too few CSV fields");
        Request r;
        r.id = trim(fields[static_cast<std::size_t>(id_col)]);
        r.text = fields[static_cast<std::size_t>(text_col)];
        try {
            r.score = std::stod(fields[static_cast<std::size_t>(score_col)]);
        } catch (const std::exception&) {
            throw DataError(path + ":" + std::to_string(lineno) + ": bad score value");
        }
        r.community = community;
        if (trim(r.text).empty())
            throw DataError(path + ":" + std::to_string(lineno) + ": empty text");
        auto [it, inserted] = seen.emplace(r.id, lineno);
        if (!inserted)
            throw DataError(path + ":" + std::to_string(lineno) + ": duplicate id '" + r.id + "'");
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Binary labels from score quartiles.
//
// The top floor(N/4) requests by score are Polite, the bottom floor(N/4)
// Impolite, the middle half is excluded. The cut is deterministic: requests
// are ordered by (score, id) ascending, so ties at a boundary resolve by id.

inline std::vector<LabeledExample> quartile_label(const std::vector<Request>& requests) {
    const std::size_t n = requests.size();
    if (n < 4) throw DataError("quartile labeling needs at least 4 requests, got " +
                               std::to_string(n));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (requests[a].score != requests[b].score) return requests[a].score < requests[b].score;
        return requests[a].id < requests[b].id;
    });
    const std::size_t q = n / 4;
    std::vector<std::optional<Label>> assigned(n);
    for (std::size_t i = 0; i < q; ++i) assigned[order[i]] = Label::Impolite;
    for (std::size_t i = n - q; i < n; ++i) assigned[order[i]] = Label::Polite;

    std::vector<LabeledExample> out;
    out.reserve(2 * q);
    for (std::size_t i = 0; i < n; ++i) {
        if (!assigned[i]) continue;
        const Request& r = requests[i];
        LabeledExample ex;
        ex.source_id = r.id;
        ex.text = r.text;
        ex.tokens = tokenize(r.text);
        ex.label = *assigned[i];
        ex.score = r.score;
        out.push_back(std::move(ex));
    }
    return out;
}

/// Requests already carrying explicit labels pass through unfiltered;
/// otherwise labels are derived by score quartiles. Mixed labeling is an error.
inline std::vector<LabeledExample> label_examples(const std::vector<Request>& requests) {
    std::size_t with = 0;
    for (const auto& r : requests)
        if (r.label) ++with;
    if (with == 0) return quartile_label(requests);
    if (with != requests.size())
        throw DataError("corpus mixes labeled and unlabeled records (" + std::to_string(with) +
                        " of " + std::to_string(requests.size()) + " labeled)");
    std::vector<LabeledExample> out;
    out.reserve(requests.size());
    for (const auto& r : requests) {
        LabeledExample ex;
        ex.source_id = r.id;
        ex.text = r.text;
        ex.tokens = tokenize(r.text);
        ex.label = *r.label;
        ex.score = r.score;
        out.push_back(std::move(ex));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Deterministic 70/10/20 split.

struct SplitSpec {
    std::uint64_t seed = 7;
    double train_frac = 0.70;
    double dev_frac = 0.10;
    double test_frac = 0.20;

    void validate() const {
        double s = train_frac + dev_frac + test_frac;
        if (std::abs(s - 1.0) > 1e-9)
            throw std::invalid_argument("split fractions must sum to 1.0, got " +
                                        format_fixed(s, 6));
        if (train_frac < 0 || dev_frac < 0 || test_frac < 0)
            throw std::invalid_argument("split fractions must be non-negative");
    }
};

template <typename T>
struct Splits {
    std::vector<T> train, dev, test;
};

/// Shuffles with the given seed, then cuts at cumulative-fraction boundaries
/// floor(N*train) and floor(N*(train+dev)); the tail goes to test. For
/// N=2177 at 70/10/20 this yields 1523/218/436, and 7/1/2 for N=10.
template <typename T>
Splits<T> make_splits(const std::vector<T>& items, const SplitSpec& spec) {
    spec.validate();
    if (items.empty()) throw DataError("cannot split an empty corpus");
    std::vector<T> shuffled = items;
    Rng rng(spec.seed);
    politelens::shuffle(shuffled, rng);
    const std::size_t n = shuffled.size();
    // The 1e-9 nudge keeps exact boundaries like 10*(0.7+0.1) from landing one
    // below their true integer value.
    const auto cut1 =
        static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.train_frac + 1e-9));
    const auto cut2 = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * (spec.train_frac + spec.dev_frac) + 1e-9));
    Splits<T> out;
    out.train.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(cut1));
    out.dev.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(cut1),
                   shuffled.begin() + static_cast<std::ptrdiff_t>(cut2));
    out.test.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(cut2), shuffled.end());
    return out;
}

// ---------------------------------------------------------------------------
// Token id encoding for the network. Sequences are truncated at max_len and
// right-padded with PAD up to min_len (the largest filter window, so that a
// valid convolution always has at least one position).

inline constexpr std::size_t kMaxSequenceLength = 256;

inline std::vector<int> encode(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                               std::size_t max_len = kMaxSequenceLength, std::size_t min_len = 5) {
    std::vector<int> ids;
    ids.reserve(std::max(min_len, std::min(tokens.size(), max_len)));
    for (const auto& tok : tokens) {
        if (ids.size() >= max_len) break;
        ids.push_back(vocab.id_of(tok));
    }
    while (ids.size() < min_len) ids.push_back(Vocabulary::kPad);
    return ids;
}

// ---------------------------------------------------------------------------
// Split-file persistence (train.jsonl / dev.jsonl / test.jsonl).

inline void save_examples(const std::string& path, const std::vector<LabeledExample>& examples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write split file: " + path);
    for (const auto& ex : examples) {
        nlohmann::json j;
        j["id"] = ex.source_id;
        j["text"] = ex.text;
        j["score"] = ex.score;
        j["label"] = label_name(ex.label);
        out << j.dump() << '\n';
    }
}

inline std::vector<LabeledExample> load_examples(const std::string& path) {
    auto requests = load_corpus(path, Community::Wiki);
    for (const auto& r : requests)
        if (!r.label) throw DataError(path + ": split file record without label: " + r.id);
    return label_examples(requests);
}

}  // namespace politelens::corpus

#endif  // POLITELENS_CORPUS_HPP
