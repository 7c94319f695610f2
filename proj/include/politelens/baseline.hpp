#ifndef POLITELENS_BASELINE_HPP
#define POLITELENS_BASELINE_HPP

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <unordered_set>
#include <vector>

#include "politelens/common.hpp"
#include "politelens/corpus.hpp"
#include "politelens/train.hpp"

namespace politelens::baseline {

using corpus::Label;
using corpus::LabeledExample;
using corpus::Vocabulary;

using TokenSet = std::unordered_set<std::string>;

// ---------------------------------------------------------------------------
// Lexicons. The files under lexicons/ are the editable source; the builtin
// table mirrors them so the library works without a data directory.

struct Lexicons {
    TokenSet gratitude, greeting, positive, negative, apologizing, hedges;
    TokenSet first_person, first_person_plural, second_person;
    TokenSet deference_adjectives, deference_nouns;
    TokenSet indefinite_pronouns;

    static Lexicons builtin() {
        Lexicons lex;
        lex.gratitude = {"thank", "thanks", "thankyou", "appreciate", "appreciated", "grateful"};
        lex.greeting = {"hi", "hello", "hey", "greetings", "howdy"};
        lex.positive = {"great", "good",  "nice",    "excellent", "awesome", "wonderful",
                        "interesting", "cool", "love", "best", "amazing", "helpful",
                        "beautiful", "perfect", "fantastic", "brilliant", "kind"};
        lex.negative = {"bad",  "wrong", "terrible", "awful", "horrible", "stupid", "hate",
                        "worst", "poor", "annoying", "ridiculous", "useless", "ugly", "mess"};
        lex.apologizing = {"sorry", "apologize", "apologise", "apologies", "apology", "oops",
                           "whoops"};
        lex.hedges = {"maybe", "perhaps", "possibly", "probably", "somewhat", "suggest",
                      "seems", "seem", "appears", "appear", "think", "guess", "suppose",
                      "apparently", "presumably", "likely", "rather"};
        lex.first_person = {"i", "me", "my", "mine", "myself"};
        lex.first_person_plural = {"we", "us", "our", "ours", "ourselves"};
        lex.second_person = {"you", "your", "yours", "yourself"};
        lex.deference_adjectives = {"nice", "good", "great", "excellent", "interesting",
                                    "cool", "awesome"};
        lex.deference_nouns = {"work", "job", "point", "points", "article", "articles",
                               "effort", "start", "idea", "ideas", "rewrite"};
        lex.indefinite_pronouns = {"something", "somebody", "someone", "somewhere",
                                   "anything", "anybody", "anyone"};
        return lex;
    }

    /// Overrides builtin entries with lexicons/<name>.txt files where present
    /// (one token per line, '#' comments).
    static Lexicons load_dir(const std::string& dir) {
        Lexicons lex = builtin();
        auto load = [&](const char* name, TokenSet& target) {
            auto path = std::filesystem::path(dir) / (std::string(name) + ".txt");
            std::ifstream in(path);
            if (!in) return;
            TokenSet fresh;
            std::string line;
            while (std::getline(in, line)) {
                auto hash_pos = line.find('#');
                if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
                auto tok = trim(line);
                if (!tok.empty()) fresh.insert(lower_ascii(tok));
            }
            if (!fresh.empty()) target = std::move(fresh);
        };
        load("gratitude", lex.gratitude);
        load("greeting", lex.greeting);
        load("positive", lex.positive);
        load("negative", lex.negative);
        load("apologizing", lex.apologizing);
        load("hedges", lex.hedges);
        load("first_person", lex.first_person);
        load("first_person_plural", lex.first_person_plural);
        load("second_person", lex.second_person);
        load("deference_adjectives", lex.deference_adjectives);
        load("deference_nouns", lex.deference_nouns);
        load("indefinite_pronouns", lex.indefinite_pronouns);
        return lex;
    }
};

// ---------------------------------------------------------------------------
// Strategy matchers

enum class Polarity { Positive, Negative };

struct StrategyMatcher {
    std::string name;
    Polarity polarity = Polarity::Positive;
    bool pronoun_block = false;  // member of the block removed by augment_and_correct
    std::function<bool(const std::vector<std::string>&)> matches;
};

namespace match {

inline bool any_in(const std::vector<std::string>& toks, const TokenSet& set,
                   std::size_t from = 0) {
    for (std::size_t i = from; i < toks.size(); ++i)
        if (set.count(toks[i])) return true;
    return false;
}

inline bool bigram(const std::vector<std::string>& toks, const TokenSet& first,
                   const std::string& second) {
    for (std::size_t i = 0; i + 1 < toks.size(); ++i)
        if (first.count(toks[i]) && toks[i + 1] == second) return true;
    return false;
}

inline bool trigram(const std::vector<std::string>& toks, const std::string& a,
                    const std::string& b, const std::string& c) {
    for (std::size_t i = 0; i + 2 < toks.size(); ++i)
        if (toks[i] == a && toks[i + 1] == b && toks[i + 2] == c) return true;
    return false;
}

inline bool starts_with_any(const std::vector<std::string>& toks, const TokenSet& set) {
    return !toks.empty() && set.count(toks[0]) > 0;
}

/// Window-bounded gapped pattern "modal ... please": the anchor bigram
/// begins within the first 4 tokens and "please" falls within the final 3.
inline bool gapped_modal_please(const std::vector<std::string>& toks, const TokenSet& modals) {
    if (toks.size() < 3) return false;
    std::size_t modal_at = toks.size();
    for (std::size_t i = 0; i < std::min<std::size_t>(4, toks.size() - 1); ++i)
        if (modals.count(toks[i])) {
            modal_at = i;
            break;
        }
    if (modal_at == toks.size()) return false;
    const std::size_t tail = toks.size() >= 3 ? toks.size() - 3 : 0;
    for (std::size_t i = std::max(tail, modal_at + 1); i < toks.size(); ++i)
        if (toks[i] == "please") return true;
    return false;
}

/// Punctuation run of '?' or '.' with length >= 2 ("???", "...").
inline bool punctuation_run(const std::string& tok) {
    if (tok.size() < 2) return false;
    char c = tok[0];
    if (c != '?' && c != '.') return false;
    for (char x : tok)
        if (x != c) return false;
    return true;
}

}  // namespace match

/// The reconstructed linguistic feature set: 21 binary strategies. The five
/// pronoun strategies sit together as the block that augment_and_correct
/// removes.
inline std::vector<StrategyMatcher> linguistic_matchers(const Lexicons& lex) {
    using Toks = std::vector<std::string>;
    std::vector<StrategyMatcher> out;
    auto add = [&](std::string name, Polarity pol, bool pronoun,
                   std::function<bool(const Toks&)> fn) {
        out.push_back({std::move(name), pol, pronoun, std::move(fn)});
    };
    const TokenSet counterfactual_modals = {"would", "could"};
    const TokenSet indicative_modals = {"can", "will"};
    const TokenSet all_modals = {"can", "will", "would", "could"};
    const TokenSet wh_words = {"what", "why", "who", "how", "when", "where", "which"};
    const TokenSet direct_starters = {"so", "then", "and", "but", "or"};
    TokenSet first_any = lex.first_person;
    first_any.insert(lex.first_person_plural.begin(), lex.first_person_plural.end());

    add("Gratitude", Polarity::Positive, false, [lex](const Toks& t) {
        return match::any_in(t, lex.gratitude) || match::bigram(t, {"i"}, "appreciate");
    });
    add("Deference", Polarity::Positive, false, [lex](const Toks& t) {
        for (std::size_t i = 0; i + 1 < t.size(); ++i)
            if (lex.deference_adjectives.count(t[i]) && lex.deference_nouns.count(t[i + 1]))
                return true;
        return false;
    });
    add("Greeting", Polarity::Positive, false, [lex](const Toks& t) {
        for (std::size_t i = 0; i < std::min<std::size_t>(2, t.size()); ++i)
            if (lex.greeting.count(t[i])) return true;
        return false;
    });
    add("Positive Lexicon", Polarity::Positive, false,
        [lex](const Toks& t) { return match::any_in(t, lex.positive); });
    add("Negative Lexicon", Polarity::Negative, false,
        [lex](const Toks& t) { return match::any_in(t, lex.negative); });
    add("Apologizing", Polarity::Positive, false, [lex](const Toks& t) {
        return match::any_in(t, lex.apologizing) || match::bigram(t, {"excuse"}, "me") ||
               match::bigram(t, {"forgive"}, "me");
    });
    add("Please", Polarity::Positive, false,
        [](const Toks& t) { return match::any_in(t, {"please"}, 1); });
    add("Please Start", Polarity::Negative, false,
        [](const Toks& t) { return !t.empty() && t[0] == "please"; });
    add("Indirect (btw)", Polarity::Positive, false,
        [](const Toks& t) { return match::trigram(t, "by", "the", "way"); });
    add("Direct Question", Polarity::Negative, false,
        [wh_words](const Toks& t) { return match::starts_with_any(t, wh_words); });
    add("Direct Start", Polarity::Negative, false, [direct_starters](const Toks& t) {
        return match::starts_with_any(t, direct_starters);
    });
    add("Counterfactual Modal", Polarity::Positive, false,
        [counterfactual_modals](const Toks& t) {
            return match::bigram(t, counterfactual_modals, "you") ||
                   match::bigram(t, {"would"}, "it") || match::trigram(t, "do", "you", "mind");
        });
    add("Indicative Modal", Polarity::Positive, false, [indicative_modals](const Toks& t) {
        return match::bigram(t, indicative_modals, "you") ||
               match::gapped_modal_please(t, indicative_modals);
    });
    add("1st Person Start", Polarity::Positive, true,
        [first_any](const Toks& t) { return match::starts_with_any(t, first_any); });
    add("1st Person Plural", Polarity::Positive, true,
        [lex](const Toks& t) { return match::any_in(t, lex.first_person_plural); });
    add("1st Person", Polarity::Positive, true,
        [lex](const Toks& t) { return match::any_in(t, lex.first_person, 1); });
    add("2nd Person", Polarity::Positive, true,
        [lex](const Toks& t) { return match::any_in(t, lex.second_person, 1); });
    add("2nd Person Start", Polarity::Negative, true,
        [lex](const Toks& t) { return match::starts_with_any(t, lex.second_person); });
    add("Hedges", Polarity::Positive, false,
        [lex](const Toks& t) { return match::any_in(t, lex.hedges); });
    add("Factuality", Polarity::Negative, false, [](const Toks& t) {
        static const TokenSet plain = {"actually", "really", "honestly", "frankly"};
        return match::any_in(t, plain) || match::bigram(t, {"in"}, "fact") ||
               match::bigram(t, {"the"}, "fact") || match::bigram(t, {"the"}, "truth") ||
               match::bigram(t, {"the"}, "reality");
    });
    add("Gapped Modal Please", Polarity::Positive, false, [all_modals](const Toks& t) {
        return match::gapped_modal_please(t, all_modals);
    });
    return out;
}

/// The two strategies surfaced by the activation-cluster analysis.
inline std::vector<StrategyMatcher> discovered_matchers(const Lexicons& lex) {
    std::vector<StrategyMatcher> out;
    out.push_back({"Indefinite Pronouns", Polarity::Negative, false,
                   [lex](const std::vector<std::string>& t) {
                       return match::any_in(t, lex.indefinite_pronouns);
                   }});
    out.push_back({"Punctuation", Polarity::Negative, false,
                   [](const std::vector<std::string>& t) {
                       for (const auto& tok : t)
                           if (match::punctuation_run(tok)) return true;
                       return false;
                   }});
    return out;
}

// ---------------------------------------------------------------------------
// Feature schemas and vectors

struct FeatureVector {
    std::vector<double> values;
    std::string schema_id;
};

class StrategyCatalog {
public:
    static StrategyCatalog linguistic(const Lexicons& lex) {
        StrategyCatalog c;
        c.schema_id_ = "ling-v1";
        c.matchers_ = linguistic_matchers(lex);
        return c;
    }

    /// Removes the pronoun feature block and appends the two discovered
    /// strategies. Applying it twice is an error.
    StrategyCatalog augment_and_correct(const Lexicons& lex) const {
        for (const auto& m : matchers_)
            if (m.name == "Indefinite Pronouns" || m.name == "Punctuation")
                throw std::logic_error("schema already augmented with discovered features");
        StrategyCatalog c;
        c.schema_id_ = "ling+disc-v1";
        for (const auto& m : matchers_)
            if (!m.pronoun_block) c.matchers_.push_back(m);
        for (auto& m : discovered_matchers(lex)) c.matchers_.push_back(std::move(m));
        return c;
    }

    const std::vector<StrategyMatcher>& matchers() const { return matchers_; }
    const std::string& schema_id() const { return schema_id_; }
    std::size_t size() const { return matchers_.size(); }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& m : matchers_) out.push_back(m.name);
        return out;
    }

    FeatureVector features(const std::vector<std::string>& tokens) const {
        FeatureVector fv;
        fv.schema_id = schema_id_;
        fv.values.reserve(matchers_.size());
        for (const auto& m : matchers_) fv.values.push_back(m.matches(tokens) ? 1.0 : 0.0);
        return fv;
    }

private:
    std::string schema_id_;
    std::vector<StrategyMatcher> matchers_;
};

inline FeatureVector linguistic_features(const LabeledExample& ex, const StrategyCatalog& catalog) {
    return catalog.features(ex.tokens);
}

/// Unigram counts over the training vocabulary; PAD/UNK and out-of-vocabulary
/// tokens are ignored.
inline FeatureVector bow_features(const LabeledExample& ex, const Vocabulary& vocab) {
    FeatureVector fv;
    char hash_hex[17];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(vocab.hash()));
    fv.schema_id = std::string("bow-v1:") + hash_hex;
    fv.values.assign(vocab.size() - 2, 0.0);
    for (const auto& tok : ex.tokens) {
        int id = vocab.id_of(tok);
        if (id >= 2) fv.values[static_cast<std::size_t>(id) - 2] += 1.0;
    }
    return fv;
}

inline void dump_features(const std::string& path, const std::vector<std::string>& names,
                          const std::vector<std::string>& ids,
                          const std::vector<FeatureVector>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write feature dump: " + path);
    out << "id";
    for (const auto& n : names) out << '\t' << n;
    out << '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out << ids[i];
        for (double v : rows[i].values) out << '\t' << format_fixed(v, 0);
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// L2-regularized logistic regression, fit full-batch with the shared Adam
// kernel; the regularization strength is selected on the dev split.

struct LinearConfig {
    std::vector<double> l2_grid = {0.01, 0.1, 1.0};
    std::size_t epochs = 400;
    double learning_rate = 0.05;
};

struct LinearModel {
    std::string schema_id;
    std::vector<double> weights;
    double bias = 0.0;
    double l2 = 0.0;

    double score(const FeatureVector& fv) const {
        if (fv.schema_id != schema_id)
            throw DataError("feature schema mismatch: model built for '" + schema_id +
                            "', got '" + fv.schema_id + "'");
        if (fv.values.size() != weights.size())
            throw DataError("feature length mismatch");
        return dot(weights.data(), fv.values.data(), weights.size()) + bias;
    }

    Label predict(const FeatureVector& fv) const {
        return score(fv) > 0.0 ? Label::Polite : Label::Impolite;
    }
};

namespace detail {

inline LinearModel fit_logistic(const std::vector<FeatureVector>& x,
                                const std::vector<Label>& y, double l2,
                                const LinearConfig& cfg) {
    const std::size_t n = x.size();
    const std::size_t d = x[0].values.size();
    LinearModel model;
    model.schema_id = x[0].schema_id;
    model.weights.assign(d, 0.0);
    model.l2 = l2;

    std::vector<double> m(d + 1, 0.0), v(d + 1, 0.0), grad(d + 1, 0.0), theta(d + 1, 0.0);
    train::TrainConfig adam;
    adam.learning_rate = cfg.learning_rate;

    for (std::size_t step = 1; step <= cfg.epochs; ++step) {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double s = dot(theta.data(), x[i].values.data(), d) + theta[d];
            double p = 1.0 / (1.0 + std::exp(-s));
            double delta = p - (y[i] == Label::Polite ? 1.0 : 0.0);
            for (std::size_t j = 0; j < d; ++j) grad[j] += delta * x[i].values[j];
            grad[d] += delta;
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t j = 0; j < d; ++j) grad[j] = grad[j] * inv_n + l2 * theta[j];
        grad[d] *= inv_n;  // bias unregularized
        train::adam_update(theta.data(), m.data(), v.data(), grad.data(), d + 1, adam, step,
                           "logistic");
    }
    model.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(d));
    model.bias = theta[d];
    return model;
}

}  // namespace detail

inline double linear_accuracy(const LinearModel& model, const std::vector<FeatureVector>& x,
                              const std::vector<Label>& y) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (model.predict(x[i]) == y[i]) ++correct;
    return x.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(x.size());
}

inline LinearModel train_linear(const std::vector<FeatureVector>& train_x,
                                const std::vector<Label>& train_y,
                                const std::vector<FeatureVector>& dev_x,
                                const std::vector<Label>& dev_y,
                                const LinearConfig& cfg = LinearConfig{}) {
    if (train_x.empty() || train_x.size() != train_y.size())
        throw DataError("train_linear: empty or inconsistent training data");
    for (const auto& fv : train_x)
        if (fv.schema_id != train_x[0].schema_id)
            throw DataError("train_linear: mixed feature schemas");
    bool all_same = true;
    for (const auto& label : train_y)
        if (label != train_y[0]) all_same = false;
    if (all_same) throw DataError("train_linear: degenerate data (all labels identical)");

    LinearModel best;
    double best_dev = -1.0;
    for (double l2 : cfg.l2_grid) {
        auto model = detail::fit_logistic(train_x, train_y, l2, cfg);
        double acc = linear_accuracy(model, dev_x, dev_y);
        if (acc > best_dev) {
            best_dev = acc;
            best = std::move(model);
        }
    }
    return best;
}

}  // namespace politelens::baseline

#endif  // POLITELENS_BASELINE_HPP
