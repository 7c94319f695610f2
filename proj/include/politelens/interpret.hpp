#ifndef POLITELENS_INTERPRET_HPP
#define POLITELENS_INTERPRET_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <unordered_set>
#include <vector>

#include "politelens/common.hpp"
#include "politelens/corpus.hpp"
#include "politelens/embed.hpp"
#include "politelens/nn.hpp"
#include "politelens/train.hpp"

namespace politelens::interpret {

using corpus::Label;
using corpus::LabeledExample;
using train::Checkpoint;

// ---------------------------------------------------------------------------
// Activation clusters

struct ClusterEntry {
    std::string request_id;
    float activation = 0.0f;
    std::size_t position = 0;               // winning window start
    std::vector<std::string> span;          // window-size tokens at that position
};

/// Top-k requests per pooled neuron, with the token window behind the
/// winning max-pool position.
struct ActivationCluster {
    std::size_t window = 0;  // neuron id: window size ...
    std::size_t filter = 0;  // ... and filter index within the bank
    std::vector<ClusterEntry> entries;  // activation descending, ties by id

    std::string neuron_name() const {
        return "w" + std::to_string(window) + "_f" + std::to_string(filter);
    }
};

namespace detail {

inline std::vector<std::string> display_tokens(const LabeledExample& ex,
                                               const std::vector<int>& ids) {
    std::vector<std::string> out(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i)
        out[i] = i < ex.tokens.size() ? ex.tokens[i] : "<pad>";
    return out;
}

}  // namespace detail

inline std::vector<ActivationCluster> collect_clusters(const Checkpoint& ckpt,
                                                       const std::vector<LabeledExample>& dataset,
                                                       std::size_t k,
                                                       std::ostream* warnings = &std::cerr) {
    if (dataset.empty()) throw DataError("collect_clusters: empty dataset");
    if (k > dataset.size()) {
        if (warnings)
            (*warnings) << "clusters: k=" << k << " clipped to dataset size " << dataset.size()
                        << '\n';
        k = dataset.size();
    }
    const nn::ModelDims& dims = ckpt.params.dims;
    std::vector<std::vector<ClusterEntry>> per_neuron(dims.pooled_size());

    for (const auto& ex : dataset) {
        auto ids = corpus::encode(ex.tokens, ckpt.vocab, ckpt.config.max_len, dims.max_window());
        auto tokens = detail::display_tokens(ex, ids);
        auto input = embed::lookup<float>(ckpt.embeddings, ids);
        auto trace = nn::forward(ckpt.params, input, 0.0f, nn::Mode::Eval, 0);
        for (std::size_t b = 0; b < ckpt.params.banks.size(); ++b) {
            const std::size_t t = ckpt.params.banks[b].window;
            for (std::size_t f = 0; f < dims.feature_maps; ++f) {
                const std::size_t j = dims.bank_offset(b) + f;
                ClusterEntry entry;
                entry.request_id = ex.source_id;
                entry.activation = trace.pooled[j];
                entry.position = trace.argmax[j];
                entry.span.assign(tokens.begin() + static_cast<std::ptrdiff_t>(entry.position),
                                  tokens.begin() + static_cast<std::ptrdiff_t>(entry.position + t));
                per_neuron[j].push_back(std::move(entry));
            }
        }
    }

    std::vector<ActivationCluster> out;
    out.reserve(dims.pooled_size());
    for (std::size_t b = 0; b < ckpt.params.banks.size(); ++b) {
        for (std::size_t f = 0; f < dims.feature_maps; ++f) {
            const std::size_t j = dims.bank_offset(b) + f;
            auto& entries = per_neuron[j];
            std::sort(entries.begin(), entries.end(),
                      [](const ClusterEntry& a, const ClusterEntry& b2) {
                          if (a.activation != b2.activation) return a.activation > b2.activation;
                          return a.request_id < b2.request_id;
                      });
            if (entries.size() > k) entries.resize(k);
            ActivationCluster cluster;
            cluster.window = ckpt.params.banks[b].window;
            cluster.filter = f;
            cluster.entries = std::move(entries);
            out.push_back(std::move(cluster));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// First-derivative saliency

/// |dS_y/dE| for one request: the gradient of the pre-softmax score of the
/// true label with respect to every input embedding coordinate.
struct SaliencyMap {
    std::string request_id;
    std::vector<std::string> tokens;
    Matrix<float> magnitude;           // n x d, absolute values
    std::vector<double> token_scores;  // mean over the d dimensions per token
    Label true_label = Label::Impolite;
    Label predicted = Label::Impolite;
};

inline SaliencyMap saliency(const Checkpoint& ckpt, const LabeledExample& ex) {
    const nn::ModelDims& dims = ckpt.params.dims;
    auto ids = corpus::encode(ex.tokens, ckpt.vocab, ckpt.config.max_len, dims.max_window());
    auto input = embed::lookup<float>(ckpt.embeddings, ids);
    auto trace = nn::forward(ckpt.params, input, 0.0f, nn::Mode::Eval, 0);

    // seed the reverse pass with d(S_y)/dS = onehot(y): same code path as
    // training, with the loss swapped for the raw score
    std::vector<float> dscores(nn::ModelDims::kClasses, 0.0f);
    dscores[static_cast<std::size_t>(ex.label)] = 1.0f;
    auto g = nn::backward_from_scores(ckpt.params, trace, dscores);

    SaliencyMap map;
    map.request_id = ex.source_id;
    map.tokens = detail::display_tokens(ex, ids);
    map.true_label = ex.label;
    map.predicted = trace.probs[1] > trace.probs[0] ? Label::Polite : Label::Impolite;
    map.magnitude = Matrix<float>(g.input.rows(), g.input.cols());
    map.token_scores.assign(g.input.rows(), 0.0);
    for (std::size_t r = 0; r < g.input.rows(); ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < g.input.cols(); ++c) {
            float a = std::abs(g.input(r, c));
            map.magnitude(r, c) = a;
            sum += a;
        }
        map.token_scores[r] = sum / static_cast<double>(g.input.cols());
    }
    return map;
}

// ---------------------------------------------------------------------------
// PCA by power iteration with deflation

struct PcaResult {
    Matrix<double> basis;                  // 2 x d, orthonormal rows
    std::vector<double> mean;              // d
    double eigenvalue1 = 0.0, eigenvalue2 = 0.0;
    double explained1 = 0.0, explained2 = 0.0;  // fractions of total variance
};

namespace detail {

inline std::vector<double> power_iterate(const Matrix<double>& c, Rng& rng, double* eigenvalue) {
    const std::size_t d = c.rows();
    std::vector<double> v(d);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    double norm = std::sqrt(dot(v.data(), v.data(), d));
    for (auto& x : v) x /= norm;

    std::vector<double> w(d);
    double lambda = 0.0;
    for (int iter = 0; iter < 20000; ++iter) {
        for (std::size_t i = 0; i < d; ++i) w[i] = dot(c.row(i), v.data(), d);
        lambda = dot(v.data(), w.data(), d);
        double wnorm = std::sqrt(dot(w.data(), w.data(), d));
        if (wnorm == 0.0) break;  // operating on the null space
        double delta = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            double next = w[i] / wnorm;
            delta = std::max(delta, std::abs(next - v[i]));
            v[i] = next;
        }
        if (delta < 1e-14) break;
    }
    *eigenvalue = lambda;
    // canonical sign: largest-magnitude coordinate positive
    std::size_t arg = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
    if (v[arg] < 0.0)
        for (auto& x : v) x = -x;
    return v;
}

inline Matrix<double> gather_rows(const Matrix<float>& table, const corpus::Vocabulary& vocab,
                                  const std::vector<std::string>& words) {
    Matrix<double> x(words.size(), table.cols());
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (!vocab.contains(words[i]))
            throw DataError("word not in vocabulary: '" + words[i] + "'");
        const auto row = static_cast<std::size_t>(vocab.id_of(words[i]));
        for (std::size_t c = 0; c < table.cols(); ++c)
            x(i, c) = static_cast<double>(table(row, c));
    }
    return x;
}

}  // namespace detail

/// Fits the top-2 principal components of the selected rows: mean-center,
/// then iterated power method with one deflation step.
inline PcaResult fit_pca_rows(const Matrix<double>& rows) {
    const std::size_t k = rows.rows();
    const std::size_t d = rows.cols();
    if (k < 3) throw DataError("fit_pca: need at least 3 words, got " + std::to_string(k));

    PcaResult result;
    result.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t c = 0; c < d; ++c) result.mean[c] += rows(i, c);
    for (auto& m : result.mean) m /= static_cast<double>(k);

    Matrix<double> centered(k, d);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t c = 0; c < d; ++c) centered(i, c) = rows(i, c) - result.mean[c];

    Matrix<double> cov(d, d);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t a = 0; a < d; ++a) {
            const double xa = centered(i, a);
            if (xa == 0.0) continue;
            double* row = cov.row(a);
            for (std::size_t b = 0; b < d; ++b) row[b] += xa * centered(i, b);
        }
    const double denom = static_cast<double>(k - 1);
    for (auto& v : cov.values()) v /= denom;

    double total = 0.0;
    for (std::size_t a = 0; a < d; ++a) total += cov(a, a);
    if (total <= 0.0) throw DataError("fit_pca: selection has zero variance");

    Rng rng(0x706361);
    double lambda1 = 0.0;
    auto v1 = detail::power_iterate(cov, rng, &lambda1);
    // deflate and repeat for the second component
    Matrix<double> deflated = cov;
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) deflated(a, b) -= lambda1 * v1[a] * v1[b];
    double lambda2 = 0.0;
    auto v2 = detail::power_iterate(deflated, rng, &lambda2);
    // re-orthonormalize against v1 to shed accumulated roundoff
    const double overlap = dot(v1.data(), v2.data(), d);
    for (std::size_t i = 0; i < d; ++i) v2[i] -= overlap * v1[i];
    double n2 = std::sqrt(dot(v2.data(), v2.data(), d));
    if (lambda2 < 1e-12 * std::max(lambda1, 1.0) || n2 < 1e-12)
        throw DataError("fit_pca: selected rows have rank < 2");
    for (auto& x : v2) x /= n2;

    result.basis = Matrix<double>(2, d);
    for (std::size_t c = 0; c < d; ++c) {
        result.basis(0, c) = v1[c];
        result.basis(1, c) = v2[c];
    }
    result.eigenvalue1 = lambda1;
    result.eigenvalue2 = lambda2;
    result.explained1 = lambda1 / total;
    result.explained2 = lambda2 / total;
    return result;
}

inline PcaResult fit_pca(const embed::EmbeddingSnapshot& snap, const corpus::Vocabulary& vocab,
                         const std::vector<std::string>& words) {
    std::unordered_set<std::string> seen;
    for (const auto& w : words)
        if (!seen.insert(w).second) throw DataError("duplicate word in selection: '" + w + "'");
    return fit_pca_rows(detail::gather_rows(snap.matrix, vocab, words));
}

/// Projects rows into an already-fitted frame (basis and mean stay fixed, so
/// "before" and "after" coordinates are directly comparable).
inline Matrix<double> project(const PcaResult& pca, const Matrix<double>& rows) {
    Matrix<double> out(rows.rows(), 2);
    for (std::size_t i = 0; i < rows.rows(); ++i)
        for (std::size_t comp = 0; comp < 2; ++comp) {
            double s = 0.0;
            for (std::size_t c = 0; c < rows.cols(); ++c)
                s += (rows(i, c) - pca.mean[c]) * pca.basis(comp, c);
            out(i, comp) = s;
        }
    return out;
}

// ---------------------------------------------------------------------------
// Embedding trajectories

/// Words discussed alongside the projection figure; used when no word list is
/// supplied.
inline const std::vector<std::string>& default_trajectory_words() {
    static const std::vector<std::string> words = {"hi",  "appreciate", "great", "thanks",
                                                   "please", "could",  "would", "can",
                                                   "why", "what",       "something"};
    return words;
}

struct TrajectoryPlot {
    std::vector<std::string> words;
    Matrix<double> before_xy;  // k x 2
    Matrix<double> after_xy;   // k x 2
    PcaResult pca;
    std::string fit_on;  // "before" | "after" | "both"
};

inline TrajectoryPlot trajectory(const Checkpoint& ckpt, const std::vector<std::string>& words,
                                 const std::string& fit_on = "before") {
    const auto* before = ckpt.snapshot("before");
    if (!before) throw DataError("checkpoint has no 'before' embedding snapshot");
    std::unordered_set<std::string> seen;
    for (const auto& w : words)
        if (!seen.insert(w).second) throw DataError("duplicate word in selection: '" + w + "'");

    auto before_rows = detail::gather_rows(before->matrix, ckpt.vocab, words);
    auto after_rows = detail::gather_rows(ckpt.embeddings.matrix(), ckpt.vocab, words);

    TrajectoryPlot plot;
    plot.words = words;
    plot.fit_on = fit_on;
    if (fit_on == "before") {
        plot.pca = fit_pca_rows(before_rows);
    } else if (fit_on == "after") {
        plot.pca = fit_pca_rows(after_rows);
    } else if (fit_on == "both") {
        Matrix<double> stacked(2 * words.size(), before_rows.cols());
        for (std::size_t i = 0; i < words.size(); ++i)
            for (std::size_t c = 0; c < before_rows.cols(); ++c) {
                stacked(i, c) = before_rows(i, c);
                stacked(words.size() + i, c) = after_rows(i, c);
            }
        plot.pca = fit_pca_rows(stacked);
    } else {
        throw UsageError("trajectory: fit-on must be one of before|after|both");
    }
    plot.before_xy = project(plot.pca, before_rows);
    plot.after_xy = project(plot.pca, after_rows);
    return plot;
}

// ---------------------------------------------------------------------------
// Renderers

namespace detail {

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write output file: " + path);
    return out;
}

inline std::string html_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

}  // namespace detail

/// Writes saliency/<id>.html (token heat view), .tsv (token TAB score) and
/// .matrix.tsv (per-token per-dimension magnitudes).
inline void render_saliency(const SaliencyMap& map, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto base = std::filesystem::path(out_dir) / map.request_id;

    double max_score = 0.0;
    for (double s : map.token_scores) max_score = std::max(max_score, s);

    {
        auto out = detail::open_out(base.string() + ".html");
        out << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>saliency "
            << detail::html_escape(map.request_id) << "</title>\n"
            << "<style>body{font-family:sans-serif;margin:2em} span.tok{padding:4px;margin:1px;"
               "display:inline-block;border-radius:3px}</style></head>\n<body>\n"
            << "<h3>" << detail::html_escape(map.request_id)
            << " &mdash; true: " << corpus::label_name(map.true_label)
            << ", predicted: " << corpus::label_name(map.predicted) << "</h3>\n<p>\n";
        for (std::size_t i = 0; i < map.tokens.size(); ++i) {
            double alpha = max_score > 0.0 ? map.token_scores[i] / max_score : 0.0;
            out << "<span class=\"tok\" style=\"background: rgba(255,96,0," << format_fixed(alpha, 3)
                << ")\" title=\"" << format_fixed(map.token_scores[i], 6) << "\">"
                << detail::html_escape(map.tokens[i]) << "</span>\n";
        }
        out << "</p>\n</body></html>\n";
    }
    {
        auto out = detail::open_out(base.string() + ".tsv");
        out << "token\tscore\n";
        for (std::size_t i = 0; i < map.tokens.size(); ++i)
            out << map.tokens[i] << '\t' << format_fixed(map.token_scores[i], 6) << '\n';
    }
    {
        auto out = detail::open_out(base.string() + ".matrix.tsv");
        out << "token";
        for (std::size_t c = 0; c < map.magnitude.cols(); ++c) out << "\td" << c;
        out << '\n';
        for (std::size_t r = 0; r < map.magnitude.rows(); ++r) {
            out << map.tokens[r];
            for (std::size_t c = 0; c < map.magnitude.cols(); ++c)
                out << '\t' << format_fixed(map.magnitude(r, c), 6);
            out << '\n';
        }
    }
}

/// Scatter of before (red) and after (blue) positions with one arrow per
/// word, plus the coordinate TSV.
inline void render_trajectory(const TrajectoryPlot& plot, const std::string& svg_path,
                              const std::string& tsv_path) {
    {
        auto out = detail::open_out(tsv_path);
        out << "word\tx_before\ty_before\tx_after\ty_after\n";
        for (std::size_t i = 0; i < plot.words.size(); ++i)
            out << plot.words[i] << '\t' << format_fixed(plot.before_xy(i, 0), 6) << '\t'
                << format_fixed(plot.before_xy(i, 1), 6) << '\t'
                << format_fixed(plot.after_xy(i, 0), 6) << '\t'
                << format_fixed(plot.after_xy(i, 1), 6) << '\n';
    }

    double lo_x = 0, hi_x = 0, lo_y = 0, hi_y = 0;
    for (std::size_t i = 0; i < plot.words.size(); ++i) {
        for (const auto* m : {&plot.before_xy, &plot.after_xy}) {
            lo_x = std::min(lo_x, (*m)(i, 0));
            hi_x = std::max(hi_x, (*m)(i, 0));
            lo_y = std::min(lo_y, (*m)(i, 1));
            hi_y = std::max(hi_y, (*m)(i, 1));
        }
    }
    const double span_x = std::max(hi_x - lo_x, 1e-9);
    const double span_y = std::max(hi_y - lo_y, 1e-9);
    const double width = 640, height = 480, pad = 60;
    auto sx = [&](double x) { return pad + (x - lo_x) / span_x * (width - 2 * pad); };
    auto sy = [&](double y) { return height - pad - (y - lo_y) / span_y * (height - 2 * pad); };

    auto out = detail::open_out(svg_path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < plot.words.size(); ++i) {
        const double x1 = sx(plot.before_xy(i, 0)), y1 = sy(plot.before_xy(i, 1));
        const double x2 = sx(plot.after_xy(i, 0)), y2 = sy(plot.after_xy(i, 1));
        out << "<line class=\"arrow\" x1=\"" << format_fixed(x1, 2) << "\" y1=\""
            << format_fixed(y1, 2) << "\" x2=\"" << format_fixed(x2, 2) << "\" y2=\""
            << format_fixed(y2, 2) << "\" stroke=\"#999999\" stroke-width=\"1\"/>\n";
    }
    for (std::size_t i = 0; i < plot.words.size(); ++i) {
        const double x1 = sx(plot.before_xy(i, 0)), y1 = sy(plot.before_xy(i, 1));
        const double x2 = sx(plot.after_xy(i, 0)), y2 = sy(plot.after_xy(i, 1));
        out << "<circle class=\"before-point\" cx=\"" << format_fixed(x1, 2) << "\" cy=\""
            << format_fixed(y1, 2) << "\" r=\"4\" fill=\"#cc2222\"/>\n";
        out << "<circle class=\"after-point\" cx=\"" << format_fixed(x2, 2) << "\" cy=\""
            << format_fixed(y2, 2) << "\" r=\"4\" fill=\"#2244cc\"/>\n";
        out << "<text x=\"" << format_fixed(x2 + 6, 2) << "\" y=\"" << format_fixed(y2 - 6, 2)
            << "\" font-size=\"12\" font-family=\"sans-serif\">"
            << detail::html_escape(plot.words[i]) << "</text>\n";
    }
    out << "</svg>\n";
}

/// clusters.tsv: neuron TAB rank TAB activation TAB span TAB request_id.
inline void render_clusters(const std::vector<ActivationCluster>& clusters,
                            const std::string& tsv_path) {
    auto out = detail::open_out(tsv_path);
    out << "neuron\trank\tactivation\tspan\trequest_id\n";
    for (const auto& cluster : clusters) {
        for (std::size_t rank = 0; rank < cluster.entries.size(); ++rank) {
            const auto& e = cluster.entries[rank];
            out << cluster.neuron_name() << '\t' << (rank + 1) << '\t'
                << format_fixed(e.activation, 6) << '\t' << join(e.span, " ") << '\t'
                << e.request_id << '\n';
        }
    }
}

}  // namespace politelens::interpret

#endif  // POLITELENS_INTERPRET_HPP
