#pragma once

#include <atomic>
#include <cmath>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "matlp/corpus.hpp"
#include "matlp/errors.hpp"

// Zero-shot document classification: a document is labelled with whichever of
// two label texts sits closer in embedding space, closeness measured by
// cosine similarity throughout.

namespace matlp {

struct EmbeddingVector {
    std::vector<double> values;

    size_t dim() const { return values.size(); }

    void validate() const {
        if (values.empty()) throw ValidationError("embedding must be non-empty");
        for (double v : values)
            if (!std::isfinite(v)) throw ValidationError("embedding contains non-finite value");
    }
};

struct LabelScheme {
    std::string name;  // original | crude | designated | verbose | custom
    std::string positive_text;
    std::string negative_text;

    void validate() const {
        if (positive_text.empty() || negative_text.empty())
            throw ValidationError("label texts must be non-empty");
        if (positive_text == negative_text)
            throw ValidationError("label texts must differ");
    }
};

// The four built-in label pairs for the battery-abstract screening task,
// from blunt to verbose. Verbosity matters: the negative label has to name
// the complement set, not just negate the positive one.
inline LabelScheme builtin_scheme(const std::string& name) {
    if (name == "original") return {"original", "battery", "non-battery"};
    if (name == "crude") return {"crude", "battery materials", "diverse domains"};
    if (name == "designated")
        return {"designated", "battery materials", "medical and psychological research"};
    if (name == "verbose")
        return {"verbose", "papers related to battery energy materials",
                "medical and psychological research"};
    throw ConfigError("unknown label scheme \"" + name +
                      "\" (expected original|crude|designated|verbose)");
}

inline double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim())
        throw ValidationError("embedding dimension mismatch: " + std::to_string(a.dim()) +
                              " vs " + std::to_string(b.dim()));
    double dot = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0)
        throw ValidationError("cosine similarity undefined for zero vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct ZeroShotPrediction {
    std::string label;
    double similarity_positive = 0;
    double similarity_negative = 0;
    double margin = 0;      // similarity_positive - similarity_negative
    double confidence = 0;  // softmax of the chosen side, in [0, 1]
};

// Ties predict positive. Confidence is a documented surrogate: embeddings
// carry no log probabilities, so the two similarities are pushed through a
// softmax at temperature tau and the chosen side's mass is reported.
inline ZeroShotPrediction zero_shot_classify(const EmbeddingVector& doc_emb,
                                             const EmbeddingVector& pos_emb,
                                             const EmbeddingVector& neg_emb,
                                             const LabelScheme& scheme, double tau = 0.05) {
    scheme.validate();
    if (tau <= 0) throw ConfigError("softmax temperature must be positive");
    ZeroShotPrediction p;
    p.similarity_positive = cosine_similarity(doc_emb, pos_emb);
    p.similarity_negative = cosine_similarity(doc_emb, neg_emb);
    p.margin = p.similarity_positive - p.similarity_negative;
    bool positive = p.similarity_positive >= p.similarity_negative;
    p.label = positive ? scheme.positive_text : scheme.negative_text;
    p.confidence = 1.0 / (1.0 + std::exp(-std::abs(p.margin) / tau));
    return p;
}

struct ClassifyOptions {
    std::string embedding_model = "mock-embed";
    double tau = 0.05;
    size_t max_in_flight = 4;
};

struct DocPrediction {
    Document doc;
    std::optional<ZeroShotPrediction> prediction;
    std::string error;  // set when the backend failed for this document
};

// Classifies a whole corpus against one label scheme. The two label
// embeddings are fetched once up front and reused for every document; per-
// document requests run with a bounded number in flight and results come back
// in input order. A backend failure for one document is recorded on that
// document and the run continues.
template <typename Gateway>
std::vector<DocPrediction> classify_corpus(const std::vector<Document>& docs,
                                           const LabelScheme& scheme, Gateway& gateway,
                                           const ClassifyOptions& opts = {}) {
    scheme.validate();
    EmbeddingVector pos_emb =
        gateway.embed({scheme.positive_text}, opts.embedding_model).at(0);
    EmbeddingVector neg_emb =
        gateway.embed({scheme.negative_text}, opts.embedding_model).at(0);

    std::vector<DocPrediction> out(docs.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= docs.size()) return;
            out[i].doc = docs[i];
            try {
                EmbeddingVector doc_emb =
                    gateway.embed({docs[i].text}, opts.embedding_model).at(0);
                out[i].prediction =
                    zero_shot_classify(doc_emb, pos_emb, neg_emb, scheme, opts.tau);
            } catch (const std::exception& e) {
                out[i].error = e.what();
            }
        }
    };
    size_t n_threads = std::max<size_t>(1, std::min(opts.max_in_flight, docs.size()));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    return out;
}

}  // namespace matlp
