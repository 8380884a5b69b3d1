#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "matlp/embed_classify.hpp"
#include "matlp/errors.hpp"
#include "matlp/rng.hpp"

// Few-shot example selection: either a uniform random draw from the training
// set or the k nearest neighbours of the query in embedding space. Both are
// fully deterministic — random selection under the pinned PRNG, kNN with a
// documented tie-break — so a run can be replayed bit for bit.

namespace matlp {

struct ExampleItem {
    std::string id;
    std::string input;
    std::string target;
    std::optional<EmbeddingVector> embedding;
};

struct ExampleStore {
    std::vector<ExampleItem> items;

    void validate(bool require_embeddings = false) const {
        std::unordered_set<std::string> ids;
        std::optional<size_t> dim;
        for (const auto& item : items) {
            if (!ids.insert(item.id).second)
                throw ValidationError("duplicate example id \"" + item.id + "\"");
            if (!require_embeddings) continue;
            if (!item.embedding)
                throw ValidationError("example \"" + item.id + "\" has no embedding");
            item.embedding->validate();
            if (dim && *dim != item.embedding->dim())
                throw ValidationError("example embeddings have mixed dimensions");
            dim = item.embedding->dim();
        }
    }
};

// Uniform sample of k items without replacement. With per_label, draws the
// requested count per label instead (labels are matched against item targets,
// processed in ascending label order).
inline std::vector<ExampleItem> random_retrieve(
    const ExampleStore& store, size_t k, uint64_t seed,
    const std::optional<std::map<std::string, size_t>>& per_label = std::nullopt) {
    store.validate();
    Xoshiro256 rng(seed);

    auto sample = [&rng](std::vector<size_t> pool, size_t count) {
        fisher_yates(pool, rng);
        pool.resize(count);
        return pool;
    };

    std::vector<size_t> chosen;
    if (per_label) {
        for (const auto& [label, count] : *per_label) {
            std::vector<size_t> pool;
            for (size_t i = 0; i < store.items.size(); ++i)
                if (store.items[i].target == label) pool.push_back(i);
            if (count > pool.size())
                throw ValidationError("requested " + std::to_string(count) + " examples for label \"" +
                                      label + "\" but the store holds " +
                                      std::to_string(pool.size()));
            for (size_t i : sample(std::move(pool), count)) chosen.push_back(i);
        }
    } else {
        if (k > store.items.size())
            throw ValidationError("requested " + std::to_string(k) + " examples from a store of " +
                                  std::to_string(store.items.size()));
        std::vector<size_t> pool(store.items.size());
        for (size_t i = 0; i < pool.size(); ++i) pool[i] = i;
        chosen = sample(std::move(pool), k);
    }

    std::vector<ExampleItem> out;
    out.reserve(chosen.size());
    for (size_t i : chosen) out.push_back(store.items[i]);
    return out;
}

struct ScoredExample {
    ExampleItem item;
    double similarity;
};

// Exact k nearest neighbours by full scan, ordered by (-similarity, id).
// Ties on similarity resolve by ascending id so rankings are reproducible.
inline std::vector<ScoredExample> knn_retrieve(const EmbeddingVector& query,
                                               const ExampleStore& store, size_t k) {
    store.validate(/*require_embeddings=*/true);
    if (k > store.items.size())
        throw ValidationError("k=" + std::to_string(k) + " exceeds store size " +
                              std::to_string(store.items.size()));
    query.validate();

    std::vector<ScoredExample> scored;
    scored.reserve(store.items.size());
    for (const auto& item : store.items)
        scored.push_back({item, cosine_similarity(query, *item.embedding)});
    std::sort(scored.begin(), scored.end(), [](const ScoredExample& a, const ScoredExample& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.item.id < b.item.id;
    });
    scored.resize(k);
    return scored;
}

}  // namespace matlp
