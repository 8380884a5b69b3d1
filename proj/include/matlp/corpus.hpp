#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "matlp/errors.hpp"
#include "matlp/jsonl.hpp"
#include "matlp/rng.hpp"
#include "matlp/utf8.hpp"

// Task corpora: classification documents, entity-annotated documents and
// question/context/answer records, plus deterministic train/val/test
// splitting. Interchange format is JSONL (one UTF-8 JSON object per line).

namespace matlp {

struct Document {
    std::string id;
    std::string text;
    std::map<std::string, std::string> meta;
};

struct ClassifiedDoc {
    Document doc;
    std::string label;
};

// Half-open character span; offsets count Unicode scalars, not bytes.
struct EntitySpan {
    size_t start = 0;
    size_t end = 0;
    std::string category;
    std::string surface;

    bool operator==(const EntitySpan&) const = default;
};

struct NerDoc {
    Document doc;
    std::vector<EntitySpan> spans;
};

struct QaRecord {
    std::string id;
    std::string question;
    std::string context;
    std::string gold_answer;
    std::optional<size_t> answer_start;
};

struct SplitSpec {
    uint64_t seed = 0;
    std::array<double, 3> ratios{0.8, 0.1, 0.1};  // train, val, test

    void validate() const {
        for (double r : ratios)
            if (!(r >= 0.0)) throw ValidationError("split ratios must be non-negative");
        double sum = ratios[0] + ratios[1] + ratios[2];
        if (std::abs(sum - 1.0) > 1e-9)
            throw ValidationError("split ratios must sum to 1, got " + std::to_string(sum));
    }
};

template <typename T>
struct SplitResult {
    std::vector<T> train;
    std::vector<T> val;
    std::vector<T> test;
};

namespace detail {

inline void check_document(const Document& doc, const std::string& where) {
    if (doc.id.empty()) throw ValidationError(where + ": empty id");
    if (doc.text.empty()) throw ValidationError(where + ": empty text (id \"" + doc.id + "\")");
}

// Validates range, surface consistency and same-category non-overlap against
// the scalar-decoded text.
inline void check_spans(const std::u32string& text32, const std::string& text,
                        const std::vector<EntitySpan>& spans, const std::string& where) {
    (void)text;
    for (size_t i = 0; i < spans.size(); ++i) {
        const EntitySpan& s = spans[i];
        if (s.start >= s.end || s.end > text32.size())
            throw ValidationError(where + ": span " + std::to_string(i) + " [" +
                                  std::to_string(s.start) + "," + std::to_string(s.end) +
                                  ") out of range for text of length " +
                                  std::to_string(text32.size()));
        std::string slice =
            utf8::encode(std::u32string_view(text32).substr(s.start, s.end - s.start));
        if (s.surface != slice)
            throw ValidationError(where + ": span " + std::to_string(i) +
                                  " surface mismatch: \"" + s.surface + "\" vs \"" + slice +
                                  "\"");
    }
    for (size_t i = 0; i < spans.size(); ++i)
        for (size_t j = i + 1; j < spans.size(); ++j) {
            if (spans[i].category != spans[j].category) continue;
            if (spans[i].start < spans[j].end && spans[j].start < spans[i].end)
                throw ValidationError(where + ": overlapping " + spans[i].category +
                                      " spans " + std::to_string(i) + " and " +
                                      std::to_string(j));
        }
}

inline std::map<std::string, std::string> parse_meta(const json& obj) {
    std::map<std::string, std::string> meta;
    auto it = obj.find("meta");
    if (it != obj.end() && it->is_object())
        for (auto& [k, v] : it->items())
            if (v.is_string()) meta[k] = v.get<std::string>();
    return meta;
}

inline json meta_to_json(const std::map<std::string, std::string>& meta) {
    json m = json::object();
    for (const auto& [k, v] : meta) m[k] = v;
    return m;
}

}  // namespace detail

inline void validate_ner_doc(const NerDoc& d, const std::string& where = "ner doc") {
    detail::check_document(d.doc, where);
    detail::check_spans(utf8::decode(d.doc.text), d.doc.text, d.spans, where);
}

// --- ingestion ------------------------------------------------------------

// Lines: {"id": ..., "text": ..., "label": ..., "meta"?: {...}}
inline std::vector<ClassifiedDoc> ingest_classification(
    const std::filesystem::path& path,
    const std::optional<std::set<std::string>>& label_set = std::nullopt) {
    std::vector<ClassifiedDoc> out;
    std::unordered_map<std::string, size_t> seen;  // id -> first line
    jsonl::for_each(path, [&](size_t line_no, const json& obj) {
        ClassifiedDoc rec;
        rec.doc.id = jsonl::require_string(obj, "id", path, line_no);
        rec.doc.text = jsonl::require_string(obj, "text", path, line_no);
        rec.doc.meta = detail::parse_meta(obj);
        rec.label = jsonl::require_string(obj, "label", path, line_no);
        std::string where = path.string() + ":" + std::to_string(line_no);
        detail::check_document(rec.doc, where);
        auto [it, inserted] = seen.emplace(rec.doc.id, line_no);
        if (!inserted)
            throw ValidationError(where + ": duplicate id \"" + rec.doc.id +
                                  "\" (first seen at line " + std::to_string(it->second) + ")");
        if (label_set && !label_set->count(rec.label))
            throw ValidationError(where + ": unknown label \"" + rec.label + "\"");
        out.push_back(std::move(rec));
    });
    return out;
}

// Lines: {"id": ..., "text": ..., "spans": [{"start": n, "end": n, "category": ...}]}
// Surfaces are reconstructed from text and offsets, never trusted from input.
inline std::vector<NerDoc> ingest_ner(const std::filesystem::path& path) {
    std::vector<NerDoc> out;
    std::unordered_map<std::string, size_t> seen;
    jsonl::for_each(path, [&](size_t line_no, const json& obj) {
        NerDoc rec;
        rec.doc.id = jsonl::require_string(obj, "id", path, line_no);
        rec.doc.text = jsonl::require_string(obj, "text", path, line_no);
        rec.doc.meta = detail::parse_meta(obj);
        std::string where = path.string() + ":" + std::to_string(line_no);
        detail::check_document(rec.doc, where);
        auto [it, inserted] = seen.emplace(rec.doc.id, line_no);
        if (!inserted)
            throw ValidationError(where + ": duplicate id \"" + rec.doc.id +
                                  "\" (first seen at line " + std::to_string(it->second) + ")");
        auto spans_it = obj.find("spans");
        if (spans_it == obj.end() || !spans_it->is_array())
            throw ParseError(where + ": missing array field \"spans\"");
        std::u32string text32 = utf8::decode(rec.doc.text);
        for (const auto& sj : *spans_it) {
            if (!sj.is_object() || !sj.contains("start") || !sj.contains("end") ||
                !sj.contains("category"))
                throw ParseError(where + ": span needs start, end, category");
            EntitySpan s;
            s.start = sj["start"].get<size_t>();
            s.end = sj["end"].get<size_t>();
            s.category = sj["category"].get<std::string>();
            if (s.start >= s.end || s.end > text32.size())
                throw ValidationError(where + ": span " +
                                      std::to_string(rec.spans.size()) + " [" +
                                      std::to_string(s.start) + "," + std::to_string(s.end) +
                                      ") out of range for text of length " +
                                      std::to_string(text32.size()));
            s.surface =
                utf8::encode(std::u32string_view(text32).substr(s.start, s.end - s.start));
            rec.spans.push_back(std::move(s));
        }
        detail::check_spans(text32, rec.doc.text, rec.spans, where);
        out.push_back(std::move(rec));
    });
    return out;
}

// Lines: {"id": ..., "question": ..., "context": ..., "answer": ..., "answer_start"?: n}
inline std::vector<QaRecord> ingest_qa(const std::filesystem::path& path) {
    std::vector<QaRecord> out;
    jsonl::for_each(path, [&](size_t line_no, const json& obj) {
        QaRecord rec;
        rec.id = jsonl::require_string(obj, "id", path, line_no);
        rec.question = jsonl::require_string(obj, "question", path, line_no);
        rec.context = jsonl::require_string(obj, "context", path, line_no);
        rec.gold_answer = jsonl::require_string(obj, "answer", path, line_no);
        std::string where = path.string() + ":" + std::to_string(line_no);
        if (auto it = obj.find("answer_start"); it != obj.end() && !it->is_null()) {
            rec.answer_start = it->get<size_t>();
            size_t len = utf8::scalar_length(rec.gold_answer);
            std::string slice = utf8::substr_scalars(rec.context, *rec.answer_start,
                                                     *rec.answer_start + len);
            if (slice != rec.gold_answer)
                throw ValidationError(where + ": answer_start " +
                                      std::to_string(*rec.answer_start) +
                                      " does not point at \"" + rec.gold_answer + "\"");
        }
        out.push_back(std::move(rec));
    });
    return out;
}

// --- emission (round-trips with the ingestors) -----------------------------

inline void emit_classification(const std::vector<ClassifiedDoc>& records,
                                const std::filesystem::path& path) {
    jsonl::Writer w(path);
    for (const auto& r : records) {
        json obj{{"id", r.doc.id}, {"text", r.doc.text}, {"label", r.label}};
        if (!r.doc.meta.empty()) obj["meta"] = detail::meta_to_json(r.doc.meta);
        w.write(obj);
    }
    w.close();
}

inline void emit_ner(const std::vector<NerDoc>& records, const std::filesystem::path& path) {
    jsonl::Writer w(path);
    for (const auto& r : records) {
        json spans = json::array();
        for (const auto& s : r.spans)
            spans.push_back(json{{"start", s.start},
                                 {"end", s.end},
                                 {"category", s.category},
                                 {"surface", s.surface}});
        json obj{{"id", r.doc.id}, {"text", r.doc.text}, {"spans", spans}};
        if (!r.doc.meta.empty()) obj["meta"] = detail::meta_to_json(r.doc.meta);
        w.write(obj);
    }
    w.close();
}

inline void emit_qa(const std::vector<QaRecord>& records, const std::filesystem::path& path) {
    jsonl::Writer w(path);
    for (const auto& r : records) {
        json obj{{"id", r.id},
                 {"question", r.question},
                 {"context", r.context},
                 {"answer", r.gold_answer}};
        if (r.answer_start) obj["answer_start"] = *r.answer_start;
        w.write(obj);
    }
    w.close();
}

// --- QA sanitization --------------------------------------------------------

struct FlaggedQa {
    QaRecord record;
    std::string reason;  // "duplicate" or "answer-not-in-context"
};

struct SanitizeResult {
    std::vector<QaRecord> clean;
    std::vector<FlaggedQa> flagged;
};

// Flags exact (question, context) duplicates past the first occurrence and
// records whose answer never appears in the context. Never deletes silently
// and never fails: everything is either kept or flagged with a reason.
inline SanitizeResult sanitize_qa(const std::vector<QaRecord>& records) {
    SanitizeResult out;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : records) {
        if (!seen.emplace(r.question, r.context).second) {
            out.flagged.push_back({r, "duplicate"});
        } else if (r.context.find(r.gold_answer) == std::string::npos) {
            out.flagged.push_back({r, "answer-not-in-context"});
        } else {
            out.clean.push_back(r);
        }
    }
    return out;
}

// --- splitting --------------------------------------------------------------

// Deterministic partition: records are shuffled with Fisher-Yates under
// xoshiro256** seeded from spec.seed, then cut into train/val/test in shuffled
// order. Val and test sizes are round(n * ratio); the remainder goes to train.
template <typename T>
SplitResult<T> split(const std::vector<T>& records, const SplitSpec& spec) {
    spec.validate();
    const size_t n = records.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    Xoshiro256 rng(spec.seed);
    fisher_yates(order, rng);

    auto rounded = [n](double ratio) {
        return static_cast<size_t>(std::llround(static_cast<double>(n) * ratio));
    };
    size_t n_val = std::min(n, rounded(spec.ratios[1]));
    size_t n_test = std::min(n - n_val, rounded(spec.ratios[2]));
    size_t n_train = n - n_val - n_test;

    SplitResult<T> out;
    out.train.reserve(n_train);
    out.val.reserve(n_val);
    out.test.reserve(n_test);
    for (size_t i = 0; i < n; ++i) {
        const T& rec = records[order[i]];
        if (i < n_train)
            out.train.push_back(rec);
        else if (i < n_train + n_val)
            out.val.push_back(rec);
        else
            out.test.push_back(rec);
    }
    return out;
}

}  // namespace matlp
