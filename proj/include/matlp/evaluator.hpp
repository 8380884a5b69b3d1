#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "matlp/corpus.hpp"
#include "matlp/errors.hpp"
#include "matlp/utf8.hpp"

// Scoring for all three tasks: classification accuracy/precision/recall/F1,
// expected calibration error, exact and boundary-relaxed entity matching, and
// token-level answer overlap. Everything here is a pure function; identical
// inputs give bit-identical reports.

namespace matlp {

enum class Task { Classification, Ner, Qa };

inline const char* to_string(Task t) {
    switch (t) {
        case Task::Classification: return "classification";
        case Task::Ner: return "ner";
        case Task::Qa: return "qa";
    }
    return "?";
}

struct PredictionRecord {
    using Payload = std::variant<std::string, std::vector<EntitySpan>>;

    std::string id;
    Task task = Task::Classification;
    Payload predicted;
    Payload gold;
    std::optional<double> confidence;
};

struct ConfusionCounts {
    size_t tp = 0, fp = 0, fn = 0, tn = 0;

    size_t total() const { return tp + fp + fn + tn; }
};

struct MetricsReport {
    double accuracy = 0;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    ConfusionCounts counts;
    bool degenerate = false;        // some denominator was zero
    size_t unknown_predictions = 0; // predictions matching no known category
};

// Derives the standard metrics from counts. A zero denominator yields 0 for
// that metric and sets the degenerate flag instead of failing, so batch
// evaluation stays total.
inline MetricsReport metrics_from_counts(const ConfusionCounts& c) {
    MetricsReport r;
    r.counts = c;
    auto ratio = [&r](size_t num, size_t den) {
        if (den == 0) {
            r.degenerate = true;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    };
    r.accuracy = ratio(c.tp + c.tn, c.total());
    r.precision = ratio(c.tp, c.tp + c.fp);
    r.recall = ratio(c.tp, c.tp + c.fn);
    if (r.precision + r.recall > 0) {
        r.f1 = 2 * r.precision * r.recall / (r.precision + r.recall);
    } else {
        r.f1 = 0.0;
        r.degenerate = true;
    }
    return r;
}

namespace detail {

inline std::string trim_casefold(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    size_t e = s.find_last_not_of(" \t\r\n");
    std::string out = s.substr(b, e - b + 1);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

}  // namespace detail

// --- classification -----------------------------------------------------------

// Prediction strings are matched to categories by exact comparison after
// trimming and ASCII case-folding. A prediction matching no known category
// counts as negative and is tallied in unknown_predictions.
inline MetricsReport classification_metrics(const std::vector<PredictionRecord>& preds,
                                            const std::string& positive_label) {
    if (preds.empty()) throw ValidationError("classification_metrics: empty input");
    std::string pos = detail::trim_casefold(positive_label);
    ConfusionCounts c;
    size_t unknown = 0;
    std::set<std::string> known;
    known.insert(pos);
    for (const auto& p : preds) {
        if (p.task != Task::Classification)
            throw ValidationError("record \"" + p.id + "\" is not a classification record");
        known.insert(detail::trim_casefold(std::get<std::string>(p.gold)));
    }
    for (const auto& p : preds) {
        std::string predicted = detail::trim_casefold(std::get<std::string>(p.predicted));
        std::string gold = detail::trim_casefold(std::get<std::string>(p.gold));
        if (!known.count(predicted)) {
            ++unknown;
            predicted.clear();  // falls through to "not positive"
        }
        bool pred_pos = predicted == pos;
        bool gold_pos = gold == pos;
        if (pred_pos && gold_pos)
            ++c.tp;
        else if (pred_pos && !gold_pos)
            ++c.fp;
        else if (!pred_pos && gold_pos)
            ++c.fn;
        else
            ++c.tn;
    }
    MetricsReport r = metrics_from_counts(c);
    r.unknown_predictions = unknown;
    return r;
}

// --- calibration -----------------------------------------------------------------

struct BinStat {
    double lo = 0, hi = 0;  // bin covers (lo, hi]
    size_t count = 0;
    double accuracy = 0;
    double confidence = 0;
};

struct CalibrationReport {
    double ece = 0;
    size_t m_bins = 0;
    size_t n = 0;
    std::vector<BinStat> bins;
};

namespace detail {

inline bool record_correct(const PredictionRecord& p) {
    if (p.task == Task::Ner)
        return std::get<std::vector<EntitySpan>>(p.predicted) ==
               std::get<std::vector<EntitySpan>>(p.gold);
    return trim_casefold(std::get<std::string>(p.predicted)) ==
           trim_casefold(std::get<std::string>(p.gold));
}

// Index of the bin whose interval (m/M, (m+1)/M] holds c; confidence 0 goes
// to the first bin. The arithmetic guess is nudged so the result always
// agrees with the interval bounds as computed in double precision.
inline size_t bin_index(double c, size_t m_bins) {
    if (c <= 0.0) return 0;
    double scaled = std::ceil(c * static_cast<double>(m_bins)) - 1.0;
    size_t idx = scaled < 0 ? 0 : std::min(m_bins - 1, static_cast<size_t>(scaled));
    auto lo = [&](size_t m) { return static_cast<double>(m) / static_cast<double>(m_bins); };
    while (idx > 0 && c <= lo(idx)) --idx;
    while (idx + 1 < m_bins && c > lo(idx + 1)) ++idx;
    return idx;
}

}  // namespace detail

// Expected calibration error over M equal-width bins of (0, 1]:
// the |bin|/n-weighted mean absolute gap between per-bin accuracy and per-bin
// mean confidence. Empty bins contribute nothing.
inline CalibrationReport ece(const std::vector<PredictionRecord>& preds, size_t m_bins = 10) {
    if (m_bins < 1) throw ValidationError("ece: m_bins must be >= 1");
    if (preds.empty()) throw ValidationError("ece: empty input");
    CalibrationReport report;
    report.m_bins = m_bins;
    report.n = preds.size();
    report.bins.resize(m_bins);
    for (size_t m = 0; m < m_bins; ++m) {
        report.bins[m].lo = static_cast<double>(m) / static_cast<double>(m_bins);
        report.bins[m].hi = static_cast<double>(m + 1) / static_cast<double>(m_bins);
    }

    std::vector<double> conf_sum(m_bins, 0);
    std::vector<size_t> correct(m_bins, 0);
    for (const auto& p : preds) {
        if (!p.confidence)
            throw ValidationError("ece: record \"" + p.id + "\" has no confidence");
        double c = *p.confidence;
        if (!(c >= 0.0 && c <= 1.0))
            throw ValidationError("ece: record \"" + p.id + "\" confidence outside [0,1]");
        size_t m = detail::bin_index(c, m_bins);
        report.bins[m].count += 1;
        conf_sum[m] += c;
        if (detail::record_correct(p)) correct[m] += 1;
    }

    double total = 0;
    for (size_t m = 0; m < m_bins; ++m) {
        BinStat& b = report.bins[m];
        if (b.count == 0) continue;
        b.accuracy = static_cast<double>(correct[m]) / static_cast<double>(b.count);
        b.confidence = conf_sum[m] / static_cast<double>(b.count);
        total += (static_cast<double>(b.count) / static_cast<double>(report.n)) *
                 std::abs(b.accuracy - b.confidence);
    }
    report.ece = total;
    return report;
}

// --- entity matching ----------------------------------------------------------

enum class MatchMode { Exact, Relaxed };

// Greedy one-to-one matching within each category, predictions taken in
// ascending start order, each matched to the first unconsumed gold it hits.
// Exact needs both boundaries equal; relaxed accepts either boundary.
inline std::map<std::string, ConfusionCounts> ner_match(const std::vector<EntitySpan>& gold,
                                                        const std::vector<EntitySpan>& pred,
                                                        MatchMode mode) {
    std::map<std::string, ConfusionCounts> out;
    std::map<std::string, std::vector<EntitySpan>> gold_by_cat, pred_by_cat;
    for (const auto& s : gold) {
        gold_by_cat[s.category].push_back(s);
        out[s.category];
    }
    for (const auto& s : pred) {
        pred_by_cat[s.category].push_back(s);
        out[s.category];
    }

    for (auto& [cat, counts] : out) {
        auto golds = gold_by_cat[cat];
        auto preds = pred_by_cat[cat];
        auto by_start = [](const EntitySpan& a, const EntitySpan& b) {
            return a.start != b.start ? a.start < b.start : a.end < b.end;
        };
        std::sort(golds.begin(), golds.end(), by_start);
        std::sort(preds.begin(), preds.end(), by_start);
        std::vector<bool> consumed(golds.size(), false);
        for (const auto& p : preds) {
            bool matched = false;
            for (size_t g = 0; g < golds.size(); ++g) {
                if (consumed[g]) continue;
                bool hit = mode == MatchMode::Exact
                               ? (p.start == golds[g].start && p.end == golds[g].end)
                               : (p.start == golds[g].start || p.end == golds[g].end);
                if (hit) {
                    consumed[g] = true;
                    matched = true;
                    break;
                }
            }
            if (matched)
                ++counts.tp;
            else
                ++counts.fp;
        }
        for (size_t g = 0; g < golds.size(); ++g)
            if (!consumed[g]) ++counts.fn;
    }
    return out;
}

struct NerMetrics {
    std::map<std::string, MetricsReport> per_category;
    MetricsReport micro;  // pooled counts across categories
};

inline NerMetrics ner_metrics(const std::map<std::string, ConfusionCounts>& counts) {
    NerMetrics out;
    ConfusionCounts pooled;
    for (const auto& [cat, c] : counts) {
        out.per_category[cat] = metrics_from_counts(c);
        pooled.tp += c.tp;
        pooled.fp += c.fp;
        pooled.fn += c.fn;
        pooled.tn += c.tn;
    }
    out.micro = metrics_from_counts(pooled);
    return out;
}

// --- QA token overlap -----------------------------------------------------------

namespace detail {

inline bool is_ascii_punct(char32_t cp) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
}

// Case-fold, drop punctuation, split on whitespace.
inline std::vector<std::string> qa_tokens(const std::string& s) {
    std::u32string u = utf8::decode(s);
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) tokens.push_back(std::move(current));
        current.clear();
    };
    for (char32_t cp : u) {
        if (cp == U' ' || (cp >= 0x09 && cp <= 0x0D)) {
            flush();
        } else if (is_ascii_punct(cp)) {
            continue;
        } else {
            if (cp >= U'A' && cp <= U'Z') cp = cp - U'A' + U'a';
            utf8::append(current, cp);
        }
    }
    flush();
    return tokens;
}

}  // namespace detail

struct TokenPrf {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
};

// Token-level overlap between a predicted and a gold answer, counted as a
// multiset intersection over normalized tokens. Both empty scores perfect;
// exactly one empty scores zero.
inline TokenPrf qa_token_prf(const std::string& pred_answer, const std::string& gold_answer) {
    std::vector<std::string> pred = detail::qa_tokens(pred_answer);
    std::vector<std::string> gold = detail::qa_tokens(gold_answer);
    if (pred.empty() && gold.empty()) return {1, 1, 1};
    if (pred.empty() || gold.empty()) return {0, 0, 0};
    std::map<std::string, size_t> gold_counts;
    for (const auto& t : gold) ++gold_counts[t];
    size_t overlap = 0;
    for (const auto& t : pred) {
        auto it = gold_counts.find(t);
        if (it != gold_counts.end() && it->second > 0) {
            ++overlap;
            --it->second;
        }
    }
    TokenPrf r;
    r.precision = static_cast<double>(overlap) / static_cast<double>(pred.size());
    r.recall = static_cast<double>(overlap) / static_cast<double>(gold.size());
    r.f1 = (r.precision + r.recall > 0) ? 2 * r.precision * r.recall / (r.precision + r.recall)
                                        : 0.0;
    return r;
}

struct QaMetrics {
    double mean_precision = 0;
    double mean_recall = 0;
    double f1_of_means = 0;  // headline: F1 of the averaged precision/recall
    double mean_f1 = 0;      // secondary: average of per-record F1
    size_t n = 0;
};

inline QaMetrics qa_metrics(const std::vector<PredictionRecord>& records) {
    if (records.empty()) throw ValidationError("qa_metrics: empty input");
    QaMetrics out;
    out.n = records.size();
    for (const auto& r : records) {
        if (r.task != Task::Qa)
            throw ValidationError("record \"" + r.id + "\" is not a qa record");
        TokenPrf prf =
            qa_token_prf(std::get<std::string>(r.predicted), std::get<std::string>(r.gold));
        out.mean_precision += prf.precision;
        out.mean_recall += prf.recall;
        out.mean_f1 += prf.f1;
    }
    out.mean_precision /= static_cast<double>(out.n);
    out.mean_recall /= static_cast<double>(out.n);
    out.mean_f1 /= static_cast<double>(out.n);
    out.f1_of_means = (out.mean_precision + out.mean_recall > 0)
                          ? 2 * out.mean_precision * out.mean_recall /
                                (out.mean_precision + out.mean_recall)
                          : 0.0;
    return out;
}

// --- annotation disagreement -----------------------------------------------------

struct Disagreement {
    std::string id;
    std::string model_answer;
    std::string gold_answer;
    std::string reason;  // "not-mentioned-pattern" or "low-overlap"
    double token_f1 = 0;
};

namespace detail {

// The deflection a generative model produces when the asked-for entity is
// absent, e.g. "the anode is not mentioned in the given text".
inline bool matches_not_mentioned(const std::string& answer) {
    std::string folded = trim_casefold(answer);
    return folded.find("not mentioned") != std::string::npos ||
           folded.find("no mention") != std::string::npos;
}

}  // namespace detail

// Surfaces records where the model and the annotation disagree enough to be
// worth a human look: the model deflects with a not-mentioned answer while
// the gold is non-empty, or token F1 falls below the threshold. Sorted by
// ascending F1, ties by id.
inline std::vector<Disagreement> disagreement_report(const std::vector<PredictionRecord>& records,
                                                     double f1_threshold = 0.3) {
    std::vector<Disagreement> out;
    for (const auto& r : records) {
        if (r.task != Task::Qa)
            throw ValidationError("record \"" + r.id + "\" is not a qa record");
        const std::string& pred = std::get<std::string>(r.predicted);
        const std::string& gold = std::get<std::string>(r.gold);
        TokenPrf prf = qa_token_prf(pred, gold);
        std::string reason;
        if (detail::matches_not_mentioned(pred) && !gold.empty())
            reason = "not-mentioned-pattern";
        else if (prf.f1 < f1_threshold)
            reason = "low-overlap";
        else
            continue;
        out.push_back({r.id, pred, gold, reason, prf.f1});
    }
    std::sort(out.begin(), out.end(), [](const Disagreement& a, const Disagreement& b) {
        if (a.token_f1 != b.token_f1) return a.token_f1 < b.token_f1;
        return a.id < b.id;
    });
    return out;
}

}  // namespace matlp
