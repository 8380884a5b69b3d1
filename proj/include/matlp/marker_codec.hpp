#pragma once

#include <optional>
#include <string>
#include <vector>

#include "matlp/corpus.hpp"
#include "matlp/errors.hpp"
#include "matlp/utf8.hpp"

// Entity spans travel through generative models as sentinel-wrapped text:
// encoding inserts the open marker before each span and the close marker
// after it, decoding aligns the completion back onto the original text to
// recover character offsets. Model output is untrusted, so decoding never
// throws: everything that cannot be aligned becomes an anomaly.

namespace matlp {

struct MarkerScheme {
    std::string open = "@@";
    std::string close = "##";
};

enum class AnomalyKind {
    UnmatchedOpen,      // open marker with no usable close
    UnmatchedClose,     // close marker with no preceding open
    UnalignedFragment,  // marked text that does not occur in the original
};

inline const char* to_string(AnomalyKind k) {
    switch (k) {
        case AnomalyKind::UnmatchedOpen: return "unmatched-open";
        case AnomalyKind::UnmatchedClose: return "unmatched-close";
        case AnomalyKind::UnalignedFragment: return "unaligned-fragment";
    }
    return "?";
}

struct DecodeAnomaly {
    AnomalyKind kind;
    std::string fragment;

    bool operator==(const DecodeAnomaly&) const = default;
};

struct DecodeOutcome {
    std::vector<EntitySpan> spans;
    std::vector<DecodeAnomaly> anomalies;
};

namespace detail {

inline void check_scheme(const MarkerScheme& scheme) {
    if (scheme.open.empty() || scheme.close.empty())
        throw ValidationError("marker strings must be non-empty");
    if (scheme.open == scheme.close)
        throw ValidationError("open and close markers must differ");
}

inline bool is_collapsible_space(char32_t cp) {
    return cp == U' ' || (cp >= 0x09 && cp <= 0x0D) || cp == 0xA0 ||
           (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 || cp == 0x3000;
}

// Whitespace-collapsed view of a string plus, per collapsed character, the
// scalar range it covers in the source. A run of whitespace becomes one ' '
// covering the whole run.
struct NormView {
    std::u32string norm;
    std::vector<size_t> src_start;
    std::vector<size_t> src_end;
};

inline NormView collapse_whitespace(const std::u32string& s) {
    NormView v;
    size_t i = 0;
    while (i < s.size()) {
        if (is_collapsible_space(s[i])) {
            size_t j = i;
            while (j < s.size() && is_collapsible_space(s[j])) ++j;
            v.norm.push_back(U' ');
            v.src_start.push_back(i);
            v.src_end.push_back(j);
            i = j;
        } else {
            v.norm.push_back(s[i]);
            v.src_start.push_back(i);
            v.src_end.push_back(i + 1);
            ++i;
        }
    }
    return v;
}

inline std::u32string collapse_and_trim(const std::u32string& s) {
    std::u32string norm = collapse_whitespace(s).norm;
    size_t b = 0, e = norm.size();
    while (b < e && norm[b] == U' ') ++b;
    while (e > b && norm[e - 1] == U' ') --e;
    return norm.substr(b, e - b);
}

struct Segment {
    bool marked;
    std::u32string text;
};

struct ParsedMarkers {
    std::vector<Segment> segments;  // marker-free, in completion order
    std::vector<DecodeAnomaly> anomalies;
};

// Splits a completion at every marker occurrence. Rules, applied left to
// right: an open followed by a close is a marked fragment; a close with no
// pending open is unmatched-close; an open followed by another open gives up
// the pending fragment as unmatched-open and the new open takes over; an open
// that reaches end-of-string is unmatched-open. Text inside anomalies is kept
// as a plain segment so nothing the model wrote is dropped from alignment.
inline ParsedMarkers parse_markers(const std::u32string& marked, const MarkerScheme& scheme) {
    const std::u32string open = utf8::decode(scheme.open);
    const std::u32string close = utf8::decode(scheme.close);
    ParsedMarkers out;

    auto push_plain = [&](std::u32string text) {
        if (!text.empty()) out.segments.push_back({false, std::move(text)});
    };

    size_t pos = 0;
    std::optional<size_t> frag_start;  // set while an open is pending
    while (true) {
        size_t next_open = marked.find(open, pos);
        size_t next_close = marked.find(close, pos);
        // When both markers match at the same position the longer one wins.
        bool open_first;
        if (next_open == std::u32string::npos && next_close == std::u32string::npos) break;
        if (next_open == next_close)
            open_first = open.size() > close.size();
        else
            open_first = next_open < next_close;

        if (frag_start) {
            if (open_first) {
                std::u32string frag = marked.substr(*frag_start, next_open - *frag_start);
                out.anomalies.push_back({AnomalyKind::UnmatchedOpen, utf8::encode(frag)});
                push_plain(std::move(frag));
                frag_start = next_open + open.size();
                pos = *frag_start;
            } else {
                out.segments.push_back(
                    {true, marked.substr(*frag_start, next_close - *frag_start)});
                frag_start.reset();
                pos = next_close + close.size();
            }
        } else {
            if (open_first) {
                push_plain(marked.substr(pos, next_open - pos));
                frag_start = next_open + open.size();
                pos = *frag_start;
            } else {
                push_plain(marked.substr(pos, next_close - pos));
                out.anomalies.push_back({AnomalyKind::UnmatchedClose, ""});
                pos = next_close + close.size();
            }
        }
    }
    if (frag_start) {
        std::u32string frag = marked.substr(*frag_start);
        out.anomalies.push_back({AnomalyKind::UnmatchedOpen, utf8::encode(frag)});
        push_plain(std::move(frag));
    } else {
        push_plain(marked.substr(pos));
    }
    return out;
}

}  // namespace detail

// Removes every occurrence of both markers.
inline std::string strip_markers(const std::string& marked, const MarkerScheme& scheme) {
    detail::check_scheme(scheme);
    std::string out = marked;
    for (const std::string& m : {scheme.open, scheme.close}) {
        size_t pos = 0;
        while ((pos = out.find(m, pos)) != std::string::npos) out.erase(pos, m.size());
    }
    return out;
}

// Inserts markers around every span of `category`, left to right.
// Stripping the markers from the result recovers `text` exactly.
inline std::string encode_markers(const std::string& text, const std::vector<EntitySpan>& spans,
                                  const std::string& category, const MarkerScheme& scheme = {}) {
    detail::check_scheme(scheme);
    if (text.find(scheme.open) != std::string::npos ||
        text.find(scheme.close) != std::string::npos)
        throw ValidationError("marker string occurs in source text");

    std::vector<EntitySpan> selected;
    for (const auto& s : spans)
        if (s.category == category) selected.push_back(s);
    std::sort(selected.begin(), selected.end(),
              [](const EntitySpan& a, const EntitySpan& b) { return a.start < b.start; });

    std::u32string text32 = utf8::decode(text);
    detail::check_spans(text32, text, selected, "encode_markers");

    std::u32string open32 = utf8::decode(scheme.open);
    std::u32string close32 = utf8::decode(scheme.close);
    std::u32string out;
    out.reserve(text32.size() + selected.size() * (open32.size() + close32.size()));
    size_t pos = 0;
    for (const auto& s : selected) {
        out.append(text32, pos, s.start - pos);
        out.append(open32);
        out.append(text32, s.start, s.end - s.start);
        out.append(close32);
        pos = s.end;
    }
    out.append(text32, pos, text32.size() - pos);
    return utf8::encode(out);
}

// Recovers spans of `category` from a model completion by aligning it against
// the original text. Two tiers: if the completion is an exact markup of the
// original (stripping markers reproduces it), offsets follow directly from
// segment lengths. Otherwise each fragment is located greedily left to right
// in a whitespace-collapsed view of the original and offsets are mapped back
// through the collapse index map; fragments that cannot be located are
// reported as unaligned-fragment anomalies, never as spans.
inline DecodeOutcome decode_markers(const std::string& marked, const std::string& original,
                                    const std::string& category,
                                    const MarkerScheme& scheme = {}) {
    detail::check_scheme(scheme);
    const std::u32string marked32 = utf8::decode(marked);
    const std::u32string original32 = utf8::decode(original);

    detail::ParsedMarkers parsed = detail::parse_markers(marked32, scheme);
    DecodeOutcome out;
    out.anomalies = std::move(parsed.anomalies);

    auto make_span = [&](size_t start, size_t end) {
        EntitySpan s;
        s.start = start;
        s.end = end;
        s.category = category;
        s.surface = utf8::encode(std::u32string_view(original32).substr(start, end - start));
        return s;
    };

    // Exact tier.
    std::u32string stripped;
    for (const auto& seg : parsed.segments) stripped += seg.text;
    if (stripped == original32) {
        size_t pos = 0;
        for (const auto& seg : parsed.segments) {
            if (seg.marked) {
                if (seg.text.empty())
                    out.anomalies.push_back({AnomalyKind::UnalignedFragment, ""});
                else
                    out.spans.push_back(make_span(pos, pos + seg.text.size()));
            }
            pos += seg.text.size();
        }
        return out;
    }

    // Greedy tier over the whitespace-collapsed original.
    detail::NormView view = detail::collapse_whitespace(original32);
    size_t cursor = 0;
    for (const auto& seg : parsed.segments) {
        if (!seg.marked) {
            std::u32string np = detail::collapse_whitespace(seg.text).norm;
            if (np.empty()) continue;
            if (view.norm.compare(cursor, np.size(), np) == 0) {
                cursor += np.size();
            } else {
                size_t j = view.norm.find(np, cursor);
                if (j != std::u32string::npos) cursor = j + np.size();
                // Plain text that never occurs downstream is model drift;
                // leave the cursor where it is.
            }
            continue;
        }
        std::u32string nf = detail::collapse_and_trim(seg.text);
        if (nf.empty()) {
            out.anomalies.push_back({AnomalyKind::UnalignedFragment, utf8::encode(seg.text)});
            continue;
        }
        size_t j = view.norm.find(nf, cursor);
        if (j == std::u32string::npos) {
            out.anomalies.push_back({AnomalyKind::UnalignedFragment, utf8::encode(seg.text)});
            continue;
        }
        out.spans.push_back(make_span(view.src_start[j], view.src_end[j + nf.size() - 1]));
        cursor = j + nf.size();
    }
    return out;
}

}  // namespace matlp
