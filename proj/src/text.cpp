/**
 * @file text.cpp
 * @brief UTF-8 decoding, Unicode-aware word segmentation and Levenshtein distance.
 */
#include "ragkit/text.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>

namespace ragkit {

namespace utf8 {

char32_t decode(std::string_view s, std::size_t& pos) noexcept {
    const auto lead = static_cast<unsigned char>(s[pos]);
    if (lead < 0x80) {
        ++pos;
        return lead;
    }
    std::size_t extra = 0;
    char32_t cp = 0;
    if ((lead & 0xE0) == 0xC0) {
        extra = 1;
        cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
        extra = 2;
        cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
        extra = 3;
        cp = lead & 0x07;
    } else {
        ++pos;
        return 0xFFFD;
    }
    if (pos + extra >= s.size()) {
        ++pos;
        return 0xFFFD;
    }
    for (std::size_t i = 1; i <= extra; ++i) {
        const auto c = static_cast<unsigned char>(s[pos + i]);
        if ((c & 0xC0) != 0x80) {
            ++pos;
            return 0xFFFD;
        }
        cp = (cp << 6) | (c & 0x3F);
    }
    pos += extra + 1;
    return cp;
}

void append(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::size_t length(std::string_view s) noexcept {
    std::size_t n = 0;
    for (std::size_t pos = 0; pos < s.size(); ++n) decode(s, pos);
    return n;
}

std::size_t offset_of(std::string_view s, std::size_t n) noexcept {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n && pos < s.size(); ++i) decode(s, pos);
    return pos;
}

} // namespace utf8

bool is_space(char32_t cp) noexcept {
    switch (cp) {
    case ' ': case '\t': case '\n': case '\r': case '\f': case '\v':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
        return true;
    default:
        return cp >= 0x2000 && cp <= 0x200A;
    }
}

bool is_word_char(char32_t cp) noexcept {
    if (cp < 0x80) {
        return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    }
    if (is_space(cp)) return false;
    // Latin-1 punctuation and symbols.
    if (cp <= 0xBF) return cp == 0xAA || cp == 0xB2 || cp == 0xB3 || cp == 0xB5 || cp == 0xB9 || cp == 0xBA;
    if (cp == 0xD7 || cp == 0xF7) return false;
    // General punctuation, super/subscripts punctuation, currency, letterlike arrows etc.
    if (cp >= 0x2000 && cp <= 0x2BFF) return false;
    // CJK symbols and punctuation.
    if (cp >= 0x3000 && cp <= 0x303F) return false;
    // Fullwidth ASCII punctuation.
    if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
    if (cp >= 0xFF1A && cp <= 0xFF20) return false;
    if (cp >= 0xFF3B && cp <= 0xFF40) return false;
    if (cp >= 0xFF5B && cp <= 0xFF65) return false;
    // Private use, specials, replacement character.
    if (cp >= 0xE000 && cp <= 0xF8FF) return false;
    if (cp >= 0xFFF0 && cp <= 0xFFFF) return false;
    // Emoji and pictographs.
    if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;
    return true;
}

char32_t to_lower(char32_t cp) noexcept {
    if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
    if (cp >= 0x100 && cp <= 0x137) return cp | 1;
    if (cp >= 0x139 && cp <= 0x148) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x14A && cp <= 0x177) return cp | 1;
    if (cp == 0x178) return 0xFF;
    if (cp >= 0x179 && cp <= 0x17E) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 32;
    if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
    if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
    if (cp >= 0xFF21 && cp <= 0xFF3A) return cp + 32;
    return cp;
}

std::vector<TokenSpan> analyze_with_spans(std::string_view text) {
    std::vector<TokenSpan> out;
    std::size_t pos = 0;
    TokenSpan cur;
    bool in_word = false;
    while (pos < text.size()) {
        const std::size_t start = pos;
        const char32_t cp = utf8::decode(text, pos);
        if (is_word_char(cp)) {
            if (!in_word) {
                cur = TokenSpan{};
                cur.begin = start;
                in_word = true;
            }
            utf8::append(cur.term, to_lower(cp));
            cur.end = pos;
        } else if (in_word) {
            out.push_back(std::move(cur));
            in_word = false;
        }
    }
    if (in_word) out.push_back(std::move(cur));
    return out;
}

std::vector<std::string> analyze(std::string_view text) {
    std::vector<std::string> terms;
    for (auto& t : analyze_with_spans(text)) terms.push_back(std::move(t.term));
    return terms;
}

std::string_view trim(std::string_view s) noexcept {
    const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && ws(s[b])) ++b;
    while (e > b && ws(s[e - 1])) --e;
    return s.substr(b, e - b);
}

std::string to_upper_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 32);
    }
    return out;
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const std::size_t start = pos;
        const char32_t cp = utf8::decode(s, pos);
        if (is_space(cp)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.append(s.substr(start, pos - start));
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) noexcept {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        char a = s[i];
        char b = prefix[i];
        if (a >= 'A' && a <= 'Z') a = static_cast<char>(a + 32);
        if (b >= 'A' && b <= 'Z') b = static_cast<char>(b + 32);
        if (a != b) return false;
    }
    return true;
}

std::u32string to_u32(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    for (std::size_t pos = 0; pos < s.size();) out.push_back(utf8::decode(s, pos));
    return out;
}

std::size_t levenshtein_bounded(std::u32string_view a, std::u32string_view b, std::size_t bound) {
    if (a.size() < b.size()) std::swap(a, b);
    if (a.size() - b.size() > bound) return bound + 1;
    if (b.empty()) return a.size();
    // Only cells with |i - j| <= bound can hold a value <= bound.
    const std::size_t inf = bound + 1;
    std::vector<std::size_t> prev(b.size() + 1, inf);
    std::vector<std::size_t> cur(b.size() + 1, inf);
    for (std::size_t j = 0; j <= std::min(b.size(), bound); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        const std::size_t lo = i > bound ? i - bound : 0;
        const std::size_t hi = std::min(b.size(), i + bound);
        if (lo > b.size()) return inf;
        if (lo > 0) cur[lo - 1] = inf;
        std::size_t row_min = inf;
        for (std::size_t j = lo; j <= hi; ++j) {
            std::size_t v = j == 0 ? i : inf;
            if (j > 0) {
                v = std::min(v, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1));
                v = std::min(v, cur[j - 1] + 1);
            }
            v = std::min({v, prev[j] + 1, inf});
            cur[j] = v;
            row_min = std::min(row_min, v);
        }
        if (hi < b.size()) cur[hi + 1] = inf;
        if (row_min > bound) return inf;
        std::swap(prev, cur);
    }
    return std::min(prev[b.size()], inf);
}

EditDistancePattern::EditDistancePattern(std::u32string_view pattern)
    : m_(pattern.size()), words_((pattern.size() + 63) / 64), alphabet_(pattern.begin(), pattern.end()) {
    std::sort(alphabet_.begin(), alphabet_.end());
    alphabet_.erase(std::unique(alphabet_.begin(), alphabet_.end()), alphabet_.end());
    // The extra last symbol row stays zero for characters absent from the pattern.
    peq_.assign((alphabet_.size() + 1) * words_, 0);
    for (std::size_t i = 0; i < m_; ++i) peq_[symbol(pattern[i]) * words_ + i / 64] |= std::uint64_t{1} << (i % 64);
}

std::size_t EditDistancePattern::symbol(char32_t c) const {
    const auto it = std::lower_bound(alphabet_.begin(), alphabet_.end(), c);
    return it != alphabet_.end() && *it == c ? static_cast<std::size_t>(it - alphabet_.begin()) : alphabet_.size();
}

template <typename Fn>
void EditDistancePattern::scan(std::u32string_view text, bool free_start, Fn&& on_column) const {
    // Hyyro's multi-word form of Myers' algorithm. The top row is all zeros when
    // the match may start anywhere, and 0, 1, 2, ... for a global alignment.
    std::vector<std::uint64_t> pv(words_, ~std::uint64_t{0});
    std::vector<std::uint64_t> mv(words_, 0);
    const std::uint64_t last_high = std::uint64_t{1} << ((m_ - 1) % 64);
    std::size_t score = m_;
    for (std::size_t j = 0; j < text.size(); ++j) {
        const std::uint64_t* eq_row = &peq_[symbol(text[j]) * words_];
        int carry = free_start ? 0 : 1; // horizontal delta entering the current word from above
        for (std::size_t w = 0; w < words_; ++w) {
            std::uint64_t eq = eq_row[w];
            const std::uint64_t p = pv[w];
            const std::uint64_t n = mv[w];
            const std::uint64_t xv = eq | n;
            if (carry < 0) eq |= 1;
            const std::uint64_t xh = (((eq & p) + p) ^ p) | eq;
            std::uint64_t ph = n | ~(xh | p);
            std::uint64_t mh = p & xh;
            const std::uint64_t high = w + 1 == words_ ? last_high : std::uint64_t{1} << 63;
            int hout = 0;
            if (ph & high) hout = 1;
            else if (mh & high) hout = -1;
            ph <<= 1;
            mh <<= 1;
            if (carry < 0) mh |= 1;
            else if (carry > 0) ph |= 1;
            pv[w] = mh | ~(xv | ph);
            mv[w] = ph & xv;
            carry = hout;
        }
        score = static_cast<std::size_t>(static_cast<long long>(score) + carry);
        on_column(j + 1, score);
    }
}

std::size_t EditDistancePattern::distance(std::u32string_view text) const {
    if (m_ == 0) return text.size();
    std::size_t last = m_;
    scan(text, false, [&](std::size_t, std::size_t score) { last = score; });
    return last;
}

std::vector<std::size_t> EditDistancePattern::infix_distances(std::u32string_view text) const {
    std::vector<std::size_t> out(text.size() + 1, m_);
    if (m_ == 0) {
        std::fill(out.begin(), out.end(), 0);
        return out;
    }
    scan(text, true, [&](std::size_t e, std::size_t score) { out[e] = score; });
    return out;
}

std::vector<std::size_t> infix_edit_distances(std::u32string_view pattern, std::u32string_view text) {
    return EditDistancePattern(pattern).infix_distances(text);
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    const auto ua = to_u32(a);
    const auto ub = to_u32(b);
    return levenshtein_bounded(ua, ub, std::max(ua.size(), ub.size()));
}

double normalized_similarity(std::string_view a, std::string_view b) {
    const auto ua = to_u32(a);
    const auto ub = to_u32(b);
    const std::size_t longest = std::max(ua.size(), ub.size());
    if (longest == 0) return 1.0;
    const auto d = levenshtein_bounded(ua, ub, longest);
    return 1.0 - static_cast<double>(d) / static_cast<double>(longest);
}

std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace ragkit
