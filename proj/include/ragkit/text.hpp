/**
 * @file text.hpp
 * @brief UTF-8 helpers, the retrieval analyzer and string distances.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ragkit {

/// Version tag persisted with every index built from analyze().
inline constexpr std::string_view kAnalyzerVersion = "unicode-word-lower-v1";

namespace utf8 {

/// Decodes the code point starting at `pos` and advances `pos`. Invalid
/// sequences decode to U+FFFD and consume one byte.
char32_t decode(std::string_view s, std::size_t& pos) noexcept;
void append(std::string& out, char32_t cp);
/// Number of code points.
std::size_t length(std::string_view s) noexcept;
/// Byte offset of the `n`-th code point (clamped to s.size()).
std::size_t offset_of(std::string_view s, std::size_t n) noexcept;

} // namespace utf8

bool is_word_char(char32_t cp) noexcept;
bool is_space(char32_t cp) noexcept;
char32_t to_lower(char32_t cp) noexcept;

/// Lowercases, segments on non-word characters and drops punctuation.
/// No stemming, no stopword removal.
std::vector<std::string> analyze(std::string_view text);

/// A token together with its byte span in the source text.
struct TokenSpan {
    std::string term;
    std::size_t begin = 0;
    std::size_t end = 0;
};
std::vector<TokenSpan> analyze_with_spans(std::string_view text);

std::string_view trim(std::string_view s) noexcept;
std::string to_upper_ascii(std::string_view s);
std::string collapse_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool starts_with_ci(std::string_view s, std::string_view prefix) noexcept;

/// Code-point Levenshtein distance.
std::size_t levenshtein(std::string_view a, std::string_view b);
/// Levenshtein distance if it is <= `bound`, otherwise bound + 1.
std::size_t levenshtein_bounded(std::u32string_view a, std::u32string_view b, std::size_t bound);
std::u32string to_u32(std::string_view s);

/// Bit-parallel (Myers/Hyyro) edit distances against one fixed pattern.
/// Each query costs O(|text| * |pattern| / 64).
class EditDistancePattern {
public:
    explicit EditDistancePattern(std::u32string_view pattern);

    std::size_t size() const noexcept { return m_; }
    /// Levenshtein distance between the pattern and `text`.
    std::size_t distance(std::u32string_view text) const;
    /// out[e] = smallest distance between the pattern and any substring of `text`
    /// ending at offset e, for e in [0, text.size()].
    std::vector<std::size_t> infix_distances(std::u32string_view text) const;

private:
    template <typename Fn>
    void scan(std::u32string_view text, bool free_start, Fn&& on_column) const;
    std::size_t symbol(char32_t c) const;

    std::size_t m_ = 0;
    std::size_t words_ = 0;
    std::vector<char32_t> alphabet_;   ///< sorted distinct pattern characters
    std::vector<std::uint64_t> peq_;   ///< match masks, (alphabet + 1) x words
};

std::vector<std::size_t> infix_edit_distances(std::u32string_view pattern, std::u32string_view text);

/// 1 - levenshtein / max(len): 1.0 for identical strings, 1.0 for two empty strings.
double normalized_similarity(std::string_view a, std::string_view b);

std::uint64_t fnv1a64(std::string_view s) noexcept;

} // namespace ragkit
