#ifndef RED_TOKENIZE_HPP
#define RED_TOKENIZE_HPP

#include <string>
#include <string_view>
#include <vector>

namespace red::corpus {

// Deterministic whitespace-and-punctuation segmentation. A token is a
// maximal run of word characters (ASCII alphanumerics, underscore, and any
// non-ASCII byte), or a single punctuation character. Whitespace separates.
inline bool is_word_char(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c >= 0x80;
}

inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (is_word_char(c)) {
            size_t j = i + 1;
            while (j < n && is_word_char(static_cast<unsigned char>(text[j]))) ++j;
            tokens.emplace_back(text.substr(i, j - i));
            i = j;
        } else {
            tokens.emplace_back(text.substr(i, 1));
            ++i;
        }
    }
    return tokens;
}

// Total and deterministic; never throws.
inline size_t count_tokens(std::string_view text) noexcept {
    size_t count = 0;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (is_word_char(c)) {
            ++count;
            ++i;
            while (i < n && is_word_char(static_cast<unsigned char>(text[i]))) ++i;
        } else {
            ++count;
            ++i;
        }
    }
    return count;
}

}  // namespace red::corpus

#endif  // RED_TOKENIZE_HPP
