#pragma once

// UTF-8 text primitives shared by every stage: case folding with canonical
// composition, character classes and the tokenizer. Lexicon surfaces and
// documents must go through the same functions here or matching breaks.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "emocorpus/error.hpp"

namespace emocorpus {

inline constexpr std::string_view kMaskToken = "[MASK]";

struct CodePoint {
  UChar32 value;       // U+FFFD for ill-formed input
  std::size_t length;  // bytes consumed
};

inline CodePoint decode_at(std::string_view s, std::size_t i) {
  std::int32_t pos = static_cast<std::int32_t>(i);
  const auto len = static_cast<std::int32_t>(s.size());
  UChar32 c;
  U8_NEXT(reinterpret_cast<const std::uint8_t*>(s.data()), pos, len, c);
  if (c < 0) c = 0xFFFD;
  return {c, static_cast<std::size_t>(pos) - i};
}

inline bool is_valid_utf8(std::string_view s) {
  std::int32_t pos = 0;
  const auto len = static_cast<std::int32_t>(s.size());
  while (pos < len) {
    UChar32 c;
    U8_NEXT(reinterpret_cast<const std::uint8_t*>(s.data()), pos, len, c);
    if (c < 0) return false;
  }
  return true;
}

// Letters, combining marks and decimal digits.
inline bool is_word_char(UChar32 c) {
  if (u_hasBinaryProperty(c, UCHAR_ALPHABETIC)) return true;
  if (u_charType(c) == U_DECIMAL_DIGIT_NUMBER) return true;
  const auto mask = U_GET_GC_MASK(c);
  return (mask & U_GC_M_MASK) != 0;
}

inline bool is_emoji_base(UChar32 c) {
  return u_hasBinaryProperty(c, UCHAR_EXTENDED_PICTOGRAPHIC) ||
         u_hasBinaryProperty(c, UCHAR_REGIONAL_INDICATOR);
}

inline bool is_space(UChar32 c) { return u_isUWhiteSpace(c); }

// End (exclusive byte offset) of the emoji cluster starting at `i`, which must
// hold an emoji base. Absorbs variation selectors, skin-tone modifiers, keycap
// and tag characters, ZWJ-joined pictographs and flag pairs.
inline std::size_t emoji_cluster_end(std::string_view s, std::size_t i) {
  const CodePoint first = decode_at(s, i);
  std::size_t end = i + first.length;
  if (u_hasBinaryProperty(first.value, UCHAR_REGIONAL_INDICATOR)) {
    if (end < s.size()) {
      const CodePoint next = decode_at(s, end);
      if (u_hasBinaryProperty(next.value, UCHAR_REGIONAL_INDICATOR)) end += next.length;
    }
    return end;
  }
  while (end < s.size()) {
    const CodePoint next = decode_at(s, end);
    const UChar32 c = next.value;
    if (c == 0xFE0F || c == 0xFE0E || c == 0x20E3 ||
        u_hasBinaryProperty(c, UCHAR_EMOJI_MODIFIER) || (c >= 0xE0020 && c <= 0xE007F)) {
      end += next.length;
      continue;
    }
    if (c == 0x200D && end + next.length < s.size()) {
      const CodePoint joined = decode_at(s, end + next.length);
      if (u_hasBinaryProperty(joined.value, UCHAR_EXTENDED_PICTOGRAPHIC)) {
        end += next.length + joined.length;
        continue;
      }
    }
    break;
  }
  return end;
}

namespace detail {

inline std::string lower_nfc_run(std::string_view run) {
  if (run.empty()) return {};
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(run.data(), static_cast<std::int32_t>(run.size())));
  u.toLower(icu::Locale::getRoot());
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  icu::UnicodeString composed = nfc->normalize(u, status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalization failed");
  std::string out;
  composed.toUTF8String(out);
  return out;
}

}  // namespace detail

/// Lowercase + canonical composition (NFC). Emoji clusters are copied through
/// byte for byte (case mapping would otherwise touch e.g. U+24C2).
inline std::string fold_case(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t run_start = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    const CodePoint cp = decode_at(s, i);
    if (is_emoji_base(cp.value)) {
      out += detail::lower_nfc_run(s.substr(run_start, i - run_start));
      const std::size_t end = emoji_cluster_end(s, i);
      out.append(s.substr(i, end - i));
      i = run_start = end;
    } else {
      i += cp.length;
    }
  }
  out += detail::lower_nfc_run(s.substr(run_start));
  return out;
}

/// Whitespace runs become a single ASCII space; leading/trailing space dropped.
inline std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  std::size_t i = 0;
  while (i < s.size()) {
    const CodePoint cp = decode_at(s, i);
    if (is_space(cp.value)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.append(s.substr(i, cp.length));
    }
    i += cp.length;
  }
  return out;
}

/// Normal form for lexicon surfaces and collection terms.
inline std::string normalize_surface(std::string_view s) { return collapse_whitespace(fold_case(s)); }

struct Token {
  std::string text;
  std::size_t begin = 0;  // byte offsets into the tokenized string
  std::size_t end = 0;

  friend bool operator==(const Token&, const Token&) = default;
};

/// Tokens are maximal runs of word characters, single emoji clusters, or the
/// literal mask token. Everything else separates tokens.
inline std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s.substr(i, kMaskToken.size()) == kMaskToken) {
      tokens.push_back({std::string(kMaskToken), i, i + kMaskToken.size()});
      i += kMaskToken.size();
      continue;
    }
    const CodePoint cp = decode_at(s, i);
    if (is_emoji_base(cp.value)) {
      const std::size_t end = emoji_cluster_end(s, i);
      tokens.push_back({std::string(s.substr(i, end - i)), i, end});
      i = end;
    } else if (is_word_char(cp.value)) {
      std::size_t end = i + cp.length;
      while (end < s.size()) {
        const CodePoint next = decode_at(s, end);
        if (!is_word_char(next.value) || is_emoji_base(next.value)) break;
        end += next.length;
      }
      tokens.push_back({std::string(s.substr(i, end - i)), i, end});
      i = end;
    } else {
      i += cp.length;
    }
  }
  return tokens;
}

template <typename Range>
std::string join_tokens(const Range& tokens, std::size_t first, std::size_t last) {
  std::string out;
  for (std::size_t k = first; k < last; ++k) {
    if (k > first) out.push_back(' ');
    out += tokens[k].text;
  }
  return out;
}

inline std::vector<std::string> token_texts(std::string_view s) {
  std::vector<std::string> out;
  for (auto& t : tokenize(s)) out.push_back(std::move(t.text));
  return out;
}

}  // namespace emocorpus
