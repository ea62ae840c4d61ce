#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

#include "emocorpus/error.hpp"
#include "emocorpus/text.hpp"

namespace emocorpus {

struct RawDocument {
  std::string id;
  std::string text;
  bool is_retweet = false;
  bool is_reply = false;
  std::optional<std::string> created_at;
  std::optional<std::string> collected_by_term;

  friend bool operator==(const RawDocument&, const RawDocument&) = default;
};

struct NormalizedDocument {
  std::string id;
  std::string text;
  std::string original_text;
  std::optional<std::string> collected_by_term;

  friend bool operator==(const NormalizedDocument&, const NormalizedDocument&) = default;
};

struct StreamParseResult {
  std::vector<RawDocument> documents;
  std::size_t records = 0;    // non-blank lines seen
  std::size_t malformed = 0;  // lines skipped
  std::vector<std::string> problems;
};

// Past this share of malformed records the file is assumed to be in the wrong
// format altogether.
inline constexpr double kMaxMalformedFraction = 0.10;

namespace detail {

inline std::optional<RawDocument> parse_raw_record(const std::string& line, std::string& why) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) return why = "invalid JSON", std::nullopt;
  if (!j.is_object()) return why = "record is not an object", std::nullopt;
  auto id = j.find("id");
  auto text = j.find("text");
  if (id == j.end() || !id->is_string() || id->get_ref<const std::string&>().empty())
    return why = "missing or empty string field 'id'", std::nullopt;
  if (text == j.end() || !text->is_string()) return why = "missing string field 'text'", std::nullopt;

  RawDocument doc;
  doc.id = id->get<std::string>();
  doc.text = text->get<std::string>();
  for (auto [key, flag] : {std::pair{"is_retweet", &doc.is_retweet}, std::pair{"is_reply", &doc.is_reply}}) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) continue;
    if (!it->is_boolean()) return why = std::string("field '") + key + "' is not a boolean", std::nullopt;
    *flag = it->get<bool>();
  }
  for (auto [key, slot] : {std::pair{"created_at", &doc.created_at}, std::pair{"collected_by_term", &doc.collected_by_term}}) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) continue;
    if (!it->is_string()) return why = std::string("field '") + key + "' is not a string", std::nullopt;
    *slot = it->get<std::string>();
  }
  return doc;
}

}  // namespace detail

/// Reads JSON-lines records in file order. Malformed records (and repeated ids)
/// are skipped and counted; more than 10% malformed is a hard ParseError.
inline StreamParseResult parse_raw_stream(std::istream& in, const std::string& name = "<stream>") {
  StreamParseResult result;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ++result.records;
    std::string why;
    auto doc = detail::parse_raw_record(line, why);
    if (doc && !ids.insert(doc->id).second) {
      why = "duplicate id '" + doc->id + "'";
      doc.reset();
    }
    if (!doc) {
      ++result.malformed;
      result.problems.push_back(name + ":" + std::to_string(lineno) + ": " + why);
      continue;
    }
    result.documents.push_back(std::move(*doc));
  }
  if (in.bad()) throw IoError("error reading " + name);
  if (result.records > 0 &&
      static_cast<double>(result.malformed) > kMaxMalformedFraction * static_cast<double>(result.records)) {
    throw ParseError(name + ": " + std::to_string(result.malformed) + " of " + std::to_string(result.records) +
                     " records malformed (limit 10%); first problem: " + result.problems.front());
  }
  return result;
}

inline StreamParseResult parse_raw_stream(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_raw_stream(in, path.string());
}

/// Keeps original posts only: no retweets, no replies. Order preserved.
inline std::vector<RawDocument> filter_originals(std::vector<RawDocument> docs) {
  std::erase_if(docs, [](const RawDocument& d) { return d.is_retweet || d.is_reply; });
  return docs;
}

struct NormalizeOptions {
  bool remove_urls = true;
  bool remove_mentions = true;
};

namespace detail {

// Variation selectors and the keycap mark stay attached to the '#' of "#️⃣".
inline bool is_handle_char(UChar32 c) {
  if (c == 0xFE0E || c == 0xFE0F || c == 0x20E3) return false;
  return c == '_' || (is_word_char(c) && !is_emoji_base(c));
}

// End of the run of handle characters (letters, digits, marks, '_') from i.
inline std::size_t handle_end(std::string_view s, std::size_t i) {
  while (i < s.size()) {
    const CodePoint cp = decode_at(s, i);
    if (!is_handle_char(cp.value)) break;
    i += cp.length;
  }
  return i;
}

inline bool starts_with_ci(std::string_view s, std::size_t i, std::string_view prefix) {
  if (s.size() - i < prefix.size()) return false;
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    char c = s[i + k];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != prefix[k]) return false;
  }
  return true;
}

// URLs run over printable ASCII only, so a trailing emoji is never swallowed.
inline std::size_t url_end(std::string_view s, std::size_t i) {
  std::size_t prefix = 0;
  if (starts_with_ci(s, i, "https://")) prefix = 8;
  else if (starts_with_ci(s, i, "http://")) prefix = 7;
  else if (starts_with_ci(s, i, "www.")) prefix = 4;
  else return i;
  std::size_t end = i + prefix;
  while (end < s.size() && s[end] > ' ' && s[end] < 0x7f) ++end;
  return end;
}

}  // namespace detail

/// Strips hashtags (and, by default, URLs and @mentions), lowercases with NFC
/// composition outside emoji, and collapses whitespace. Removed spans are
/// replaced by a space so their neighbours never fuse into a new token.
inline NormalizedDocument normalize_text(const RawDocument& doc, const NormalizeOptions& opts = {}) {
  const std::string_view s = doc.text;
  std::string stripped;
  stripped.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (opts.remove_urls) {
      const std::size_t end = detail::url_end(s, i);
      if (end != i) {
        stripped.push_back(' ');
        i = end;
        continue;
      }
    }
    const char c = s[i];
    if (c == '#' || (c == '@' && opts.remove_mentions)) {
      const std::size_t end = detail::handle_end(s, i + 1);
      if (end != i + 1) {
        stripped.push_back(' ');
        i = end;
        continue;
      }
    }
    const CodePoint cp = decode_at(s, i);
    stripped.append(s.substr(i, cp.length));
    i += cp.length;
  }
  return {doc.id, collapse_whitespace(fold_case(stripped)), doc.text, doc.collected_by_term};
}

}  // namespace emocorpus
