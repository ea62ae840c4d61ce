#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

#include "emocorpus/error.hpp"

namespace emocorpus {

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

inline void close_checked(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw IoError("error writing " + path.string());
}

/// Calls fn(json, line_number) for each non-blank line of a JSON-lines file.
template <typename Fn>
void read_jsonl(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError(path.string() + ":" + std::to_string(lineno) + ": invalid JSON");
    try {
      fn(j, lineno);
    } catch (const Error& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (in.bad()) throw IoError("error reading " + path.string());
}

template <typename Range, typename ToJson>
void write_jsonl(const std::filesystem::path& path, const Range& records, ToJson&& to_json_fn) {
  auto out = open_output(path);
  for (const auto& r : records) out << to_json_fn(r).dump() << '\n';
  close_checked(out, path);
}

inline void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  close_checked(out, path);
}

}  // namespace emocorpus
