#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "emocorpus/error.hpp"
#include "emocorpus/hash.hpp"
#include "emocorpus/text.hpp"

namespace emocorpus {

struct EmotionCategory {
  std::string id;
  std::string display_name;
  std::string definition;

  friend bool operator==(const EmotionCategory&, const EmotionCategory&) = default;
};

enum class ItemKind { base, conjugation, slang };

inline std::string_view to_string(ItemKind k) {
  switch (k) {
    case ItemKind::base: return "base";
    case ItemKind::conjugation: return "conjugation";
    case ItemKind::slang: return "slang";
  }
  return "base";
}

inline bool parse_item_kind(std::string_view s, ItemKind& out) {
  if (s == "base") out = ItemKind::base;
  else if (s == "conjugation") out = ItemKind::conjugation;
  else if (s == "slang") out = ItemKind::slang;
  else return false;
  return true;
}

struct LexicalItem {
  std::string surface;  // normalize_surface() form
  std::string category_id;
  ItemKind kind = ItemKind::base;
  std::string source;

  friend bool operator==(const LexicalItem&, const LexicalItem&) = default;
};

// Non-fatal findings collected while loading or transforming a lexicon.
struct Diagnostics {
  std::vector<std::string> warnings;
  std::size_t duplicates_dropped = 0;
  std::size_t missing_removals = 0;

  void warn(std::string msg) { warnings.push_back(std::move(msg)); }
};

/// Validated, immutable emotion lexicon. Items are kept sorted by
/// (surface, category_id); version() is a content hash over the schema and the
/// items, so equal content always gives an equal version.
class Lexicon {
 public:
  Lexicon(std::vector<EmotionCategory> schema, std::vector<LexicalItem> items)
      : schema_(std::move(schema)), items_(std::move(items)) {
    std::sort(items_.begin(), items_.end(), [](const LexicalItem& a, const LexicalItem& b) {
      return std::tie(a.surface, a.category_id) < std::tie(b.surface, b.category_id);
    });
    validate();
    version_ = compute_version();
  }

  const std::vector<EmotionCategory>& schema() const { return schema_; }
  const std::vector<LexicalItem>& items() const { return items_; }
  const std::string& version() const { return version_; }

  bool has_category(std::string_view id) const {
    return std::any_of(schema_.begin(), schema_.end(), [&](const auto& c) { return c.id == id; });
  }

  bool contains(std::string_view surface, std::string_view category_id) const {
    auto it = std::lower_bound(items_.begin(), items_.end(), std::pair(surface, category_id),
                               [](const LexicalItem& item, const auto& key) {
                                 return std::pair<std::string_view, std::string_view>(
                                            item.surface, item.category_id) < key;
                               });
    return it != items_.end() && it->surface == surface && it->category_id == category_id;
  }

  std::vector<std::string> category_ids() const {
    std::vector<std::string> ids;
    ids.reserve(schema_.size());
    for (const auto& c : schema_) ids.push_back(c.id);
    return ids;
  }

 private:
  void validate() const {
    if (schema_.empty()) throw ValidationError("schema must contain at least one category");
    std::set<std::string_view> ids;
    for (const auto& c : schema_) {
      validate_category_id(c.id);
      if (!ids.insert(c.id).second) throw ValidationError("duplicate category id '" + c.id + "'");
    }
    for (std::size_t i = 0; i < items_.size(); ++i) {
      const auto& item = items_[i];
      if (item.surface.empty()) throw ValidationError("empty surface for category '" + item.category_id + "'");
      if (item.surface.find_first_of("\t\n\r") != std::string::npos)
        throw ValidationError("surface contains tab or newline: '" + item.surface + "'");
      if (normalize_surface(item.surface) != item.surface)
        throw ValidationError("surface not in normal form: '" + item.surface + "'");
      if (!ids.contains(item.category_id))
        throw ValidationError("unknown category '" + item.category_id + "' for surface '" + item.surface + "'");
      if (i > 0 && items_[i - 1].surface == item.surface && items_[i - 1].category_id == item.category_id)
        throw ValidationError("duplicate item ('" + item.surface + "', " + item.category_id + ")");
    }
  }

  static void validate_category_id(const std::string& id) {
    if (id.empty()) throw ValidationError("empty category id");
    if (!is_valid_utf8(id)) throw ValidationError("category id is not valid UTF-8");
    std::size_t i = 0;
    while (i < id.size()) {
      const CodePoint cp = decode_at(id, i);
      if (is_space(cp.value)) throw ValidationError("category id contains whitespace: '" + id + "'");
      i += cp.length;
    }
    if (fold_case(id) != id) throw ValidationError("category id must be lowercase: '" + id + "'");
  }

  std::string compute_version() const {
    ContentHasher h;
    for (const auto& c : schema_) h.field(c.id).field(c.display_name).field(c.definition).record_end();
    h.record_end();
    for (const auto& item : items_) h.field(item.surface).field(item.category_id).field(to_string(item.kind)).record_end();
    return h.hex();
  }

  std::vector<EmotionCategory> schema_;
  std::vector<LexicalItem> items_;
  std::string version_;
};

// Reconstructed default: GoEmotions' 27 emotions with caring -> compaixão,
// realization and neutral removed, saudade and inveja added.
inline std::vector<EmotionCategory> default_schema() {
  return {
      {"admiracao", "Admiração", "Encontrar algo impressionante ou digno de respeito."},
      {"diversao", "Diversão", "Achar algo engraçado ou divertido."},
      {"raiva", "Raiva", "Forte sentimento de desagrado ou antagonismo."},
      {"aborrecimento", "Aborrecimento", "Irritação leve, incômodo."},
      {"aprovacao", "Aprovação", "Ter ou expressar uma opinião favorável."},
      {"compaixao", "Compaixão", "Demonstrar cuidado e vontade de aliviar o sofrimento de outro."},
      {"confusao", "Confusão", "Falta de compreensão, incerteza."},
      {"curiosidade", "Curiosidade", "Forte desejo de saber ou aprender algo."},
      {"desejo", "Desejo", "Vontade intensa de que algo aconteça ou de possuir algo."},
      {"decepcao", "Decepção", "Tristeza causada por expectativas não atendidas."},
      {"desaprovacao", "Desaprovação", "Ter ou expressar uma opinião desfavorável."},
      {"nojo", "Nojo", "Repulsa provocada por algo desagradável ou ofensivo."},
      {"vergonha", "Vergonha", "Constrangimento, sentir-se exposto ou desconfortável."},
      {"empolgacao", "Empolgação", "Entusiasmo e ânimo intensos."},
      {"medo", "Medo", "Sentir-se ameaçado ou com receio de algo."},
      {"gratidao", "Gratidão", "Sentimento de agradecimento e reconhecimento."},
      {"luto", "Luto", "Tristeza intensa, especialmente pela morte de alguém."},
      {"alegria", "Alegria", "Sentimento de prazer e felicidade."},
      {"amor", "Amor", "Forte emoção positiva de afeto e carinho."},
      {"nervosismo", "Nervosismo", "Apreensão, preocupação, ansiedade."},
      {"otimismo", "Otimismo", "Esperança e confiança no futuro."},
      {"orgulho", "Orgulho", "Satisfação com as próprias conquistas ou de alguém próximo."},
      {"alivio", "Alívio", "Tranquilidade após o fim de uma situação angustiante."},
      {"remorso", "Remorso", "Arrependimento ou culpa por algo que se fez."},
      {"tristeza", "Tristeza", "Dor emocional, infelicidade."},
      {"surpresa", "Surpresa", "Reação ao inesperado."},
      {"saudade", "Saudade", "Sentimento de falta de alguém, de algo ou de um lugar."},
      {"inveja", "Inveja", "Desejo de possuir o que pertence a outra pessoa."},
  };
}

namespace detail {

inline std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      return fields;
    }
    fields.emplace_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

// Calls fn(line_number, line) for every non-blank, non-comment line.
template <typename Fn>
void for_each_record(std::istream& in, const std::string& name, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!is_valid_utf8(line)) throw ParseError(name + ":" + std::to_string(lineno) + ": invalid UTF-8");
    fn(lineno, line);
  }
  if (in.bad()) throw IoError("error reading " + name);
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

inline std::string where(const std::string& name, std::size_t lineno) {
  return name + ":" + std::to_string(lineno) + ": ";
}

inline std::string trim_ascii(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

// Parses `surface<TAB>category_id[<TAB>kind]` records, dropping exact
// duplicates with a warning.
inline std::vector<LexicalItem> read_items(std::istream& in, const std::string& name,
                                           const std::set<std::string>& category_ids,
                                           ItemKind default_kind, Diagnostics* diag) {
  std::vector<LexicalItem> items;
  std::set<std::pair<std::string, std::string>> seen;
  for_each_record(in, name, [&](std::size_t lineno, const std::string& line) {
    const auto fields = split_tabs(line);
    if (fields.size() < 2 || fields.size() > 3)
      throw ParseError(where(name, lineno) + "expected surface<TAB>category_id[<TAB>kind]");
    LexicalItem item;
    item.surface = normalize_surface(fields[0]);
    item.category_id = trim_ascii(fields[1]);
    item.kind = default_kind;
    if (fields.size() == 3 && !parse_item_kind(trim_ascii(fields[2]), item.kind))
      throw ParseError(where(name, lineno) + "unknown kind '" + fields[2] + "'");
    if (item.surface.empty() || tokenize(item.surface).empty())
      throw ValidationError(where(name, lineno) + "empty surface");
    if (!category_ids.contains(item.category_id))
      throw ValidationError(where(name, lineno) + "unknown category '" + item.category_id + "'");
    item.source = name + ":" + std::to_string(lineno);
    if (!seen.emplace(item.surface, item.category_id).second) {
      if (diag) {
        ++diag->duplicates_dropped;
        diag->warn(where(name, lineno) + "duplicate ('" + item.surface + "', " + item.category_id + ") dropped");
      }
      return;
    }
    items.push_back(std::move(item));
  });
  return items;
}

inline std::set<std::string> id_set(const std::vector<EmotionCategory>& schema) {
  std::set<std::string> ids;
  for (const auto& c : schema) ids.insert(c.id);
  return ids;
}

}  // namespace detail

inline std::vector<EmotionCategory> read_schema(std::istream& in, const std::string& name = "<schema>") {
  std::vector<EmotionCategory> schema;
  detail::for_each_record(in, name, [&](std::size_t lineno, const std::string& line) {
    const auto fields = detail::split_tabs(line);
    if (fields.size() < 2 || fields.size() > 3)
      throw ParseError(detail::where(name, lineno) + "expected id<TAB>display_name<TAB>definition");
    schema.push_back({detail::trim_ascii(fields[0]), detail::trim_ascii(fields[1]),
                      fields.size() == 3 ? detail::trim_ascii(fields[2]) : std::string()});
  });
  // Lexicon's constructor re-checks; doing it here gives the file name in the message.
  std::set<std::string> ids;
  for (const auto& c : schema) {
    if (!ids.insert(c.id).second) throw ValidationError(name + ": duplicate category id '" + c.id + "'");
  }
  if (schema.empty()) throw ValidationError(name + ": schema is empty");
  return schema;
}

inline std::vector<EmotionCategory> load_schema(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_schema(in, path.string());
}

inline Lexicon read_lexicon(std::istream& in, std::vector<EmotionCategory> schema,
                            const std::string& name = "<lexicon>", Diagnostics* diag = nullptr) {
  auto items = detail::read_items(in, name, detail::id_set(schema), ItemKind::base, diag);
  return Lexicon(std::move(schema), std::move(items));
}

/// Loads schema and lexicon files. Surfaces are normalized on the way in.
inline Lexicon load_lexicon(const std::filesystem::path& path, const std::filesystem::path& schema_path,
                            Diagnostics* diag = nullptr) {
  auto schema = load_schema(schema_path);
  auto in = detail::open_input(path);
  return read_lexicon(in, std::move(schema), path.string(), diag);
}

inline Lexicon load_lexicon(const std::filesystem::path& path, std::vector<EmotionCategory> schema,
                            Diagnostics* diag = nullptr) {
  auto in = detail::open_input(path);
  return read_lexicon(in, std::move(schema), path.string(), diag);
}

using ConjugationTable = std::map<std::string, std::vector<std::string>>;

inline ConjugationTable read_conjugations(std::istream& in, const std::string& name = "<conjugations>") {
  ConjugationTable table;
  detail::for_each_record(in, name, [&](std::size_t lineno, const std::string& line) {
    const auto fields = detail::split_tabs(line);
    if (fields.size() != 2) throw ParseError(detail::where(name, lineno) + "expected lemma<TAB>form1,form2,...");
    const std::string lemma = normalize_surface(fields[0]);
    if (lemma.empty()) throw ValidationError(detail::where(name, lineno) + "empty lemma");
    std::vector<std::string> forms;
    std::size_t start = 0;
    const std::string_view list = fields[1];
    while (start <= list.size()) {
      std::size_t comma = list.find(',', start);
      if (comma == std::string_view::npos) comma = list.size();
      std::string form = normalize_surface(list.substr(start, comma - start));
      if (!form.empty() && !tokenize(form).empty()) forms.push_back(std::move(form));
      start = comma + 1;
    }
    if (forms.empty()) throw ValidationError(detail::where(name, lineno) + "lemma '" + lemma + "' has no forms");
    auto& slot = table[lemma];
    slot.insert(slot.end(), forms.begin(), forms.end());
  });
  return table;
}

/// Adds every conjugated form of every lemma present in the lexicon as a
/// `conjugation` item under the lemma's categories. Runs to a fixed point, so
/// applying it again never adds anything.
inline Lexicon expand_conjugations(const Lexicon& lex, const ConjugationTable& table) {
  std::vector<LexicalItem> items = lex.items();
  std::set<std::pair<std::string, std::string>> present;
  for (const auto& item : items) present.emplace(item.surface, item.category_id);

  std::size_t frontier = 0;
  while (frontier < items.size()) {
    const std::size_t end = items.size();
    for (std::size_t i = frontier; i < end; ++i) {
      auto it = table.find(items[i].surface);
      if (it == table.end()) continue;
      const std::string category = items[i].category_id;
      const std::string lemma = items[i].surface;
      for (const auto& form : it->second) {
        if (!present.emplace(form, category).second) continue;
        items.push_back({form, category, ItemKind::conjugation, "conjugation of " + lemma});
      }
    }
    frontier = end;
  }
  return Lexicon(lex.schema(), std::move(items));
}

inline Lexicon expand_conjugations(const Lexicon& lex, const std::filesystem::path& tables_path) {
  auto in = detail::open_input(tables_path);
  return expand_conjugations(lex, read_conjugations(in, tables_path.string()));
}

/// Human curation pass: insert additions (kind defaults to slang), then delete
/// removals. Removals are scoped to a (surface, category) pair; removing a pair
/// that does not exist is a warning.
inline Lexicon merge_curation(const Lexicon& lex, std::istream& additions, std::istream& removals,
                              Diagnostics* diag = nullptr, const std::string& additions_name = "<additions>",
                              const std::string& removals_name = "<removals>") {
  const auto ids = detail::id_set(lex.schema());
  std::vector<LexicalItem> items = lex.items();
  std::set<std::pair<std::string, std::string>> present;
  for (const auto& item : items) present.emplace(item.surface, item.category_id);

  for (auto& added : detail::read_items(additions, additions_name, ids, ItemKind::slang, diag)) {
    if (!present.emplace(added.surface, added.category_id).second) {
      if (diag) {
        ++diag->duplicates_dropped;
        diag->warn(added.source + ": ('" + added.surface + "', " + added.category_id + ") already present");
      }
      continue;
    }
    items.push_back(std::move(added));
  }

  std::set<std::pair<std::string, std::string>> to_remove;
  detail::for_each_record(removals, removals_name, [&](std::size_t lineno, const std::string& line) {
    const auto fields = detail::split_tabs(line);
    if (fields.size() != 2) throw ParseError(detail::where(removals_name, lineno) + "expected surface<TAB>category_id");
    std::pair<std::string, std::string> key(normalize_surface(fields[0]), detail::trim_ascii(fields[1]));
    if (!present.contains(key)) {
      if (diag) {
        ++diag->missing_removals;
        diag->warn(detail::where(removals_name, lineno) + "removal ('" + key.first + "', " + key.second +
                   ") not in lexicon");
      }
      return;
    }
    to_remove.insert(std::move(key));
  });
  std::erase_if(items, [&](const LexicalItem& item) { return to_remove.contains({item.surface, item.category_id}); });
  return Lexicon(lex.schema(), std::move(items));
}

// Either path may be empty, meaning "no file".
inline Lexicon merge_curation(const Lexicon& lex, const std::filesystem::path& additions,
                              const std::filesystem::path& removals, Diagnostics* diag = nullptr) {
  std::istringstream none;
  std::ifstream add_in, rem_in;
  if (!additions.empty()) add_in = detail::open_input(additions);
  if (!removals.empty()) rem_in = detail::open_input(removals);
  return merge_curation(lex, additions.empty() ? static_cast<std::istream&>(none) : add_in,
                        removals.empty() ? static_cast<std::istream&>(none) : rem_in, diag,
                        additions.string(), removals.string());
}

inline void write_schema(std::ostream& out, const std::vector<EmotionCategory>& schema) {
  for (const auto& c : schema) out << c.id << '\t' << c.display_name << '\t' << c.definition << '\n';
}

/// Writes the lexicon in its own input format so the file can be reloaded.
inline void write_lexicon(std::ostream& out, const Lexicon& lex) {
  out << "# lexicon version " << lex.version() << '\n';
  for (const auto& item : lex.items()) out << item.surface << '\t' << item.category_id << '\t' << to_string(item.kind) << '\n';
}

}  // namespace emocorpus
