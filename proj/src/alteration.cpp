#include <charconv>

#include "provoscope/error.hpp"
#include "provoscope/scenario.hpp"

namespace provoscope {

using nlohmann::json;

namespace {

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Byte-level walker over text already known to be valid JSON.
class Scanner {
 public:
  explicit Scanner(std::string_view text) : s_(text) {}

  std::size_t skip_ws(std::size_t i) const {
    while (i < s_.size() && (s_[i] == ' ' || s_[i] == '\t' || s_[i] == '\r' || s_[i] == '\n')) ++i;
    return i;
  }

  std::size_t value_end(std::size_t i) const {
    if (s_[i] == '"') return string_end(i);
    if (s_[i] == '{' || s_[i] == '[') {
      int depth = 0;
      while (i < s_.size()) {
        const char c = s_[i];
        if (c == '"') {
          i = string_end(i);
          continue;
        }
        if (c == '{' || c == '[') ++depth;
        if (c == '}' || c == ']') {
          if (--depth == 0) return i + 1;
        }
        ++i;
      }
      return i;
    }
    while (i < s_.size() && std::string_view(",]} \t\r\n").find(s_[i]) == std::string_view::npos) ++i;
    return i;
  }

  std::vector<std::pair<Span, Span>> members(Span obj) const {
    std::vector<std::pair<Span, Span>> out;
    std::size_t i = skip_ws(obj.begin + 1);
    while (i < obj.end && s_[i] == '"') {
      Span key{i, string_end(i)};
      i = skip_ws(skip_ws(key.end) + 1);  // past ':'
      Span value{i, value_end(i)};
      out.emplace_back(key, value);
      i = skip_ws(value.end);
      if (s_[i] != ',') break;
      i = skip_ws(i + 1);
    }
    return out;
  }

  std::vector<Span> elements(Span arr) const {
    std::vector<Span> out;
    std::size_t i = skip_ws(arr.begin + 1);
    while (i < arr.end && s_[i] != ']') {
      Span value{i, value_end(i)};
      out.push_back(value);
      i = skip_ws(value.end);
      if (s_[i] != ',') break;
      i = skip_ws(i + 1);
    }
    return out;
  }

  json decode(Span span) const { return json::parse(s_.substr(span.begin, span.end - span.begin)); }
  char at(std::size_t i) const { return s_[i]; }

 private:
  std::size_t string_end(std::size_t i) const {
    ++i;
    while (i < s_.size() && s_[i] != '"') i += s_[i] == '\\' ? 2 : 1;
    return i + 1;
  }

  std::string_view s_;
};

struct Step {
  enum class Kind { Key, Index, Select } kind;
  std::string name;   // key, or the selector field
  std::string value;  // selector value
  std::size_t index = 0;
};

std::vector<Step> parse_path(std::string_view path) {
  std::vector<Step> steps;
  std::size_t i = 0;
  auto bad = [&] { return AlterationTargetMissing(std::string(path)); };
  while (i < path.size()) {
    if (path[i] == '.') {
      ++i;
      continue;
    }
    if (path[i] == '[') {
      const auto close = path.find(']', i);
      if (close == std::string_view::npos) throw bad();
      const auto inner = path.substr(i + 1, close - i - 1);
      const auto eq = inner.find('=');
      Step s;
      if (eq == std::string_view::npos) {
        s.kind = Step::Kind::Index;
        auto [p, ec] = std::from_chars(inner.data(), inner.data() + inner.size(), s.index);
        if (ec != std::errc() || p != inner.data() + inner.size()) throw bad();
      } else {
        s.kind = Step::Kind::Select;
        s.name = inner.substr(0, eq);
        s.value = inner.substr(eq + 1);
      }
      steps.push_back(std::move(s));
      i = close + 1;
      continue;
    }
    const auto stop = path.find_first_of(".[", i);
    const auto end = stop == std::string_view::npos ? path.size() : stop;
    steps.push_back({Step::Kind::Key, std::string(path.substr(i, end - i)), "", 0});
    i = end;
  }
  if (steps.empty()) throw bad();
  return steps;
}

bool selector_matches(const json& v, const std::string& wanted) {
  if (v.is_string()) return v.get<std::string>() == wanted;
  if (v.is_number() || v.is_boolean()) return v.dump() == wanted;
  return false;
}

}  // namespace

std::string splice_json_field(std::string_view text, std::string_view field_path,
                              const json& replacement) {
  const std::string_view body = extract_fenced_block(text);
  if (!json::accept(body)) throw NotJson("cannot alter a response that holds no valid JSON");
  const std::size_t base = body.empty() ? 0 : static_cast<std::size_t>(body.data() - text.data());

  Scanner sc(body);
  Span cur{sc.skip_ws(0), 0};
  cur.end = sc.value_end(cur.begin);
  const auto missing = [&] { return AlterationTargetMissing(std::string(field_path)); };

  for (const auto& step : parse_path(field_path)) {
    const char open = sc.at(cur.begin);
    if (step.kind == Step::Kind::Key) {
      if (open != '{') throw missing();
      bool found = false;
      for (const auto& [key, value] : sc.members(cur)) {
        if (sc.decode(key).get<std::string>() == step.name) {
          cur = value;
          found = true;
        }
      }
      if (!found) throw missing();
    } else {
      if (open != '[') throw missing();
      const auto items = sc.elements(cur);
      if (step.kind == Step::Kind::Index) {
        if (step.index >= items.size()) throw missing();
        cur = items[step.index];
        continue;
      }
      bool found = false;
      for (const auto& item : items) {
        if (sc.at(item.begin) != '{') continue;
        for (const auto& [key, value] : sc.members(item)) {
          if (sc.decode(key).get<std::string>() == step.name &&
              selector_matches(sc.decode(value), step.value)) {
            cur = item;
            found = true;
            break;
          }
        }
        if (found) break;
      }
      if (!found) throw missing();
    }
  }

  std::string out(text.substr(0, base + cur.begin));
  out += replacement.dump();
  out += text.substr(base + cur.end);
  return out;
}

bool alteration_matches(const Alteration& alteration, const CacheEntry& entry) {
  if (alteration.match.empty()) return true;
  return alteration.match == entry.key ||
         entry.request_snapshot.find(alteration.match) != std::string::npos;
}

std::string apply_alterations(const Scenario& scenario, const CacheEntry& entry) {
  std::string text = entry.response;
  for (const auto& a : scenario.alterations) {
    if (alteration_matches(a, entry)) text = splice_json_field(text, a.field_path, a.replacement);
  }
  return text;
}

}  // namespace provoscope
