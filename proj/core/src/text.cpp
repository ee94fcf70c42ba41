#include "saver/text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

namespace saver {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i])))
      return false;
  }
  return true;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(s.substr(start));
      break;
    }
    parts.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> toks;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) {
        toks.push_back(cur);
        cur.clear();
      }
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) toks.push_back(cur);
  return toks;
}

std::string normalize_answer(std::string_view s) {
  std::string lowered = to_lower(s);
  std::string stripped;
  stripped.reserve(lowered.size());
  for (char c : lowered) {
    if (std::ispunct(static_cast<unsigned char>(c))) continue;
    stripped.push_back(c);
  }
  std::vector<std::string> toks = tokenize(stripped);
  std::string out;
  for (const auto& t : toks) {
    if (t == "a" || t == "an" || t == "the") continue;
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::vector<std::string> normalize_tokens(std::string_view s) {
  return tokenize(normalize_answer(s));
}

double token_overlap(std::string_view a, std::string_view b) {
  std::vector<std::string> ta = normalize_tokens(a);
  std::vector<std::string> tb = normalize_tokens(b);
  std::sort(ta.begin(), ta.end());
  ta.erase(std::unique(ta.begin(), ta.end()), ta.end());
  std::sort(tb.begin(), tb.end());
  tb.erase(std::unique(tb.begin(), tb.end()), tb.end());
  if (ta.empty() || tb.empty()) return 0.0;
  std::vector<std::string> common;
  std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) / static_cast<double>(std::min(ta.size(), tb.size()));
}

std::optional<int> parse_int(std::string_view s) {
  std::string t = trim(s);
  int value = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size()) return std::nullopt;
  return value;
}

std::uint64_t fnv1a64(std::string_view data) {
  return fnv1a64_mix(0xcbf29ce484222325ULL, data);
}

std::uint64_t fnv1a64_mix(std::uint64_t seed, std::string_view data) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

}  // namespace saver
