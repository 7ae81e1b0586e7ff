#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace scout {

namespace detail {

inline bool is_ascii_space(unsigned char ch) {
  return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' || ch == '\v';
}

inline bool is_ascii_punct(unsigned char ch) { return ch < 0x80 && std::ispunct(ch) != 0; }

}  // namespace detail

inline std::string trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && detail::is_ascii_space(text[begin])) ++begin;
  while (end > begin && detail::is_ascii_space(text[end - 1])) --end;
  return std::string(text.substr(begin, end - begin));
}

inline std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (char& ch : out) {
    const auto uch = static_cast<unsigned char>(ch);
    if (uch < 0x80) ch = static_cast<char>(std::tolower(uch));
  }
  return out;
}

// Candidate-level name key: case-fold, trim, collapse internal whitespace and
// strip surrounding punctuation. Non-ASCII bytes pass through untouched so
// CJK names keep their identity.
inline std::string normalize_name(std::string_view raw) {
  std::string collapsed;
  collapsed.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char ch : raw) {
    if (detail::is_ascii_space(ch)) {
      pending_space = !collapsed.empty();
      continue;
    }
    if (pending_space) {
      collapsed.push_back(' ');
      pending_space = false;
    }
    collapsed.push_back(ch < 0x80 ? static_cast<char>(std::tolower(ch)) : static_cast<char>(ch));
  }
  std::size_t begin = 0;
  std::size_t end = collapsed.size();
  while (begin < end && (detail::is_ascii_punct(collapsed[begin]) ||
                         collapsed[begin] == ' ')) {
    ++begin;
  }
  while (end > begin && (detail::is_ascii_punct(collapsed[end - 1]) ||
                         collapsed[end - 1] == ' ')) {
    --end;
  }
  return collapsed.substr(begin, end - begin);
}

// Token form used for leakage scanning: lower-case, every ASCII
// non-alphanumeric byte becomes a separator, runs collapse to one space,
// padded with a space on both sides so callers can match whole tokens.
inline std::string token_form(std::string_view raw) {
  std::string out = " ";
  for (unsigned char ch : raw) {
    if (ch < 0x80 && std::isalnum(ch) == 0) {
      if (out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(ch < 0x80 ? static_cast<char>(std::tolower(ch)) : static_cast<char>(ch));
    }
  }
  if (out.back() != ' ') out.push_back(' ');
  return out;
}

// Alphanumeric-only form ("BGB-3111" -> "bgb3111").
inline std::string compact_form(std::string_view raw) {
  std::string out;
  for (unsigned char ch : raw) {
    if (ch >= 0x80) {
      out.push_back(static_cast<char>(ch));
    } else if (std::isalnum(ch) != 0) {
      out.push_back(static_cast<char>(std::tolower(ch)));
    }
  }
  return out;
}

inline std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(trim(text.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i != 0) out += sep;
    out += parts[i];
  }
  return out;
}

// Scheme-less host of a URL, "" when absent.
inline std::string url_domain(std::string_view url) {
  auto pos = url.find("://");
  std::string_view rest = pos == std::string_view::npos ? url : url.substr(pos + 3);
  const auto end = rest.find_first_of("/?#");
  rest = rest.substr(0, end);
  return ascii_lower(rest);
}

}  // namespace scout
