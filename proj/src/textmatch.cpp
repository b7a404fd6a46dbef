// Copyright 2026 The coeforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "coeforge/textmatch.hpp"

#include <algorithm>
#include <map>

#include "coeforge/error.hpp"

namespace coeforge {
namespace {

// Decodes one UTF-8 sequence starting at s[i]. Invalid bytes decode as
// themselves with length 1 so normalization never drops input silently.
char32_t decode_utf8(std::string_view s, std::size_t i, std::size_t& len) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    len = 1;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0) {
    const int c1 = cont(1);
    if (c1 >= 0) {
      len = 2;
      return (static_cast<char32_t>(b0 & 0x1F) << 6) | c1;
    }
  } else if ((b0 & 0xF0) == 0xE0) {
    const int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) {
      len = 3;
      return (static_cast<char32_t>(b0 & 0x0F) << 12) | (c1 << 6) | c2;
    }
  } else if ((b0 & 0xF8) == 0xF0) {
    const int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
      len = 4;
      return (static_cast<char32_t>(b0 & 0x07) << 18) | (c1 << 12) | (c2 << 6) | c3;
    }
  }
  len = 1;
  return b0;
}

void encode_utf8(char32_t cp, std::string& out) {
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

bool is_space(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' ||
         c == 0x00A0 || (c >= 0x2000 && c <= 0x200A) || c == 0x202F || c == 0x205F ||
         c == 0x3000;
}

bool in(char32_t c, char32_t lo, char32_t hi) { return c >= lo && c <= hi; }

bool is_punct(char32_t c) {
  if (c < 0x80) {
    return in(c, 0x21, 0x2F) || in(c, 0x3A, 0x40) || in(c, 0x5B, 0x60) || in(c, 0x7B, 0x7E);
  }
  switch (c) {
    case 0x00A1: case 0x00A7: case 0x00AB: case 0x00B6: case 0x00B7: case 0x00BB:
    case 0x00BF: case 0x037E: case 0x0387:
      return true;
    default:
      break;
  }
  return in(c, 0x2010, 0x2027) || in(c, 0x2030, 0x205E) || in(c, 0x2E00, 0x2E7F) ||
         in(c, 0x3001, 0x3003) || in(c, 0x3008, 0x3011) || in(c, 0x3014, 0x301F) ||
         in(c, 0xFF01, 0xFF0F) || in(c, 0xFF1A, 0xFF20) || in(c, 0xFF3B, 0xFF40) ||
         in(c, 0xFF5B, 0xFF65);
}

char32_t to_lower(char32_t c) {
  if (in(c, 'A', 'Z')) return c + 0x20;
  if (in(c, 0x00C0, 0x00DE) && c != 0x00D7) return c + 0x20;
  if (in(c, 0x0391, 0x03A9) && c != 0x03A2) return c + 0x20;
  if (in(c, 0x0410, 0x042F)) return c + 0x20;
  if (in(c, 0x0400, 0x040F)) return c + 0x50;
  return c;
}

bool is_article(std::string_view tok) { return tok == "a" || tok == "an" || tok == "the"; }

}  // namespace

NormalizedAnswer normalize(std::string_view raw) {
  NormalizedAnswer out;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && !is_article(current)) out.tokens.push_back(current);
    current.clear();
  };
  for (std::size_t i = 0; i < raw.size();) {
    std::size_t len = 1;
    const char32_t cp = decode_utf8(raw, i, len);
    if (len == 1 && static_cast<unsigned char>(raw[i]) >= 0x80) {
      current.push_back(raw[i]);  // stray byte, keep verbatim
    } else if (is_space(cp)) {
      flush();
    } else if (!is_punct(cp)) {
      encode_utf8(to_lower(cp), current);
    }
    i += len;
  }
  flush();
  for (std::size_t i = 0; i < out.tokens.size(); ++i) {
    if (i) out.joined.push_back(' ');
    out.joined += out.tokens[i];
  }
  return out;
}

double recall(std::string_view answer, std::string_view gold) {
  const NormalizedAnswer g = normalize(gold);
  if (g.empty()) {
    fail(ErrorCode::kEmptyGroundTruth, "gold answer normalizes to zero tokens");
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& tok : normalize(answer).tokens) ++counts[tok];
  std::size_t overlap = 0;
  for (const auto& tok : g.tokens) {
    auto it = counts.find(tok);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  return static_cast<double>(overlap) / static_cast<double>(g.tokens.size());
}

int soft_em(std::string_view answer, std::string_view gold) {
  const std::string a = normalize(answer).joined;
  const std::string g = normalize(gold).joined;
  if (a.empty() || g.empty()) return 0;
  return (g.find(a) != std::string::npos || a.find(g) != std::string::npos) ? 1 : 0;
}

bool is_no_answer(std::string_view answer) { return normalize(answer).joined == "no answer"; }

}  // namespace coeforge
