// statejar: parsing and serialization for the four cookie headers.
//
// Set-Cookie (v0) and Set-Cookie2 (v1) share one parser with a mode switch;
// Cookie request headers get their own parser that understands $Version,
// $Path, $Domain and $Port markers and header folding. Cookie values are
// kept as raw wire text (quotes and all) so re-serialization is faithful;
// attribute values are decoded.
#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "statejar/cookie.hpp"
#include "statejar/date.hpp"
#include "statejar/host.hpp"
#include "statejar/result.hpp"

namespace statejar {

enum class ParseMode { V0, V1 };

namespace detail {

inline bool is_ws(char c) { return c == ' ' || c == '\t'; }

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ws(s.back())) s.remove_suffix(1);
  return s;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

// HTTP token characters: printable ASCII minus separators.
inline bool is_token_char(char c) {
  if (c <= 0x20 || c >= 0x7f) return false;
  switch (c) {
    case '(': case ')': case '<': case '>': case '@':
    case ',': case ';': case ':': case '\\': case '"':
    case '/': case '[': case ']': case '?': case '=':
    case '{': case '}':
      return false;
    default:
      return true;
  }
}

inline bool is_token(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!is_token_char(c)) return false;
  }
  return true;
}

inline bool contains_ws(std::string_view s) {
  for (char c : s) {
    if (is_ws(c)) return true;
  }
  return false;
}

// Advances past a quoted string starting at s[i] == '"'. The raw span
// (quotes included) ends at the returned index; the decoded body, with
// backslash escapes resolved, is appended to *decoded when non-null.
inline bool scan_quoted(std::string_view s, std::size_t& i, std::string* decoded) {
  ++i;  // opening quote
  while (i < s.size()) {
    char c = s[i];
    if (c == '\\' && i + 1 < s.size()) {
      if (decoded) decoded->push_back(s[i + 1]);
      i += 2;
      continue;
    }
    if (c == '"') {
      ++i;
      return true;
    }
    if (decoded) decoded->push_back(c);
    ++i;
  }
  return false;  // ran off the end
}

// One attribute value as it appeared on the wire.
struct AttrValue {
  std::string raw;      // exact wire text, quotes intact
  std::string decoded;  // quotes stripped, escapes resolved
  bool quoted = false;
};

// Reads a value after '='. Quoted values run to the closing quote; unquoted
// values run to the next ';' (and ',' unless stop_at_comma is false, the
// Expires exception). Leaves i on the separator or at end.
inline Result<AttrValue> scan_value(std::string_view s, std::size_t& i,
                                    bool stop_at_comma) {
  while (i < s.size() && is_ws(s[i])) ++i;
  AttrValue out;
  if (i < s.size() && s[i] == '"') {
    const std::size_t start = i;
    if (!scan_quoted(s, i, &out.decoded)) {
      return make_error<AttrValue>(ErrorClass::MalformedQuotedString,
                                   "unterminated quoted string");
    }
    out.raw = std::string(s.substr(start, i - start));
    out.quoted = true;
    while (i < s.size() && is_ws(s[i])) ++i;
    if (i < s.size() && s[i] != ';' && s[i] != ',') {
      return make_error<AttrValue>(ErrorClass::InvalidValue,
                                   "text after closing quote");
    }
    return Result<AttrValue>(out);
  }
  const std::size_t start = i;
  while (i < s.size() && s[i] != ';' && !(stop_at_comma && s[i] == ',')) ++i;
  const std::string_view body = trim(s.substr(start, i - start));
  out.raw = std::string(body);
  out.decoded = out.raw;
  return Result<AttrValue>(out);
}

inline Result<std::vector<std::uint16_t>> parse_port_list(std::string_view text) {
  std::vector<std::uint16_t> ports;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    const std::string_view item = trim(text.substr(pos, comma - pos));
    if (item.empty()) {
      return make_error<std::vector<std::uint16_t>>(
          ErrorClass::BadAttributeValue, "empty port in Port list");
    }
    long value = 0;
    for (char c : item) {
      if (c < '0' || c > '9') {
        return make_error<std::vector<std::uint16_t>>(
            ErrorClass::BadAttributeValue, "non-numeric port in Port list");
      }
      value = value * 10 + (c - '0');
      if (value > 65535) break;
    }
    if (value < 1 || value > 65535) {
      return make_error<std::vector<std::uint16_t>>(
          ErrorClass::BadAttributeValue, "port out of range in Port list");
    }
    ports.push_back(static_cast<std::uint16_t>(value));
    if (comma == text.size()) break;
    pos = comma + 1;
  }
  std::sort(ports.begin(), ports.end());
  ports.erase(std::unique(ports.begin(), ports.end()), ports.end());
  return Result<std::vector<std::uint16_t>>(ports);
}

inline bool parse_nonneg_int(std::string_view s, std::int64_t& out) {
  if (s.empty() || s.size() > 18) return false;
  std::int64_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Set-Cookie / Set-Cookie2 parsing

namespace detail {

// Tracks duplicate attributes within one cookie. v1 treats a repeat with a
// different value as an error; an identical repeat is ignored. v0 lets the
// later occurrence win (the original spec leaves this undefined).
struct SeenAttrs {
  std::vector<std::pair<std::string, std::string>> seen;  // lower name -> raw

  // Returns: 0 = first occurrence, 1 = identical repeat, -1 = conflict.
  int note(const std::string& lower_name, const std::string& raw, ParseMode mode) {
    for (auto& entry : seen) {
      if (entry.first != lower_name) continue;
      if (mode == ParseMode::V1) return entry.second == raw ? 1 : -1;
      entry.second = raw;
      return 0;  // v0: last occurrence wins
    }
    seen.emplace_back(lower_name, raw);
    return 0;
  }
};

}  // namespace detail

// Parses one Set-Cookie (mode V0) or Set-Cookie2 (mode V1) header value.
// A top-level comma separates folded cookies, except inside an unquoted
// Expires date, which is scanned through to the next ';'.
inline Result<std::vector<CookieSpec>> parse_set_cookie(std::string_view header,
                                                        ParseMode mode) {
  using detail::AttrValue;
  using detail::trim;
  using RV = Result<std::vector<CookieSpec>>;

  std::vector<CookieSpec> cookies;
  std::size_t i = 0;
  bool parsed_any = false;

  while (true) {
    while (i < header.size() && (detail::is_ws(header[i]) || header[i] == ',')) ++i;
    if (i >= header.size()) break;

    // --- NAME=VALUE ---
    const std::size_t name_start = i;
    while (i < header.size() && header[i] != '=' && header[i] != ';' &&
           header[i] != ',') {
      ++i;
    }
    if (i >= header.size() || header[i] != '=') {
      return make_error<std::vector<CookieSpec>>(ErrorClass::MissingNameValue,
                                                 "cookie lacks NAME=VALUE");
    }
    const std::string name(trim(header.substr(name_start, i - name_start)));
    ++i;  // '='
    if (name.empty()) {
      return make_error<std::vector<CookieSpec>>(ErrorClass::MissingNameValue,
                                                 "empty cookie name");
    }
    if (name.front() == '$') {
      return make_error<std::vector<CookieSpec>>(
          ErrorClass::DollarName, "cookie name must not begin with '$': " + name);
    }
    if (detail::contains_ws(name)) {
      return make_error<std::vector<CookieSpec>>(
          ErrorClass::InvalidName, "whitespace inside cookie name: " + name);
    }

    auto value = detail::scan_value(header, i, /*stop_at_comma=*/true);
    if (!value.ok()) return RV(value.error());
    if (!value.value().quoted && detail::contains_ws(value.value().raw)) {
      return make_error<std::vector<CookieSpec>>(
          ErrorClass::InvalidValue, "whitespace inside unquoted cookie value");
    }

    CookieSpec spec;
    spec.name = name;
    spec.value = value.value().raw;
    spec.version = mode == ParseMode::V1 ? 1 : 0;
    detail::SeenAttrs seen;

    // --- attributes ---
    while (i < header.size() && header[i] == ';') {
      ++i;
      while (i < header.size() && detail::is_ws(header[i])) ++i;
      const std::size_t attr_start = i;
      while (i < header.size() && header[i] != '=' && header[i] != ';' &&
             header[i] != ',') {
        ++i;
      }
      const std::string attr(trim(header.substr(attr_start, i - attr_start)));
      const std::string key = detail::lower(attr);
      const bool has_value = i < header.size() && header[i] == '=';

      if (!has_value) {
        if (attr.empty()) continue;  // tolerate ";;"
        if (key == "secure") {
          spec.secure = true;
        } else if (mode == ParseMode::V1 && key == "discard") {
          spec.discard = true;
        } else if (mode == ParseMode::V1 && key == "port") {
          const int dup = seen.note(key, "", mode);
          if (dup < 0) {
            return make_error<std::vector<CookieSpec>>(
                ErrorClass::ConflictingAttribute, "conflicting Port attribute");
          }
          if (dup == 0) spec.port_spec = {PortSpec::Kind::SamePortOnly, {}, std::nullopt};
        } else {
          spec.extras.push_back({attr, std::nullopt});
        }
        continue;
      }

      ++i;  // '='

      // Expires gets the special comma-tolerant scan in both modes: v0 dates
      // embed a comma, and v1 headers inherit the attribute via RFC-2109
      // style Set-Cookie lines.
      if (key == "expires") {
        auto v = detail::scan_value(header, i, /*stop_at_comma=*/false);
        if (!v.ok()) return RV(v.error());
        const int dup = seen.note(key, v.value().raw, mode);
        if (dup < 0) {
          return make_error<std::vector<CookieSpec>>(
              ErrorClass::ConflictingAttribute, "conflicting Expires attribute");
        }
        if (dup == 1) continue;
        auto when = parse_http_date(v.value().decoded);
        if (!when.ok()) return RV(when.error());
        spec.expires = when.value();
        continue;
      }

      auto v = detail::scan_value(header, i, /*stop_at_comma=*/true);
      if (!v.ok()) return RV(v.error());
      const AttrValue& av = v.value();

      const bool v1_attr =
          mode == ParseMode::V1 &&
          (key == "comment" || key == "commenturl" || key == "domain" ||
           key == "max-age" || key == "path" || key == "port" || key == "version");
      const bool v0_attr = mode == ParseMode::V0 && (key == "domain" || key == "path");

      if (!v0_attr && !v1_attr) {
        if (key == "secure" || (mode == ParseMode::V1 && key == "discard")) {
          return make_error<std::vector<CookieSpec>>(
              ErrorClass::BadAttributeValue, attr + " takes no value");
        }
        spec.extras.push_back({attr, av.raw});
        continue;
      }

      const int dup = seen.note(key, av.raw, mode);
      if (dup < 0) {
        return make_error<std::vector<CookieSpec>>(
            ErrorClass::ConflictingAttribute, "conflicting " + attr + " attribute");
      }
      if (dup == 1) continue;

      if (key == "domain") {
        auto pattern = DomainPattern::parse(av.decoded);
        if (!pattern) {
          return make_error<std::vector<CookieSpec>>(
              ErrorClass::BadAttributeValue, "malformed Domain: " + av.decoded);
        }
        spec.domain = *pattern;
      } else if (key == "path") {
        spec.path = av.decoded;
      } else if (key == "comment") {
        spec.comment = av.decoded;
      } else if (key == "commenturl") {
        spec.comment_url = av.decoded;
      } else if (key == "max-age") {
        std::int64_t seconds = 0;
        if (!detail::parse_nonneg_int(av.decoded, seconds)) {
          return make_error<std::vector<CookieSpec>>(
              ErrorClass::BadAttributeValue, "Max-Age must be a non-negative integer");
        }
        spec.max_age = seconds;
      } else if (key == "port") {
        auto ports = detail::parse_port_list(av.decoded);
        if (!ports.ok()) return RV(ports.error());
        spec.port_spec = {PortSpec::Kind::PortList, ports.value(), av.decoded};
      } else if (key == "version") {
        std::int64_t version = -1;
        if (!detail::parse_nonneg_int(av.decoded, version) || version != 1) {
          return make_error<std::vector<CookieSpec>>(
              ErrorClass::BadVersion, "Version must be 1: " + av.decoded);
        }
        spec.version = 1;
      }
    }

    cookies.push_back(std::move(spec));
    parsed_any = true;

    if (i < header.size() && header[i] == ',') {
      ++i;
      continue;
    }
    if (i >= header.size()) break;
  }

  if (!parsed_any) {
    return make_error<std::vector<CookieSpec>>(ErrorClass::MissingNameValue,
                                               "no cookie in header");
  }
  return Result<std::vector<CookieSpec>>(std::move(cookies));
}

// ---------------------------------------------------------------------------
// Cookie request-header parsing

struct CookieRequestEntry {
  std::string name;
  std::string value;  // raw wire text, quotes preserved
  std::optional<std::string> path;
  std::optional<std::string> domain;
  bool port_present = false;              // a $Port marker appeared
  std::optional<std::string> port;        // its value, when one was given

  friend bool operator==(const CookieRequestEntry&, const CookieRequestEntry&) = default;
};

struct CookieRequestParse {
  int version = 0;
  std::vector<CookieRequestEntry> entries;

  friend bool operator==(const CookieRequestParse&, const CookieRequestParse&) = default;
};

// Parses all Cookie header instances of one request. Folded and separate
// headers parse identically: both ';' and ',' separate items.
inline Result<CookieRequestParse> parse_cookie_request(
    const std::vector<std::string>& headers) {
  using detail::trim;
  using RP = Result<CookieRequestParse>;

  std::string joined;
  for (const auto& h : headers) {
    if (!joined.empty()) joined += ", ";
    joined += h;
  }

  CookieRequestParse out;
  bool version_set = false;
  std::string_view s = joined;
  std::size_t i = 0;

  while (true) {
    while (i < s.size() && (detail::is_ws(s[i]) || s[i] == ';' || s[i] == ',')) ++i;
    if (i >= s.size()) break;

    const std::size_t name_start = i;
    while (i < s.size() && s[i] != '=' && s[i] != ';' && s[i] != ',') ++i;
    const std::string name(trim(s.substr(name_start, i - name_start)));
    const bool has_value = i < s.size() && s[i] == '=';

    if (!has_value) {
      if (detail::iequals(name, "$port")) {
        if (out.entries.empty()) {
          return make_error<CookieRequestParse>(
              ErrorClass::OrphanDollarAttribute, "$Port before any cookie");
        }
        out.entries.back().port_present = true;
        continue;
      }
      return make_error<CookieRequestParse>(ErrorClass::BareToken,
                                            "bare token in Cookie header: " + name);
    }

    ++i;  // '='
    auto v = detail::scan_value(s, i, /*stop_at_comma=*/true);
    if (!v.ok()) return RP(v.error());
    const detail::AttrValue& av = v.value();

    if (!name.empty() && name.front() == '$') {
      if (detail::iequals(name, "$version")) {
        std::int64_t version = -1;
        if (!detail::parse_nonneg_int(av.decoded, version) ||
            (version != 0 && version != 1)) {
          return make_error<CookieRequestParse>(ErrorClass::BadVersion,
                                                "$Version must be 0 or 1");
        }
        if (out.entries.empty() && !version_set) {
          out.version = static_cast<int>(version);
          version_set = true;
        } else if (version != out.version) {
          return make_error<CookieRequestParse>(ErrorClass::ConflictingAttribute,
                                                "conflicting $Version");
        }
        continue;
      }
      if (out.entries.empty()) {
        return make_error<CookieRequestParse>(ErrorClass::OrphanDollarAttribute,
                                              name + " before any cookie");
      }
      CookieRequestEntry& entry = out.entries.back();
      auto bind = [&](std::optional<std::string>& slot) -> std::optional<Error> {
        if (slot && *slot != av.decoded) {
          return Error{ErrorClass::ConflictingAttribute, "conflicting " + name, 0};
        }
        slot = av.decoded;
        return std::nullopt;
      };
      std::optional<Error> err;
      if (detail::iequals(name, "$path")) {
        err = bind(entry.path);
      } else if (detail::iequals(name, "$domain")) {
        err = bind(entry.domain);
      } else if (detail::iequals(name, "$port")) {
        entry.port_present = true;
        err = bind(entry.port);
      } else {
        return make_error<CookieRequestParse>(ErrorClass::DollarName,
                                              "unknown $-attribute: " + name);
      }
      if (err) return RP(*err);
      continue;
    }

    if (name.empty()) {
      return make_error<CookieRequestParse>(ErrorClass::MissingNameValue,
                                            "empty cookie name");
    }
    if (!av.quoted && detail::contains_ws(av.raw)) {
      return make_error<CookieRequestParse>(
          ErrorClass::InvalidValue, "whitespace inside unquoted cookie value");
    }
    CookieRequestEntry entry;
    entry.name = name;
    entry.value = av.raw;
    out.entries.push_back(std::move(entry));
  }

  return Result<CookieRequestParse>(std::move(out));
}

// Parses a Cookie2 request header, which only ever advertises a version.
inline Result<int> parse_cookie2_header(std::string_view header) {
  using detail::trim;
  std::string_view s = trim(header);
  const std::size_t eq = s.find('=');
  if (eq == std::string_view::npos ||
      !detail::iequals(trim(s.substr(0, eq)), "$version")) {
    return make_error<int>(ErrorClass::BadVersion, "Cookie2 must carry $Version");
  }
  std::size_t i = eq + 1;
  auto v = detail::scan_value(s, i, /*stop_at_comma=*/true);
  if (!v.ok()) return Result<int>(v.error());
  if (i != s.size()) {
    return make_error<int>(ErrorClass::BadVersion, "trailing text in Cookie2");
  }
  std::int64_t version = -1;
  if (!detail::parse_nonneg_int(v.value().decoded, version) || version != 1) {
    return make_error<int>(ErrorClass::BadVersion, "Cookie2 $Version must be 1");
  }
  return Result<int>(static_cast<int>(version));
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline std::string quote(std::string_view s) {
  std::string out;
  out.push_back('"');
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

// Attribute values are emitted bare whenever the unquoted scanner would read
// them back unchanged; only separators, whitespace, quotes and control bytes
// force quoting. Keeps classic forms like Path=/ and Domain=.shop.com.
inline std::string attr_text(std::string_view s) {
  bool bare = !s.empty();
  for (char c : s) {
    if (c == ';' || c == ',' || c == '"' ||
        static_cast<unsigned char>(c) <= 0x20 ||
        static_cast<unsigned char>(c) >= 0x7f) {
      bare = false;
      break;
    }
  }
  return bare ? std::string(s) : quote(s);
}

}  // namespace detail

// Emits the canonical header text: NAME=VALUE, then known attributes in
// alphabetical order, then unrecognized extras verbatim in recorded order.
inline Result<std::string> serialize_set_cookie(const CookieSpec& spec) {
  if (spec.name.empty() || spec.name.front() == '$' ||
      detail::contains_ws(spec.name) ||
      spec.name.find_first_of("=;,") != std::string::npos) {
    return make_error<std::string>(ErrorClass::InvalidName,
                                   "unserializable cookie name: " + spec.name);
  }
  const bool quoted_value =
      spec.value.size() >= 2 && spec.value.front() == '"' && spec.value.back() == '"';
  if (!quoted_value || spec.version == 0) {
    if (spec.value.find_first_of(";,") != std::string::npos ||
        detail::contains_ws(spec.value)) {
      return make_error<std::string>(
          ErrorClass::InvalidValue,
          "v0 cookie value may not contain semicolon, comma, or whitespace");
    }
  }

  std::string out = spec.name + "=" + spec.value;
  if (spec.comment) out += "; Comment=" + detail::attr_text(*spec.comment);
  if (spec.comment_url) out += "; CommentURL=" + detail::attr_text(*spec.comment_url);
  if (spec.discard) out += "; Discard";
  if (spec.domain) out += "; Domain=" + detail::attr_text(spec.domain->to_string());
  if (spec.expires) out += "; Expires=" + format_http_date(*spec.expires);
  if (spec.max_age) out += "; Max-Age=" + std::to_string(*spec.max_age);
  if (spec.path) out += "; Path=" + detail::attr_text(*spec.path);
  if (spec.port_spec.kind == PortSpec::Kind::SamePortOnly) {
    out += "; Port";
  } else if (spec.port_spec.kind == PortSpec::Kind::PortList) {
    std::string list;
    if (spec.port_spec.raw) {
      list = *spec.port_spec.raw;
    } else {
      for (auto p : spec.port_spec.ports) {
        if (!list.empty()) list.push_back(',');
        list += std::to_string(p);
      }
    }
    out += "; Port=" + detail::quote(list);
  }
  if (spec.secure) out += "; Secure";
  if (spec.version == 1) out += "; Version=1";
  for (const auto& extra : spec.extras) {
    out += "; " + extra.name;
    if (extra.value) out += "=" + *extra.value;
  }
  return Result<std::string>(std::move(out));
}

// What serialize_cookie_header needs to know about one selected cookie.
// The jar converts its StoredCookie entries into these.
struct CookieSendItem {
  std::string name;
  std::string value;                      // raw wire text
  std::string path;                       // effective path, always known
  std::optional<std::string> domain;      // set iff a Domain attribute was received
  bool has_port = false;                  // a Port attribute was received
  std::optional<std::string> port_text;   // its original value form, when it had one
};

// version 0: plain pairs. version 1: $Version first, then each cookie with
// $Path always and $Domain/$Port only when the corresponding attribute was
// received, echoing the Port value verbatim.
inline std::string serialize_cookie_header(const std::vector<CookieSendItem>& selected,
                                           int version) {
  if (selected.empty()) return "";
  std::string out;
  if (version == 1) out = "$Version=1";
  for (const auto& item : selected) {
    if (!out.empty()) out += "; ";
    out += item.name + "=" + item.value;
    if (version == 1) {
      out += "; $Path=" + detail::quote(item.path);
      if (item.domain) out += "; $Domain=" + detail::quote(*item.domain);
      if (item.has_port) {
        out += "; $Port";
        if (item.port_text) out += "=" + detail::quote(*item.port_text);
      }
    }
  }
  return out;
}

}  // namespace statejar
