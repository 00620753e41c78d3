// statejar: the cookie jar — storage, replacement, expiry, session
// semantics, selection ordering, and the persistent cookie file.
//
// Entries are kept in insertion order; replacement happens in place, so
// iteration order is deterministic and selection needs no hidden sequence
// numbers. The clock is always passed in, never read from the system.
#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "statejar/context.hpp"
#include "statejar/cookie.hpp"
#include "statejar/header.hpp"
#include "statejar/host.hpp"
#include "statejar/matching.hpp"
#include "statejar/result.hpp"

namespace statejar {

// A cookie at rest. The received Domain attribute is normalized at store
// time (v1 gains its leading dot), so effective_domain always mirrors
// spec.domain when one was received.
struct StoredCookie {
  CookieSpec spec;
  HostName origin_host;
  int origin_port = 80;
  DomainPattern effective_domain;
  std::string effective_path;
  std::int64_t created_at = 0;
  bool is_session = true;

  // Absolute expiry instant; session cookies have none.
  std::optional<std::int64_t> expiry() const {
    if (is_session) return std::nullopt;
    if (spec.max_age) return created_at + *spec.max_age;
    return spec.expires;
  }

  bool expired_at(std::int64_t now) const {
    const auto when = expiry();
    return when && *when <= now;
  }

  CookieSendItem to_send_item() const {
    CookieSendItem item;
    item.name = spec.name;
    item.value = spec.value;
    item.path = effective_path;
    if (spec.domain) item.domain = spec.domain->to_string();
    if (spec.port_spec.kind == PortSpec::Kind::SamePortOnly) {
      item.has_port = true;
    } else if (spec.port_spec.kind == PortSpec::Kind::PortList) {
      item.has_port = true;
      if (spec.port_spec.raw) {
        item.port_text = spec.port_spec.raw;
      } else {
        std::string list;
        for (auto p : spec.port_spec.ports) {
          if (!list.empty()) list.push_back(',');
          list += std::to_string(p);
        }
        item.port_text = list;
      }
    }
    return item;
  }

  friend bool operator==(const StoredCookie&, const StoredCookie&) = default;
};

struct StoreResult {
  enum class Kind { Stored, Replaced, Deleted, Rejected };

  Kind kind;
  DomainReject reason = DomainReject::NotTailMatch;  // meaningful when Rejected

  friend bool operator==(const StoreResult&, const StoreResult&) = default;
};

inline const char* to_string(StoreResult::Kind k) {
  switch (k) {
    case StoreResult::Kind::Stored: return "Stored";
    case StoreResult::Kind::Replaced: return "Replaced";
    case StoreResult::Kind::Deleted: return "Deleted";
    case StoreResult::Kind::Rejected: return "Rejected";
  }
  return "Unknown";
}

struct JarLimits {
  std::size_t total = 300;
  std::size_t per_domain = 20;
};

// The default path when a Set-Cookie carries none: the directory of the
// request URL, up to and including the last '/'.
inline std::string default_cookie_path(std::string_view request_path) {
  const std::size_t slash = request_path.rfind('/');
  if (request_path.empty() || request_path.front() != '/' ||
      slash == std::string_view::npos) {
    return "/";
  }
  return std::string(request_path.substr(0, slash + 1));
}

class Jar {
 public:
  Jar() = default;
  explicit Jar(JarLimits limits) : limits_(limits) {}

  const std::vector<StoredCookie>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const JarLimits& limits() const { return limits_; }

  // Stores one parsed cookie received on ctx at instant `now`. Domain
  // validation is re-checked here as defense in depth; policy acceptance is
  // the caller's job.
  StoreResult store(const CookieSpec& incoming, const RequestContext& ctx,
                    std::int64_t now) {
    CookieSpec spec = incoming;
    DomainPattern domain = DomainPattern::from_host(effective_host(ctx.host));
    if (spec.domain) {
      const DomainVerdict verdict = spec.version == 1
                                        ? validate_domain_v1(ctx.host, *spec.domain)
                                        : validate_domain_v0(ctx.host, *spec.domain);
      if (!verdict.accepted) {
        return {StoreResult::Kind::Rejected, verdict.reason};
      }
      if (spec.version == 1) spec.domain = spec.domain->with_leading_dot();
      domain = *spec.domain;
    }

    StoredCookie entry;
    entry.spec = std::move(spec);
    entry.origin_host = ctx.host;
    entry.origin_port = ctx.port;
    entry.effective_domain = domain;
    entry.effective_path =
        entry.spec.path ? *entry.spec.path : default_cookie_path(ctx.path);
    entry.created_at = now;
    entry.is_session = session_like(entry.spec);

    // Max-Age=0 and an already-past Expires both mean "forget this cookie".
    if (!entry.is_session && *entry.expiry() <= now) {
      erase_key(entry);
      return {StoreResult::Kind::Deleted};
    }

    for (auto& existing : entries_) {
      if (same_key(existing, entry)) {
        existing = std::move(entry);
        return {StoreResult::Kind::Replaced};
      }
    }
    entries_.push_back(std::move(entry));
    enforce_limits();
    return {StoreResult::Kind::Stored};
  }

  // Every live entry matching the request, most-specific path first; path
  // ties go to the earlier creation instant.
  std::vector<StoredCookie> select(const RequestContext& ctx, std::int64_t now) const {
    std::vector<StoredCookie> picked;
    for (const auto& entry : entries_) {
      if (matches(entry, ctx, now)) picked.push_back(entry);
    }
    std::stable_sort(picked.begin(), picked.end(),
                     [](const StoredCookie& a, const StoredCookie& b) {
                       if (a.effective_path.size() != b.effective_path.size()) {
                         return a.effective_path.size() > b.effective_path.size();
                       }
                       return a.created_at < b.created_at;
                     });
    return picked;
  }

  static bool matches(const StoredCookie& entry, const RequestContext& ctx,
                      std::int64_t now) {
    return !entry.expired_at(now) &&
           domain_match(ctx.host, entry.effective_domain) &&
           path_match(ctx.path, entry.effective_path) &&
           port_match(ctx.port, entry.origin_port, entry.spec.port_spec) &&
           (!entry.spec.secure || ctx.secure_channel);
  }

  std::size_t purge_expired(std::int64_t now) {
    return erase_if([now](const StoredCookie& e) { return e.expired_at(now); });
  }

  // Session end drops session cookies and everything marked Discard, which
  // overrides any Max-Age still in the future.
  std::size_t end_session() {
    return erase_if(
        [](const StoredCookie& e) { return e.is_session || e.spec.discard; });
  }

  // --- persistent cookie file -------------------------------------------
  // Line-oriented, tab-separated, '#' comments. Session cookies are never
  // written. Field order is documented in docs/cookie-file.md and frozen by
  // a golden-file test.

  std::string save() const {
    std::string out;
    out += "# statejar cookie file\n";
    out +=
        "# version\tname\tvalue\tdomain\tdomain-attr\tpath\tpath-attr\t"
        "expires\tmax-age\tcreated\torigin-host\torigin-port\tsecure\tport\t"
        "comment\tcomment-url\t[extras...]\n";
    for (const auto& e : entries_) {
      if (e.is_session || e.spec.discard) continue;
      std::vector<std::string> fields;
      fields.push_back(std::to_string(e.spec.version));
      fields.push_back(escape_field(e.spec.name));
      fields.push_back(escape_field(e.spec.value));
      fields.push_back(escape_field(e.effective_domain.to_string()));
      fields.push_back(e.spec.domain ? "1" : "0");
      fields.push_back(escape_field(e.effective_path));
      fields.push_back(e.spec.path ? "1" : "0");
      fields.push_back(e.spec.expires ? std::to_string(*e.spec.expires) : "-");
      fields.push_back(e.spec.max_age ? std::to_string(*e.spec.max_age) : "-");
      fields.push_back(std::to_string(e.created_at));
      fields.push_back(escape_field(e.origin_host.text()));
      fields.push_back(std::to_string(e.origin_port));
      fields.push_back(e.spec.secure ? "1" : "0");
      switch (e.spec.port_spec.kind) {
        case PortSpec::Kind::AnyPort: fields.push_back("-"); break;
        case PortSpec::Kind::SamePortOnly: fields.push_back("*"); break;
        case PortSpec::Kind::PortList:
          fields.push_back(escape_field(e.spec.port_spec.raw
                                            ? *e.spec.port_spec.raw
                                            : port_list_text(e.spec.port_spec)));
          break;
      }
      fields.push_back(e.spec.comment ? escape_field(*e.spec.comment) : "-");
      fields.push_back(e.spec.comment_url ? escape_field(*e.spec.comment_url) : "-");
      for (const auto& extra : e.spec.extras) {
        std::string text = extra.name;
        if (extra.value) text += "=" + *extra.value;
        fields.push_back(escape_field(text));
      }
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back('\t');
        out += fields[i];
      }
      out.push_back('\n');
    }
    return out;
  }

  static Result<Jar> load(std::string_view bytes, JarLimits limits = {}) {
    Jar jar(limits);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= bytes.size()) {
      std::size_t eol = bytes.find('\n', pos);
      if (eol == std::string_view::npos) eol = bytes.size();
      const std::string_view line = bytes.substr(pos, eol - pos);
      ++line_no;
      pos = eol + 1;
      if (line.empty() || line.front() == '#') {
        if (eol == bytes.size()) break;
        continue;
      }
      auto entry = parse_line(line, line_no);
      if (!entry.ok()) return Result<Jar>(entry.error());
      jar.entries_.push_back(std::move(entry).value());
      if (eol == bytes.size()) break;
    }
    return Result<Jar>(std::move(jar));
  }

 private:
  static bool session_like(const CookieSpec& spec) {
    if (spec.discard) return true;
    return spec.version == 1 ? !spec.max_age : !spec.expires;
  }

  static bool same_key(const StoredCookie& a, const StoredCookie& b) {
    return a.spec.name == b.spec.name &&
           a.effective_domain.text() == b.effective_domain.text() &&
           a.effective_path == b.effective_path;
  }

  void erase_key(const StoredCookie& key) {
    erase_if([&](const StoredCookie& e) { return same_key(e, key); });
  }

  template <typename Pred>
  std::size_t erase_if(Pred pred) {
    const auto it = std::remove_if(entries_.begin(), entries_.end(), pred);
    const std::size_t removed = static_cast<std::size_t>(entries_.end() - it);
    entries_.erase(it, entries_.end());
    return removed;
  }

  // Soft caps: oldest-created entries go first, within the crowded domain
  // before globally.
  void enforce_limits() {
    const std::string domain = entries_.back().effective_domain.text();
    while (count_domain(domain) > limits_.per_domain) {
      evict_oldest([&](const StoredCookie& e) {
        return e.effective_domain.text() == domain;
      });
    }
    while (entries_.size() > limits_.total) {
      evict_oldest([](const StoredCookie&) { return true; });
    }
  }

  std::size_t count_domain(const std::string& domain) const {
    std::size_t n = 0;
    for (const auto& e : entries_) {
      if (e.effective_domain.text() == domain) ++n;
    }
    return n;
  }

  template <typename Pred>
  void evict_oldest(Pred pred) {
    auto victim = entries_.end();
    for (auto it = entries_.begin(); it != entries_.end(); ++it) {
      if (!pred(*it)) continue;
      if (victim == entries_.end() || it->created_at < victim->created_at) {
        victim = it;
      }
    }
    if (victim != entries_.end()) entries_.erase(victim);
  }

  static std::string port_list_text(const PortSpec& spec) {
    std::string list;
    for (auto p : spec.ports) {
      if (!list.empty()) list.push_back(',');
      list += std::to_string(p);
    }
    return list;
  }

  // Tabs, newlines and backslashes are escaped; a leading '-' is escaped so
  // a literal field is never mistaken for the absent marker.
  static std::string escape_field(std::string_view raw) {
    std::string out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const char c = raw[i];
      if (c == '\\') out += "\\\\";
      else if (c == '\t') out += "\\t";
      else if (c == '\n') out += "\\n";
      else if (c == '-' && i == 0) out += "\\-";
      else out.push_back(c);
    }
    return out;
  }

  static std::string unescape_field(std::string_view text) {
    std::string out;
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] != '\\' || i + 1 >= text.size()) {
        out.push_back(text[i]);
        continue;
      }
      const char next = text[++i];
      if (next == 't') out.push_back('\t');
      else if (next == 'n') out.push_back('\n');
      else out.push_back(next);  // '\\' and '-'
    }
    return out;
  }

  static Result<StoredCookie> parse_line(std::string_view line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t tab = line.find('\t', pos);
      if (tab == std::string_view::npos) tab = line.size();
      fields.emplace_back(line.substr(pos, tab - pos));
      if (tab == line.size()) break;
      pos = tab + 1;
    }
    if (fields.size() < 16) {
      return make_error<StoredCookie>(ErrorClass::MalformedLine,
                                      "expected at least 16 fields", line_no);
    }

    const auto absent = [](const std::string& f) { return f == "-"; };
    const auto integer = [&](const std::string& f, std::int64_t& out) {
      std::size_t i = 0;
      bool neg = false;
      if (i < f.size() && f[i] == '-') { neg = true; ++i; }
      if (i >= f.size()) return false;
      std::int64_t v = 0;
      for (; i < f.size(); ++i) {
        if (f[i] < '0' || f[i] > '9') return false;
        v = v * 10 + (f[i] - '0');
      }
      out = neg ? -v : v;
      return true;
    };

    StoredCookie e;
    std::int64_t version = -1;
    if (!integer(fields[0], version) || (version != 0 && version != 1)) {
      return make_error<StoredCookie>(ErrorClass::BadVersion,
                                      "cookie-file version must be 0 or 1", line_no);
    }
    e.spec.version = static_cast<int>(version);
    e.spec.name = unescape_field(fields[1]);
    e.spec.value = unescape_field(fields[2]);

    auto domain = DomainPattern::parse(unescape_field(fields[3]));
    if (!domain) {
      return make_error<StoredCookie>(ErrorClass::MalformedLine,
                                      "bad domain field", line_no);
    }
    e.effective_domain = *domain;
    if (fields[4] == "1") e.spec.domain = *domain;
    else if (fields[4] != "0") {
      return make_error<StoredCookie>(ErrorClass::MalformedLine,
                                      "domain-attr flag must be 0 or 1", line_no);
    }

    e.effective_path = unescape_field(fields[5]);
    if (fields[6] == "1") e.spec.path = e.effective_path;
    else if (fields[6] != "0") {
      return make_error<StoredCookie>(ErrorClass::MalformedLine,
                                      "path-attr flag must be 0 or 1", line_no);
    }

    std::int64_t number = 0;
    if (!absent(fields[7])) {
      if (!integer(fields[7], number)) {
        return make_error<StoredCookie>(ErrorClass::MalformedLine,
                                        "bad expires field", line_no);
      }
      e.spec.expires = number;
    }
    if (!absent(fields[8])) {
      if (!integer(fields[8], number) || number < 0) {
        return make_error<StoredCookie>(ErrorClass::MalformedLine,
                                        "bad max-age field", line_no);
      }
      e.spec.max_age = number;
    }
    if (!integer(fields[9], number)) {
      return make_error<StoredCookie>(ErrorClass::MalformedLine,
                                      "bad created field", line_no);
    }
    e.created_at = number;

    auto host = HostName::parse(unescape_field(fields[10]));
    if (!host) {
      return make_error<StoredCookie>(ErrorClass::MalformedLine,
                                      "bad origin-host field", line_no);
    }
    e.origin_host = *host;
    if (!integer(fields[11], number) || number < 1 || number > 65535) {
      return make_error<StoredCookie>(ErrorClass::MalformedLine,
                                      "bad origin-port field", line_no);
    }
    e.origin_port = static_cast<int>(number);

    if (fields[12] == "1") e.spec.secure = true;
    else if (fields[12] != "0") {
      return make_error<StoredCookie>(ErrorClass::MalformedLine,
                                      "secure flag must be 0 or 1", line_no);
    }

    if (fields[13] == "*") {
      e.spec.port_spec = {PortSpec::Kind::SamePortOnly, {}, std::nullopt};
    } else if (!absent(fields[13])) {
      const std::string raw = unescape_field(fields[13]);
      auto ports = detail::parse_port_list(raw);
      if (!ports.ok()) {
        return make_error<StoredCookie>(ErrorClass::MalformedLine,
                                        "bad port field", line_no);
      }
      e.spec.port_spec = {PortSpec::Kind::PortList, ports.value(), raw};
    }

    if (!absent(fields[14])) e.spec.comment = unescape_field(fields[14]);
    if (!absent(fields[15])) e.spec.comment_url = unescape_field(fields[15]);

    for (std::size_t i = 16; i < fields.size(); ++i) {
      const std::string text = unescape_field(fields[i]);
      const std::size_t eq = text.find('=');
      if (eq == std::string::npos) {
        e.spec.extras.push_back({text, std::nullopt});
      } else {
        e.spec.extras.push_back({text.substr(0, eq), text.substr(eq + 1)});
      }
    }

    e.is_session = session_like(e.spec);
    return Result<StoredCookie>(std::move(e));
  }

  std::vector<StoredCookie> entries_;
  JarLimits limits_;
};

}  // namespace statejar
