// statejar: version negotiation, historical client emulators, and the
// caching-proxy rule.
//
// The emulators reproduce the two documented ways v0 browsers mangled a
// Set-Cookie header that carried v1 attributes: Navigator 3 kept the first
// attribute-value pair, MSIE 3 kept the last pair it did not recognize.
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "statejar/header.hpp"
#include "statejar/result.hpp"

namespace statejar {

// ---------------------------------------------------------------------------
// Server-side negotiation

enum class HeaderPlan { SendV0Only, SendV1Only, SendBoth };

inline const char* to_string(HeaderPlan p) {
  switch (p) {
    case HeaderPlan::SendV0Only: return "SendV0Only";
    case HeaderPlan::SendV1Only: return "SendV1Only";
    case HeaderPlan::SendBoth: return "SendBoth";
  }
  return "Unknown";
}

struct ServerCaps {
  bool v1_capable = false;
};

// The cookie-bearing request headers a server sees, when present.
struct RequestCookieHeaders {
  std::optional<std::string> cookie;
  std::optional<std::string> cookie2;
};

// Chooses which Set-Cookie headers to send. First contact (no cookie headers
// at all) gets both, so either kind of client can proceed; afterwards the
// client's own headers reveal what it understands. A v0 Cookie accompanied
// by a Cookie2 advertisement marks a v1-capable client still holding old
// cookies.
inline HeaderPlan negotiate_server_headers(const ServerCaps& server,
                                           const RequestCookieHeaders& request) {
  if (!server.v1_capable) return HeaderPlan::SendV0Only;
  if (!request.cookie && !request.cookie2) return HeaderPlan::SendBoth;
  if (request.cookie) {
    auto parsed = parse_cookie_request({*request.cookie});
    if (parsed.ok() && parsed.value().version >= 1) return HeaderPlan::SendV1Only;
  }
  if (request.cookie2) {
    auto advert = parse_cookie2_header(*request.cookie2);
    if (advert.ok()) return HeaderPlan::SendV1Only;
  }
  return HeaderPlan::SendV0Only;
}

// ---------------------------------------------------------------------------
// Historical client emulation

enum class ClientFlavor { NavigatorV3, MsieV3, Rfc2965 };

inline const char* to_string(ClientFlavor f) {
  switch (f) {
    case ClientFlavor::NavigatorV3: return "navigator";
    case ClientFlavor::MsieV3: return "msie";
    case ClientFlavor::Rfc2965: return "rfc2965";
  }
  return "unknown";
}

inline std::optional<ClientFlavor> client_flavor_from_name(std::string_view name) {
  if (name == "navigator") return ClientFlavor::NavigatorV3;
  if (name == "msie") return ClientFlavor::MsieV3;
  if (name == "rfc2965") return ClientFlavor::Rfc2965;
  return std::nullopt;
}

enum class SetCookieHeaderKind { SetCookie, SetCookie2 };

// What a client ended up storing from one Set-Cookie header, or why nothing.
struct ClientStoreOutcome {
  bool stored = false;
  std::string name;
  std::string value;
  std::string diagnostic;  // set when !stored

  static ClientStoreOutcome ignored(std::string why) {
    ClientStoreOutcome out;
    out.diagnostic = std::move(why);
    return out;
  }

  static ClientStoreOutcome kept(std::string name, std::string value) {
    ClientStoreOutcome out;
    out.stored = true;
    out.name = std::move(name);
    out.value = std::move(value);
    return out;
  }

  friend bool operator==(const ClientStoreOutcome&, const ClientStoreOutcome&) = default;
};

namespace detail {

// The naive v0 split both old browsers used: ';'-separated segments, '='
// splits each into name and value, whitespace trimmed around the name only
// at segment edges. Values are taken verbatim, quotes and all.
struct NaivePair {
  std::string name;
  std::string value;
  bool has_value = false;
};

inline std::vector<NaivePair> naive_pairs(std::string_view header) {
  std::vector<NaivePair> pairs;
  std::size_t pos = 0;
  while (pos <= header.size()) {
    std::size_t semi = header.find(';', pos);
    if (semi == std::string_view::npos) semi = header.size();
    const std::string_view segment = trim(header.substr(pos, semi - pos));
    if (!segment.empty()) {
      NaivePair pair;
      const std::size_t eq = segment.find('=');
      if (eq == std::string_view::npos) {
        pair.name = std::string(trim(segment));
      } else {
        pair.name = std::string(trim(segment.substr(0, eq)));
        pair.value = std::string(trim(segment.substr(eq + 1)));
        pair.has_value = true;
      }
      pairs.push_back(std::move(pair));
    }
    if (semi == header.size()) break;
    pos = semi + 1;
  }
  return pairs;
}

inline bool v0_attribute_name(std::string_view name) {
  return iequals(name, "expires") || iequals(name, "domain") ||
         iequals(name, "path") || iequals(name, "secure");
}

}  // namespace detail

// Replays how one historical client stored the header. NavigatorV3 keeps the
// first pair; MsieV3 keeps the last pair whose name is not a v0 attribute;
// Rfc2965 parses properly. The two old flavors ignore Set-Cookie2 entirely.
inline ClientStoreOutcome emulate_client(
    ClientFlavor flavor, std::string_view set_cookie_text,
    SetCookieHeaderKind kind = SetCookieHeaderKind::SetCookie) {
  if (flavor == ClientFlavor::Rfc2965) {
    auto parsed = parse_set_cookie(set_cookie_text,
                                   kind == SetCookieHeaderKind::SetCookie2
                                       ? ParseMode::V1
                                       : ParseMode::V0);
    if (!parsed.ok()) return ClientStoreOutcome::ignored(parsed.error().message);
    const CookieSpec& first = parsed.value().front();
    return ClientStoreOutcome::kept(first.name, first.value);
  }

  if (kind == SetCookieHeaderKind::SetCookie2) {
    return ClientStoreOutcome::ignored("v0 client ignores Set-Cookie2");
  }

  const auto pairs = detail::naive_pairs(set_cookie_text);
  if (pairs.empty() || !pairs.front().has_value || pairs.front().name.empty()) {
    return ClientStoreOutcome::ignored("no NAME=VALUE pair");
  }

  if (flavor == ClientFlavor::NavigatorV3) {
    return ClientStoreOutcome::kept(pairs.front().name, pairs.front().value);
  }

  // MsieV3: every segment that is not a recognized v0 attribute competes to
  // be the cookie, and the last one wins.
  const detail::NaivePair* winner = &pairs.front();
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    if (detail::v0_attribute_name(pairs[i].name)) continue;
    winner = &pairs[i];
  }
  return ClientStoreOutcome::kept(winner->name, winner->value);
}

// ---------------------------------------------------------------------------
// Caching proxies

// The cache-relevant facts about one response, header-abstract.
struct ResponseCacheMeta {
  bool has_set_cookie = false;
  bool no_store = false;          // personalized; never cache anything
  bool cookie_shareable = false;  // origin explicitly allows caching the header
};

struct CacheDecision {
  bool store_body = false;
  bool store_set_cookie = false;

  friend bool operator==(const CacheDecision&, const CacheDecision&) = default;
};

// A proxy may cache the page but must not store the Set-Cookie header with
// it unless the origin explicitly marked the header shareable.
inline CacheDecision cache_decision(const ResponseCacheMeta& meta,
                                    bool body_cacheable) {
  if (meta.no_store) return {false, false};
  CacheDecision out;
  out.store_body = body_cacheable;
  out.store_set_cookie = out.store_body && meta.has_set_cookie && meta.cookie_shareable;
  return out;
}

}  // namespace statejar
