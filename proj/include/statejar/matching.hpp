// statejar: host/domain/path/port matching predicates for both cookie versions.
//
// Tail matching is done at label boundaries, so "notshop.com" never matches
// the pattern "shop.com". Single-label intranet hosts are qualified with
// ".local" before any rule is applied.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "statejar/cookie.hpp"
#include "statejar/host.hpp"

namespace statejar {

enum class DomainReject {
  NotTailMatch,
  TooBroad,        // v0 2-dot/3-dot rule
  TooManyLevels,   // v1 one-level rule
  IpHost,
};

inline const char* to_string(DomainReject r) {
  switch (r) {
    case DomainReject::NotTailMatch: return "NotTailMatch";
    case DomainReject::TooBroad: return "TooBroad";
    case DomainReject::TooManyLevels: return "TooManyLevels";
    case DomainReject::IpHost: return "IpHost";
  }
  return "Unknown";
}

struct DomainVerdict {
  bool accepted;
  DomainReject reason = DomainReject::NotTailMatch;  // meaningful when rejected

  static DomainVerdict accept() { return {true, DomainReject::NotTailMatch}; }
  static DomainVerdict reject(DomainReject r) { return {false, r}; }

  friend bool operator==(const DomainVerdict&, const DomainVerdict&) = default;
};

// Hosts with no embedded dot get ".local" appended, so flat intranet names
// can share cookies via Domain=.local. IP literals are left alone.
inline HostName effective_host(const HostName& host) {
  if (host.labels().size() == 1 && !host.is_ip()) {
    return *HostName::parse(host.labels().front() + ".local");
  }
  return host;
}

namespace detail {

inline bool label_suffix(const std::vector<std::string>& host_labels,
                         const std::vector<std::string>& pattern_labels) {
  if (pattern_labels.size() > host_labels.size()) return false;
  const std::size_t off = host_labels.size() - pattern_labels.size();
  for (std::size_t i = 0; i < pattern_labels.size(); ++i) {
    if (host_labels[off + i] != pattern_labels[i]) return false;
  }
  return true;
}

}  // namespace detail

// True when the effective host equals the pattern (dot-insensitively) or ends
// with it at a label boundary. IP literals only ever match themselves.
inline bool domain_match(const HostName& host, const DomainPattern& pattern) {
  if (host.is_ip()) {
    return !pattern.leading_dot() && host.labels() == pattern.labels();
  }
  const HostName eff = effective_host(host);
  return detail::label_suffix(eff.labels(), pattern.labels());
}

// The seven top-level domains the Netscape rule treats as two-dot domains.
inline bool special_top_level_domain(std::string_view tld) {
  static constexpr std::array<std::string_view, 7> kSpecial = {
      "com", "edu", "net", "org", "gov", "mil", "int"};
  for (auto s : kSpecial) {
    if (s == tld) return true;
  }
  return false;
}

// v0 Domain validation: the request host must tail-match the attribute, and
// the attribute must carry enough periods (a leading dot counts as one, so
// "shop.com" and ".shop.com" both count two). COM/EDU/NET/ORG/GOV/MIL/INT
// domains need two periods, everything else three.
inline DomainVerdict validate_domain_v0(const HostName& request_host,
                                        const DomainPattern& attr) {
  if (request_host.is_ip()) return DomainVerdict::reject(DomainReject::IpHost);
  if (!domain_match(request_host, attr)) {
    return DomainVerdict::reject(DomainReject::NotTailMatch);
  }
  const std::size_t labels = attr.labels().size();
  const std::size_t required = special_top_level_domain(attr.labels().back()) ? 2 : 3;
  if (labels < required) return DomainVerdict::reject(DomainReject::TooBroad);
  return DomainVerdict::accept();
}

// v1 Domain validation: a missing leading dot is prepended, the effective
// request host must tail-match the attribute, and it may have at most one
// label more than the attribute. A single-label attribute other than "local"
// is rejected outright; this keeps every accepted domain inside the setting
// host's reach, which the strict-mode privacy rule depends on.
inline DomainVerdict validate_domain_v1(const HostName& request_host,
                                        const DomainPattern& attr) {
  if (request_host.is_ip()) return DomainVerdict::reject(DomainReject::IpHost);
  if (attr.labels().size() < 2 && attr.labels().front() != "local") {
    return DomainVerdict::reject(DomainReject::TooBroad);
  }
  const DomainPattern normalized = attr.with_leading_dot();
  const HostName eff = effective_host(request_host);
  if (!detail::label_suffix(eff.labels(), normalized.labels())) {
    return DomainVerdict::reject(DomainReject::NotTailMatch);
  }
  if (eff.labels().size() > normalized.labels().size() + 1) {
    return DomainVerdict::reject(DomainReject::TooManyLevels);
  }
  return DomainVerdict::accept();
}

// Plain string-prefix test, the literal v0 rule: "/bar" matches "/barn".
inline bool path_match(std::string_view request_path, std::string_view cookie_path) {
  return request_path.substr(0, cookie_path.size()) == cookie_path;
}

inline bool port_match(int request_port, int origin_port, const PortSpec& spec) {
  switch (spec.kind) {
    case PortSpec::Kind::AnyPort:
      return true;
    case PortSpec::Kind::SamePortOnly:
      return request_port == origin_port;
    case PortSpec::Kind::PortList:
      for (auto p : spec.ports) {
        if (p == request_port) return true;
      }
      return false;
  }
  return false;
}

// The domain neighborhood a host can reach without being a third party.
// For an effective host A.B with single-label A, the reach is .B when B has
// an embedded dot or is exactly "local"; otherwise the host reaches only
// itself.
inline DomainPattern reach(const HostName& host) {
  const HostName eff = effective_host(host);
  const auto& labels = eff.labels();
  if (!eff.is_ip() && labels.size() >= 2) {
    const std::vector<std::string> rest(labels.begin() + 1, labels.end());
    if (rest.size() >= 2 || rest.front() == "local") {
      std::string text;
      for (const auto& l : rest) {
        if (!text.empty()) text.push_back('.');
        text += l;
      }
      return DomainPattern::parse("." + text).value();
    }
  }
  return DomainPattern::from_host(eff);
}

}  // namespace statejar
