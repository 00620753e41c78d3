// statejar: parsed cookie declarations shared by both protocol versions.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "statejar/host.hpp"

namespace statejar {

// The v1 Port attribute. `raw` keeps the attribute text as received so the
// Cookie header can echo the original form.
struct PortSpec {
  enum class Kind { AnyPort, SamePortOnly, PortList };

  Kind kind = Kind::AnyPort;
  std::vector<std::uint16_t> ports;        // PortList only; sorted, deduplicated
  std::optional<std::string> raw;          // original list text, PortList only

  friend bool operator==(const PortSpec&, const PortSpec&) = default;
};

// One unrecognized attribute, recorded verbatim (name case and raw value
// preserved, quotes included). A missing value means the attribute was bare.
struct ExtraAttribute {
  std::string name;
  std::optional<std::string> value;

  friend bool operator==(const ExtraAttribute&, const ExtraAttribute&) = default;
};

// One parsed Set-Cookie / Set-Cookie2 declaration.
//
// `value` is the wire text after the '=', so a v1 quoted value keeps its
// quotes. Attribute values (domain, path, comment, ...) are decoded.
// Version 0 cookies never carry max_age, discard, comment, comment_url or a
// port spec; the parser and serializer both enforce that.
struct CookieSpec {
  std::string name;
  std::string value;
  std::optional<DomainPattern> domain;
  std::optional<std::string> path;
  std::optional<std::int64_t> expires;   // UTC seconds
  std::optional<std::int64_t> max_age;   // non-negative seconds
  bool discard = false;
  bool secure = false;
  std::optional<std::string> comment;
  std::optional<std::string> comment_url;
  PortSpec port_spec;
  int version = 0;
  std::vector<ExtraAttribute> extras;

  bool has_port_attribute() const { return port_spec.kind != PortSpec::Kind::AnyPort; }

  friend bool operator==(const CookieSpec&, const CookieSpec&) = default;
};

}  // namespace statejar
