// statejar: one transaction as the jar and the privacy policy see it.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "statejar/host.hpp"

namespace statejar {

// Why a derived (automatic) transaction happened. Origin transactions carry
// Trigger::None.
enum class Trigger { None, InlineEntity, Redirect3xx, FormAutoSubmit };

inline const char* to_string(Trigger t) {
  switch (t) {
    case Trigger::None: return "none";
    case Trigger::InlineEntity: return "inline";
    case Trigger::Redirect3xx: return "redirect";
    case Trigger::FormAutoSubmit: return "formsubmit";
  }
  return "unknown";
}

// A request the engine is deciding about. Origin transactions are the ones
// the user initiated; derived transactions (inline images, redirects,
// auto-submitted forms) carry a snapshot of their origin transaction: its
// host and the cookie domains that were sent or received on it.
struct RequestContext {
  HostName host;
  int port = 80;
  std::string path = "/";
  bool secure_channel = false;

  bool derived = false;
  Trigger trigger = Trigger::None;
  std::optional<HostName> origin_host;
  std::vector<DomainPattern> origin_cookie_domains;

  static RequestContext origin(const HostName& host, int port = 80,
                               std::string path = "/", bool secure = false) {
    RequestContext ctx;
    ctx.host = host;
    ctx.port = port;
    ctx.path = std::move(path);
    ctx.secure_channel = secure;
    return ctx;
  }

  static RequestContext derived_from(const RequestContext& origin_ctx,
                                     const HostName& host, Trigger trigger,
                                     int port = 80, std::string path = "/",
                                     bool secure = false) {
    RequestContext ctx;
    ctx.host = host;
    ctx.port = port;
    ctx.path = std::move(path);
    ctx.secure_channel = secure;
    ctx.derived = true;
    ctx.trigger = trigger;
    // Chained derivations (a redirect off an inline image) keep pointing at
    // the user-initiated transaction. Callers fill origin_cookie_domains on
    // the derived context once the origin transaction's cookies are known.
    ctx.origin_host = origin_ctx.derived ? origin_ctx.origin_host
                                         : std::optional<HostName>(origin_ctx.host);
    ctx.origin_cookie_domains = origin_ctx.origin_cookie_domains;
    return ctx;
  }
};

}  // namespace statejar
