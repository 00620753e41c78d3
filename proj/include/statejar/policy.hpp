// statejar: verifiability classification and the third-party cookie rules.
//
// Two selectable modes: Rfc2109Strict reproduces the original rule (the
// origin transaction must have carried a cookie whose Domain matches the
// derived host) including its documented over-restriction; ReachBased is the
// corrected rule built on reach(). Both default to blocking, with an
// explicit opt-in override.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "statejar/context.hpp"
#include "statejar/cookie.hpp"
#include "statejar/host.hpp"
#include "statejar/matching.hpp"
#include "statejar/result.hpp"

namespace statejar {

enum class PolicyMode { Rfc2109Strict, ReachBased };

enum class Verifiability { Verifiable, Unverifiable };

enum class PolicyReject { ThirdParty, NoOriginCookie, CommentUrlContext };

inline const char* to_string(PolicyMode m) {
  return m == PolicyMode::Rfc2109Strict ? "strict" : "reach";
}

inline const char* to_string(Verifiability v) {
  return v == Verifiability::Verifiable ? "Verifiable" : "Unverifiable";
}

inline const char* to_string(PolicyReject r) {
  switch (r) {
    case PolicyReject::ThirdParty: return "ThirdParty";
    case PolicyReject::NoOriginCookie: return "NoOriginCookie";
    case PolicyReject::CommentUrlContext: return "CommentUrlContext";
  }
  return "Unknown";
}

struct PolicyConfig {
  PolicyMode mode = PolicyMode::ReachBased;
  bool third_party_override = false;  // ships off, per the default-off rule
  bool prompt_enabled = false;
  bool comment_url_context = false;   // browsing a CommentURL target

  friend bool operator==(const PolicyConfig&, const PolicyConfig&) = default;
};

// A transaction is verifiable when the user could have reviewed the URL
// before it was fetched: exactly the user-initiated (origin) transactions.
inline Verifiability classify_transaction(const RequestContext& ctx) {
  return ctx.derived ? Verifiability::Unverifiable : Verifiability::Verifiable;
}

// A derived transaction is third-party when its host falls outside the reach
// of the origin transaction's host. A derived context with no origin
// snapshot is treated as third-party, failing safe.
inline bool is_third_party(const RequestContext& ctx) {
  if (!ctx.origin_host) return true;
  return !domain_match(ctx.host, reach(*ctx.origin_host));
}

struct AcceptDecision {
  enum class Kind { Accept, Reject, Prompt };

  Kind kind;
  PolicyReject reason = PolicyReject::ThirdParty;  // meaningful unless Accept

  static AcceptDecision accept() { return {Kind::Accept}; }
  static AcceptDecision reject(PolicyReject r) { return {Kind::Reject, r}; }
  static AcceptDecision prompt(PolicyReject r) { return {Kind::Prompt, r}; }

  friend bool operator==(const AcceptDecision&, const AcceptDecision&) = default;
};

struct SendDecision {
  enum class Kind { Allow, Suppress };

  Kind kind;
  PolicyReject reason = PolicyReject::ThirdParty;  // meaningful when Suppress

  static SendDecision allow() { return {Kind::Allow}; }
  static SendDecision suppress(PolicyReject r) { return {Kind::Suppress, r}; }

  friend bool operator==(const SendDecision&, const SendDecision&) = default;
};

namespace detail {

// Shared gate for both directions. Returns the violation, if any, that the
// configured mode sees in this transaction.
inline std::optional<PolicyReject> unverifiable_violation(const PolicyConfig& policy,
                                                          const RequestContext& ctx) {
  if (classify_transaction(ctx) == Verifiability::Verifiable) return std::nullopt;
  if (policy.mode == PolicyMode::ReachBased) {
    if (is_third_party(ctx)) return PolicyReject::ThirdParty;
    return std::nullopt;
  }
  // Rfc2109Strict: some cookie with Domain D must have been sent or received
  // in the origin transaction, with D domain-matching this host. An origin
  // transaction without cookies therefore blocks every derived cookie — the
  // rule's documented severity.
  for (const auto& d : ctx.origin_cookie_domains) {
    if (domain_match(ctx.host, d)) return std::nullopt;
  }
  return PolicyReject::NoOriginCookie;
}

}  // namespace detail

// Decides whether a cookie arriving on ctx may enter the jar. Domain/path
// validation is separate (jar.store); this is only the privacy gate.
// The CookieSpec parameter is part of the decision surface for future rules;
// today's rules depend only on the transaction.
inline AcceptDecision evaluate_accept(const PolicyConfig& policy,
                                      const RequestContext& ctx,
                                      const CookieSpec& /*spec*/) {
  if (policy.comment_url_context) {
    return AcceptDecision::reject(PolicyReject::CommentUrlContext);
  }
  const auto violation = detail::unverifiable_violation(policy, ctx);
  if (!violation) return AcceptDecision::accept();
  // When both are configured, asking the user wins over silently overriding.
  if (policy.prompt_enabled) return AcceptDecision::prompt(*violation);
  if (policy.third_party_override) return AcceptDecision::accept();
  return AcceptDecision::reject(*violation);
}

// Decides whether Cookie headers may accompany the request at all. A prompt
// cannot be answered inside the engine, so it suppresses, failing safe.
inline SendDecision evaluate_send(const PolicyConfig& policy,
                                  const RequestContext& ctx) {
  if (policy.comment_url_context) {
    return SendDecision::suppress(PolicyReject::CommentUrlContext);
  }
  const auto violation = detail::unverifiable_violation(policy, ctx);
  if (!violation) return SendDecision::allow();
  if (policy.prompt_enabled) return SendDecision::suppress(*violation);
  if (policy.third_party_override) return SendDecision::allow();
  return SendDecision::suppress(*violation);
}

// ---------------------------------------------------------------------------
// Flat key=value policy files (shared by the CLI and the simulator).
//
//   mode = reach | strict
//   third-party-override = on | off
//   prompt = on | off
//   comment-url-context = on | off

namespace detail {

inline std::string_view trim_config(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline bool parse_config_bool(std::string_view v, bool& out) {
  if (v == "on" || v == "true" || v == "1") { out = true; return true; }
  if (v == "off" || v == "false" || v == "0") { out = false; return true; }
  return false;
}

}  // namespace detail

inline Result<PolicyConfig> parse_policy_config(std::string_view text) {
  PolicyConfig config;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = detail::trim_config(text.substr(pos, eol - pos));
    ++line_no;
    const bool at_end = eol == text.size();
    pos = eol + 1;
    if (line.empty() || line.front() == '#') {
      if (at_end) break;
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      return make_error<PolicyConfig>(ErrorClass::MalformedLine,
                                      "policy line lacks '='", line_no);
    }
    const std::string_view key = detail::trim_config(line.substr(0, eq));
    const std::string_view value = detail::trim_config(line.substr(eq + 1));
    bool flag = false;
    if (key == "mode") {
      if (value == "reach") config.mode = PolicyMode::ReachBased;
      else if (value == "strict") config.mode = PolicyMode::Rfc2109Strict;
      else {
        return make_error<PolicyConfig>(ErrorClass::MalformedLine,
                                        "mode must be reach or strict", line_no);
      }
    } else if (key == "third-party-override") {
      if (!detail::parse_config_bool(value, flag)) {
        return make_error<PolicyConfig>(ErrorClass::MalformedLine,
                                        "bad boolean for third-party-override",
                                        line_no);
      }
      config.third_party_override = flag;
    } else if (key == "prompt") {
      if (!detail::parse_config_bool(value, flag)) {
        return make_error<PolicyConfig>(ErrorClass::MalformedLine,
                                        "bad boolean for prompt", line_no);
      }
      config.prompt_enabled = flag;
    } else if (key == "comment-url-context") {
      if (!detail::parse_config_bool(value, flag)) {
        return make_error<PolicyConfig>(ErrorClass::MalformedLine,
                                        "bad boolean for comment-url-context",
                                        line_no);
      }
      config.comment_url_context = flag;
    } else {
      return make_error<PolicyConfig>(ErrorClass::MalformedLine,
                                      "unknown policy key: " + std::string(key),
                                      line_no);
    }
    if (at_end) break;
  }
  return Result<PolicyConfig>(config);
}

}  // namespace statejar
