// statejar: scripted multi-party exchange simulation.
//
// A script declares clients, servers and proxies, then a sequence of
// request/response steps. Running it drives header parsing, the jar, the
// privacy policy, negotiation and the proxy cache, and yields a line-
// oriented trace suitable for golden-file comparison. Runs are fully
// deterministic: the clock is injected and every container is ordered.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "statejar/context.hpp"
#include "statejar/header.hpp"
#include "statejar/host.hpp"
#include "statejar/interop.hpp"
#include "statejar/jar.hpp"
#include "statejar/policy.hpp"
#include "statejar/result.hpp"

namespace statejar {

// ---------------------------------------------------------------------------
// Script model

struct ScriptClient {
  std::string id;
  ClientFlavor flavor = ClientFlavor::Rfc2965;

  friend bool operator==(const ScriptClient&, const ScriptClient&) = default;
};

struct ScriptServer {
  std::string id;
  HostName host;
  int port = 80;
  bool v1_capable = false;

  friend bool operator==(const ScriptServer&, const ScriptServer&) = default;
};

// One request step plus the response the origin server would give. A step
// without a response models a request that never completed.
struct ScriptStep {
  std::string id;
  std::string client_id;
  std::string server_id;
  std::string path = "/";
  std::optional<int> port;  // defaults to the server's port
  bool secure = false;
  bool derived = false;
  std::string origin_id;               // required when derived
  Trigger trigger = Trigger::None;     // required when derived
  std::string via;                     // proxy id, empty when direct
  std::optional<std::int64_t> time;    // absolute; defaults to base + ordinal

  bool has_response = false;
  std::vector<std::string> set_cookies;    // Set-Cookie header values
  std::vector<std::string> set_cookie2s;   // Set-Cookie2 header values
  std::optional<std::string> negotiate_set;  // NAME=VALUE decided by negotiation
  bool cacheable = false;
  bool no_store = false;
  bool cookie_shareable = false;
  std::vector<std::string> links;  // ids of derived steps this page triggers

  friend bool operator==(const ScriptStep&, const ScriptStep&) = default;
};

struct ExchangeScript {
  std::vector<ScriptClient> clients;
  std::vector<ScriptServer> servers;
  std::vector<std::string> proxies;
  std::vector<ScriptStep> steps;

  friend bool operator==(const ExchangeScript&, const ExchangeScript&) = default;
};

// ---------------------------------------------------------------------------
// Trace model

struct TraceEvent {
  enum class Kind {
    CookieAccepted,
    CookieRejected,
    CookieSent,
    CookieSuppressed,
    CacheStored,
    CacheServed,
    SetCookieStripped,
    Negotiated,
  };

  std::string step;    // request id
  Kind kind;
  std::string cookie;  // "name=value@domain;path", or "-" when no cookie applies
  std::string rule;    // which rule produced the event
  std::string reason;  // optional detail (reject reason, negotiation plan)

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

inline const char* to_string(TraceEvent::Kind k) {
  switch (k) {
    case TraceEvent::Kind::CookieAccepted: return "CookieAccepted";
    case TraceEvent::Kind::CookieRejected: return "CookieRejected";
    case TraceEvent::Kind::CookieSent: return "CookieSent";
    case TraceEvent::Kind::CookieSuppressed: return "CookieSuppressed";
    case TraceEvent::Kind::CacheStored: return "CacheStored";
    case TraceEvent::Kind::CacheServed: return "CacheServed";
    case TraceEvent::Kind::SetCookieStripped: return "SetCookieStripped";
    case TraceEvent::Kind::Negotiated: return "Negotiated";
  }
  return "Unknown";
}

inline std::string to_line(const TraceEvent& e) {
  std::string out = "step=" + e.step + " event=" + to_string(e.kind) +
                    " cookie=" + e.cookie + " rule=" + e.rule;
  if (!e.reason.empty()) out += " reason=" + e.reason;
  return out;
}

inline std::string serialize_trace(const std::vector<TraceEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    out += to_line(e);
    out.push_back('\n');
  }
  return out;
}

// ---------------------------------------------------------------------------
// Script text format
//
//   # comment
//   client <id> [flavor=navigator|msie|rfc2965]
//   server <id> host=<name> [port=<n>] [v1]
//   proxy <id>
//   request id=<r> client=<c> server=<s> path=<p> [port=<n>] [secure]
//           [kind=derived origin=<r0> trigger=inline|redirect|formsubmit]
//           [via=<proxy>] [time=<seconds>]
//   response id=<r> [set="<Set-Cookie text>"] [set2="<Set-Cookie2 text>"]
//           [negotiate-set="<NAME=VALUE>"] [cacheable] [no-store]
//           [cookie-shareable] [links=<r1>,<r2>]
//
// Values containing spaces are double-quoted; backslash escapes the next
// character inside quotes.

namespace detail {

struct ScriptToken {
  std::string key;    // empty for bare flags? no — flags keep key, empty value
  std::string value;
  bool has_value = false;
};

inline Result<std::vector<ScriptToken>> tokenize_script_line(std::string_view line,
                                                             std::size_t line_no) {
  std::vector<ScriptToken> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    ScriptToken token;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '=') ++i;
    token.key = std::string(line.substr(start, i - start));
    if (i < line.size() && line[i] == '=') {
      ++i;
      token.has_value = true;
      if (i < line.size() && line[i] == '"') {
        ++i;
        while (i < line.size() && line[i] != '"') {
          if (line[i] == '\\' && i + 1 < line.size()) ++i;
          token.value.push_back(line[i]);
          ++i;
        }
        if (i >= line.size()) {
          return make_error<std::vector<ScriptToken>>(
              ErrorClass::BadScript, "unterminated quote in script", line_no);
        }
        ++i;  // closing quote
      } else {
        const std::size_t vstart = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        token.value = std::string(line.substr(vstart, i - vstart));
      }
    }
    tokens.push_back(std::move(token));
  }
  return Result<std::vector<ScriptToken>>(std::move(tokens));
}

inline std::string script_value(std::string_view v) {
  bool quote = v.empty();
  for (char c : v) {
    if (c == ' ' || c == '\t' || c == '"' || c == '\\') {
      quote = true;
      break;
    }
  }
  if (!quote) return std::string(v);
  std::string out = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::vector<std::string> split_commas(std::string_view v) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    std::size_t comma = v.find(',', pos);
    if (comma == std::string_view::npos) comma = v.size();
    if (comma > pos) out.emplace_back(v.substr(pos, comma - pos));
    if (comma == v.size()) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace detail

inline Result<ExchangeScript> parse_exchange_script(std::string_view text) {
  using detail::ScriptToken;
  const auto script_error = [](std::string message, std::size_t line_no) {
    return make_error<ExchangeScript>(ErrorClass::BadScript, std::move(message),
                                      line_no);
  };

  ExchangeScript script;
  std::size_t pos = 0;
  std::size_t line_no = 0;

  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    const bool at_end = eol == text.size();
    pos = eol + 1;

    std::string_view stripped = line;
    while (!stripped.empty() && (stripped.front() == ' ' || stripped.front() == '\t')) {
      stripped.remove_prefix(1);
    }
    if (stripped.empty() || stripped.front() == '#') {
      if (at_end) break;
      continue;
    }

    auto tokens_result = detail::tokenize_script_line(stripped, line_no);
    if (!tokens_result.ok()) return Result<ExchangeScript>(tokens_result.error());
    const auto& tokens = tokens_result.value();
    const std::string& verb = tokens.front().key;

    const auto find = [&](std::string_view key) -> const ScriptToken* {
      for (std::size_t t = 1; t < tokens.size(); ++t) {
        if (tokens[t].key == key) return &tokens[t];
      }
      return nullptr;
    };
    const auto flag = [&](std::string_view key) { return find(key) != nullptr; };

    if (verb == "client") {
      if (tokens.size() < 2 || tokens[1].has_value) {
        return script_error("client needs an id", line_no);
      }
      ScriptClient client;
      client.id = tokens[1].key;
      if (const auto* f = find("flavor")) {
        auto flavor = client_flavor_from_name(f->value);
        if (!flavor) return script_error("unknown client flavor: " + f->value, line_no);
        client.flavor = *flavor;
      }
      script.clients.push_back(std::move(client));
    } else if (verb == "server") {
      if (tokens.size() < 2 || tokens[1].has_value) {
        return script_error("server needs an id", line_no);
      }
      ScriptServer server;
      server.id = tokens[1].key;
      const auto* host = find("host");
      if (!host) return script_error("server needs host=", line_no);
      auto parsed = HostName::parse(host->value);
      if (!parsed) return script_error("bad server host: " + host->value, line_no);
      server.host = *parsed;
      if (const auto* p = find("port")) {
        server.port = std::atoi(p->value.c_str());
        if (server.port < 1 || server.port > 65535) {
          return script_error("bad server port", line_no);
        }
      }
      server.v1_capable = flag("v1");
      script.servers.push_back(std::move(server));
    } else if (verb == "proxy") {
      if (tokens.size() < 2 || tokens[1].has_value) {
        return script_error("proxy needs an id", line_no);
      }
      script.proxies.push_back(tokens[1].key);
    } else if (verb == "request") {
      ScriptStep step;
      const auto* id = find("id");
      const auto* client = find("client");
      const auto* server = find("server");
      if (!id || !client || !server) {
        return script_error("request needs id=, client=, server=", line_no);
      }
      step.id = id->value;
      step.client_id = client->value;
      step.server_id = server->value;
      if (const auto* p = find("path")) step.path = p->value;
      if (const auto* p = find("port")) {
        const int port = std::atoi(p->value.c_str());
        if (port < 1 || port > 65535) return script_error("bad request port", line_no);
        step.port = port;
      }
      step.secure = flag("secure");
      if (const auto* k = find("kind")) {
        if (k->value == "derived") step.derived = true;
        else if (k->value != "origin") {
          return script_error("kind must be origin or derived", line_no);
        }
      }
      if (const auto* o = find("origin")) step.origin_id = o->value;
      if (const auto* t = find("trigger")) {
        if (t->value == "inline") step.trigger = Trigger::InlineEntity;
        else if (t->value == "redirect") step.trigger = Trigger::Redirect3xx;
        else if (t->value == "formsubmit") step.trigger = Trigger::FormAutoSubmit;
        else return script_error("unknown trigger: " + t->value, line_no);
      }
      if (step.derived && (step.origin_id.empty() || step.trigger == Trigger::None)) {
        return script_error("derived request needs origin= and trigger=", line_no);
      }
      if (const auto* v = find("via")) step.via = v->value;
      if (const auto* t = find("time")) {
        step.time = std::atoll(t->value.c_str());
      }
      script.steps.push_back(std::move(step));
    } else if (verb == "response") {
      const auto* id = find("id");
      if (!id) return script_error("response needs id=", line_no);
      if (script.steps.empty() || script.steps.back().id != id->value) {
        return script_error("response must follow its request: " + id->value, line_no);
      }
      ScriptStep& step = script.steps.back();
      if (step.has_response) {
        return script_error("duplicate response for " + id->value, line_no);
      }
      step.has_response = true;
      for (std::size_t t = 1; t < tokens.size(); ++t) {
        const ScriptToken& token = tokens[t];
        if (token.key == "id") continue;
        if (token.key == "set") step.set_cookies.push_back(token.value);
        else if (token.key == "set2") step.set_cookie2s.push_back(token.value);
        else if (token.key == "negotiate-set") step.negotiate_set = token.value;
        else if (token.key == "cacheable") step.cacheable = true;
        else if (token.key == "no-store") step.no_store = true;
        else if (token.key == "cookie-shareable") step.cookie_shareable = true;
        else if (token.key == "links") step.links = detail::split_commas(token.value);
        else return script_error("unknown response field: " + token.key, line_no);
      }
    } else {
      return script_error("unknown script verb: " + verb, line_no);
    }
    if (at_end) break;
  }

  // Integrity: unique ids, resolvable references, derived origins precede
  // their steps, links point at derived steps of this origin.
  const auto find_client = [&](const std::string& id) -> const ScriptClient* {
    for (const auto& c : script.clients) {
      if (c.id == id) return &c;
    }
    return nullptr;
  };
  const auto find_server = [&](const std::string& id) -> const ScriptServer* {
    for (const auto& s : script.servers) {
      if (s.id == id) return &s;
    }
    return nullptr;
  };
  for (std::size_t i = 0; i < script.steps.size(); ++i) {
    const ScriptStep& step = script.steps[i];
    for (std::size_t j = 0; j < i; ++j) {
      if (script.steps[j].id == step.id) {
        return script_error("duplicate request id: " + step.id, 0);
      }
    }
    if (!find_client(step.client_id)) {
      return script_error("unknown client in step " + step.id, 0);
    }
    if (!find_server(step.server_id)) {
      return script_error("unknown server in step " + step.id, 0);
    }
    if (!step.via.empty()) {
      bool known = false;
      for (const auto& p : script.proxies) known = known || p == step.via;
      if (!known) return script_error("unknown proxy in step " + step.id, 0);
    }
    if (step.derived) {
      bool found = false;
      for (std::size_t j = 0; j < i; ++j) {
        if (script.steps[j].id == step.origin_id) found = true;
      }
      if (!found) {
        return script_error("derived step " + step.id +
                                " references missing or later origin " +
                                step.origin_id,
                            0);
      }
    }
    for (const auto& link : step.links) {
      bool matched = false;
      for (std::size_t j = i + 1; j < script.steps.size(); ++j) {
        const ScriptStep& target = script.steps[j];
        if (target.id == link) {
          matched = target.derived && target.origin_id == step.id;
          break;
        }
      }
      if (!matched) {
        return script_error("link " + link + " from step " + step.id +
                                " must name a later derived step with origin=" +
                                step.id,
                            0);
      }
    }
  }
  return Result<ExchangeScript>(std::move(script));
}

inline std::string serialize_exchange_script(const ExchangeScript& script) {
  using detail::script_value;
  std::string out;
  for (const auto& c : script.clients) {
    out += "client " + c.id + " flavor=" + to_string(c.flavor) + "\n";
  }
  for (const auto& s : script.servers) {
    out += "server " + s.id + " host=" + s.host.text() +
           " port=" + std::to_string(s.port);
    if (s.v1_capable) out += " v1";
    out.push_back('\n');
  }
  for (const auto& p : script.proxies) out += "proxy " + p + "\n";
  for (const auto& step : script.steps) {
    out += "request id=" + step.id + " client=" + step.client_id +
           " server=" + step.server_id + " path=" + script_value(step.path);
    if (step.port) out += " port=" + std::to_string(*step.port);
    if (step.secure) out += " secure";
    if (step.derived) {
      out += " kind=derived origin=" + step.origin_id;
      out += " trigger=";
      out += to_string(step.trigger);
    }
    if (!step.via.empty()) out += " via=" + step.via;
    if (step.time) out += " time=" + std::to_string(*step.time);
    out.push_back('\n');
    if (!step.has_response) continue;
    out += "response id=" + step.id;
    for (const auto& s : step.set_cookies) out += " set=" + script_value(s);
    for (const auto& s : step.set_cookie2s) out += " set2=" + script_value(s);
    if (step.negotiate_set) out += " negotiate-set=" + script_value(*step.negotiate_set);
    if (step.cacheable) out += " cacheable";
    if (step.no_store) out += " no-store";
    if (step.cookie_shareable) out += " cookie-shareable";
    if (!step.links.empty()) {
      out += " links=";
      for (std::size_t i = 0; i < step.links.size(); ++i) {
        if (i) out.push_back(',');
        out += step.links[i];
      }
    }
    out.push_back('\n');
  }
  return out;
}

// ---------------------------------------------------------------------------
// Execution

struct SimResult {
  std::vector<TraceEvent> events;
  std::map<std::string, Jar> jars;  // final per-client jars
};

namespace detail {

struct CachedResponse {
  bool has_cookie = false;
  std::string cookie_header;           // raw stored Set-Cookie text
  SetCookieHeaderKind cookie_kind = SetCookieHeaderKind::SetCookie;
  std::string cookie_display;
};

// What one executed transaction leaves behind for derived steps.
struct TransactionRecord {
  RequestContext ctx;
  std::vector<DomainPattern> cookie_domains;  // Domains sent or received
};

inline std::string cookie_display(std::string_view name, std::string_view value,
                                  std::string_view domain, std::string_view path) {
  return std::string(name) + "=" + std::string(value) + "@" + std::string(domain) +
         ";" + std::string(path);
}

inline std::string spec_display(const CookieSpec& spec, const RequestContext& ctx) {
  const std::string domain = spec.domain ? spec.domain->to_string()
                                         : effective_host(ctx.host).text();
  const std::string path = spec.path ? *spec.path : default_cookie_path(ctx.path);
  return cookie_display(spec.name, spec.value, domain, path);
}

inline std::string stored_display(const StoredCookie& entry) {
  return cookie_display(entry.spec.name, entry.spec.value,
                        entry.effective_domain.to_string(), entry.effective_path);
}

}  // namespace detail

// Runs the script. `jars` may preload per-client state; clients not listed
// start empty. Policies default per client when absent. Returns the trace
// and the final jars.
inline Result<SimResult> run_exchange(
    const ExchangeScript& script, std::map<std::string, Jar> jars = {},
    std::map<std::string, PolicyConfig> policies = {}, std::int64_t base_now = 0) {
  SimResult result;
  for (const auto& client : script.clients) {
    if (!jars.count(client.id)) jars.emplace(client.id, Jar{});
    if (!policies.count(client.id)) policies.emplace(client.id, PolicyConfig{});
  }

  std::map<std::string, detail::TransactionRecord> records;
  // proxy id -> cache key -> entry
  std::map<std::string, std::map<std::string, detail::CachedResponse>> caches;

  const auto find_client = [&](const std::string& id) -> const ScriptClient& {
    for (const auto& c : script.clients) {
      if (c.id == id) return c;
    }
    return script.clients.front();  // unreachable: parse validated ids
  };
  const auto find_server = [&](const std::string& id) -> const ScriptServer& {
    for (const auto& s : script.servers) {
      if (s.id == id) return s;
    }
    return script.servers.front();  // unreachable: parse validated ids
  };

  std::size_t ordinal = 0;
  for (const auto& step : script.steps) {
    ++ordinal;
    const std::int64_t now =
        step.time ? *step.time : base_now + static_cast<std::int64_t>(ordinal);
    const ScriptClient& client = find_client(step.client_id);
    const ScriptServer& server = find_server(step.server_id);
    const int port = step.port ? *step.port : server.port;
    Jar& jar = jars.at(client.id);
    const PolicyConfig& policy = policies.at(client.id);

    // Build the transaction context.
    RequestContext ctx;
    if (step.derived) {
      const auto origin_it = records.find(step.origin_id);
      if (origin_it == records.end()) {
        return make_error<SimResult>(ErrorClass::BadScript,
                                     "step " + step.id + ": origin " +
                                         step.origin_id + " never executed");
      }
      ctx = RequestContext::derived_from(origin_it->second.ctx, server.host,
                                         step.trigger, port, step.path, step.secure);
      // A chained derivation (redirect off an inline image) keeps the root
      // transaction's cookie-domain snapshot, which derived_from copied.
      if (!origin_it->second.ctx.derived) {
        ctx.origin_cookie_domains = origin_it->second.cookie_domains;
      }
    } else {
      ctx = RequestContext::origin(server.host, port, step.path, step.secure);
    }

    detail::TransactionRecord record;
    record.ctx = ctx;

    // The transaction cookies with Domain attributes feed the strict rule.
    // Derived transactions never extend their origin's list.
    auto* domain_list = step.derived ? nullptr : &record.cookie_domains;

    // --- send phase ---
    RequestCookieHeaders sent_headers;
    const auto selected = jar.select(ctx, now);
    if (!selected.empty()) {
      const SendDecision send = evaluate_send(policy, ctx);
      if (send.kind == SendDecision::Kind::Allow) {
        bool any_v1 = false;
        std::vector<CookieSendItem> items;
        for (const auto& entry : selected) {
          any_v1 = any_v1 || entry.spec.version == 1;
          items.push_back(entry.to_send_item());
          result.events.push_back({step.id, TraceEvent::Kind::CookieSent,
                                   detail::stored_display(entry), "send.select", ""});
          if (domain_list && entry.spec.domain) {
            domain_list->push_back(entry.effective_domain);
          }
        }
        const int header_version =
            client.flavor == ClientFlavor::Rfc2965 && any_v1 ? 1 : 0;
        sent_headers.cookie = serialize_cookie_header(items, header_version);
        // A v1 client sending old-style cookies advertises that it would
        // understand new-style ones.
        if (client.flavor == ClientFlavor::Rfc2965 && header_version == 0) {
          sent_headers.cookie2 = "$Version=1";
        }
      } else {
        const std::string rule =
            send.reason == PolicyReject::CommentUrlContext ? "policy.comment-url"
            : send.reason == PolicyReject::NoOriginCookie  ? "policy.no-origin-cookie"
                                                           : "policy.third-party";
        for (const auto& entry : selected) {
          result.events.push_back({step.id, TraceEvent::Kind::CookieSuppressed,
                                   detail::stored_display(entry), rule,
                                   to_string(send.reason)});
        }
      }
    }

    // One Set-Cookie header arriving on this step, as the client sees it.
    const auto receive = [&](const std::string& header, SetCookieHeaderKind kind) {
      if (client.flavor != ClientFlavor::Rfc2965) {
        const auto outcome = emulate_client(client.flavor, header, kind);
        if (!outcome.stored) return;  // naive clients drop silently
        CookieSpec naive;
        naive.name = outcome.name;
        naive.value = outcome.value;
        const auto decision = evaluate_accept(policy, ctx, naive);
        if (decision.kind != AcceptDecision::Kind::Accept) {
          const std::string rule = decision.kind == AcceptDecision::Kind::Prompt
                                       ? "policy.prompt"
                                   : decision.reason == PolicyReject::NoOriginCookie
                                       ? "policy.no-origin-cookie"
                                   : decision.reason == PolicyReject::CommentUrlContext
                                       ? "policy.comment-url"
                                       : "policy.third-party";
          result.events.push_back({step.id, TraceEvent::Kind::CookieRejected,
                                   detail::spec_display(naive, ctx), rule,
                                   to_string(decision.reason)});
          return;
        }
        const StoreResult stored = jar.store(naive, ctx, now);
        const std::string rule = stored.kind == StoreResult::Kind::Replaced
                                     ? "store.replace"
                                 : stored.kind == StoreResult::Kind::Deleted
                                     ? "store.delete"
                                     : "store.new";
        result.events.push_back({step.id, TraceEvent::Kind::CookieAccepted,
                                 detail::spec_display(naive, ctx), rule, ""});
        return;
      }

      const ParseMode mode =
          kind == SetCookieHeaderKind::SetCookie2 ? ParseMode::V1 : ParseMode::V0;
      auto parsed = parse_set_cookie(header, mode);
      if (!parsed.ok()) {
        result.events.push_back({step.id, TraceEvent::Kind::CookieRejected, "-",
                                 "parse.set-cookie",
                                 to_string(parsed.error().cls)});
        return;
      }
      for (const auto& spec : parsed.value()) {
        const auto decision = evaluate_accept(policy, ctx, spec);
        if (decision.kind != AcceptDecision::Kind::Accept) {
          const std::string rule = decision.kind == AcceptDecision::Kind::Prompt
                                       ? "policy.prompt"
                                   : decision.reason == PolicyReject::NoOriginCookie
                                       ? "policy.no-origin-cookie"
                                   : decision.reason == PolicyReject::CommentUrlContext
                                       ? "policy.comment-url"
                                       : "policy.third-party";
          result.events.push_back({step.id, TraceEvent::Kind::CookieRejected,
                                   detail::spec_display(spec, ctx), rule,
                                   to_string(decision.reason)});
          continue;
        }
        const StoreResult stored = jar.store(spec, ctx, now);
        if (stored.kind == StoreResult::Kind::Rejected) {
          result.events.push_back({step.id, TraceEvent::Kind::CookieRejected,
                                   detail::spec_display(spec, ctx),
                                   spec.version == 1 ? "domain.v1" : "domain.v0",
                                   to_string(stored.reason)});
          continue;
        }
        const std::string rule = stored.kind == StoreResult::Kind::Replaced
                                     ? "store.replace"
                                 : stored.kind == StoreResult::Kind::Deleted
                                     ? "store.delete"
                                     : "store.new";
        result.events.push_back({step.id, TraceEvent::Kind::CookieAccepted,
                                 detail::spec_display(spec, ctx), rule, ""});
        if (domain_list && spec.domain) {
          domain_list->push_back(spec.domain->with_leading_dot());
        }
      }
    };

    // --- proxy cache lookup ---
    const std::string cache_key =
        server.host.text() + ":" + std::to_string(port) + " " + step.path;
    bool served_from_cache = false;
    if (!step.via.empty()) {
      auto& cache = caches[step.via];
      const auto hit = cache.find(cache_key);
      if (hit != cache.end()) {
        served_from_cache = true;
        const detail::CachedResponse& entry = hit->second;
        result.events.push_back({step.id, TraceEvent::Kind::CacheServed,
                                 entry.has_cookie ? entry.cookie_display : "-",
                                 "cache.serve", ""});
        if (entry.has_cookie) receive(entry.cookie_header, entry.cookie_kind);
      }
    }

    // --- origin response ---
    if (!served_from_cache && step.has_response) {
      std::vector<std::string> set_cookies = step.set_cookies;
      std::vector<std::string> set_cookie2s = step.set_cookie2s;

      if (step.negotiate_set) {
        const ServerCaps caps{server.v1_capable};
        const HeaderPlan plan = negotiate_server_headers(caps, sent_headers);
        std::string rule = "negotiate.v0-only";
        if (!server.v1_capable) {
          rule = "negotiate.v0-server";
        } else if (!sent_headers.cookie && !sent_headers.cookie2) {
          rule = "negotiate.first-contact";
        } else if (plan == HeaderPlan::SendV1Only && sent_headers.cookie2) {
          rule = "negotiate.cookie2-advert";
        } else if (plan == HeaderPlan::SendV1Only) {
          rule = "negotiate.v1-cookie";
        }
        result.events.push_back({step.id, TraceEvent::Kind::Negotiated, "-", rule,
                                 to_string(plan)});
        if (plan == HeaderPlan::SendV0Only || plan == HeaderPlan::SendBoth) {
          set_cookies.push_back(*step.negotiate_set);
        }
        if (plan == HeaderPlan::SendV1Only || plan == HeaderPlan::SendBoth) {
          set_cookie2s.push_back(*step.negotiate_set + "; Version=1");
        }
      }

      for (const auto& header : set_cookies) {
        receive(header, SetCookieHeaderKind::SetCookie);
      }
      for (const auto& header : set_cookie2s) {
        receive(header, SetCookieHeaderKind::SetCookie2);
      }

      // --- proxy cache fill ---
      if (!step.via.empty()) {
        ResponseCacheMeta meta;
        meta.has_set_cookie = !set_cookies.empty() || !set_cookie2s.empty();
        meta.no_store = step.no_store;
        meta.cookie_shareable = step.cookie_shareable;
        const CacheDecision decision = cache_decision(meta, step.cacheable);
        if (decision.store_body) {
          detail::CachedResponse entry;
          if (meta.has_set_cookie && !decision.store_set_cookie) {
            for (const auto& header : set_cookies) {
              result.events.push_back(
                  {step.id, TraceEvent::Kind::SetCookieStripped,
                   detail::cookie_display(
                       header.substr(0, header.find('=')),
                       "...", server.host.text(), step.path),
                   "cache.strip-set-cookie", ""});
            }
            for (const auto& header : set_cookie2s) {
              result.events.push_back(
                  {step.id, TraceEvent::Kind::SetCookieStripped,
                   detail::cookie_display(
                       header.substr(0, header.find('=')),
                       "...", server.host.text(), step.path),
                   "cache.strip-set-cookie", ""});
            }
          }
          if (decision.store_set_cookie) {
            if (!set_cookies.empty()) {
              entry.has_cookie = true;
              entry.cookie_header = set_cookies.front();
              entry.cookie_kind = SetCookieHeaderKind::SetCookie;
            } else {
              entry.has_cookie = true;
              entry.cookie_header = set_cookie2s.front();
              entry.cookie_kind = SetCookieHeaderKind::SetCookie2;
            }
            entry.cookie_display = detail::cookie_display(
                entry.cookie_header.substr(0, entry.cookie_header.find('=')),
                "...", server.host.text(), step.path);
          }
          caches[step.via][cache_key] = std::move(entry);
          result.events.push_back({step.id, TraceEvent::Kind::CacheStored, "-",
                                   "cache.store", ""});
        }
      }
    }

    records.emplace(step.id, std::move(record));
  }

  result.jars = std::move(jars);
  return Result<SimResult>(std::move(result));
}

}  // namespace statejar
