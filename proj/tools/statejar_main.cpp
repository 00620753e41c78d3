// statejar command-line front end.
//
// Subcommands: parse, match, jar (store/select/save/load/end-session),
// policy (eval), simulate, corpus. Stdout is flat key=value text; human
// diagnostics go to stderr. Exit codes: 0 success/Accept, 1 Reject or
// mismatch, 2 parse error, 64 usage error, 65 script error, 66 unreadable
// corpus.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "statejar/statejar.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitReject = 1;
constexpr int kExitParseError = 2;
constexpr int kExitUsage = 64;
constexpr int kExitScript = 65;
constexpr int kExitCorpus = 66;

std::string read_file(const std::string& path, bool& ok) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ok = false;
    return "";
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  ok = true;
  return buffer.str();
}

bool write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out << bytes;
  return out.good();
}

std::string default_jar_path() {
  if (const char* home = std::getenv("STATEJAR_HOME")) {
    return std::string(home) + "/cookies.tsv";
  }
  return "cookies.tsv";
}

void print_pairs(const std::vector<std::pair<std::string, std::string>>& pairs) {
  for (const auto& [key, value] : pairs) {
    std::cout << key << "=" << value << "\n";
  }
}

// --- parse ------------------------------------------------------------

int cmd_parse(const std::string& mode, const std::string& header) {
  const auto dump = statejar::dump_parse(mode, header);
  print_pairs(dump);
  if (!dump.empty() && dump.front().first == "error") return kExitParseError;
  return kExitOk;
}

// --- match ------------------------------------------------------------

int cmd_match(const std::string& host_text, const std::string& pattern_text,
              bool v1) {
  const auto host = statejar::HostName::parse(host_text);
  if (!host) {
    std::cerr << "statejar: malformed host: " << host_text << "\n";
    return kExitUsage;
  }
  const auto pattern = statejar::DomainPattern::parse(pattern_text);
  if (!pattern) {
    std::cerr << "statejar: malformed domain pattern: " << pattern_text << "\n";
    return kExitUsage;
  }
  const statejar::DomainVerdict verdict =
      v1 ? statejar::validate_domain_v1(*host, *pattern)
         : statejar::validate_domain_v0(*host, *pattern);
  if (verdict.accepted) {
    std::cout << "Accept\n";
    return kExitOk;
  }
  std::cout << "Reject(" << statejar::to_string(verdict.reason) << ")\n";
  return kExitReject;
}

// --- jar ---------------------------------------------------------------

struct JarIo {
  std::string path;
  statejar::Jar jar;
};

int load_jar(const std::string& path, bool must_exist, statejar::Jar& jar) {
  bool ok = false;
  const std::string bytes = read_file(path, ok);
  if (!ok) {
    if (must_exist) {
      std::cerr << "statejar: cannot read jar file: " << path << "\n";
      return kExitUsage;
    }
    jar = statejar::Jar{};
    return kExitOk;
  }
  auto loaded = statejar::Jar::load(bytes);
  if (!loaded.ok()) {
    std::cout << "error=" << statejar::to_string(loaded.error().cls) << "\n";
    std::cout << "line=" << loaded.error().line << "\n";
    std::cerr << "statejar: " << path << ":" << loaded.error().line << ": "
              << loaded.error().message << "\n";
    return kExitParseError;
  }
  jar = std::move(loaded).value();
  return kExitOk;
}

std::vector<std::pair<std::string, std::string>> dump_entries(
    const std::vector<statejar::StoredCookie>& entries) {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("count", std::to_string(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const std::string prefix = "cookie." + std::to_string(i) + ".";
    out.emplace_back(prefix + "name", e.spec.name);
    out.emplace_back(prefix + "value", e.spec.value);
    out.emplace_back(prefix + "domain", e.effective_domain.to_string());
    out.emplace_back(prefix + "path", e.effective_path);
    out.emplace_back(prefix + "version", std::to_string(e.spec.version));
    out.emplace_back(prefix + "session", e.is_session ? "1" : "0");
    if (const auto when = e.expiry()) {
      out.emplace_back(prefix + "expiry", std::to_string(*when));
    }
  }
  return out;
}

statejar::RequestContext make_ctx(const std::string& host_text, int port,
                                  const std::string& path, bool secure, bool& ok) {
  const auto host = statejar::HostName::parse(host_text);
  if (!host) {
    ok = false;
    return {};
  }
  ok = true;
  return statejar::RequestContext::origin(*host, port, path, secure);
}

int cmd_jar_store(const std::string& file, const std::string& mode,
                  const std::string& header, const std::string& host, int port,
                  const std::string& path, bool secure, std::int64_t now) {
  statejar::Jar jar;
  if (const int rc = load_jar(file, false, jar); rc != kExitOk) return rc;
  bool host_ok = false;
  const auto ctx = make_ctx(host, port, path, secure, host_ok);
  if (!host_ok) {
    std::cerr << "statejar: malformed host: " << host << "\n";
    return kExitUsage;
  }
  auto parsed = statejar::parse_set_cookie(
      header, mode == "v1" ? statejar::ParseMode::V1 : statejar::ParseMode::V0);
  if (!parsed.ok()) {
    std::cout << "error=" << statejar::to_string(parsed.error().cls) << "\n";
    std::cerr << "statejar: " << parsed.error().message << "\n";
    return kExitParseError;
  }
  bool any_rejected = false;
  for (std::size_t i = 0; i < parsed.value().size(); ++i) {
    const auto result = jar.store(parsed.value()[i], ctx, now);
    std::string text = statejar::to_string(result.kind);
    if (result.kind == statejar::StoreResult::Kind::Rejected) {
      any_rejected = true;
      text += "(";
      text += statejar::to_string(result.reason);
      text += ")";
    }
    std::cout << "store." << i << "=" << text << "\n";
  }
  std::cout << "size=" << jar.size() << "\n";
  if (!write_file(file, jar.save())) {
    std::cerr << "statejar: cannot write jar file: " << file << "\n";
    return kExitUsage;
  }
  return any_rejected ? kExitReject : kExitOk;
}

int cmd_jar_select(const std::string& file, const std::string& host, int port,
                   const std::string& path, bool secure, int version,
                   std::int64_t now) {
  statejar::Jar jar;
  if (const int rc = load_jar(file, true, jar); rc != kExitOk) return rc;
  bool host_ok = false;
  const auto ctx = make_ctx(host, port, path, secure, host_ok);
  if (!host_ok) {
    std::cerr << "statejar: malformed host: " << host << "\n";
    return kExitUsage;
  }
  const auto selected = jar.select(ctx, now);
  print_pairs(dump_entries(selected));
  std::vector<statejar::CookieSendItem> items;
  for (const auto& e : selected) items.push_back(e.to_send_item());
  std::cout << "header=" << statejar::serialize_cookie_header(items, version) << "\n";
  return kExitOk;
}

int cmd_jar_save(const std::string& file, std::int64_t now, bool purge) {
  statejar::Jar jar;
  if (const int rc = load_jar(file, true, jar); rc != kExitOk) return rc;
  if (purge) {
    std::cout << "purged=" << jar.purge_expired(now) << "\n";
  }
  if (!write_file(file, jar.save())) {
    std::cerr << "statejar: cannot write jar file: " << file << "\n";
    return kExitUsage;
  }
  std::cout << "size=" << jar.size() << "\n";
  return kExitOk;
}

int cmd_jar_load(const std::string& file) {
  statejar::Jar jar;
  if (const int rc = load_jar(file, true, jar); rc != kExitOk) return rc;
  print_pairs(dump_entries(jar.entries()));
  return kExitOk;
}

int cmd_jar_end_session(const std::string& file) {
  statejar::Jar jar;
  if (const int rc = load_jar(file, true, jar); rc != kExitOk) return rc;
  std::cout << "removed=" << jar.end_session() << "\n";
  std::cout << "size=" << jar.size() << "\n";
  if (!write_file(file, jar.save())) {
    std::cerr << "statejar: cannot write jar file: " << file << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

// --- policy ------------------------------------------------------------

int cmd_policy_eval(const statejar::PolicyConfig& config, const std::string& host,
                    const std::string& origin_host, const std::string& trigger,
                    const std::vector<std::string>& origin_domains,
                    const std::string& direction) {
  const auto target = statejar::HostName::parse(host);
  if (!target) {
    std::cerr << "statejar: malformed host: " << host << "\n";
    return kExitUsage;
  }
  statejar::RequestContext ctx;
  if (origin_host.empty()) {
    ctx = statejar::RequestContext::origin(*target);
  } else {
    const auto origin = statejar::HostName::parse(origin_host);
    if (!origin) {
      std::cerr << "statejar: malformed origin host: " << origin_host << "\n";
      return kExitUsage;
    }
    statejar::Trigger t = statejar::Trigger::InlineEntity;
    if (trigger == "redirect") t = statejar::Trigger::Redirect3xx;
    else if (trigger == "formsubmit") t = statejar::Trigger::FormAutoSubmit;
    else if (!trigger.empty() && trigger != "inline") {
      std::cerr << "statejar: unknown trigger: " << trigger << "\n";
      return kExitUsage;
    }
    ctx = statejar::RequestContext::derived_from(
        statejar::RequestContext::origin(*origin), *target, t);
    for (const auto& d : origin_domains) {
      const auto pattern = statejar::DomainPattern::parse(d);
      if (!pattern) {
        std::cerr << "statejar: malformed origin domain: " << d << "\n";
        return kExitUsage;
      }
      ctx.origin_cookie_domains.push_back(*pattern);
    }
  }

  std::cout << "verifiability="
            << statejar::to_string(statejar::classify_transaction(ctx)) << "\n";
  if (direction == "send") {
    const auto decision = statejar::evaluate_send(config, ctx);
    if (decision.kind == statejar::SendDecision::Kind::Allow) {
      std::cout << "decision=Allow\n";
      return kExitOk;
    }
    std::cout << "decision=Suppress\n";
    std::cout << "reason=" << statejar::to_string(decision.reason) << "\n";
    return kExitReject;
  }
  statejar::CookieSpec spec;  // today's rules are spec-independent
  const auto decision = statejar::evaluate_accept(config, ctx, spec);
  switch (decision.kind) {
    case statejar::AcceptDecision::Kind::Accept:
      std::cout << "decision=Accept\n";
      return kExitOk;
    case statejar::AcceptDecision::Kind::Prompt:
      std::cout << "decision=Prompt\n";
      break;
    case statejar::AcceptDecision::Kind::Reject:
      std::cout << "decision=Reject\n";
      break;
  }
  std::cout << "reason=" << statejar::to_string(decision.reason) << "\n";
  return kExitReject;
}

// --- simulate ----------------------------------------------------------

int cmd_simulate(const std::string& script_path, const std::string& jar_path,
                 const std::string& policy_path, const std::string& trace_path,
                 const std::string& expect_path, std::int64_t now) {
  bool ok = false;
  const std::string script_text = read_file(script_path, ok);
  if (!ok) {
    std::cerr << "statejar: cannot read script: " << script_path << "\n";
    return kExitUsage;
  }
  auto script = statejar::parse_exchange_script(script_text);
  if (!script.ok()) {
    std::cerr << "statejar: script error";
    if (script.error().line) std::cerr << " at line " << script.error().line;
    std::cerr << ": " << script.error().message << "\n";
    return kExitScript;
  }
  if (script.value().clients.empty() && !script.value().steps.empty()) {
    std::cerr << "statejar: script has steps but no clients\n";
    return kExitScript;
  }

  std::map<std::string, statejar::Jar> jars;
  if (!jar_path.empty()) {
    const std::string jar_bytes = read_file(jar_path, ok);
    if (!ok) {
      std::cerr << "statejar: cannot read jar file: " << jar_path << "\n";
      return kExitUsage;
    }
    auto loaded = statejar::Jar::load(jar_bytes);
    if (!loaded.ok()) {
      std::cerr << "statejar: " << jar_path << ":" << loaded.error().line << ": "
                << loaded.error().message << "\n";
      return kExitParseError;
    }
    if (script.value().clients.empty()) {
      std::cerr << "statejar: --jar given but script declares no client\n";
      return kExitScript;
    }
    // The preloaded jar belongs to the first declared client.
    jars.emplace(script.value().clients.front().id, std::move(loaded).value());
  }

  std::map<std::string, statejar::PolicyConfig> policies;
  if (!policy_path.empty()) {
    const std::string policy_bytes = read_file(policy_path, ok);
    if (!ok) {
      std::cerr << "statejar: cannot read policy file: " << policy_path << "\n";
      return kExitUsage;
    }
    auto config = statejar::parse_policy_config(policy_bytes);
    if (!config.ok()) {
      std::cerr << "statejar: " << policy_path << ":" << config.error().line
                << ": " << config.error().message << "\n";
      return kExitParseError;
    }
    // One policy file configures every client in the script.
    for (const auto& client : script.value().clients) {
      policies.emplace(client.id, config.value());
    }
  }

  auto run = statejar::run_exchange(script.value(), std::move(jars),
                                    std::move(policies), now);
  if (!run.ok()) {
    std::cerr << "statejar: " << run.error().message << "\n";
    return kExitScript;
  }
  const std::string trace = statejar::serialize_trace(run.value().events);

  if (!trace_path.empty()) {
    if (!write_file(trace_path, trace)) {
      std::cerr << "statejar: cannot write trace: " << trace_path << "\n";
      return kExitUsage;
    }
  } else if (expect_path.empty()) {
    std::cout << trace;
  }

  if (!expect_path.empty()) {
    const std::string golden = read_file(expect_path, ok);
    if (!ok) {
      std::cerr << "statejar: cannot read golden trace: " << expect_path << "\n";
      return kExitUsage;
    }
    if (trace != golden) {
      std::vector<std::string> got_lines, want_lines;
      std::stringstream got(trace), want(golden);
      std::string line;
      while (std::getline(got, line)) got_lines.push_back(line);
      while (std::getline(want, line)) want_lines.push_back(line);
      const std::size_t n = std::max(got_lines.size(), want_lines.size());
      for (std::size_t i = 0; i < n; ++i) {
        const std::string* g = i < got_lines.size() ? &got_lines[i] : nullptr;
        const std::string* w = i < want_lines.size() ? &want_lines[i] : nullptr;
        if (g && w && *g == *w) continue;
        std::cerr << "trace mismatch at line " << (i + 1) << ":\n";
        std::cerr << "  want: " << (w ? *w : "<missing>") << "\n";
        std::cerr << "  got:  " << (g ? *g : "<missing>") << "\n";
      }
      return kExitReject;
    }
    std::cout << "trace-match=1\n";
  }
  return kExitOk;
}

// --- corpus ------------------------------------------------------------

int cmd_corpus(const std::string& dir) {
  auto summary = statejar::run_corpus_dir(dir);
  if (!summary.ok()) {
    std::cerr << "statejar: " << summary.error().message << "\n";
    return kExitCorpus;
  }
  const auto& s = summary.value();
  if (s.total == 0) {
    std::cerr << "statejar: warning: no .case files in " << dir << "\n";
  }
  std::cout << "cases=" << s.total << "\n";
  std::cout << "passed=" << (s.total - s.failed) << "\n";
  std::cout << "failed=" << s.failed << "\n";
  for (const auto& f : s.failures) std::cout << "failure=" << f << "\n";
  return s.failed == 0 ? kExitOk : kExitReject;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"statejar: HTTP cookie state-management engine"};
  app.require_subcommand(1);

  // parse
  std::string parse_mode = "v0";
  std::string parse_header;
  auto* parse_cmd = app.add_subcommand("parse", "parse a cookie header");
  parse_cmd->add_option("--mode", parse_mode, "v0 | v1 | cookie | cookie2")
      ->check(CLI::IsMember({"v0", "v1", "cookie", "cookie2"}));
  parse_cmd->add_option("header", parse_header, "header value text")->required();

  // match
  std::string match_host, match_pattern;
  bool match_v0 = false, match_v1 = false;
  auto* match_cmd = app.add_subcommand("match", "validate a Domain attribute");
  match_cmd->add_option("host", match_host)->required();
  match_cmd->add_option("domain", match_pattern)->required();
  match_cmd->add_flag("--v0", match_v0, "Netscape two/three-dot rule");
  match_cmd->add_flag("--v1", match_v1, "one-level rule");

  // jar
  std::string jar_action, jar_file = default_jar_path();
  std::string jar_mode = "v0", jar_header, jar_host, jar_path_arg = "/";
  int jar_port = 80, jar_version = 0;
  bool jar_secure = false, jar_purge = false;
  std::int64_t jar_now = 0;
  auto* jar_cmd = app.add_subcommand("jar", "manipulate a persistent jar");
  jar_cmd->add_option("action", jar_action, "store|select|save|load|end-session")
      ->required()
      ->check(CLI::IsMember({"store", "select", "save", "load", "end-session"}));
  jar_cmd->add_option("header", jar_header, "Set-Cookie text (store)");
  jar_cmd->add_option("--file", jar_file, "jar file path");
  jar_cmd->add_option("--mode", jar_mode, "v0 | v1 (store)")
      ->check(CLI::IsMember({"v0", "v1"}));
  jar_cmd->add_option("--host", jar_host, "request host");
  jar_cmd->add_option("--port", jar_port, "request port");
  jar_cmd->add_option("--path", jar_path_arg, "request path");
  jar_cmd->add_flag("--secure", jar_secure, "secure channel");
  jar_cmd->add_option("--version", jar_version, "Cookie header version (select)");
  jar_cmd->add_flag("--purge", jar_purge, "purge expired entries (save)");
  jar_cmd->add_option("--now", jar_now, "clock, UTC seconds");

  // policy
  std::string policy_action, policy_file, policy_mode = "reach";
  std::string policy_host, policy_origin;
  std::string policy_trigger = "inline", policy_direction = "accept";
  std::vector<std::string> policy_origin_domains;
  bool policy_override = false, policy_prompt = false, policy_curl = false;
  auto* policy_cmd = app.add_subcommand("policy", "evaluate the privacy policy");
  policy_cmd->add_option("action", policy_action)
      ->check(CLI::IsMember({"eval"}))
      ->required();
  policy_cmd->add_option("--policy", policy_file, "policy config file");
  policy_cmd->add_option("--mode", policy_mode, "reach | strict")
      ->check(CLI::IsMember({"reach", "strict"}));
  policy_cmd->add_flag("--override", policy_override, "third-party override on");
  policy_cmd->add_flag("--prompt", policy_prompt, "prompt instead of reject");
  policy_cmd->add_flag("--comment-url-context", policy_curl,
                       "browsing a CommentURL target");
  policy_cmd->add_option("--host", policy_host, "transaction host")->required();
  policy_cmd->add_option("--origin-host", policy_origin,
                         "origin transaction host (makes this derived)");
  policy_cmd->add_option("--trigger", policy_trigger,
                         "inline | redirect | formsubmit");
  policy_cmd->add_option("--origin-domains", policy_origin_domains,
                         "cookie domains seen on the origin transaction")
      ->delimiter(',');
  policy_cmd->add_option("--direction", policy_direction, "accept | send")
      ->check(CLI::IsMember({"accept", "send"}));

  // simulate
  std::string sim_script, sim_jar, sim_policy, sim_trace, sim_expect;
  std::int64_t sim_now = 0;
  auto* sim_cmd = app.add_subcommand("simulate", "run an exchange script");
  sim_cmd->add_option("script", sim_script, "script file")->required();
  sim_cmd->add_option("--jar", sim_jar, "preload jar for the first client");
  sim_cmd->add_option("--policy", sim_policy, "policy file for all clients");
  sim_cmd->add_option("--trace", sim_trace, "write trace here");
  sim_cmd->add_option("--expect", sim_expect, "golden trace to compare");
  sim_cmd->add_option("--now", sim_now, "base clock, UTC seconds");

  // corpus
  std::string corpus_dir;
  auto* corpus_cmd = app.add_subcommand("corpus", "run a conformance corpus");
  corpus_cmd->add_option("dir", corpus_dir, "directory of .case files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "statejar: " << e.what() << "\n";
    return kExitUsage;
  }

  if (parse_cmd->parsed()) return cmd_parse(parse_mode, parse_header);
  if (match_cmd->parsed()) {
    if (match_v0 == match_v1) {
      std::cerr << "statejar: choose exactly one of --v0, --v1\n";
      return kExitUsage;
    }
    return cmd_match(match_host, match_pattern, match_v1);
  }
  if (jar_cmd->parsed()) {
    if (jar_action == "store") {
      if (jar_host.empty() || jar_header.empty()) {
        std::cerr << "statejar: jar store needs --host and a header argument\n";
        return kExitUsage;
      }
      return cmd_jar_store(jar_file, jar_mode, jar_header, jar_host, jar_port,
                           jar_path_arg, jar_secure, jar_now);
    }
    if (jar_action == "select") {
      if (jar_host.empty()) {
        std::cerr << "statejar: jar select needs --host\n";
        return kExitUsage;
      }
      return cmd_jar_select(jar_file, jar_host, jar_port, jar_path_arg,
                            jar_secure, jar_version, jar_now);
    }
    if (jar_action == "save") return cmd_jar_save(jar_file, jar_now, jar_purge);
    if (jar_action == "load") return cmd_jar_load(jar_file);
    return cmd_jar_end_session(jar_file);
  }
  if (policy_cmd->parsed()) {
    statejar::PolicyConfig config;
    if (!policy_file.empty()) {
      bool ok = false;
      const std::string bytes = read_file(policy_file, ok);
      if (!ok) {
        std::cerr << "statejar: cannot read policy file: " << policy_file << "\n";
        return kExitUsage;
      }
      auto parsed = statejar::parse_policy_config(bytes);
      if (!parsed.ok()) {
        std::cerr << "statejar: " << policy_file << ":" << parsed.error().line
                  << ": " << parsed.error().message << "\n";
        return kExitParseError;
      }
      config = parsed.value();
    }
    if (policy_mode == "strict") config.mode = statejar::PolicyMode::Rfc2109Strict;
    if (policy_override) config.third_party_override = true;
    if (policy_prompt) config.prompt_enabled = true;
    if (policy_curl) config.comment_url_context = true;
    return cmd_policy_eval(config, policy_host, policy_origin, policy_trigger,
                           policy_origin_domains, policy_direction);
  }
  if (sim_cmd->parsed()) {
    return cmd_simulate(sim_script, sim_jar, sim_policy, sim_trace, sim_expect,
                        sim_now);
  }
  if (corpus_cmd->parsed()) return cmd_corpus(corpus_dir);

  return kExitUsage;
}
