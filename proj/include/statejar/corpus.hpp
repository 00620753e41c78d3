// statejar: conformance corpus — flat key=value case files that pin parser
// behavior, plus the structured dump format the CLI prints.
//
// A case names a parse mode and an input header, then lists expected
// key=value facts. The runner parses the input, produces the same dump the
// CLI's parse command prints, and requires every expected fact to appear
// with exactly the expected value.
#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "statejar/header.hpp"
#include "statejar/result.hpp"

namespace statejar {

// ---------------------------------------------------------------------------
// Structured dumps (shared by cmd_parse and the corpus runner)

inline std::vector<std::pair<std::string, std::string>> dump_specs(
    const std::vector<CookieSpec>& specs) {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("count", std::to_string(specs.size()));
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const CookieSpec& spec = specs[i];
    const std::string prefix = "cookie." + std::to_string(i) + ".";
    out.emplace_back(prefix + "name", spec.name);
    out.emplace_back(prefix + "value", spec.value);
    out.emplace_back(prefix + "version", std::to_string(spec.version));
    if (spec.domain) out.emplace_back(prefix + "domain", spec.domain->to_string());
    if (spec.path) out.emplace_back(prefix + "path", *spec.path);
    if (spec.expires) out.emplace_back(prefix + "expires", std::to_string(*spec.expires));
    if (spec.max_age) out.emplace_back(prefix + "max-age", std::to_string(*spec.max_age));
    if (spec.discard) out.emplace_back(prefix + "discard", "1");
    if (spec.secure) out.emplace_back(prefix + "secure", "1");
    if (spec.comment) out.emplace_back(prefix + "comment", *spec.comment);
    if (spec.comment_url) out.emplace_back(prefix + "comment-url", *spec.comment_url);
    if (spec.port_spec.kind == PortSpec::Kind::SamePortOnly) {
      out.emplace_back(prefix + "port", "same");
    } else if (spec.port_spec.kind == PortSpec::Kind::PortList) {
      std::string list;
      for (auto p : spec.port_spec.ports) {
        if (!list.empty()) list.push_back(',');
        list += std::to_string(p);
      }
      out.emplace_back(prefix + "port", list);
    }
    for (std::size_t e = 0; e < spec.extras.size(); ++e) {
      std::string text = spec.extras[e].name;
      if (spec.extras[e].value) text += "=" + *spec.extras[e].value;
      out.emplace_back(prefix + "extra." + std::to_string(e), text);
    }
  }
  return out;
}

inline std::vector<std::pair<std::string, std::string>> dump_request_parse(
    const CookieRequestParse& parse) {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("version", std::to_string(parse.version));
  out.emplace_back("count", std::to_string(parse.entries.size()));
  for (std::size_t i = 0; i < parse.entries.size(); ++i) {
    const CookieRequestEntry& entry = parse.entries[i];
    const std::string prefix = "entry." + std::to_string(i) + ".";
    out.emplace_back(prefix + "name", entry.name);
    out.emplace_back(prefix + "value", entry.value);
    if (entry.path) out.emplace_back(prefix + "path", *entry.path);
    if (entry.domain) out.emplace_back(prefix + "domain", *entry.domain);
    if (entry.port_present) out.emplace_back(prefix + "port-present", "1");
    if (entry.port) out.emplace_back(prefix + "port", *entry.port);
  }
  return out;
}

// The dump for one corpus case (or one CLI parse invocation): either the
// parsed structure or a single error line.
inline std::vector<std::pair<std::string, std::string>> dump_parse(
    std::string_view mode, std::string_view input) {
  std::vector<std::pair<std::string, std::string>> out;
  if (mode == "v0" || mode == "v1") {
    auto parsed = parse_set_cookie(input, mode == "v1" ? ParseMode::V1 : ParseMode::V0);
    if (!parsed.ok()) {
      out.emplace_back("error", to_string(parsed.error().cls));
      return out;
    }
    return dump_specs(parsed.value());
  }
  if (mode == "cookie") {
    auto parsed = parse_cookie_request({std::string(input)});
    if (!parsed.ok()) {
      out.emplace_back("error", to_string(parsed.error().cls));
      return out;
    }
    return dump_request_parse(parsed.value());
  }
  if (mode == "cookie2") {
    auto parsed = parse_cookie2_header(input);
    if (!parsed.ok()) {
      out.emplace_back("error", to_string(parsed.error().cls));
      return out;
    }
    out.emplace_back("version", std::to_string(parsed.value()));
    return out;
  }
  out.emplace_back("error", "UnknownMode");
  return out;
}

// ---------------------------------------------------------------------------
// Corpus cases

struct CorpusCase {
  std::string id;
  std::string mode;   // v0 | v1 | cookie | cookie2
  std::string input;
  std::string note;   // provenance, free text
  std::vector<std::pair<std::string, std::string>> expects;
};

namespace detail {

inline std::string_view trim_case(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace detail

inline Result<CorpusCase> parse_corpus_case(std::string_view text) {
  CorpusCase c;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = detail::trim_case(text.substr(pos, eol - pos));
    ++line_no;
    const bool at_end = eol == text.size();
    pos = eol + 1;
    if (line.empty() || line.front() == '#') {
      if (at_end) break;
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      return make_error<CorpusCase>(ErrorClass::MalformedLine,
                                    "corpus line lacks '='", line_no);
    }
    const std::string key(detail::trim_case(line.substr(0, eq)));
    const std::string value(detail::trim_case(line.substr(eq + 1)));
    if (key == "id") c.id = value;
    else if (key == "mode") c.mode = value;
    else if (key == "input") c.input = value;
    else if (key == "note") c.note = value;
    else c.expects.emplace_back(key, value);
    if (at_end) break;
  }
  if (c.id.empty() || c.mode.empty()) {
    return make_error<CorpusCase>(ErrorClass::MalformedLine,
                                  "corpus case needs id and mode");
  }
  if (c.mode != "v0" && c.mode != "v1" && c.mode != "cookie" && c.mode != "cookie2") {
    return make_error<CorpusCase>(ErrorClass::MalformedLine,
                                  "corpus mode must be v0, v1, cookie or cookie2");
  }
  return Result<CorpusCase>(std::move(c));
}

struct CaseOutcome {
  bool passed = true;
  std::string detail;  // first mismatch, for diagnostics
};

inline CaseOutcome run_corpus_case(const CorpusCase& c) {
  const auto dump = dump_parse(c.mode, c.input);
  std::map<std::string, std::string> facts(dump.begin(), dump.end());
  for (const auto& [key, want] : c.expects) {
    const auto it = facts.find(key);
    if (it == facts.end()) {
      return {false, c.id + ": missing " + key + " (wanted " + want + ")"};
    }
    if (it->second != want) {
      return {false, c.id + ": " + key + " = " + it->second + ", wanted " + want};
    }
  }
  return {};
}

struct CorpusSummary {
  std::size_t total = 0;
  std::size_t failed = 0;
  std::vector<std::string> failures;  // per-case detail lines
};

// Runs every *.case file under `dir`, in sorted path order. A directory that
// cannot be read is an error; an empty one is a passing zero-case run.
inline Result<CorpusSummary> run_corpus_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::directory_iterator it(dir, ec);
  if (ec) {
    return make_error<CorpusSummary>(ErrorClass::MalformedLine,
                                     "cannot read corpus directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : it) {
    if (entry.path().extension() == ".case") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  CorpusSummary summary;
  for (const auto& path : files) {
    ++summary.total;
    std::ifstream in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    auto parsed = parse_corpus_case(buffer.str());
    if (!parsed.ok()) {
      ++summary.failed;
      summary.failures.push_back(path.filename().string() + ": " +
                                 parsed.error().message);
      continue;
    }
    const CaseOutcome outcome = run_corpus_case(parsed.value());
    if (!outcome.passed) {
      ++summary.failed;
      summary.failures.push_back(outcome.detail);
    }
  }
  return Result<CorpusSummary>(std::move(summary));
}

}  // namespace statejar
