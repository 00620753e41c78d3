// statejar: host names and domain patterns as label lists.
#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace statejar {

namespace detail {

inline std::string ascii_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

inline bool valid_label_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
}

inline std::optional<std::vector<std::string>> split_labels(std::string_view text) {
  std::vector<std::string> labels;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t dot = text.find('.', start);
    const std::string_view label =
        text.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
    if (label.empty()) return std::nullopt;
    for (char c : label) {
      if (!valid_label_char(c)) return std::nullopt;
    }
    labels.emplace_back(ascii_lower(label));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return labels;
}

}  // namespace detail

// A request-URI host. Labels are stored lowercase; IPv4 literals are flagged
// because the domain rules are DNS-name based and never apply to them.
class HostName {
 public:
  static std::optional<HostName> parse(std::string_view text) {
    if (text.empty()) return std::nullopt;
    auto labels = detail::split_labels(text);
    if (!labels) return std::nullopt;
    HostName h;
    h.labels_ = std::move(*labels);
    h.is_ip_ = looks_numeric(h.labels_);
    return h;
  }

  const std::vector<std::string>& labels() const { return labels_; }
  bool is_ip() const { return is_ip_; }

  std::string text() const {
    std::string out;
    for (const auto& l : labels_) {
      if (!out.empty()) out.push_back('.');
      out += l;
    }
    return out;
  }

  friend bool operator==(const HostName& a, const HostName& b) {
    return a.labels_ == b.labels_ && a.is_ip_ == b.is_ip_;
  }

 private:
  static bool looks_numeric(const std::vector<std::string>& labels) {
    for (const auto& l : labels) {
      for (char c : l) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
      }
    }
    return true;
  }

  std::vector<std::string> labels_;
  bool is_ip_ = false;
};

// A Domain attribute value, normalized to lowercase. The leading dot is
// remembered separately; matching itself is dot-insensitive.
class DomainPattern {
 public:
  static std::optional<DomainPattern> parse(std::string_view text) {
    bool dot = false;
    if (!text.empty() && text.front() == '.') {
      dot = true;
      text.remove_prefix(1);
    }
    auto labels = detail::split_labels(text);
    if (!labels) return std::nullopt;
    DomainPattern p;
    p.labels_ = std::move(*labels);
    p.leading_dot_ = dot;
    return p;
  }

  static DomainPattern from_host(const HostName& host) {
    DomainPattern p;
    p.labels_ = host.labels();
    p.leading_dot_ = false;
    return p;
  }

  const std::vector<std::string>& labels() const { return labels_; }
  bool leading_dot() const { return leading_dot_; }

  DomainPattern with_leading_dot() const {
    DomainPattern p = *this;
    p.leading_dot_ = true;
    return p;
  }

  // Pattern text without the leading dot.
  std::string text() const {
    std::string out;
    for (const auto& l : labels_) {
      if (!out.empty()) out.push_back('.');
      out += l;
    }
    return out;
  }

  std::string to_string() const { return leading_dot_ ? "." + text() : text(); }

  friend bool operator==(const DomainPattern& a, const DomainPattern& b) {
    return a.labels_ == b.labels_ && a.leading_dot_ == b.leading_dot_;
  }

 private:
  std::vector<std::string> labels_;
  bool leading_dot_ = false;
};

}  // namespace statejar
