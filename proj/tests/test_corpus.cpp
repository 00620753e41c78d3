#include <gtest/gtest.h>

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "statejar/corpus.hpp"

namespace fs = std::filesystem;
using statejar::CaseOutcome;
using statejar::CorpusCase;
using statejar::dump_parse;
using statejar::ErrorClass;
using statejar::parse_corpus_case;
using statejar::run_corpus_case;
using statejar::run_corpus_dir;

namespace {

std::map<std::string, std::string> facts(std::string_view mode,
                                         std::string_view input) {
  const auto dump = dump_parse(mode, input);
  return {dump.begin(), dump.end()};
}

class TempCorpusDir {
 public:
  TempCorpusDir() {
    root_ = fs::temp_directory_path() /
            ("statejar-corpus-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter_++));
    fs::create_directories(root_);
  }
  ~TempCorpusDir() {
    std::error_code ec;
    fs::remove_all(root_, ec);
  }
  const fs::path& path() const { return root_; }
  void add(const std::string& name, const std::string& text) const {
    std::ofstream out(root_ / name);
    out << text;
  }

 private:
  static inline int counter_ = 0;
  fs::path root_;
};

}  // namespace

// ---------------------------------------------------------------------------
// dump_parse

TEST(CorpusDump, V0PlainCookie) {
  const auto f = facts("v0", "id=waldo");
  EXPECT_EQ(f.at("count"), "1");
  EXPECT_EQ(f.at("cookie.0.name"), "id");
  EXPECT_EQ(f.at("cookie.0.value"), "waldo");
  EXPECT_EQ(f.at("cookie.0.version"), "0");
  EXPECT_EQ(f.count("cookie.0.path"), 0u);
}

TEST(CorpusDump, V1FullAttributeSet) {
  const auto f = facts(
      "v1",
      "xx=\"1=2&3-4\"; Comment=\"blah\"; Version=1; Max-Age=15552000; Path=/; "
      "Expires=Sun, 27 Apr 1997 01:16:23 GMT");
  EXPECT_EQ(f.at("count"), "1");
  EXPECT_EQ(f.at("cookie.0.name"), "xx");
  EXPECT_EQ(f.at("cookie.0.value"), "\"1=2&3-4\"");
  EXPECT_EQ(f.at("cookie.0.version"), "1");
  EXPECT_EQ(f.at("cookie.0.comment"), "blah");
  EXPECT_EQ(f.at("cookie.0.max-age"), "15552000");
  EXPECT_EQ(f.at("cookie.0.path"), "/");
  EXPECT_EQ(f.at("cookie.0.expires"), "862103783");
}

TEST(CorpusDump, V0KeepsV1AttributesAsExtras) {
  const auto f = facts("v0", "xx=\"1=2&3-4\"; Comment=\"blah\"; Version=1");
  EXPECT_EQ(f.at("cookie.0.extra.0"), "Comment=\"blah\"");
  EXPECT_EQ(f.at("cookie.0.extra.1"), "Version=1");
}

TEST(CorpusDump, PortVariants) {
  EXPECT_EQ(facts("v1", "a=b; Port; Version=1").at("cookie.0.port"), "same");
  EXPECT_EQ(facts("v1", "a=b; Port=\"80,443\"; Version=1").at("cookie.0.port"),
            "80,443");
}

TEST(CorpusDump, RequestMode) {
  const auto f = facts("cookie", "$Version=1; xx=\"1=2&3-4\"; $Path=/");
  EXPECT_EQ(f.at("version"), "1");
  EXPECT_EQ(f.at("count"), "1");
  EXPECT_EQ(f.at("entry.0.name"), "xx");
  EXPECT_EQ(f.at("entry.0.value"), "\"1=2&3-4\"");
  EXPECT_EQ(f.at("entry.0.path"), "/");
}

TEST(CorpusDump, Cookie2Mode) {
  EXPECT_EQ(facts("cookie2", "$Version=1").at("version"), "1");
}

TEST(CorpusDump, ErrorsBecomeFacts) {
  EXPECT_EQ(facts("v1", "").at("error"), "MissingNameValue");
  EXPECT_EQ(facts("cookie", "$Bogus=1; a=b").at("error"),
            "OrphanDollarAttribute");
  EXPECT_EQ(facts("martian", "a=b").at("error"), "UnknownMode");
}

// ---------------------------------------------------------------------------
// Case files

TEST(CorpusCaseParse, FullFile) {
  auto r = parse_corpus_case(
      "# pinned parser behavior\n"
      "id = waldo-basic\n"
      "mode = v0\n"
      "input = id=waldo\n"
      "note = plain name/value pair\n"
      "\n"
      "count = 1\n"
      "cookie.0.name = id\n"
      "cookie.0.value = waldo\n");
  ASSERT_TRUE(r.ok()) << r.error().message;
  const CorpusCase& c = r.value();
  EXPECT_EQ(c.id, "waldo-basic");
  EXPECT_EQ(c.mode, "v0");
  EXPECT_EQ(c.input, "id=waldo");
  EXPECT_EQ(c.note, "plain name/value pair");
  ASSERT_EQ(c.expects.size(), 3u);
  EXPECT_EQ(c.expects[0], (std::pair<std::string, std::string>{"count", "1"}));
}

TEST(CorpusCaseParse, Errors) {
  auto no_id = parse_corpus_case("mode = v0\ninput = a=b\n");
  ASSERT_FALSE(no_id.ok());
  EXPECT_EQ(no_id.error().cls, ErrorClass::MalformedLine);

  auto no_mode = parse_corpus_case("id = x\ninput = a=b\n");
  EXPECT_FALSE(no_mode.ok());

  auto bad_mode = parse_corpus_case("id = x\nmode = martian\n");
  EXPECT_FALSE(bad_mode.ok());

  auto bad_line = parse_corpus_case("id = x\nmode = v0\nnot a key value\n");
  ASSERT_FALSE(bad_line.ok());
  EXPECT_EQ(bad_line.error().cls, ErrorClass::MalformedLine);
  EXPECT_EQ(bad_line.error().line, 3u);
}

TEST(CorpusRun, PassAndFail) {
  CorpusCase ok;
  ok.id = "basic";
  ok.mode = "v0";
  ok.input = "id=waldo";
  ok.expects = {{"count", "1"}, {"cookie.0.value", "waldo"}};
  EXPECT_TRUE(run_corpus_case(ok).passed);

  CorpusCase wrong = ok;
  wrong.expects = {{"cookie.0.value", "perdita"}};
  const CaseOutcome w = run_corpus_case(wrong);
  EXPECT_FALSE(w.passed);
  EXPECT_NE(w.detail.find("wanted perdita"), std::string::npos);

  CorpusCase missing = ok;
  missing.expects = {{"cookie.7.name", "ghost"}};
  const CaseOutcome m = run_corpus_case(missing);
  EXPECT_FALSE(m.passed);
  EXPECT_NE(m.detail.find("missing cookie.7.name"), std::string::npos);
}

TEST(CorpusRun, ErrorExpectationsWork) {
  CorpusCase c;
  c.id = "empty-input";
  c.mode = "v1";
  c.input = "";
  c.expects = {{"error", "MissingNameValue"}};
  EXPECT_TRUE(run_corpus_case(c).passed);
}

// ---------------------------------------------------------------------------
// Directory runner

TEST(CorpusDir, RunsSortedCaseFilesOnly) {
  TempCorpusDir dir;
  dir.add("b-second.case",
          "id = b-second\nmode = v0\ninput = a=1\ncount = 1\n");
  dir.add("a-first.case",
          "id = a-first\nmode = v0\ninput = a=1\ncookie.0.value = 9\n");
  dir.add("ignored.txt", "id = nope\nmode = v0\n");
  auto r = run_corpus_dir(dir.path());
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.value().total, 2u);
  EXPECT_EQ(r.value().failed, 1u);
  ASSERT_EQ(r.value().failures.size(), 1u);
  // Sorted order means the a-first failure is reported (and is the only one).
  EXPECT_NE(r.value().failures[0].find("a-first"), std::string::npos);
}

TEST(CorpusDir, UnparseableCaseCountsAsFailure) {
  TempCorpusDir dir;
  dir.add("broken.case", "mode = v0\n");
  auto r = run_corpus_dir(dir.path());
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.value().total, 1u);
  EXPECT_EQ(r.value().failed, 1u);
}

TEST(CorpusDir, EmptyDirectoryPasses) {
  TempCorpusDir dir;
  auto r = run_corpus_dir(dir.path());
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.value().total, 0u);
  EXPECT_EQ(r.value().failed, 0u);
}

TEST(CorpusDir, MissingDirectoryIsAnError) {
  auto r = run_corpus_dir(fs::path("/nonexistent/statejar-nowhere"));
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.error().cls, ErrorClass::MalformedLine);
}

// ---------------------------------------------------------------------------
// The shipped corpus must pass as-is.

TEST(CorpusDir, ShippedCorpusIsGreen) {
  auto r = run_corpus_dir(fs::path(STATEJAR_SOURCE_DIR) / "corpus");
  ASSERT_TRUE(r.ok()) << r.error().message;
  EXPECT_GT(r.value().total, 0u);
  for (const auto& line : r.value().failures) ADD_FAILURE() << line;
  EXPECT_EQ(r.value().failed, 0u);
}
