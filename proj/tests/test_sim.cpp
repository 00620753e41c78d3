#include <gtest/gtest.h>

#include <map>
#include <string>
#include <vector>

#include "statejar/sim.hpp"
#include "support/generators.hpp"

using statejar::ClientFlavor;
using statejar::ErrorClass;
using statejar::ExchangeScript;
using statejar::HostName;
using statejar::Jar;
using statejar::parse_exchange_script;
using statejar::PolicyConfig;
using statejar::PolicyMode;
using statejar::run_exchange;
using statejar::ScriptStep;
using statejar::serialize_exchange_script;
using statejar::serialize_trace;
using statejar::SimResult;
using statejar::TraceEvent;
using statejar::Trigger;

namespace {

ExchangeScript parse_ok(const std::string& text) {
  auto r = parse_exchange_script(text);
  EXPECT_TRUE(r.ok()) << (r.ok() ? "" : r.error().message);
  return r.ok() ? std::move(r).value() : ExchangeScript{};
}

SimResult run_ok(const ExchangeScript& script,
                 std::map<std::string, PolicyConfig> policies = {},
                 std::map<std::string, Jar> jars = {}) {
  auto r = run_exchange(script, std::move(jars), std::move(policies));
  EXPECT_TRUE(r.ok()) << (r.ok() ? "" : r.error().message);
  return r.ok() ? std::move(r).value() : SimResult{};
}

}  // namespace

// ---------------------------------------------------------------------------
// Script parsing

TEST(ScriptParse, FullSyntax) {
  const auto script = parse_ok(
      "# demo\n"
      "client c1 flavor=msie\n"
      "server s1 host=WWW.Shop.COM port=8080 v1\n"
      "proxy p1\n"
      "request id=r1 client=c1 server=s1 path=\"/a b\" port=81 secure via=p1 "
      "time=99\n"
      "response id=r1 set=\"id=waldo; Path=/\" set2=\"id=w2; Version=1\" "
      "negotiate-set=\"n=1\" cacheable no-store cookie-shareable links=r2\n"
      "request id=r2 client=c1 server=s1 kind=derived origin=r1 "
      "trigger=redirect\n");
  ASSERT_EQ(script.clients.size(), 1u);
  EXPECT_EQ(script.clients[0].flavor, ClientFlavor::MsieV3);
  ASSERT_EQ(script.servers.size(), 1u);
  EXPECT_EQ(script.servers[0].host.text(), "www.shop.com");
  EXPECT_EQ(script.servers[0].port, 8080);
  EXPECT_TRUE(script.servers[0].v1_capable);
  ASSERT_EQ(script.proxies.size(), 1u);
  ASSERT_EQ(script.steps.size(), 2u);
  const ScriptStep& r1 = script.steps[0];
  EXPECT_EQ(r1.path, "/a b");
  EXPECT_EQ(r1.port, std::optional<int>(81));
  EXPECT_TRUE(r1.secure);
  EXPECT_EQ(r1.via, "p1");
  EXPECT_EQ(r1.time, std::optional<std::int64_t>(99));
  ASSERT_TRUE(r1.has_response);
  EXPECT_EQ(r1.set_cookies, std::vector<std::string>{"id=waldo; Path=/"});
  EXPECT_EQ(r1.set_cookie2s, std::vector<std::string>{"id=w2; Version=1"});
  EXPECT_EQ(r1.negotiate_set, std::optional<std::string>("n=1"));
  EXPECT_TRUE(r1.cacheable);
  EXPECT_TRUE(r1.no_store);
  EXPECT_TRUE(r1.cookie_shareable);
  EXPECT_EQ(r1.links, std::vector<std::string>{"r2"});
  const ScriptStep& r2 = script.steps[1];
  EXPECT_TRUE(r2.derived);
  EXPECT_EQ(r2.origin_id, "r1");
  EXPECT_EQ(r2.trigger, Trigger::Redirect3xx);
  EXPECT_FALSE(r2.has_response);
}

TEST(ScriptParse, IntegrityErrors) {
  const char* bad[] = {
      "client c1\nserver s1 host=a.com\nrequest id=r1 client=c1 server=s1\n"
      "request id=r1 client=c1 server=s1\n",  // duplicate id
      "client c1\nrequest id=r1 client=c1 server=nope\n",           // no server
      "server s1 host=a.com\nrequest id=r1 client=ghost server=s1\n",  // no client
      "client c1\nserver s1 host=a.com\n"
      "request id=r1 client=c1 server=s1 via=mystery\n",            // no proxy
      "client c1\nserver s1 host=a.com\n"
      "request id=r2 client=c1 server=s1 kind=derived origin=r9 "
      "trigger=inline\n",                                           // bad origin
      "client c1\nserver s1 host=a.com\n"
      "request id=r1 client=c1 server=s1 kind=derived trigger=inline\n",
      "client c1\nserver s1 host=a.com\n"
      "request id=r1 client=c1 server=s1\nresponse id=r9\n",  // response mismatch
      "client c1\nserver s1 host=a.com\n"
      "request id=r1 client=c1 server=s1\nresponse id=r1\nresponse id=r1\n",
      "client c1\nserver s1 host=a.com\n"
      "request id=r1 client=c1 server=s1\nresponse id=r1 links=r2\n",  // bad link
      "warp drive\n",                                            // unknown verb
      "client c1\nserver s1 host=a.com\n"
      "request id=r1 client=c1 server=s1 path=\"/unterminated\n",  // open quote
      "server s1 host=.bad..host\n",                               // bad host
  };
  for (const char* text : bad) {
    auto r = parse_exchange_script(text);
    EXPECT_FALSE(r.ok()) << text;
    if (!r.ok()) {
      EXPECT_EQ(r.error().cls, ErrorClass::BadScript) << text;
    }
  }
}

TEST(ScriptParse, LinksMustNameLaterDerivedSteps) {
  // Valid when the link target is a later derived step of this origin.
  parse_ok(
      "client c1\nserver s1 host=a.com\nserver s2 host=b.com\n"
      "request id=r1 client=c1 server=s1\n"
      "response id=r1 links=r2\n"
      "request id=r2 client=c1 server=s2 kind=derived origin=r1 trigger=inline\n");
  // Invalid when the target derives from a different origin.
  auto r = parse_exchange_script(
      "client c1\nserver s1 host=a.com\nserver s2 host=b.com\n"
      "request id=r0 client=c1 server=s1\n"
      "request id=r1 client=c1 server=s1\n"
      "response id=r1 links=r2\n"
      "request id=r2 client=c1 server=s2 kind=derived origin=r0 trigger=inline\n");
  EXPECT_FALSE(r.ok());
}

TEST(ScriptParse, RoundTripProperty) {
  testgen::Rng rng(4242);
  for (int i = 0; i < 300; ++i) {
    const ExchangeScript script = testgen::random_script(rng);
    const std::string text = serialize_exchange_script(script);
    auto back = parse_exchange_script(text);
    ASSERT_TRUE(back.ok()) << text << "\n-> " << back.error().message;
    EXPECT_EQ(back.value(), script) << text;
  }
}

// ---------------------------------------------------------------------------
// Documented failure scenarios

TEST(SimScenario, DomainLeakageAcrossSiblings) {
  const auto script = parse_ok(
      "client c1 flavor=rfc2965\n"
      "server shop host=shop.biz.com\n"
      "server info host=info.biz.com\n"
      "request id=r1 client=c1 server=shop path=/\n"
      "response id=r1 set=\"Customer=custid; Domain=biz.com\"\n"
      "request id=r2 client=c1 server=info path=/\n");
  const auto result = run_ok(script);
  EXPECT_EQ(serialize_trace(result.events),
            "step=r1 event=CookieAccepted cookie=Customer=custid@biz.com;/ "
            "rule=store.new\n"
            "step=r2 event=CookieSent cookie=Customer=custid@biz.com;/ "
            "rule=send.select\n");
}

TEST(SimScenario, SpoofingViaSharedDomainReplacement) {
  const auto script = parse_ok(
      "client c1 flavor=rfc2965\n"
      "server shop host=shop.biz.com\n"
      "server info host=info.biz.com\n"
      "request id=r1 client=c1 server=shop path=/\n"
      "response id=r1 set=\"Customer=shop-custid; Domain=biz.com\"\n"
      "request id=r2 client=c1 server=info path=/\n"
      "response id=r2 set=\"Customer=info-custid; Domain=biz.com\"\n"
      "request id=r3 client=c1 server=shop path=/\n");
  const auto result = run_ok(script);
  EXPECT_EQ(serialize_trace(result.events),
            "step=r1 event=CookieAccepted cookie=Customer=shop-custid@biz.com;/ "
            "rule=store.new\n"
            "step=r2 event=CookieSent cookie=Customer=shop-custid@biz.com;/ "
            "rule=send.select\n"
            "step=r2 event=CookieAccepted cookie=Customer=info-custid@biz.com;/ "
            "rule=store.replace\n"
            "step=r3 event=CookieSent cookie=Customer=info-custid@biz.com;/ "
            "rule=send.select\n");
  // The spoof landed: shop now receives info's identity for this user.
  const auto& jar = result.jars.at("c1");
  ASSERT_EQ(jar.size(), 1u);
  EXPECT_EQ(jar.entries()[0].spec.value, "info-custid");
}

TEST(SimScenario, ThirdPartyCookieBlockedByDefault) {
  const auto script = parse_ok(
      "client c1 flavor=rfc2965\n"
      "server news host=www.news.com\n"
      "server ads host=www.ads.com\n"
      "request id=r1 client=c1 server=news path=/\n"
      "response id=r1\n"
      "request id=r2 client=c1 server=ads path=/banner kind=derived origin=r1 "
      "trigger=inline\n"
      "response id=r2 set=\"Ad=track7; Domain=ads.com\"\n");
  const auto result = run_ok(script);
  EXPECT_EQ(serialize_trace(result.events),
            "step=r2 event=CookieRejected cookie=Ad=track7@ads.com;/ "
            "rule=policy.third-party reason=ThirdParty\n");
  EXPECT_EQ(result.jars.at("c1").size(), 0u);
}

TEST(SimScenario, ThirdPartyOverrideAdmitsTheCookie) {
  const auto script = parse_ok(
      "client c1 flavor=rfc2965\n"
      "server news host=www.news.com\n"
      "server ads host=www.ads.com\n"
      "request id=r1 client=c1 server=news path=/\n"
      "response id=r1\n"
      "request id=r2 client=c1 server=ads path=/banner kind=derived origin=r1 "
      "trigger=inline\n"
      "response id=r2 set=\"Ad=track7; Domain=ads.com\"\n");
  PolicyConfig override_policy;
  override_policy.third_party_override = true;
  const auto result = run_ok(script, {{"c1", override_policy}});
  EXPECT_EQ(serialize_trace(result.events),
            "step=r2 event=CookieAccepted cookie=Ad=track7@ads.com;/ "
            "rule=store.new\n");
  EXPECT_EQ(result.jars.at("c1").size(), 1u);
}

TEST(SimScenario, StrictModeSeverity) {
  // Same transaction twice: an inline image on a sibling host inside the
  // origin's reach, whose response sets a cookie. The origin page carried no
  // cookies, so the strict rule blocks what the reach rule allows.
  const auto script = parse_ok(
      "client c1 flavor=rfc2965\n"
      "server news host=www.news.com\n"
      "server images host=images.news.com\n"
      "request id=r1 client=c1 server=news path=/\n"
      "response id=r1\n"
      "request id=r2 client=c1 server=images path=/img kind=derived origin=r1 "
      "trigger=inline\n"
      "response id=r2 set=\"Session=xyz; Domain=news.com\"\n");

  PolicyConfig strict;
  strict.mode = PolicyMode::Rfc2109Strict;
  const auto strict_result = run_ok(script, {{"c1", strict}});
  EXPECT_EQ(serialize_trace(strict_result.events),
            "step=r2 event=CookieRejected cookie=Session=xyz@news.com;/ "
            "rule=policy.no-origin-cookie reason=NoOriginCookie\n");

  const auto reach_result = run_ok(script);  // default: reach mode
  EXPECT_EQ(serialize_trace(reach_result.events),
            "step=r2 event=CookieAccepted cookie=Session=xyz@news.com;/ "
            "rule=store.new\n");
}

TEST(SimScenario, StrictModeHonorsOriginCookieDomains) {
  // When the origin transaction did carry a matching Domain cookie, the
  // strict rule admits the derived one.
  const auto script = parse_ok(
      "client c1 flavor=rfc2965\n"
      "server news host=www.news.com\n"
      "server images host=images.news.com\n"
      "request id=r1 client=c1 server=news path=/\n"
      "response id=r1 set=\"Site=1; Domain=news.com\"\n"
      "request id=r2 client=c1 server=images path=/img kind=derived origin=r1 "
      "trigger=inline\n"
      "response id=r2 set=\"Session=xyz; Domain=news.com\"\n");
  PolicyConfig strict;
  strict.mode = PolicyMode::Rfc2109Strict;
  const auto result = run_ok(script, {{"c1", strict}});
  EXPECT_EQ(serialize_trace(result.events),
            "step=r1 event=CookieAccepted cookie=Site=1@news.com;/ "
            "rule=store.new\n"
            "step=r2 event=CookieSent cookie=Site=1@news.com;/ "
            "rule=send.select\n"
            "step=r2 event=CookieAccepted cookie=Session=xyz@news.com;/ "
            "rule=store.new\n");
}

TEST(SimScenario, ChainedDerivationKeepsRootSnapshot) {
  // r3 derives from r2 which derives from r1. The strict rule must judge r3
  // against the cookies of the root transaction r1, not the empty r2.
  const auto script = parse_ok(
      "client c1 flavor=rfc2965\n"
      "server news host=www.news.com\n"
      "server images host=images.news.com\n"
      "server mirror host=news.com\n"
      "request id=r1 client=c1 server=news path=/\n"
      "response id=r1 set=\"Site=1; Domain=news.com\"\n"
      "request id=r2 client=c1 server=images path=/img kind=derived origin=r1 "
      "trigger=inline\n"
      "response id=r2\n"
      "request id=r3 client=c1 server=mirror path=/real kind=derived origin=r2 "
      "trigger=redirect\n"
      "response id=r3 set=\"Hop=2; Domain=news.com\"\n");
  PolicyConfig strict;
  strict.mode = PolicyMode::Rfc2109Strict;
  const auto result = run_ok(script, {{"c1", strict}});

  // r1 stores Site; r2 sends it (news.com matches images.news.com? no — the
  // stored domain is the v0 literal "news.com", which tail-matches). r3's
  // store must be judged against r1's snapshot and accepted.
  bool r3_accepted = false;
  for (const auto& e : result.events) {
    if (e.step == "r3" && e.kind == TraceEvent::Kind::CookieAccepted) {
      r3_accepted = true;
    }
    ASSERT_FALSE(e.step == "r3" && e.kind == TraceEvent::Kind::CookieRejected)
        << statejar::to_line(e);
  }
  EXPECT_TRUE(r3_accepted);
}

// ---------------------------------------------------------------------------
// Negotiation walkthrough

TEST(SimScenario, VersionNegotiationGolden) {
  const auto script = parse_ok(
      "client c1 flavor=rfc2965\n"
      "server bob host=www.bob.com v1\n"
      "server carol host=www.carol.com v1\n"
      "request id=r0 client=c1 server=carol path=/\n"
      "response id=r0 set=\"legacy=old\"\n"
      "request id=r1 client=c1 server=bob path=/\n"
      "response id=r1 negotiate-set=\"neg=1\"\n"
      "request id=r2 client=c1 server=bob path=/\n"
      "response id=r2 negotiate-set=\"neg=2\"\n"
      "request id=r3 client=c1 server=carol path=/\n"
      "response id=r3 negotiate-set=\"neg=3\"\n");
  const auto result = run_ok(script);
  EXPECT_EQ(
      serialize_trace(result.events),
      "step=r0 event=CookieAccepted cookie=legacy=old@www.carol.com;/ "
      "rule=store.new\n"
      "step=r1 event=Negotiated cookie=- rule=negotiate.first-contact "
      "reason=SendBoth\n"
      "step=r1 event=CookieAccepted cookie=neg=1@www.bob.com;/ rule=store.new\n"
      "step=r1 event=CookieAccepted cookie=neg=1@www.bob.com;/ "
      "rule=store.replace\n"
      "step=r2 event=CookieSent cookie=neg=1@www.bob.com;/ rule=send.select\n"
      "step=r2 event=Negotiated cookie=- rule=negotiate.v1-cookie "
      "reason=SendV1Only\n"
      "step=r2 event=CookieAccepted cookie=neg=2@www.bob.com;/ "
      "rule=store.replace\n"
      "step=r3 event=CookieSent cookie=legacy=old@www.carol.com;/ "
      "rule=send.select\n"
      "step=r3 event=Negotiated cookie=- rule=negotiate.cookie2-advert "
      "reason=SendV1Only\n"
      "step=r3 event=CookieAccepted cookie=neg=3@www.carol.com;/ "
      "rule=store.new\n");
  // The jar ends holding legacy=old plus the two negotiated cookies.
  const auto& jar = result.jars.at("c1");
  ASSERT_EQ(jar.size(), 3u);
}

TEST(SimScenario, V0ServerNegotiatesV0Only) {
  const auto script = parse_ok(
      "client c1 flavor=rfc2965\n"
      "server old host=www.old.com\n"
      "request id=r1 client=c1 server=old path=/\n"
      "response id=r1 negotiate-set=\"n=1\"\n");
  const auto result = run_ok(script);
  EXPECT_EQ(serialize_trace(result.events),
            "step=r1 event=Negotiated cookie=- rule=negotiate.v0-server "
            "reason=SendV0Only\n"
            "step=r1 event=CookieAccepted cookie=n=1@www.old.com;/ "
            "rule=store.new\n");
}

TEST(SimProperty, AfterFirstContactAllNegotiationsAreV1Only) {
  testgen::Rng rng(2469);
  for (int round = 0; round < 200; ++round) {
    ExchangeScript script;
    script.clients.push_back({"c1", ClientFlavor::Rfc2965});
    statejar::ScriptServer server;
    server.id = "s1";
    server.host = HostName::parse("www.shop.com").value();
    server.v1_capable = true;
    script.servers.push_back(server);
    const int n = testgen::pick_int(rng, 2, 6);
    for (int i = 0; i < n; ++i) {
      ScriptStep step;
      step.id = "r" + std::to_string(i);
      step.client_id = "c1";
      step.server_id = "s1";
      step.has_response = true;
      step.negotiate_set = "neg=v" + std::to_string(i);
      script.steps.push_back(std::move(step));
    }
    const auto result = run_ok(script);
    std::vector<std::string> reasons;
    for (const auto& e : result.events) {
      if (e.kind == TraceEvent::Kind::Negotiated) reasons.push_back(e.reason);
    }
    ASSERT_EQ(reasons.size(), static_cast<std::size_t>(n));
    EXPECT_EQ(reasons[0], "SendBoth");
    for (std::size_t i = 1; i < reasons.size(); ++i) {
      EXPECT_EQ(reasons[i], "SendV1Only") << "round " << round << " step " << i;
    }
  }
}

// ---------------------------------------------------------------------------
// Naive clients inside the simulator

TEST(SimScenario, NaiveClientsMangleV1Header) {
  const std::string script_text =
      "client nav flavor=navigator\n"
      "client ms flavor=msie\n"
      "server s1 host=www.shop.com\n"
      "request id=r1 client=nav server=s1 path=/\n"
      "response id=r1 set=\"xx=\\\"1=2&3-4\\\"; Comment=\\\"blah\\\"; Version=1; "
      "Max-Age=15552000; Path=/; Expires=Sun, 27 Apr 1997 01:16:23 GMT\"\n"
      "request id=r2 client=ms server=s1 path=/\n"
      "response id=r2 set=\"xx=\\\"1=2&3-4\\\"; Comment=\\\"blah\\\"; Version=1; "
      "Max-Age=15552000; Path=/; Expires=Sun, 27 Apr 1997 01:16:23 GMT\"\n";
  const auto script = parse_ok(script_text);
  const auto result = run_ok(script);

  const auto& nav_jar = result.jars.at("nav");
  ASSERT_EQ(nav_jar.size(), 1u);
  EXPECT_EQ(nav_jar.entries()[0].spec.name, "xx");
  EXPECT_EQ(nav_jar.entries()[0].spec.value, "\"1=2&3-4\"");

  const auto& ms_jar = result.jars.at("ms");
  ASSERT_EQ(ms_jar.size(), 1u);
  EXPECT_EQ(ms_jar.entries()[0].spec.name, "Max-Age");
  EXPECT_EQ(ms_jar.entries()[0].spec.value, "15552000");
}

TEST(SimScenario, NaiveClientsIgnoreSetCookie2) {
  const auto script = parse_ok(
      "client nav flavor=navigator\n"
      "server s1 host=www.shop.com\n"
      "request id=r1 client=nav server=s1 path=/\n"
      "response id=r1 set2=\"a=b; Version=1\"\n");
  const auto result = run_ok(script);
  EXPECT_TRUE(result.events.empty());
  EXPECT_EQ(result.jars.at("nav").size(), 0u);
}

// ---------------------------------------------------------------------------
// Caching

TEST(SimScenario, ProxyStripsSetCookieFromSharedCache) {
  const auto script = parse_ok(
      "client c1 flavor=rfc2965\n"
      "client c2 flavor=rfc2965\n"
      "server news host=www.news.com\n"
      "proxy p1\n"
      "request id=r1 client=c1 server=news path=/page via=p1\n"
      "response id=r1 set=\"Session=alpha\" cacheable\n"
      "request id=r2 client=c2 server=news path=/page via=p1\n");
  const auto result = run_ok(script);
  EXPECT_EQ(serialize_trace(result.events),
            "step=r1 event=CookieAccepted cookie=Session=alpha@www.news.com;/ "
            "rule=store.new\n"
            "step=r1 event=SetCookieStripped "
            "cookie=Session=...@www.news.com;/page rule=cache.strip-set-cookie\n"
            "step=r1 event=CacheStored cookie=- rule=cache.store\n"
            "step=r2 event=CacheServed cookie=- rule=cache.serve\n");
  // The second client never saw the first client's cookie.
  EXPECT_EQ(result.jars.at("c2").size(), 0u);
  EXPECT_EQ(result.jars.at("c1").size(), 1u);
}

TEST(SimScenario, ShareableCookieIsReplayedFromCache) {
  const auto script = parse_ok(
      "client c1 flavor=rfc2965\n"
      "client c2 flavor=rfc2965\n"
      "server news host=www.news.com\n"
      "proxy p1\n"
      "request id=r1 client=c1 server=news path=/page via=p1\n"
      "response id=r1 set=\"Motd=hello\" cacheable cookie-shareable\n"
      "request id=r2 client=c2 server=news path=/page via=p1\n");
  const auto result = run_ok(script);
  EXPECT_EQ(serialize_trace(result.events),
            "step=r1 event=CookieAccepted cookie=Motd=hello@www.news.com;/ "
            "rule=store.new\n"
            "step=r1 event=CacheStored cookie=- rule=cache.store\n"
            "step=r2 event=CacheServed cookie=Motd=...@www.news.com;/page "
            "rule=cache.serve\n"
            "step=r2 event=CookieAccepted cookie=Motd=hello@www.news.com;/ "
            "rule=store.new\n");
  EXPECT_EQ(result.jars.at("c2").size(), 1u);
}

TEST(SimScenario, NoStoreBlocksTheCacheEntirely) {
  const auto script = parse_ok(
      "client c1 flavor=rfc2965\n"
      "client c2 flavor=rfc2965\n"
      "server news host=www.news.com\n"
      "proxy p1\n"
      "request id=r1 client=c1 server=news path=/page via=p1\n"
      "response id=r1 set=\"Session=alpha\" cacheable no-store "
      "cookie-shareable\n"
      "request id=r2 client=c2 server=news path=/page via=p1\n");
  const auto result = run_ok(script);
  for (const auto& e : result.events) {
    EXPECT_NE(e.kind, TraceEvent::Kind::CacheStored);
    EXPECT_NE(e.kind, TraceEvent::Kind::CacheServed);
  }
}

TEST(SimScenario, CacheKeyIncludesPathAndPort) {
  const auto script = parse_ok(
      "client c1 flavor=rfc2965\n"
      "server news host=www.news.com\n"
      "proxy p1\n"
      "request id=r1 client=c1 server=news path=/a via=p1\n"
      "response id=r1 cacheable\n"
      "request id=r2 client=c1 server=news path=/b via=p1\n"
      "response id=r2 cacheable\n"
      "request id=r3 client=c1 server=news path=/a via=p1\n");
  const auto result = run_ok(script);
  int stored = 0;
  int served = 0;
  for (const auto& e : result.events) {
    if (e.kind == TraceEvent::Kind::CacheStored) ++stored;
    if (e.kind == TraceEvent::Kind::CacheServed) {
      ++served;
      EXPECT_EQ(e.step, "r3");
    }
  }
  EXPECT_EQ(stored, 2);
  EXPECT_EQ(served, 1);
}

// ---------------------------------------------------------------------------
// Engine contract

TEST(SimProperty, DeterministicReplay) {
  testgen::Rng rng(1212);
  for (int round = 0; round < 100; ++round) {
    const ExchangeScript script = testgen::random_script(rng);
    auto a = run_exchange(script);
    auto b = run_exchange(script);
    ASSERT_TRUE(a.ok());
    ASSERT_TRUE(b.ok());
    EXPECT_EQ(serialize_trace(a.value().events), serialize_trace(b.value().events));
    for (const auto& [id, jar] : a.value().jars) {
      EXPECT_EQ(jar.entries(), b.value().jars.at(id).entries());
    }
  }
}

TEST(SimRun, RejectsHandBuiltScriptWithUnexecutedOrigin) {
  ExchangeScript script;
  script.clients.push_back({"c1", ClientFlavor::Rfc2965});
  statejar::ScriptServer server;
  server.id = "s1";
  server.host = HostName::parse("www.shop.com").value();
  script.servers.push_back(server);
  ScriptStep step;
  step.id = "r1";
  step.client_id = "c1";
  step.server_id = "s1";
  step.derived = true;
  step.origin_id = "r0";  // never declared
  step.trigger = Trigger::InlineEntity;
  script.steps.push_back(step);
  auto r = run_exchange(script);
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.error().cls, ErrorClass::BadScript);
}

TEST(SimRun, PreloadedJarIsUsed) {
  const auto script = parse_ok(
      "client c1 flavor=rfc2965\n"
      "server shop host=www.shop.com\n"
      "request id=r1 client=c1 server=shop path=/\n");
  Jar jar;
  statejar::CookieSpec spec;
  spec.name = "id";
  spec.value = "waldo";
  spec.expires = 99999;
  jar.store(spec, statejar::RequestContext::origin(
                      HostName::parse("www.shop.com").value(), 80, "/", false),
            0);
  std::map<std::string, Jar> jars;
  jars.emplace("c1", std::move(jar));
  const auto result = run_ok(script, {}, std::move(jars));
  EXPECT_EQ(serialize_trace(result.events),
            "step=r1 event=CookieSent cookie=id=waldo@www.shop.com;/ "
            "rule=send.select\n");
}
