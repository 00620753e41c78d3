#include <gtest/gtest.h>

#include "statejar/host.hpp"

using statejar::DomainPattern;
using statejar::HostName;

TEST(HostName, ParsesAndLowercases) {
  auto h = HostName::parse("WWW.Shop.COM");
  ASSERT_TRUE(h.has_value());
  EXPECT_EQ(h->text(), "www.shop.com");
  ASSERT_EQ(h->labels().size(), 3u);
  EXPECT_EQ(h->labels()[0], "www");
  EXPECT_FALSE(h->is_ip());
}

TEST(HostName, SingleLabel) {
  auto h = HostName::parse("foo");
  ASSERT_TRUE(h.has_value());
  EXPECT_EQ(h->labels().size(), 1u);
  EXPECT_FALSE(h->is_ip());
}

TEST(HostName, IpLiteral) {
  auto h = HostName::parse("10.0.0.1");
  ASSERT_TRUE(h.has_value());
  EXPECT_TRUE(h->is_ip());
  // Digits in some labels but letters in others is a name, not an address.
  auto mixed = HostName::parse("3com.com");
  ASSERT_TRUE(mixed.has_value());
  EXPECT_FALSE(mixed->is_ip());
}

TEST(HostName, RejectsMalformedHosts) {
  EXPECT_FALSE(HostName::parse("").has_value());
  EXPECT_FALSE(HostName::parse(".").has_value());
  EXPECT_FALSE(HostName::parse(".shop.com").has_value());
  EXPECT_FALSE(HostName::parse("shop.com.").has_value());
  EXPECT_FALSE(HostName::parse("shop..com").has_value());
  EXPECT_FALSE(HostName::parse("sho p.com").has_value());
  EXPECT_FALSE(HostName::parse("shop;com").has_value());
}

TEST(DomainPattern, LeadingDotTracked) {
  auto dotted = DomainPattern::parse(".Shop.Com");
  ASSERT_TRUE(dotted.has_value());
  EXPECT_TRUE(dotted->leading_dot());
  EXPECT_EQ(dotted->text(), "shop.com");
  EXPECT_EQ(dotted->to_string(), ".shop.com");

  auto plain = DomainPattern::parse("shop.com");
  ASSERT_TRUE(plain.has_value());
  EXPECT_FALSE(plain->leading_dot());
  EXPECT_EQ(plain->to_string(), "shop.com");

  // Same labels, different dot flag: distinct patterns.
  EXPECT_FALSE(*dotted == *plain);
  EXPECT_TRUE(plain->with_leading_dot() == *dotted);
}

TEST(DomainPattern, FromHost) {
  auto h = HostName::parse("www.shop.com");
  ASSERT_TRUE(h.has_value());
  auto p = DomainPattern::from_host(*h);
  EXPECT_FALSE(p.leading_dot());
  EXPECT_EQ(p.text(), "www.shop.com");
}

TEST(DomainPattern, RejectsMalformed) {
  EXPECT_FALSE(DomainPattern::parse("").has_value());
  EXPECT_FALSE(DomainPattern::parse(".").has_value());
  EXPECT_FALSE(DomainPattern::parse("..com").has_value());
  EXPECT_FALSE(DomainPattern::parse(".a b.com").has_value());
}
