#include "support.hpp"

#include <gtest/gtest.h>

using namespace fptest;

namespace {

std::string entry_line(const std::string& name, const std::string& domain, const std::string& extra = "") {
    return R"({"name": ")" + name + R"(", "base_domain": ")" + domain +
           R"(", "subdomain_scheme": "subdomain_prefix", "tld": ")" + domain.substr(domain.rfind('.') + 1) +
           R"(", "has_template_builder": false, "takedown_fingerprints": ["gone"])" + extra + "}\n";
}

}  // namespace

TEST(RegistryLoad, ShippedRegistryHasTheTwentyFour) {
    const Registry r = load_registry(std::string(FREEPHISH_DATA_DIR) + "/registry.jsonl");
    const std::vector<std::string> expected = {
        "Weebly",    "DuckDNS",      "000webhost", "Blogspot",  "Wix",          "Google Sites",
        "Github.io", "Firebase",     "Square up",  "Zoho Forms", "Wordpress",   "Google Forms",
        "Sharepoint", "Yolasite",    "MyFTP.org",  "GoDaddysites", "Mailchimp", "Atwebpages",
        "glitch.me", "Webnode",      "hPage",      "Herokuapp", "website.com",  "Netlify"};
    ASSERT_EQ(r.size(), 24u);
    for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(r.entries()[i].name, expected[i]);
    for (const auto& e : r.entries()) EXPECT_FALSE(e.takedown_fingerprints.empty()) << e.name;
    EXPECT_EQ(Registry::builtin().size(), 24u);
    EXPECT_EQ(Registry::builtin().to_text(), r.to_text());
}

TEST(RegistryLoad, EmptyFileIsParseError) {
    EXPECT_THROW(Registry::parse(""), ParseError);
    EXPECT_THROW(Registry::parse("# only a comment\n\n"), ParseError);
}

TEST(RegistryLoad, DuplicateBaseDomain) {
    EXPECT_THROW(Registry::parse(entry_line("A", "weebly.com") + entry_line("B", "weebly.com")), DuplicateEntryError);
    EXPECT_THROW(Registry::parse(entry_line("A", "weebly.com") + entry_line("A", "wix.com")), DuplicateEntryError);
}

TEST(RegistryLoad, FieldErrorsNameLineAndField) {
    try {
        Registry::parse(entry_line("A", "weebly.com") + entry_line("B", "wix.com", R"(, "colour": "red")"));
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find(":2:"), std::string::npos) << msg;
        EXPECT_NE(msg.find("colour"), std::string::npos) << msg;
    }
    EXPECT_THROW(Registry::parse(entry_line("A", "Weebly.com")), ParseError);
    EXPECT_THROW(Registry::parse(entry_line("A", "weebly")), ParseError);
    EXPECT_THROW(Registry::parse(entry_line("A", "weebly.com", R"(, "abuse_contact": "nobody")")), ParseError);
    EXPECT_THROW(Registry::parse("{not json}\n"), ParseError);
}

TEST(RegistryLoad, RoundTripThroughText) {
    const Registry& r = Registry::builtin();
    const Registry again = Registry::parse(r.to_text());
    ASSERT_EQ(again.size(), r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        EXPECT_EQ(again.entries()[i].name, r.entries()[i].name);
        EXPECT_EQ(again.entries()[i].abuse_contact, r.entries()[i].abuse_contact);
        EXPECT_EQ(again.entries()[i].takedown_fingerprints, r.entries()[i].takedown_fingerprints);
        EXPECT_EQ(again.entries()[i].banner_markers, r.entries()[i].banner_markers);
    }
}

TEST(Canonicalize, CaseAndFragment) {
    const auto u = canonicalize("HTTPS://Foo.Weebly.COM/a#frag");
    EXPECT_EQ(u.scheme, "https");
    EXPECT_EQ(u.host, "foo.weebly.com");
    EXPECT_EQ(u.path, "/a");
    EXPECT_FALSE(u.query);
    EXPECT_EQ(u.serialized(), "https://foo.weebly.com/a");
}

TEST(Canonicalize, QueryKeptAndErrors) {
    const auto u = canonicalize("http://a.b.duckdns.org/x?q=1");
    EXPECT_EQ(u.query, "q=1");
    EXPECT_EQ(u.serialized(), "http://a.b.duckdns.org/x?q=1");
    EXPECT_THROW(canonicalize("notaurl"), UrlError);
    EXPECT_THROW(canonicalize(""), UrlError);
    EXPECT_THROW(canonicalize("http:///path"), UrlError);
}

TEST(Canonicalize, DefaultPortUserinfoSchemeless) {
    EXPECT_EQ(canonicalize("http://user:pw@x.weebly.com:80/").serialized(), "http://x.weebly.com/");
    EXPECT_EQ(canonicalize("https://x.weebly.com:8443").serialized(), "https://x.weebly.com:8443/");
    EXPECT_EQ(canonicalize("x.weebly.com/p").serialized(), "http://x.weebly.com/p");
}

TEST(Canonicalize, IdempotentOnRandomStrings) {
    Rng rng(17);
    static const char* const parts[] = {"http://", "HTTPS://", "", "Foo", "bar", ".", "weebly.com", "/", "?", "#",
                                        "a=1", "&", ":8080", "@", "%20", "x-y", "WWW.", "..", "sites.google.com/view/"};
    int accepted = 0;
    for (int i = 0; i < 2000; ++i) {
        std::string raw;
        const std::size_t n = 1 + rng.below(8);
        for (std::size_t k = 0; k < n; ++k) raw += parts[rng.below(std::size(parts))];
        CanonicalUrl c;
        try {
            c = canonicalize(raw);
        } catch (const UrlError&) {
            continue;
        }
        ++accepted;
        const auto again = canonicalize(c.serialized());
        EXPECT_EQ(again, c) << raw;
        EXPECT_EQ(again.serialized(), c.serialized()) << raw;
    }
    EXPECT_GT(accepted, 200);
}

TEST(ResolveHref, Forms) {
    const auto base = canonicalize("https://a.weebly.com/dir/page.html");
    EXPECT_EQ(resolve_href(base, "/x")->serialized(), "https://a.weebly.com/x");
    EXPECT_EQ(resolve_href(base, "y.html")->serialized(), "https://a.weebly.com/dir/y.html");
    EXPECT_EQ(resolve_href(base, "//cdn.example.com/z")->serialized(), "https://cdn.example.com/z");
    EXPECT_EQ(resolve_href(base, "http://other.example.org")->serialized(), "http://other.example.org/");
    EXPECT_FALSE(resolve_href(base, "mailto:x@y.z"));
    EXPECT_FALSE(resolve_href(base, "javascript:void(0)"));
}

TEST(MatchFhd, Examples) {
    const Registry& r = Registry::builtin();
    const auto m = match_fhd(canonicalize("http://paypal-login.weebly.com/"), r);
    ASSERT_TRUE(m);
    EXPECT_EQ(m->entry->name, "Weebly");
    EXPECT_EQ(m->site_slug, "paypal-login");
    EXPECT_FALSE(match_fhd(canonicalize("http://weebly.com/"), r));
    EXPECT_FALSE(match_fhd(canonicalize("http://www.weebly.com/"), r));
    const auto g = match_fhd(canonicalize("https://sites.google.com/view/acct-verify"), r);
    ASSERT_TRUE(g);
    EXPECT_EQ(g->entry->name, "Google Sites");
    EXPECT_EQ(g->site_slug, "view/acct-verify");
    EXPECT_FALSE(match_fhd(canonicalize("https://sites.google.com/"), r));
    EXPECT_FALSE(match_fhd(canonicalize("https://notweebly.com/"), r));
    EXPECT_FALSE(match_fhd(canonicalize("https://www.example.com/weebly.com"), r));
}

TEST(MatchFhd, NoUrlMatchesTwoEntries) {
    const Registry& r = Registry::builtin();
    // one single-entry registry per line of the shipped file
    std::vector<Registry> singles;
    for (const auto& line : split(r.to_text(), '\n'))
        if (!trim(line).empty()) singles.push_back(Registry::parse(line));
    ASSERT_EQ(singles.size(), r.size());
    std::vector<std::string> probes;
    for (const auto& e : r.entries()) {
        probes.push_back("http://probe." + e.base_domain + "/a/b");
        probes.push_back("http://deep.probe." + e.base_domain + "/");
        probes.push_back("http://" + e.base_domain + "/probe/x");
    }
    for (const auto& p : probes) {
        const auto url = canonicalize(p);
        std::size_t hits = 0;
        for (const auto& s : singles) hits += s.match(url).has_value();
        EXPECT_LE(hits, 1u) << p;
        EXPECT_EQ(hits == 1, r.match(url).has_value()) << p;
    }
}

TEST(MatchFhd, DeterministicAndCopiesShareEntries) {
    const Registry copy = Registry::builtin();
    const auto url = canonicalize("http://x.wixsite.com/");
    const auto a = copy.match(url);
    const auto b = Registry::builtin().match(url);
    ASSERT_TRUE(a && b);
    EXPECT_EQ(a->entry, b->entry);
}
