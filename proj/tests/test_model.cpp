#include <catch2/catch_amalgamated.hpp>

#include "arhscope/model_parser.hpp"
#include "support/test_models.hpp"

using namespace arhscope;
using nlohmann::json;

TEST_CASE("parsing a complete model populates derived structure") {
  AnaModel m = parse_model(testsupport::signed_ping_doc());

  CHECK(m.entities == std::vector<std::string>{"A", "B"});
  CHECK(m.components == std::vector<std::string>{"A", "B"});
  CHECK(m.has_link("A", "B"));
  CHECK_FALSE(m.has_link("B", "A"));
  CHECK(m.has_link("A", "A"));  // self-links are implicit
  CHECK(m.bounds == SearchBounds{1, 8, 3});
  REQUIRE(m.properties.size() == 2);
  CHECK(m.properties[0].kind == SecurityProperty::Kind::Secrecy);
  CHECK(m.properties[1].kind == SecurityProperty::Kind::Agreement);
  CHECK(m.properties[1].matched_args == std::vector<int>{0});
  CHECK(m.find_property("auth") != nullptr);
  CHECK(m.find_property("nope") == nullptr);
  CHECK_FALSE(m.digest.empty());
}

TEST_CASE("atom kinds are inferred from usage") {
  AnaModel m = parse_model(testsupport::signed_ping_doc());
  CHECK(m.atom_kinds.at("kA") == AtomKind::PrivateKey);  // used as a signing key
  CHECK(m.atom_kinds.at("n") == AtomKind::Nonce);        // declared fresh
  CHECK(m.atom_kinds.at("A") == AtomKind::Constant);     // entity name
}

TEST_CASE("domains map entities and register as components") {
  json doc = testsupport::signed_ping_doc();
  doc["domains"]["D"] = json::array({"A"});
  AnaModel m = parse_model(doc);
  CHECK(m.components == std::vector<std::string>{"A", "B", "D"});
  CHECK(m.domain_containing("A") == std::optional<std::string>("D"));
  CHECK_FALSE(m.domain_containing("B").has_value());
}

TEST_CASE("digest distinguishes models") {
  json doc = testsupport::signed_ping_doc();
  AnaModel m1 = parse_model(doc);
  doc["bounds"]["max_trace_len"] = 10;
  AnaModel m2 = parse_model(doc);
  CHECK(m1.digest != m2.digest);
  CHECK(m1.digest == parse_model(testsupport::signed_ping_doc()).digest);
}

TEST_CASE("validation rejects malformed models") {
  auto broken = [](auto mutate) {
    json doc = testsupport::signed_ping_doc();
    mutate(doc);
    return doc;
  };

  SECTION("duplicate entity") {
    CHECK_THROWS_AS(parse_model(broken([](json& d) { d["entities"].push_back("A"); })),
                    ModelError);
  }
  SECTION("domain reusing an entity name") {
    CHECK_THROWS_AS(
        parse_model(broken([](json& d) { d["domains"]["A"] = json::array({"B"}); })),
        ModelError);
  }
  SECTION("entity in two domains") {
    CHECK_THROWS_AS(parse_model(broken([](json& d) {
                      d["domains"]["D1"] = json::array({"A"});
                      d["domains"]["D2"] = json::array({"A"});
                    })),
                    ModelError);
  }
  SECTION("link with unknown endpoint") {
    CHECK_THROWS_AS(parse_model(broken([](json& d) { d["links"].push_back({"A", "X"}); })),
                    ModelError);
  }
  SECTION("send without a link") {
    CHECK_THROWS_AS(parse_model(broken([](json& d) {
                      d["roles"]["B"][0]["send"] = {{"to", "A"}, {"term", "x"}};
                    })),
                    ModelError);
  }
  SECTION("start step that sends nothing") {
    CHECK_THROWS_AS(parse_model(broken([](json& d) { d["roles"]["A"][0].erase("send"); })),
                    ModelError);
  }
  SECTION("unbound variable in a bind expression") {
    CHECK_THROWS_AS(parse_model(broken([](json& d) {
                      d["roles"]["A"][0]["bind"][0]["term"] = "sign(m, kA)";
                    })),
                    ModelError);
  }
  SECTION("fresh name clashing with a global atom") {
    CHECK_THROWS_AS(
        parse_model(broken([](json& d) { d["roles"]["A"][0]["fresh"].push_back("kA"); })),
        ModelError);
  }
  SECTION("fresh name reserved for the adversary") {
    CHECK_THROWS_AS(
        parse_model(broken([](json& d) { d["roles"]["A"][0]["fresh"].push_back("adv"); })),
        ModelError);
  }
  SECTION("secrecy property naming an unknown fresh value") {
    CHECK_THROWS_AS(parse_model(broken([](json& d) {
                      d["properties"][0]["secrets"][0]["fresh"] = "m";
                    })),
                    ModelError);
  }
  SECTION("agreement property naming an unknown claim") {
    CHECK_THROWS_AS(
        parse_model(broken([](json& d) { d["properties"][1]["end_claim"] = "Ghost"; })),
        ModelError);
  }
  SECTION("non-positive bounds") {
    CHECK_THROWS_AS(
        parse_model(broken([](json& d) { d["bounds"]["max_sessions"] = 0; })),
        ModelError);
  }
  SECTION("no entities at all") {
    CHECK_THROWS_AS(parse_model(json::object()), ModelError);
  }
}

TEST_CASE("text and file loaders report their own failures") {
  CHECK_THROWS_AS(parse_model_text("{ not json"), ModelError);
  CHECK_THROWS_AS(load_model("/nonexistent/model.json"), ModelError);
}

TEST_CASE("fresh atom names are session-qualified after the first session") {
  CHECK(fresh_atom_name("n", 1) == "n");
  CHECK(fresh_atom_name("n", 2) == "n#2");
}
