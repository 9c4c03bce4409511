#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "arhscope/arh.hpp"
#include "support/test_models.hpp"

using namespace arhscope;

namespace {

// Up-closure of a set of generator codes over n components.
std::set<uint64_t> up_closure(const std::set<uint64_t>& gen, size_t n) {
  std::set<uint64_t> C;
  for (uint64_t code = 0; code < lattice_size(n); ++code)
    for (uint64_t g : gen)
      if (leq(Compromise::from_code(g, n), Compromise::from_code(code, n))) {
        C.insert(code);
        break;
      }
  return C;
}

uint64_t code2(Permission a, Permission b) {
  Compromise c(2);
  c.perms[0] = a;
  c.perms[1] = b;
  return c.code();
}

}  // namespace

TEST_CASE("non-upward-closed input is rejected loudly") {
  std::set<uint64_t> bad = {code2(Permission::Read, Permission::Write)};  // no supersets
  CHECK_THROWS_AS(mcs(bad, 2), ArhError);
  CHECK_THROWS_AS(nbns(bad, 2), ArhError);
  CHECK_THROWS_AS(nrfc(bad, 2), ArhError);
}

TEST_CASE("two-component worked example") {
  // C = everything at or above {A:r, B:w}.
  uint64_t g = code2(Permission::Read, Permission::Write);
  std::set<uint64_t> C = up_closure({g}, 2);
  REQUIRE(C.size() == 4);

  CHECK(mcs(C, 2) == std::set<uint64_t>{g});
  CHECK(spof(C, 2).empty());  // every violating scenario touches two components
  CHECK(minimal_spof(C, 2).empty());

  // Every single capability is necessary somewhere: removing that component
  // from a violating superset always exits C.
  std::set<uint64_t> expected_nbns = {
      code2(Permission::Read, Permission::None), code2(Permission::Write, Permission::None),
      code2(Permission::None, Permission::Read), code2(Permission::None, Permission::Write)};
  CHECK(nbns(C, 2) == expected_nbns);

  // Only the empty compromise contributes to no violation at all.
  CHECK(nrfc(C, 2) == std::set<uint64_t>{0});
}

TEST_CASE("single-component violations are SPOFs") {
  uint64_t a_r = code2(Permission::Read, Permission::None);
  std::set<uint64_t> C = up_closure({a_r}, 2);
  std::set<uint64_t> s = spof(C, 2);
  CHECK(s == std::set<uint64_t>{a_r, code2(Permission::ReadWrite, Permission::None)});
  CHECK(minimal_spof(C, 2) == std::set<uint64_t>{a_r});
}

TEST_CASE("the empty violation set classifies trivially") {
  std::set<uint64_t> C;
  CHECK(mcs(C, 2).empty());
  CHECK(spof(C, 2).empty());
  CHECK(nbns(C, 2).empty());
  // Nothing violates, so nothing is relevant anywhere.
  CHECK(nrfc(C, 2).size() == lattice_size(2));
}

TEST_CASE("antichain reduction agrees with the literal definitions") {
  std::mt19937_64 rng(20260823);
  for (int i = 0; i < 40; ++i) {
    std::set<uint64_t> C = testsupport::random_upward_closed(rng, 3);
    INFO("iteration " << i << ", |C| = " << C.size());
    CHECK(mcs(C, 3, ArhMethod::Antichain) == mcs(C, 3, ArhMethod::Exhaustive));
    CHECK(nbns(C, 3, ArhMethod::Antichain) == nbns(C, 3, ArhMethod::Exhaustive));
    CHECK(nrfc(C, 3, ArhMethod::Antichain) == nrfc(C, 3, ArhMethod::Exhaustive));
  }
}

TEST_CASE("the four ARH sets partition consistently") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    std::set<uint64_t> C = testsupport::random_upward_closed(rng, 3);
    std::set<uint64_t> m = mcs(C, 3), nb = nbns(C, 3), nr = nrfc(C, 3);
    for (uint64_t c : m) CHECK(C.count(c) == 1);
    for (uint64_t c : nb) {
      CHECK(C.count(c) == 0);
      CHECK(nr.count(c) == 0);  // NBNS and NRFC are disjoint by definition
    }
    for (uint64_t c : nr) CHECK(C.count(c) == 0);
  }
}

TEST_CASE("classification of a verified model") {
  AnaModel m = parse_model(testsupport::signed_ping_doc());
  VerdictStore store = orchestrate(m, m.bounds);
  ArhReport r = classify(store, m);

  auto keyset = [&](const std::set<uint64_t>& s) {
    std::set<std::string> out;
    for (uint64_t code : s) out.insert(compromise_key(Compromise::from_code(code, 2), m));
    return out;
  };
  CHECK(keyset(r.properties.at("secrecy").mcs) == std::set<std::string>{"A:r", "B:r"});
  CHECK(keyset(r.properties.at("auth").mcs) == std::set<std::string>{"A:r,B:w"});
  CHECK(keyset(r.properties.at("secrecy").minimal_spof) ==
        std::set<std::string>{"A:r", "B:r"});
  CHECK(r.properties.at("auth").spof.empty());

  // Multi-property map: the joint forgery compromise breaks both properties.
  CHECK(r.multi_sp.at("A:r,B:w") == std::set<std::string>{"auth", "secrecy"});
  CHECK(r.multi_sp.at("").empty());
  CHECK(r.multi_sp.at("A:w").empty());
}

TEST_CASE("report serializations carry every scenario") {
  AnaModel m = parse_model(testsupport::signed_ping_doc());
  VerdictStore store = orchestrate(m, m.bounds);
  ArhReport r = classify(store, m);

  nlohmann::json j = arh_report_to_json(r, m);
  CHECK(j.at("components") == nlohmann::json(m.components));
  CHECK(j.at("properties").at("secrecy").at("mcs") == nlohmann::json({"A:r", "B:r"}));
  CHECK(j.at("multi_sp").contains("(none)"));

  std::string csv = arh_report_to_csv(r, store, m);
  size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  CHECK(lines == lattice_size(2) + 1);  // header + one row per compromise
  CHECK(csv.rfind("compromise,auth_status,auth_arh,secrecy_status,secrecy_arh\n", 0) == 0);
  CHECK(csv.find("\"A:r,B:w\",violated,mcs,") != std::string::npos);
}
