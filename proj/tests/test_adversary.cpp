#include <catch2/catch_amalgamated.hpp>

#include "arhscope/adversary.hpp"
#include "arhscope/model_parser.hpp"

using namespace arhscope;

namespace {

// A -> B with A inside domain D; enough structure to exercise every
// capability predicate.
AnaModel domain_model() {
  return parse_model_text(R"({
    "entities": ["A", "B"],
    "domains": {"D": ["A"]},
    "links": [["A", "B"], ["B", "A"]]
  })");
}

}  // namespace

TEST_CASE("permission order is bitwise inclusion") {
  CHECK(perm_leq(Permission::None, Permission::Read));
  CHECK(perm_leq(Permission::Read, Permission::ReadWrite));
  CHECK(perm_leq(Permission::Write, Permission::ReadWrite));
  CHECK_FALSE(perm_leq(Permission::Read, Permission::Write));
  CHECK_FALSE(perm_leq(Permission::Write, Permission::Read));
  CHECK_FALSE(perm_leq(Permission::ReadWrite, Permission::Read));
  CHECK(has_read(Permission::ReadWrite));
  CHECK_FALSE(has_write(Permission::Read));
}

TEST_CASE("compromise codes are a bijection with permission vectors") {
  for (uint64_t code = 0; code < 16; ++code)
    CHECK(Compromise::from_code(code, 2).code() == code);
  Compromise c(3);
  c.perms[0] = Permission::Read;       // value 1, weight 4^0
  c.perms[2] = Permission::ReadWrite;  // value 3, weight 4^2
  CHECK(c.code() == 1 + 3 * 16);
  CHECK(c.rank() == 3);
  CHECK(c.dom_size() == 2);
  CHECK_FALSE(c.empty());
  CHECK(Compromise(3).empty());
}

TEST_CASE("pointwise order and dom-based subtraction") {
  AnaModel m = domain_model();  // components: A, B, D
  Compromise lo = make_compromise(m, {{"A", Permission::Read}});
  Compromise hi = make_compromise(m, {{"A", Permission::ReadWrite},
                                      {"B", Permission::Read},
                                      {"D", Permission::Write}});
  CHECK(leq(lo, hi));
  CHECK_FALSE(leq(hi, lo));
  CHECK(leq(lo, lo));
  // A:w is not below A:r even though both are rank 1.
  CHECK_FALSE(leq(make_compromise(m, {{"A", Permission::Write}}), lo));

  // Subtraction removes whole components in dom(c), not individual bits:
  // (hi - A:r) zeroes A entirely, including its write bit.
  Compromise diff = subtract(hi, lo);
  CHECK(diff == make_compromise(m, {{"B", Permission::Read}, {"D", Permission::Write}}));
  CHECK(subtract(hi, hi).empty());
  CHECK(subtract(hi, Compromise(3)) == hi);
}

TEST_CASE("compromise keys round-trip and sort by component name") {
  AnaModel m = domain_model();
  Compromise c = make_compromise(m, {{"D", Permission::Write}, {"A", Permission::ReadWrite}});
  CHECK(compromise_key(c, m) == "A:rw,D:w");
  CHECK(compromise_from_key("A:rw,D:w", m) == c);
  CHECK(compromise_key(Compromise(3), m).empty());
  CHECK_THROWS(compromise_from_key("X:r", m));
  CHECK_THROWS(make_compromise(m, {{"X", Permission::Read}}));
}

TEST_CASE("read capabilities propagate from domains to members") {
  AnaModel m = domain_model();
  Compromise dom_r = make_compromise(m, {{"D", Permission::Read}});
  CHECK(entity_or_domain_read(dom_r, m, "A"));   // member of D
  CHECK_FALSE(entity_or_domain_read(dom_r, m, "B"));

  // Interception needs a read-compromised endpoint on either side.
  CHECK(can_intercept(dom_r, m, "A", "B"));
  CHECK(can_intercept(dom_r, m, "B", "A"));
  Compromise b_r = make_compromise(m, {{"B", Permission::Read}});
  CHECK(can_intercept(b_r, m, "A", "B"));
  Compromise b_w = make_compromise(m, {{"B", Permission::Write}});
  CHECK_FALSE(can_intercept(b_w, m, "A", "B"));  // write grants no reads
}

TEST_CASE("injection needs the receiver or the claimed sender's domain") {
  AnaModel m = domain_model();

  // Receiver write-compromised: inject on any link into it.
  Compromise b_w = make_compromise(m, {{"B", Permission::Write}});
  CHECK(can_inject_on(b_w, m, "A", "B"));
  CHECK_FALSE(can_inject_on(b_w, m, "B", "A"));

  // Write compromise of the sending ENTITY alone grants nothing: the
  // adversary cannot forge outbound traffic just by corrupting A's state.
  Compromise a_w = make_compromise(m, {{"A", Permission::Write}});
  CHECK_FALSE(can_inject_on(a_w, m, "A", "B"));

  // Write compromise of the sender's DOMAIN allows spoofing its members.
  Compromise d_w = make_compromise(m, {{"D", Permission::Write}});
  CHECK(can_inject_on(d_w, m, "A", "B"));
  CHECK(can_inject_on(d_w, m, "B", "A"));  // receiver A sits in D
  CHECK(can_inject_as(d_w, m, "A"));
  CHECK_FALSE(can_inject_as(d_w, m, "B"));
}

TEST_CASE("mismatched component counts are rejected") {
  CHECK_THROWS(leq(Compromise(2), Compromise(3)));
  CHECK_THROWS(subtract(Compromise(3), Compromise(2)));
}
