#include <gtest/gtest.h>

#include "dclab/logic.hpp"

using namespace dclab;
using L = LogicValue;

TEST(Resolve, IdentityIsZ) {
  for (L v : kAllLogicValues) {
    EXPECT_EQ(resolve(v, L::Z), v);
    EXPECT_EQ(resolve(L::Z, v), v);
  }
}

TEST(Resolve, CommutativeAndAssociative) {
  for (L a : kAllLogicValues) {
    for (L b : kAllLogicValues) {
      EXPECT_EQ(resolve(a, b), resolve(b, a));
      for (L c : kAllLogicValues) EXPECT_EQ(resolve(resolve(a, b), c), resolve(a, resolve(b, c)));
    }
  }
}

TEST(Resolve, OpposingDriversConflict) {
  EXPECT_EQ(resolve(L::Zero, L::One), L::X);
  EXPECT_EQ(resolve(L::One, L::One), L::One);
  EXPECT_EQ(resolve(L::X, L::Zero), L::X);
}

TEST(Kleene, ControllingValuesWinOverUnknown) {
  EXPECT_EQ(logic_and(L::Zero, L::X), L::Zero);
  EXPECT_EQ(logic_and(L::One, L::X), L::X);
  EXPECT_EQ(logic_or(L::One, L::Z), L::One);
  EXPECT_EQ(logic_or(L::Zero, L::Z), L::X);
  EXPECT_EQ(logic_xor(L::One, L::X), L::X);
  EXPECT_EQ(logic_not(L::Z), L::X);
}

// Kleene AND/OR are monotone: refining X to 0/1 never flips a known result.
TEST(Kleene, MonotoneUnderRefinement) {
  const L known[] = {L::Zero, L::One};
  auto refines = [](L coarse, L fine) { return coarse == L::X || coarse == fine; };
  for (L a : kAllLogicValues) {
    for (L b : kAllLogicValues) {
      for (L fa : known) {
        for (L fb : known) {
          if (!refines(as_input(a), fa) || !refines(as_input(b), fb)) continue;
          EXPECT_TRUE(refines(logic_and(a, b), logic_and(fa, fb)));
          EXPECT_TRUE(refines(logic_or(a, b), logic_or(fa, fb)));
          EXPECT_TRUE(refines(logic_xor(a, b), logic_xor(fa, fb)));
        }
      }
    }
  }
}

TEST(Kleene, DeMorgan) {
  for (L a : kAllLogicValues) {
    for (L b : kAllLogicValues) {
      EXPECT_EQ(logic_not(logic_and(a, b)), logic_or(logic_not(a), logic_not(b)));
    }
  }
}

TEST(Text, CharRoundTrip) {
  for (L v : kAllLogicValues) {
    EXPECT_EQ(logic_from_char(to_char(v)), v);
    EXPECT_EQ(logic_from_string(to_string(v)), v);
  }
  EXPECT_EQ(to_char(L::X), 'x');
  EXPECT_EQ(to_string(L::Z), "Z");
  EXPECT_EQ(logic_from_char('H'), L::One);
  EXPECT_EQ(logic_from_char('L'), L::Zero);
  EXPECT_EQ(logic_from_char('U'), L::X);
  EXPECT_FALSE(logic_from_char('q').has_value());
  EXPECT_FALSE(logic_from_string("01").has_value());
}
