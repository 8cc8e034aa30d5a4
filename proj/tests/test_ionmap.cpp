#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ctap/ionmap.hpp"

using namespace ctap;

namespace {

// N = 3 coupling table typed out by hand; "" marks a vanishing entry.
const std::vector<std::vector<std::string>> kTable3 = {
    {"", "sqrt(3)*Omega1", "sqrt(3)*Omega2", "", "", "", "", "", "", ""},
    {"sqrt(3)*Omega1", "", "Omega3", "2*Omega1", "sqrt(2)*Omega2", "", "", "", "", ""},
    {"sqrt(3)*Omega2", "Omega3", "", "", "sqrt(2)*Omega1", "2*Omega2", "", "", "", ""},
    {"", "2*Omega1", "", "", "sqrt(2)*Omega3", "", "sqrt(3)*Omega1", "Omega2", "", ""},
    {"", "sqrt(2)*Omega2", "sqrt(2)*Omega1", "sqrt(2)*Omega3", "", "sqrt(2)*Omega3", "", "sqrt(2)*Omega1",
     "sqrt(2)*Omega2", ""},
    {"", "", "2*Omega2", "", "sqrt(2)*Omega3", "", "", "", "Omega1", "sqrt(3)*Omega2"},
    {"", "", "", "sqrt(3)*Omega1", "", "", "", "sqrt(3)*Omega3", "", ""},
    {"", "", "", "Omega2", "sqrt(2)*Omega1", "", "sqrt(3)*Omega3", "", "2*Omega3", ""},
    {"", "", "", "", "sqrt(2)*Omega2", "Omega1", "", "2*Omega3", "", "sqrt(3)*Omega3"},
    {"", "", "", "", "", "sqrt(3)*Omega2", "", "", "sqrt(3)*Omega3", ""},
};

}  // namespace

TEST(IsingMap, SymbolicTableForThreeBosons) {
  const auto table = ising_symbolic(3);
  ASSERT_EQ(table.size(), 10u);
  int nonzero = 0;
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) {
      const auto& t = table[i][j];
      EXPECT_EQ(t ? t->str() : std::string(), kTable3[i][j]) << i + 1 << ',' << j + 1;
      if (t) {
        ++nonzero;
        EXPECT_TRUE(t->coef_squared == 1 || t->coef_squared == 2 || t->coef_squared == 3 || t->coef_squared == 4);
      }
    }
  EXPECT_EQ(nonzero, 36);
}

TEST(IsingMap, LinearizationOrder) {
  const auto im = build_ising_matrix(3, 1.0, 1.0, 1.0);
  const std::vector<FockSite> expect{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}, {3, 0}, {2, 1}, {1, 2}, {0, 3}};
  EXPECT_EQ(im.linearization, expect);
  EXPECT_EQ(im.spins(), 10);
}

TEST(IsingMap, NumericValuesFollowRates) {
  const auto im = build_ising_matrix(3, 0.5, 2.0, 7.0);
  EXPECT_DOUBLE_EQ(im.J(0, 1), std::sqrt(3.0) * 0.5);
  EXPECT_DOUBLE_EQ(im.J(8, 9), std::sqrt(3.0) * 7.0);
  EXPECT_DOUBLE_EQ(im.J(3, 7), 2.0);
  EXPECT_TRUE(im.J.isApprox(im.J.transpose()));
}

TEST(IsingMap, FlipFlopBlockEqualsLattice) {
  for (int n = 1; n <= kMaxSingleExcitationN; ++n) {
    const auto rep = verify_single_excitation(n, 1.3, 0.4, 2.2);
    EXPECT_EQ(rep.max_deviation, 0.0) << n;
  }
  EXPECT_THROW(verify_single_excitation(4, 1.0, 1.0, 1.0), ValidationError);
}

TEST(IsingMap, TermFormatting) {
  EXPECT_EQ((IsingTerm{1, 1}.str()), "Omega1");
  EXPECT_EQ((IsingTerm{2, 4}.str()), "2*Omega2");
  EXPECT_EQ((IsingTerm{3, 6}.str()), "sqrt(6)*Omega3");
}

TEST(IsingMap, CsvLayout) {
  std::ostringstream os;
  write_ising_csv(os, build_ising_matrix(1, 1.0, 2.0, 3.0), true);
  const std::string expect =
      "# N=1\n# omega1=1,omega2=2,omega3=3\n# linearization: 1=(0;0) 2=(1;0) 3=(0;1)\n"
      "ion,j1,j2,j3\n1,0,Omega1,Omega2\n2,Omega1,0,Omega3\n3,Omega2,Omega3,0\n";
  EXPECT_EQ(os.str(), expect);
}
