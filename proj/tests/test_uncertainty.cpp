#include <gtest/gtest.h>

#include <vector>

#include "support.hpp"

using namespace lcf2pa;
using namespace lcf2pa::uncertainty;

TEST(Propagate, SingleInputExpanded)
{
    const std::vector<Measured> in{{"fit", 1.0, "", 0.17, 1.0}};
    const auto b = propagate(in, 2.0);
    EXPECT_DOUBLE_EQ(b.combined_rel, 0.17);
    EXPECT_DOUBLE_EQ(b.expanded_rel, 0.34);
}

TEST(Propagate, ThreeFourFive)
{
    const std::vector<Measured> in{{"a", 1.0, "", 0.03, 1.0}, {"b", 1.0, "", 0.04, 1.0}};
    EXPECT_DOUBLE_EQ(propagate(in, 1.0).expanded_rel, 0.05);
}

TEST(Propagate, ExponentsScaleContributions)
{
    const std::vector<Measured> in{{"d0", 2.42, "um", 0.05, 2.0}, {"q", 1.0, "", 0.06, -2.0}};
    const auto b = propagate(in, 1.0);
    EXPECT_DOUBLE_EQ(b.components[0].contribution, 0.10);
    EXPECT_DOUBLE_EQ(b.components[1].contribution, 0.12);
}

TEST(Propagate, EmptyAndInvalid)
{
    EXPECT_EQ(propagate(std::vector<Measured>{}, 2.0).combined_rel, 0.0);
    EXPECT_THROW((void)propagate(std::vector<Measured>{}, 0.0), DomainError);
    const std::vector<Measured> neg{{"x", 1.0, "", -0.1, 1.0}};
    EXPECT_THROW((void)propagate(neg, 2.0), DataError);
}

TEST(Propagate, ShippedCrossSectionBudget)
{
    const auto in = read_budget_csv(testing_support::config_path("budget-sigma-c.csv"));
    const auto b = propagate(in, 2.0);
    EXPECT_NEAR(b.combined_rel, 0.17, 0.0005);
    const auto text = budget_report(b, "sigma_C");
    EXPECT_NE(text.find("34.0"), std::string::npos);
}

TEST(Propagate, ShippedBoundBudgets)
{
    EXPECT_NEAR(propagate(read_budget_csv(testing_support::config_path("budget-forward.csv")), 2.0).expanded_rel, 0.38,
                0.001);
    EXPECT_NEAR(propagate(read_budget_csv(testing_support::config_path("budget-sigma-e.csv")), 2.0).expanded_rel, 0.40,
                0.001);
}

TEST(BudgetReport, SortedLargestFirst)
{
    const std::vector<Measured> in{{"small", 1.0, "", 0.01, 1.0}, {"large", 1.0, "", 0.09, 1.0}, {"mid", 1.0, "", 0.05, 1.0}};
    const auto text = budget_report(propagate(in, 2.0), "x");
    EXPECT_LT(text.find("large"), text.find("mid"));
    EXPECT_LT(text.find("mid"), text.find("small"));
}

TEST(BudgetCsv, RoundTrip)
{
    const auto dir = testing_support::scratch_dir("budget");
    const std::vector<Measured> in{{"a", 0.0, "", 0.0123456789, 2.0}, {"b", 0.0, "", 0.5, -1.0}};
    write_budget_csv(in, (dir / "b.csv").string());
    const auto back = read_budget_csv((dir / "b.csv").string());
    ASSERT_EQ(back.size(), 2u);
    EXPECT_NEAR(back[0].rel_sigma, in[0].rel_sigma, 1e-10);
    EXPECT_EQ(back[1].exponent, -1.0);
}
