#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dptune/errors.hpp"
#include "dptune/objective.hpp"
#include "dptune/scenario.hpp"

using namespace dptune;

namespace {

GainParams gentle_gains() {
  GainParams g;
  g.a = {0.5, 0, 0.5, 0, 0, 0.5, 1, 0, 1, 0, 0, 1};
  return g;
}

FilterParams gentle_filter() {
  FilterParams f;
  f.zeta = Vec3::Constant(0.1);
  f.omega = Vec3::Constant(0.8);
  return f;
}

ScenarioSpec short_scenario() {
  ScenarioSpec s;
  s.name = "short";
  s.duration = 30.0;
  s.wind = {1.0, deg_to_rad(45.0)};
  s.goals = {{4.0, 0.0, 0.0}};
  return s;
}

std::vector<std::vector<double>> parse_csv(const std::string& text, std::vector<std::string>* header) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  {
    std::istringstream h(line);
    std::string cell;
    while (std::getline(h, cell, ',')) header->push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::istringstream r(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(r, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST(Clip, Cases) {
  EXPECT_EQ(clip(0.5, -1, 1), 0.5);
  EXPECT_EQ(clip(2, -1, 1), 1);
  EXPECT_EQ(clip(-3, -1, 1), -1);
  EXPECT_EQ(clip(1, -1, 1), 1);
  EXPECT_EQ(clip(-1, -1, 1), -1);
  EXPECT_EQ(clip(0.2, 0.2, 0.2), 0.2);
  EXPECT_THROW(clip(0, 1, -1), std::invalid_argument);
}

TEST(CombinedError, Cases) {
  EXPECT_EQ(combined_error({1, 2, 3}, {1, 2, 3}, {1, 2, 3}, 10), Vec3::Zero());
  EXPECT_EQ(combined_error({1, 0, 0}, {0, 0, 0}, {1, 0, 0}, 10), Vec3(1, 0, 0));
  EXPECT_EQ(combined_error({0, 1, 0}, {0, 0, 0}, {0, 0, 0}, 10), Vec3(0, 11, 0));
  const Vec3 e = combined_error({0, 0, deg_to_rad(355)}, {0, 0, deg_to_rad(5)}, {0, 0, 0}, 0);
  EXPECT_NEAR(e.z(), deg_to_rad(-10), 1e-12);
}

TEST(Excess, InsideBoxesIsZero) {
  const ActuatorLimits lim;
  EXPECT_EQ(input_excess({deg_to_rad(-80), deg_to_rad(80), 10}, lim), Vec3::Zero());
  const ActuatorState u{deg_to_rad(-80), deg_to_rad(80), 10};
  EXPECT_EQ(rate_excess(u, u, 0.1, lim), Vec3::Zero());
}

TEST(Excess, ExhaustiveGrid) {
  // Box (-1, 2) on every axis with rate 3; values straddle both bounds.
  ActuatorLimits lim;
  lim.port = lim.starboard = lim.bow = {-1.0, 2.0};
  lim.rate = Vec3::Constant(3.0);
  const double grid[] = {-2.5, -1.0, -0.5, 0.0, 2.0, 2.25, 4.0};
  for (double a : grid) {
    for (double b : grid) {
      for (double c : grid) {
        const Vec3 ex = input_excess({a, b, c}, lim);
        const double in[] = {a, b, c};
        for (int j = 0; j < 3; ++j) {
          const double expect = in[j] > 2.0 ? in[j] - 2.0 : (in[j] < -1.0 ? in[j] + 1.0 : 0.0);
          EXPECT_EQ(ex(j), expect);
        }
        // Rates with dt = 0.5: du = 2 * value.
        const Vec3 rx = rate_excess({a, b, c}, {0, 0, 0}, 0.5, lim);
        for (int j = 0; j < 3; ++j) {
          const double du = 2.0 * in[j];
          const double expect = du > 3.0 ? du - 3.0 : (du < -3.0 ? du + 3.0 : 0.0);
          EXPECT_EQ(rx(j), expect);
        }
      }
    }
  }
}

TEST(Excess, RateBoundaryIsFree) {
  const ActuatorLimits lim;
  const ActuatorState u{-1.2, 1.2, 10};
  const ActuatorState c{u.port + 0.349, u.starboard - 0.349, 110};
  const Vec3 rx = rate_excess(c, u, 1.0, lim);
  EXPECT_NEAR(rx(0), 0.0, 1e-15);
  EXPECT_NEAR(rx(1), 0.0, 1e-15);
  EXPECT_EQ(rx(2), 0.0);
  EXPECT_THROW(rate_excess(c, u, 0.0, lim), std::invalid_argument);
}

TEST(Penalty, CaseWeights) {
  EXPECT_EQ(PenaltyConfig::for_case(1).r1, 10.0);
  EXPECT_EQ(PenaltyConfig::for_case(1).r2, 10.0);
  EXPECT_EQ(PenaltyConfig::for_case(2).r1, 0.0);
  EXPECT_EQ(PenaltyConfig::for_case(2).r2, 0.0);
  EXPECT_THROW(PenaltyConfig::for_case(3), ConfigError);
  const ActuatorLimits lim;
  const Vec3 w = input_excess_weights(lim, 3.0);
  EXPECT_DOUBLE_EQ(w(2), 1.0 / (120.0 * 120.0));
  const Vec3 r = rate_excess_weights(lim, 3.0);
  EXPECT_DOUBLE_EQ(r(0), 1.0 / (0.349 * 0.349));
}

TEST(Episode, EquilibriumCostsNothing) {
  ScenarioSpec s;
  s.goals = {Vec3::Zero()};
  s.duration = 20.0;
  const ShipModel m(ShipParams::defaults());
  const EpisodeResult r = run_episode(gentle_gains(), gentle_filter(), s, m, PenaltyConfig::for_case(1));
  EXPECT_EQ(r.breakdown.tracking, 0.0);
  EXPECT_EQ(r.breakdown.total(), 0.0);
  EXPECT_EQ(r.trace.records.size(), 200u);
}

TEST(Episode, TraceReplayMatches) {
  const ShipModel m(ShipParams::defaults());
  const PenaltyConfig pen = PenaltyConfig::for_case(1);
  const EpisodeResult r = run_episode(gentle_gains(), gentle_filter(), short_scenario(), m, pen);
  ASSERT_FALSE(r.trace.diverged);
  std::ostringstream csv;
  write_trace_csv(csv, r.trace);
  std::vector<std::string> header;
  const auto rows = parse_csv(csv.str(), &header);
  ASSERT_EQ(header, trace_columns());
  ASSERT_EQ(rows.size(), r.trace.records.size());

  // Independent accumulation with weights computed from the documented boxes and rates.
  const double width[] = {deg_to_rad(45.0), deg_to_rad(45.0), 120.0};
  const double rate[] = {0.349, 0.349, 100.0};
  const double r1w[] = {1.0, 1.0, 1.0 / std::pow(0.2 * kPi, 2)};
  double je = 0.0, juc = 0.0, jdu = 0.0;
  for (const auto& row : rows) {
    for (int j = 0; j < 3; ++j) {
      je += r1w[j] * row[19 + j] * row[19 + j];
      juc += 10.0 / 3.0 / (width[j] * width[j]) * row[13 + j] * row[13 + j];
      jdu += 10.0 / 3.0 / (rate[j] * rate[j]) * row[16 + j] * row[16 + j];
    }
  }
  const double total = je + juc + jdu;
  EXPECT_NEAR(total, r.breakdown.total(), 1e-10 * std::max(1.0, total));
  EXPECT_NEAR(je, r.breakdown.tracking, 1e-10 * std::max(1.0, je));
  EXPECT_GT(juc + jdu, 0.0);
}

TEST(Episode, CaseTwoIsPureTracking) {
  const ShipModel m(ShipParams::defaults());
  const EpisodeResult r =
      run_episode(gentle_gains(), gentle_filter(), short_scenario(), m, PenaltyConfig::for_case(2));
  EXPECT_EQ(r.breakdown.input_excess, 0.0);
  EXPECT_EQ(r.breakdown.rate_excess, 0.0);
  EXPECT_EQ(r.breakdown.total(), r.breakdown.tracking);
}

TEST(Episode, DivergenceChargesRemainingSteps) {
  ShipParams p = ShipParams::defaults();
  const ShipModel m(p);
  PenaltyConfig pen = PenaltyConfig::for_case(2);
  pen.divergence_radius = 0.5;  // tiny radius: the first phase of a 4 m move trips it
  ScenarioSpec s = short_scenario();
  FilterParams f;
  f.zeta = Vec3::Constant(0.01);
  f.omega = Vec3::Constant(2.0);
  const EpisodeResult r = run_episode(gentle_gains(), f, s, m, pen);
  ASSERT_TRUE(r.trace.diverged);
  ASSERT_LT(r.trace.records.size(), s.steps());
  double worst = 0.0, sum = 0.0;
  for (const auto& rec : r.trace.records) {
    const double c = (pen.error_weights.array() * rec.error.array().square()).sum();
    worst = std::max(worst, c);
    sum += c;
  }
  const double lost = static_cast<double>(s.steps() - r.trace.records.size());
  EXPECT_DOUBLE_EQ(r.trace.divergence_step_penalty, 10.0 * worst);
  EXPECT_NEAR(r.breakdown.tracking, sum + lost * 10.0 * worst, 1e-9 * r.breakdown.tracking);
}

TEST(Objective, Additivity) {
  const ShipModel m(ShipParams::defaults());
  const PenaltyConfig pen = PenaltyConfig::for_case(1);
  const Eigen::VectorXd x = DecisionVector::encode(gentle_gains(), gentle_filter());
  const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
  const std::vector<ScenarioSpec> none;
  EXPECT_EQ(objective(xs, none, m, pen), 0.0);
  const std::vector<ScenarioSpec> one{short_scenario()};
  const std::vector<ScenarioSpec> two{short_scenario(), short_scenario()};
  const double single = objective(xs, one, m, pen);
  EXPECT_EQ(single, run_episode(gentle_gains(), gentle_filter(), one[0], m, pen).breakdown.total());
  EXPECT_EQ(objective(xs, two, m, pen), 2.0 * single);
}

TEST(Objective, PenaltiesScaleLinearlyOnReplay) {
  const ShipModel m(ShipParams::defaults());
  const EpisodeResult r = run_episode(gentle_gains(), gentle_filter(), short_scenario(), m,
                                      PenaltyConfig::for_case(1));
  PenaltyConfig a = PenaltyConfig::for_case(2);
  a.r1 = 1.0;
  a.r2 = 0.0;
  const double uc1 = score_trace(r.trace, m.limits(), a).input_excess;
  a.r1 = 7.0;
  EXPECT_NEAR(score_trace(r.trace, m.limits(), a).input_excess, 7.0 * uc1, 1e-12 * uc1);
  a.r1 = 0.0;
  a.r2 = 1.0;
  const double du1 = score_trace(r.trace, m.limits(), a).rate_excess;
  a.r2 = 7.0;
  EXPECT_NEAR(score_trace(r.trace, m.limits(), a).rate_excess, 7.0 * du1, 1e-12 * du1);
}

TEST(DecisionVector, RoundTripAndBounds) {
  const Eigen::VectorXd x = DecisionVector::encode(gentle_gains(), gentle_filter());
  const auto [g, f] = DecisionVector::decode(std::span<const double>(x.data(), 18));
  EXPECT_EQ(g.a, gentle_gains().a);
  EXPECT_EQ(f.zeta, gentle_filter().zeta);
  EXPECT_EQ(DecisionVector::labels().size(), 18u);
  Eigen::VectorXd bad = x;
  bad(13) = 0.2;
  EXPECT_THROW(DecisionVector::decode(std::span<const double>(bad.data(), 18)), ParameterBoundsError);
  EXPECT_THROW(DecisionVector::decode(std::span<const double>(x.data(), 17)), ParameterBoundsError);
}
