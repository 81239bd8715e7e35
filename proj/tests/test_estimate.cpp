#include <catch2/catch_amalgamated.hpp>

#include <impactkit/estimate.hpp>

#include <cmath>
#include <cstddef>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace impactkit;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const ModelParams kFrame{0.241, 46.0, 7040.0, 9.81};
const FilterSpec kFilter{500.0, 10000.0};
constexpr double kWeight = 2.36; // structure weight W = m*g [N]

TrialRecord make_trial(double h, double sigma, std::uint64_t seed, bool use_truth = false) {
  SyntheticTrial gen = generate_synthetic_log(kFrame, h, kFilter, sigma, seed);
  const ImpactSegment seg = use_truth ? gen.truth : segment_impact(gen.log);
  return {std::move(gen.log), seg};
}

std::vector<TrialGroup> make_groups(std::size_t trials_per_altitude, double sigma,
                                    std::uint64_t seed_base, bool use_truth = false) {
  std::vector<TrialGroup> groups;
  std::size_t alt_index = 0;
  for (double h : {0.5, 1.0, 1.5}) {
    TrialGroup group;
    group.altitude = h;
    for (std::size_t i = 0; i < trials_per_altitude; ++i)
      group.trials.push_back(make_trial(h, sigma, seed_base + alt_index * 1000 + i, use_truth));
    groups.push_back(std::move(group));
    ++alt_index;
  }
  return groups;
}

} // namespace

TEST_CASE("stiffness fit recovers an exact line through the pinned intercept", "[estimate]") {
  std::vector<StaticMeasurement> data;
  for (double mm : {1.0, 2.0, 4.0, 8.0}) {
    const double x = mm / 1000.0;
    data.push_back({x, kWeight + 7040.0 * x});
  }
  const StiffnessFit fit = fit_stiffness(data, kWeight);
  CHECK_THAT(fit.k, WithinRel(7040.0, 1e-12));
  CHECK(fit.intercept == kWeight);
  CHECK(fit.rmse < 1e-9);
}

TEST_CASE("stiffness fit works from a single measurement", "[estimate]") {
  const StiffnessFit fit = fit_stiffness({{0.01, kWeight + 70.4}}, kWeight);
  CHECK_THAT(fit.k, WithinRel(7040.0, 1e-12));
}

TEST_CASE("stiffness fit tolerates force noise", "[estimate]") {
  std::mt19937 rng(404);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<StaticMeasurement> data;
  for (int i = 0; i < 50; ++i) {
    const double x = 0.001 + 0.009 * static_cast<double>(i) / 49.0;
    data.push_back({x, kWeight + 7040.0 * x + noise(rng)});
  }
  const StiffnessFit fit = fit_stiffness(data, kWeight);
  CHECK_THAT(fit.k, WithinRel(7040.0, 0.02));
  CHECK(fit.rmse > 0.0);
  CHECK(fit.rmse < 2.0);
}

TEST_CASE("stiffness fit rejects degenerate data", "[estimate]") {
  CHECK_THROWS_AS(fit_stiffness({}, kWeight), std::invalid_argument);
  CHECK_THROWS_MATCHES(fit_stiffness({{0.0, 3.0}, {0.0, 4.0}}, kWeight),
                       std::invalid_argument,
                       Catch::Matchers::MessageMatches(
                           ContainsSubstring("all displacements are zero")));
  CHECK_THROWS_AS(fit_stiffness({{-0.001, 3.0}}, kWeight), std::invalid_argument);
}

TEST_CASE("static deformation CSV parsing", "[estimate]") {
  std::istringstream good("displacement_mm,force_N\n1,9.4\n2,16.44\n");
  const std::vector<StaticMeasurement> data = parse_static_csv(good);
  REQUIRE(data.size() == 2);
  CHECK_THAT(data[0].displacement, WithinRel(0.001, 1e-12));
  CHECK(data[0].force == 9.4);

  std::istringstream commented("# from the bench rig\ndisplacement_mm,force_N\n3,23.48\n4,30.52\n");
  CHECK(parse_static_csv(commented).size() == 2);

  std::istringstream bad_header("displacement,force\n1,9.4\n");
  CHECK_THROWS_AS(parse_static_csv(bad_header), ParseError);

  std::istringstream bad_row("displacement_mm,force_N\n1,abc\n");
  try {
    parse_static_csv(bad_row);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }

  std::istringstream negative("displacement_mm,force_N\n-1,9.4\n");
  CHECK_THROWS_AS(parse_static_csv(negative), ParseError);

  std::istringstream empty("displacement_mm,force_N\n");
  CHECK_THROWS_AS(parse_static_csv(empty), ParseError);

  CHECK_THROWS_AS(parse_static_csv_file("/nonexistent/static.csv"), std::runtime_error);
}

TEST_CASE("trial loss vanishes for a noise-free self-generated trial", "[estimate]") {
  const TrialRecord trial = make_trial(1.0, 0.0, 3);
  CHECK(trial_loss(kFrame, kFilter, trial) < 1e-10);
}

TEST_CASE("trial loss approaches the noise variance", "[estimate]") {
  const double sigma = 0.5;
  double mean = 0.0;
  for (std::uint64_t seed = 100; seed < 110; ++seed)
    mean += trial_loss(kFrame, kFilter, make_trial(1.0, sigma, seed));
  mean /= 10.0;
  CHECK_THAT(mean, WithinAbs(sigma * sigma, 0.3 * sigma * sigma));
}

TEST_CASE("trial loss grows away from the generating parameters", "[estimate]") {
  const TrialRecord trial = make_trial(1.0, 0.0, 5);
  const double at_truth = trial_loss(kFrame, kFilter, trial);
  for (ModelParams p : {ModelParams{0.241, 92.0, 7040.0, 9.81},
                        ModelParams{0.241, 23.0, 7040.0, 9.81},
                        ModelParams{0.241, 46.0, 3520.0, 9.81},
                        ModelParams{0.241, 46.0, 10560.0, 9.81}}) {
    CHECK(trial_loss(p, kFilter, trial) > at_truth);
  }
}

TEST_CASE("trial loss validates the segment", "[estimate]") {
  TrialRecord trial = make_trial(0.5, 0.0, 6);

  TrialRecord empty_window = trial;
  empty_window.segment.peak = empty_window.segment.impact_start;
  CHECK_THROWS_MATCHES(trial_loss(kFrame, kFilter, empty_window), std::invalid_argument,
                       Catch::Matchers::MessageMatches(ContainsSubstring("window")));

  TrialRecord out_of_range = trial;
  out_of_range.segment.peak = out_of_range.log.size();
  CHECK_THROWS_AS(trial_loss(kFrame, kFilter, out_of_range), std::invalid_argument);
}

TEST_CASE("weighted loss averages groups with equal weight", "[estimate]") {
  std::vector<TrialGroup> groups = make_groups(2, 0.3, 50);
  groups[0].trials.push_back(make_trial(0.5, 0.3, 999));

  double expected = 0.0;
  for (const TrialGroup& g : groups) {
    double gm = 0.0;
    for (const TrialRecord& t : g.trials) gm += trial_loss(kFrame, kFilter, t);
    expected += gm / static_cast<double>(g.trials.size());
  }
  expected /= static_cast<double>(groups.size());

  const double loss = weighted_loss(kFrame, kFilter, groups);
  CHECK_THAT(loss, WithinRel(expected, 1e-12));

  // Duplicating every trial of one group does not move the total.
  std::vector<TrialGroup> doubled = groups;
  const std::size_t n0 = doubled[0].trials.size();
  for (std::size_t i = 0; i < n0; ++i) doubled[0].trials.push_back(doubled[0].trials[i]);
  CHECK_THAT(weighted_loss(kFrame, kFilter, doubled), WithinRel(loss, 1e-12));

  // Group order does not matter.
  std::vector<TrialGroup> permuted{groups[2], groups[0], groups[1]};
  CHECK_THAT(weighted_loss(kFrame, kFilter, permuted), WithinRel(loss, 1e-12));

  CHECK_THROWS_AS(weighted_loss(kFrame, kFilter, {}), std::invalid_argument);
  std::vector<TrialGroup> with_empty = groups;
  with_empty.push_back(TrialGroup{2.0, {}});
  CHECK_THROWS_AS(weighted_loss(kFrame, kFilter, with_empty), std::invalid_argument);
}

TEST_CASE("simplex search minimizes a one-dimensional quadratic", "[estimate]") {
  const NelderMeadResult r =
      nelder_mead([](const std::vector<double>& x) { return (x[0] - 3.0) * (x[0] - 3.0); },
                  {0.0});
  REQUIRE(r.converged);
  CHECK_THAT(r.x[0], WithinAbs(3.0, 1e-4));
  CHECK(r.f < 1e-6);
  CHECK(r.iterations > 0);
}

TEST_CASE("simplex search minimizes the Rosenbrock valley", "[estimate]") {
  const auto rosenbrock = [](const std::vector<double>& x) {
    const double a = x[1] - x[0] * x[0];
    const double b = 1.0 - x[0];
    return 100.0 * a * a + b * b;
  };
  const NelderMeadResult r = nelder_mead(rosenbrock, {-1.2, 1.0});
  REQUIRE(r.converged);
  CHECK_THAT(r.x[0], WithinAbs(1.0, 1e-3));
  CHECK_THAT(r.x[1], WithinAbs(1.0, 1e-3));

  NelderMeadOptions capped;
  capped.max_iterations = 3;
  const NelderMeadResult stopped = nelder_mead(rosenbrock, {-1.2, 1.0}, capped);
  CHECK_FALSE(stopped.converged);
  CHECK(stopped.iterations == 3);
}

TEST_CASE("simplex search settles immediately on a constant objective", "[estimate]") {
  const NelderMeadResult r =
      nelder_mead([](const std::vector<double>&) { return 4.2; }, {2.0, 3.0});
  REQUIRE(r.converged);
  CHECK(r.x == std::vector<double>{2.0, 3.0});
  CHECK(r.f == 4.2);
  CHECK(r.iterations < 50);
}

TEST_CASE("simplex search rejects bad starts", "[estimate]") {
  CHECK_THROWS_AS(nelder_mead([](const std::vector<double>&) { return 0.0; }, {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      nelder_mead([](const std::vector<double>&) { return std::nan(""); }, {1.0}),
      std::invalid_argument);
}

TEST_CASE("simplex search handles random convex quadratics", "[estimate]") {
  std::mt19937 rng(2718);
  std::uniform_real_distribution<double> curvature(0.5, 10.0);
  std::uniform_real_distribution<double> center(-5.0, 5.0);
  std::uniform_real_distribution<double> start(-1.0, 1.0);

  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 3);
    std::vector<double> d(n), z(n), x0(n);
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = curvature(rng);
      z[i] = center(rng);
      x0[i] = start(rng);
    }
    const auto f = [&](const std::vector<double>& x) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += d[i] * (x[i] - z[i]) * (x[i] - z[i]);
      return s;
    };
    const NelderMeadResult r = nelder_mead(f, x0);
    REQUIRE(r.converged);
    for (std::size_t i = 0; i < n; ++i) REQUIRE_THAT(r.x[i], WithinAbs(z[i], 1e-3));
  }
}

TEST_CASE("damping fit recovers the generator with stiffness fixed", "[estimate]") {
  const std::vector<TrialGroup> groups = make_groups(3, 0.0, 7000);
  const FitResult fit =
      fit_damping(groups, kFilter, 0.241, DampingFitMode::kFixedStiffness, 50.0, 7040.0);
  REQUIRE(fit.converged);
  CHECK(fit.k == 7040.0);
  CHECK_THAT(fit.c, WithinRel(46.0, 0.001));
  CHECK(fit.loss < 1e-4);
}

TEST_CASE("joint damping fit recovers both parameters under noise", "[estimate]") {
  const std::vector<TrialGroup> groups = make_groups(10, 0.5, 8000);
  const FitResult fit =
      fit_damping(groups, kFilter, 0.241, DampingFitMode::kJointStiffness, 50.0, 7040.0);
  REQUIRE(fit.converged);
  CHECK_THAT(fit.c, WithinRel(46.0, 0.05));
  CHECK_THAT(fit.k, WithinRel(7040.0, 0.05));
  CHECK(fit.loss > 0.0);
}

TEST_CASE("damping fit validates its inputs", "[estimate]") {
  const std::vector<TrialGroup> groups = make_groups(1, 0.0, 9000);
  CHECK_THROWS_AS(fit_damping({}, kFilter, 0.241, DampingFitMode::kFixedStiffness, 50.0, 7040.0),
                  std::invalid_argument);
  std::vector<TrialGroup> with_empty = groups;
  with_empty.push_back(TrialGroup{2.0, {}});
  CHECK_THROWS_AS(fit_damping(with_empty, kFilter, 0.241, DampingFitMode::kFixedStiffness,
                              50.0, 7040.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_damping(groups, kFilter, 0.241, DampingFitMode::kFixedStiffness, -1.0,
                              7040.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_damping(groups, kFilter, 0.0, DampingFitMode::kFixedStiffness, 50.0,
                              7040.0),
                  std::invalid_argument);
}

TEST_CASE("recovery error shrinks as the noise level drops", "[estimate]") {
  // Tight simplex tolerances keep the optimizer floor well below the
  // statistical error at the smallest nonzero noise level.
  NelderMeadOptions tight;
  tight.x_tol = 1e-6;
  tight.f_tol = 1e-6;
  tight.max_iterations = 4000;

  // Fit against the generator's ground-truth segments: at the highest noise
  // level the data is intentionally too dirty for threshold segmentation.
  const double sigmas[] = {1.0, 0.5, 0.1, 0.0};
  double mean_error[4] = {};
  for (int level = 0; level < 4; ++level) {
    for (std::uint64_t rep = 0; rep < 10; ++rep) {
      const std::vector<TrialGroup> groups =
          make_groups(5, sigmas[level], 100000 + level * 10000 + rep * 100, true);
      const FitResult fit = fit_damping(groups, kFilter, 0.241,
                                        DampingFitMode::kJointStiffness, 50.0, 7040.0,
                                        9.81, tight);
      REQUIRE(fit.converged);
      mean_error[level] +=
          std::abs(fit.c - 46.0) / 46.0 + std::abs(fit.k - 7040.0) / 7040.0;
    }
    mean_error[level] /= 10.0;
  }
  INFO("mean errors: " << mean_error[0] << " " << mean_error[1] << " " << mean_error[2]
                       << " " << mean_error[3]);
  CHECK(mean_error[0] > mean_error[1]);
  CHECK(mean_error[1] > mean_error[2]);
  CHECK(mean_error[2] > mean_error[3]);
}

TEST_CASE("loss surface locates the generator cell", "[estimate]") {
  const std::vector<TrialGroup> groups = make_groups(2, 0.0, 600);
  const LossSurface surface = loss_surface(groups, kFilter, 0.241, {40.0, 52.0, 5},
                                           {6800.0, 7280.0, 5});
  REQUIRE(surface.c_values.size() == 5);
  REQUIRE(surface.k_values.size() == 5);
  REQUIRE(surface.loss.size() == 5);
  REQUIRE(surface.transformed.size() == 5);
  CHECK(surface.c_values[2] == 46.0);
  CHECK(surface.k_values[2] == 7040.0);

  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      REQUIRE_THAT(surface.transformed[i][j], WithinAbs(std::log1p(surface.loss[i][j]), 1e-15));

  const SurfaceArgmin best = surface_argmin(surface);
  CHECK(best.c_index == 2);
  CHECK(best.k_index == 2);
  CHECK(best.c == 46.0);
  CHECK(best.k == 7040.0);
  CHECK(best.loss < 1e-10);
}

TEST_CASE("loss surface validates its axes", "[estimate]") {
  const std::vector<TrialGroup> groups = make_groups(1, 0.0, 700);
  CHECK_THROWS_AS(loss_surface(groups, kFilter, 0.241, {52.0, 40.0, 5}, {6800.0, 7280.0, 5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(loss_surface(groups, kFilter, 0.241, {40.0, 52.0, 1}, {6800.0, 7280.0, 5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(loss_surface(groups, kFilter, 0.241, {-1.0, 52.0, 5}, {6800.0, 7280.0, 5}),
                  std::invalid_argument);
}

TEST_CASE("a 2x2 loss surface round-trips through its CSV form", "[estimate]") {
  const std::vector<TrialGroup> groups = make_groups(1, 0.0, 800);
  const LossSurface surface =
      loss_surface(groups, kFilter, 0.241, {44.0, 48.0, 2}, {7000.0, 7100.0, 2});
  REQUIRE(surface.loss.size() == 2);
  REQUIRE(surface.loss[0].size() == 2);

  std::ostringstream out;
  write_loss_surface_csv(surface, out);
  const std::string text = out.str();
  CHECK_THAT(text, ContainsSubstring("# raw loss z\n"));
  CHECK_THAT(text, ContainsSubstring("# cauchy view ln(1+z)\n"));
  CHECK_THAT(text, ContainsSubstring("c\\k,7000,7100\n"));

  // 2 section comments + 2 headers + 2 data rows per section.
  std::size_t lines = 0;
  for (char ch : text)
    if (ch == '\n') ++lines;
  CHECK(lines == 8);
}
