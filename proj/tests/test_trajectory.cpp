#include <catch2/catch_amalgamated.hpp>

#include "ttrack/trajectory.hpp"
#include "ttrack/validate.hpp"

using namespace ttrack;

TEST_CASE("quintic boundary conditions and midpoint", "[trajectory]") {
  QuinticSpec spec;
  spec.from = VectorXd::Constant(1, 0.5);
  spec.to = VectorXd::Constant(1, 2.5);
  spec.duration = 2.0;
  const TrajectorySpec traj = spec;

  const TrajectorySample start = evaluate(traj, 0.0);
  CHECK(start.q_d(0) == 0.5);
  CHECK(start.qdot_d(0) == 0.0);
  CHECK(start.qddot_d(0) == 0.0);

  const TrajectorySample end = evaluate(traj, 2.0);
  CHECK(end.q_d(0) == 2.5);
  CHECK(end.qdot_d(0) == 0.0);
  CHECK(end.qddot_d(0) == 0.0);

  CHECK(evaluate(traj, 1.0).q_d(0) == Catch::Approx(1.5).margin(1e-15));

  // clamped past the end: endpoint held, derivatives stay zero
  const TrajectorySample late = evaluate(traj, 5.0);
  CHECK(late.q_d(0) == 2.5);
  CHECK(late.qdot_d(0) == 0.0);
  CHECK(late.qddot_d(0) == 0.0);
}

TEST_CASE("step sequence switches and holds", "[trajectory]") {
  StepSequenceSpec spec;
  spec.start = VectorXd::Zero(1);
  spec.switches.emplace_back(1.0, VectorXd::Constant(1, M_PI));
  const TrajectorySpec traj = spec;

  CHECK(evaluate(traj, 0.5).q_d(0) == 0.0);
  CHECK(evaluate(traj, 0.5).qdot_d(0) == 0.0);
  CHECK(evaluate(traj, 1.0).q_d(0) == M_PI);
  CHECK(evaluate(traj, 1.5).q_d(0) == M_PI);
  CHECK(evaluate(traj, 1.5).qdot_d(0) == 0.0);
  CHECK(evaluate(traj, 1.5).qddot_d(0) == 0.0);

  // up and back down again
  StepSequenceSpec upDown;
  upDown.start = VectorXd::Zero(1);
  upDown.switches.emplace_back(1.0, VectorXd::Constant(1, M_PI));
  upDown.switches.emplace_back(4.0, VectorXd::Zero(1));
  const TrajectorySpec both = upDown;
  CHECK(evaluate(both, 2.0).q_d(0) == M_PI);
  CHECK(evaluate(both, 4.5).q_d(0) == 0.0);
}

TEST_CASE("hold and step references have exactly zero derivatives",
          "[trajectory]") {
  const TrajectorySpec hold = HoldSpec{VectorXd::Constant(2, 0.7)};
  Rng rng(41);
  for (int i = 0; i < 50; ++i) {
    const TrajectorySample s = evaluate(hold, rng.uniform(0.0, 10.0));
    REQUIRE(s.qdot_d.isZero(0.0));
    REQUIRE(s.qddot_d.isZero(0.0));
    REQUIRE(s.q_d(0) == 0.7);
  }
}

TEST_CASE("smooth references have consistent derivatives", "[trajectory]") {
  Rng rng(43);

  QuinticSpec qn;
  qn.from = (VectorXd(2) << -0.5, 1.0).finished();
  qn.to = (VectorXd(2) << 2.0, -1.5).finished();
  qn.duration = 3.0;

  SinusoidSpec sn;
  sn.offset = (VectorXd(2) << 0.3, -0.2).finished();
  sn.amplitude = (VectorXd(2) << 1.2, 0.4).finished();
  sn.frequency = (VectorXd(2) << 0.7, 1.9).finished();

  const double fd = 1e-5;
  for (const TrajectorySpec& traj : {TrajectorySpec{qn}, TrajectorySpec{sn}}) {
    for (int i = 0; i < 100; ++i) {
      // keep clear of the quintic clamp at t = 0 and t = duration
      const double t = rng.uniform(0.15, 2.85);
      const TrajectorySample mid = evaluate(traj, t);
      const TrajectorySample lo = evaluate(traj, t - fd);
      const TrajectorySample hi = evaluate(traj, t + fd);
      for (int j = 0; j < 2; ++j) {
        const double vel_fd = (hi.q_d(j) - lo.q_d(j)) / (2.0 * fd);
        const double acc_fd = (hi.qdot_d(j) - lo.qdot_d(j)) / (2.0 * fd);
        REQUIRE(std::abs(vel_fd - mid.qdot_d(j)) <= 1e-6);
        REQUIRE(std::abs(acc_fd - mid.qddot_d(j)) <= 1e-4);
      }
    }
  }
}

TEST_CASE("evaluation is deterministic", "[trajectory]") {
  SinusoidSpec sn;
  sn.offset = VectorXd::Zero(1);
  sn.amplitude = VectorXd::Constant(1, 1.0);
  sn.frequency = VectorXd::Constant(1, 2.3);
  const TrajectorySpec traj = sn;
  const TrajectorySample a = evaluate(traj, 0.7371);
  const TrajectorySample b = evaluate(traj, 0.7371);
  CHECK(a.q_d == b.q_d);
  CHECK(a.qdot_d == b.qdot_d);
  CHECK(a.qddot_d == b.qddot_d);
}

TEST_CASE("trajectory validation", "[trajectory]") {
  StepSequenceSpec bad;
  bad.start = VectorXd::Zero(1);
  bad.switches.emplace_back(2.0, VectorXd::Zero(1));
  bad.switches.emplace_back(1.0, VectorXd::Zero(1));
  CHECK_THROWS_AS(validate_trajectory(TrajectorySpec{bad}), InputError);

  QuinticSpec flat;
  flat.from = VectorXd::Zero(1);
  flat.to = VectorXd::Zero(1);
  flat.duration = 0.0;
  CHECK_THROWS_AS(validate_trajectory(TrajectorySpec{flat}), InputError);

  SinusoidSpec neg;
  neg.offset = VectorXd::Zero(1);
  neg.amplitude = VectorXd::Zero(1);
  neg.frequency = VectorXd::Constant(1, -1.0);
  CHECK_THROWS_AS(validate_trajectory(TrajectorySpec{neg}), InputError);

  const TrajectorySpec hold = HoldSpec{VectorXd::Zero(1)};
  CHECK_THROWS_AS(evaluate(hold, -0.1), InputError);
}
