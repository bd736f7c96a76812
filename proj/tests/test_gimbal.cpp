#include <doctest.h>

#include <Eigen/Dense>

#include "cineplan/gimbal.hpp"
#include "test_support.hpp"

using namespace cineplan;

TEST_SUITE_BEGIN("gimbal");

TEST_CASE("world angles on reference offsets") {
  CameraAngles a = world_gimbal_angles(Vec3(1, 0, 1));
  CHECK(a.roll == 0.0);
  CHECK(a.pitch == doctest::Approx(-kPi / 4));
  CHECK(a.yaw == doctest::Approx(kPi));

  a = world_gimbal_angles(Vec3(3, 4, 5));
  CHECK(a.pitch == doctest::Approx(-kPi / 4));
  CHECK(a.yaw == doctest::Approx(-2.21430).epsilon(1e-5));

  CHECK_THROWS_AS(world_gimbal_angles(Vec3(0, 0, 1)), SingularityError);
  CHECK_THROWS_AS(world_gimbal_angles(Vec3(1, 0, -1)), SingularityError);
  CHECK_THROWS_AS(world_gimbal_angles(Vec3(1, 0, 0)), SingularityError);
}

TEST_CASE("camera rotation third column is the normalized offset") {
  testing::Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    Vec3 q = rng.vec3(-20, 20);
    q.z() = rng.uniform(0.5, 20);
    if (std::hypot(q.x(), q.y()) < 0.1) continue;
    const Eigen::Matrix3d rot = camera_rotation(q);
    CHECK((rot.col(2) - q.normalized()).norm() <= 1e-10);
    CHECK((rot * rot.transpose() - Eigen::Matrix3d::Identity()).norm() <= 1e-12);
  }
}

TEST_CASE("pitch is strictly negative under the offset invariants") {
  testing::Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    Vec3 q = rng.vec3(-20, 20);
    q.z() = rng.uniform(0.1, 30);
    if (std::hypot(q.x(), q.y()) < 1e-3) continue;
    CHECK(world_gimbal_angles(q).pitch < 0.0);
  }
}

TEST_CASE("body-relative angles follow the vehicle heading") {
  BodyCameraAngles rel = relative_gimbal_angles(Vec3(1, 0, 1), Vec3(-1, 0, 0));
  CHECK(rel.yaw == doctest::Approx(0.0));

  rel = relative_gimbal_angles(Vec3(1, 0, 1), Vec3(1, 0, 0));
  CHECK(rel.yaw == doctest::Approx(kPi));

  rel = relative_gimbal_angles(Vec3(3, 4, 5), Vec3(1, 1, 0));
  CHECK(rel.yaw == doctest::Approx(-2.99970).epsilon(1e-5));
  CHECK(rel.pitch == doctest::Approx(-kPi / 4));

  CHECK_THROWS_AS(relative_gimbal_angles(Vec3(1, 0, 1), Vec3(0, 0, 1)),
                  YawUndefinedError);
}

TEST_CASE("rates vanish for static relative geometry on a straight flight") {
  const GimbalRates rates =
      gimbal_rates(Vec3(5, 0, 3), Vec3::Zero(), Vec3(1, 0, 0), Vec3::Zero());
  CHECK(rates.pitch_rate == doctest::Approx(0.0));
  CHECK(rates.rel_yaw_rate == doctest::Approx(0.0));
}

TEST_CASE("pitch rate reference value") {
  const GimbalRates rates =
      gimbal_rates(Vec3(5, 0, 3), Vec3(-1, 0, 0), Vec3(1, 0, 0), Vec3::Zero());
  CHECK(rates.pitch_rate == doctest::Approx(3.0 / 34.0).epsilon(1e-6));
  CHECK(rates.pitch_rate == doctest::Approx(0.08824).epsilon(1e-4));
}

TEST_CASE("analytic rates match finite differences of the angle functions") {
  // Oracle: differentiate the angles along x(t) = x + t*v (target moving too)
  // with central differences at h = 1e-5.
  testing::Rng rng(13);
  const double h = 1e-5;
  int checked = 0;
  while (checked < 120) {
    Vec3 q = rng.vec3(-15, 15);
    q.z() = rng.uniform(0.5, 15);
    if (std::hypot(q.x(), q.y()) < 0.5) continue;
    const Vec3 q_rate = rng.vec3(-3, 3);
    Vec3 v = rng.vec3(-5, 5);
    if (std::hypot(v.x(), v.y()) < 0.5) continue;
    const Vec3 a = rng.vec3(-3, 3);

    const GimbalRates analytic = gimbal_rates(q, q_rate, v, a);

    auto pitch_at = [&](double t) {
      return world_gimbal_angles(q + t * q_rate).pitch;
    };
    auto rel_yaw_at = [&](double t) {
      return relative_gimbal_angles(q + t * q_rate, v + t * a).yaw;
    };
    const double fd_pitch = (pitch_at(h) - pitch_at(-h)) / (2 * h);
    const double fd_rel_yaw =
        wrap_angle(rel_yaw_at(h) - rel_yaw_at(-h)) / (2 * h);

    CHECK(testing::rel_error(analytic.pitch_rate, fd_pitch, 1e-4) <= 1e-5);
    CHECK(testing::rel_error(analytic.rel_yaw_rate, fd_rel_yaw, 1e-4) <= 1e-5);
    ++checked;
  }
}

TEST_CASE("guarded cores reduce to the exact values with zero guards") {
  const Vec3 q(4, -2, 3);
  const Vec3 qd(0.5, 1.5, -0.2);
  CHECK(detail::camera_pitch_guarded(q, 0.0) ==
        doctest::Approx(world_gimbal_angles(q).pitch));
  const GimbalRates rates = gimbal_rates(q, qd, Vec3(2, 1, 0), Vec3(0.3, -0.1, 0));
  CHECK(detail::camera_pitch_rate_guarded(q, qd, 0.0) ==
        doctest::Approx(rates.pitch_rate));
}

TEST_SUITE_END();
