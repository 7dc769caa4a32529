#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "sweeplio/imu.hpp"
#include "test_support.hpp"

using namespace sweeplio;

namespace {

std::vector<ImuSample> constant_samples(const Vec3& accel, const Vec3& gyro,
                                        double t0, double t1, double rate) {
  std::vector<ImuSample> out;
  for (long k = 0;; ++k) {
    const double t = t0 + k / rate;
    if (t > t1 + 1.5 / rate) break;
    out.push_back({t, accel, gyro});
  }
  return out;
}

std::vector<ImuSample> smooth_samples(std::mt19937& rng, double t0, double t1,
                                      double rate) {
  const Vec3 a0 = test::random_vec(rng, 2.0) + Vec3(0, 0, 9.81);
  const Vec3 a1 = test::random_vec(rng, 1.5);
  const Vec3 w0 = test::random_vec(rng, 0.5);
  const Vec3 w1 = test::random_vec(rng, 0.4);
  std::vector<ImuSample> out;
  for (long k = 0;; ++k) {
    const double t = t0 + k / rate;
    if (t > t1 + 1.5 / rate) break;
    ImuSample s;
    s.timestamp = t;
    s.accel = a0 + a1 * std::sin(7.0 * t);
    s.gyro = w0 + w1 * std::cos(9.0 * t);
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("constant specific force integrates to the closed form") {
  const Vec3 a(1.2, -0.4, 9.81);
  const double T = 0.1;
  const auto samples = constant_samples(a, Vec3::Zero(), 0.0, T, 100.0);
  const auto p = Preintegration::integrate(samples, 0.0, T, Vec3::Zero(),
                                           Vec3::Zero(), NoiseParams{});
  CHECK((p.alpha() - 0.5 * a * T * T).norm() < 1e-12);
  CHECK((p.beta() - a * T).norm() < 1e-12);
  CHECK(p.gamma().angularDistance(Quat::Identity()) < 1e-15);
  CHECK(p.dt_total() == doctest::Approx(T).epsilon(1e-12));
}

TEST_CASE("zero-sample construction is the identity element") {
  const Preintegration p;
  CHECK(p.alpha().norm() == 0.0);
  CHECK(p.beta().norm() == 0.0);
  CHECK(p.gamma().angularDistance(Quat::Identity()) == 0.0);
  CHECK(p.covariance().norm() == 0.0);
  CHECK((p.jacobian() - Mat15::Identity()).norm() == 0.0);
}

TEST_CASE("pre-integration matches the fine-step oracle") {
  std::mt19937 rng(201);
  for (int trial = 0; trial < 25; ++trial) {
    const auto samples = smooth_samples(rng, 0.0, 0.04, 100.0);
    const Vec3 ba = test::random_vec(rng, 0.05);
    const Vec3 bw = test::random_vec(rng, 0.005);
    const auto p = Preintegration::integrate(samples, 0.0, 0.033, ba, bw,
                                             NoiseParams{});
    const auto sliced = slice_window(samples, 0.0, 0.033);
    const auto oracle = test::fine_integrate(sliced, ba, bw, 100);
    CHECK((p.alpha() - oracle.alpha).norm() <
          1e-6 * std::max(1.0, oracle.alpha.norm()));
    CHECK((p.beta() - oracle.beta).norm() <
          1e-6 * std::max(1.0, oracle.beta.norm()));
    CHECK(p.gamma().angularDistance(oracle.gamma) < 1e-6);
  }
}

TEST_CASE("a 33 ms window at 100 Hz consumes 3-4 samples") {
  const auto samples =
      constant_samples(Vec3(0, 0, 9.81), Vec3::Zero(), 0.0, 0.2, 100.0);
  const auto sliced = slice_window(samples, 0.05, 0.083);
  // interpolated boundary samples plus the interior ones
  CHECK(sliced.size() >= 4);
  CHECK(sliced.size() <= 6);
  CHECK(sliced.front().timestamp == doctest::Approx(0.05));
  CHECK(sliced.back().timestamp == doctest::Approx(0.083));
  const auto p = Preintegration::integrate(samples, 0.05, 0.083, Vec3::Zero(),
                                           Vec3::Zero(), NoiseParams{});
  CHECK(p.dt_total() == doctest::Approx(0.033).epsilon(1e-9));
}

TEST_CASE("bias correction: zero delta leaves the terms unchanged") {
  std::mt19937 rng(203);
  const auto samples = smooth_samples(rng, 0.0, 0.04, 100.0);
  const Vec3 ba = test::random_vec(rng, 0.05);
  const Vec3 bw = test::random_vec(rng, 0.005);
  const auto p =
      Preintegration::integrate(samples, 0.0, 0.033, ba, bw, NoiseParams{});
  const BiasCorrected c = p.correct(ba, bw);
  CHECK((c.alpha - p.alpha()).norm() == 0.0);
  CHECK((c.beta - p.beta()).norm() == 0.0);
  CHECK(c.gamma.angularDistance(p.gamma()) < 1e-15);
}

TEST_CASE("bias correction against the re-integration oracle") {
  std::mt19937 rng(205);
  for (int trial = 0; trial < 20; ++trial) {
    const auto samples = smooth_samples(rng, 0.0, 0.04, 100.0);
    const Vec3 ba = test::random_vec(rng, 0.02);
    const Vec3 bw = test::random_vec(rng, 0.002);
    const auto p =
        Preintegration::integrate(samples, 0.0, 0.033, ba, bw, NoiseParams{});

    // gyro-bias delta: first-order correction, small quadratic error
    const Vec3 dbw(1e-3, 0, 0);
    const auto corrected = p.correct(ba, bw + dbw);
    const auto re = Preintegration::integrate(samples, 0.0, 0.033, ba,
                                              bw + dbw, NoiseParams{});
    CHECK(corrected.gamma.angularDistance(re.gamma()) < 1e-5);

    // accel-bias delta: alpha and beta are exactly linear in it
    const Vec3 dba(1e-2, 0, 0);
    const auto corrected_a = p.correct(ba + dba, bw);
    const auto re_a = Preintegration::integrate(samples, 0.0, 0.033, ba + dba,
                                                bw, NoiseParams{});
    CHECK((corrected_a.alpha - re_a.alpha()).norm() < 1e-8);
    CHECK((corrected_a.beta - re_a.beta()).norm() < 1e-8);
  }
}

TEST_CASE("bias-correction error is second order: halving the delta cuts "
          "the error by at least 3.5x") {
  std::mt19937 rng(207);
  for (int trial = 0; trial < 10; ++trial) {
    const auto samples = smooth_samples(rng, 0.0, 0.04, 100.0);
    const Vec3 ba = test::random_vec(rng, 0.02);
    const Vec3 bw = test::random_vec(rng, 0.002);
    const auto p =
        Preintegration::integrate(samples, 0.0, 0.033, ba, bw, NoiseParams{});
    const Vec3 dir = test::random_vec(rng, 1.0).normalized();

    auto error_at = [&](double scale) {
      const Vec3 dba = scale * dir;
      const Vec3 dbw = scale * dir.reverse();
      const auto corrected = p.correct(ba + dba, bw + dbw);
      const auto re = Preintegration::integrate(samples, 0.0, 0.033, ba + dba,
                                                bw + dbw, NoiseParams{});
      return (corrected.alpha - re.alpha()).norm() +
             (corrected.beta - re.beta()).norm() +
             corrected.gamma.angularDistance(re.gamma());
    };
    const double e1 = error_at(1e-3);
    const double e2 = error_at(5e-4);
    if (e1 > 1e-14) {
      CHECK(e1 / e2 >= 3.5);
    }
  }
}

TEST_CASE("error-state blocks: dt -> 0 limit") {
  ImuSample s0{0.0, Vec3(0.1, 0.2, 9.8), Vec3(0.01, 0.02, 0.03)};
  ImuSample s1{0.0, Vec3(0.1, 0.2, 9.8), Vec3(0.01, 0.02, 0.03)};
  const auto blocks = propagate_error_state(s0, s1, Vec3::Zero(),
                                            Vec3::Zero(), Mat3::Identity(),
                                            0.0);
  CHECK((blocks.F - Mat15::Identity()).norm() == 0.0);
  CHECK(blocks.G.norm() == 0.0);
}

TEST_CASE("error-state transition is consistent with perturbed "
          "integrations") {
  std::mt19937 rng(209);
  for (int trial = 0; trial < 20; ++trial) {
    const auto samples = smooth_samples(rng, 0.0, 0.02, 100.0);
    const Vec3 ba = test::random_vec(rng, 0.02);
    const Vec3 bw = test::random_vec(rng, 0.002);
    // one-step nominal integration
    const auto sliced = slice_window(samples, 0.0, 0.01);
    const auto nominal = Preintegration::integrate(samples, 0.0, 0.01, ba, bw,
                                                   NoiseParams{});
    const auto blocks = propagate_error_state(sliced[0], sliced[1], ba, bw,
                                              Mat3::Identity(), 0.01);
    // perturb the initial bias error and compare against re-integration
    const double eps = 1e-4;
    Vec15 err = Vec15::Zero();
    err.segment<3>(9) = Vec3(eps, -eps, eps);   // d_ba
    err.segment<3>(12) = Vec3(-eps, eps, eps);  // d_bw
    const Vec15 propagated = blocks.F * err;

    // re-integration with biased inputs: the achieved alpha/beta/theta error
    const auto perturbed = Preintegration::integrate(
        samples, 0.0, 0.01, ba + err.segment<3>(9), bw + err.segment<3>(12),
        NoiseParams{});
    const Vec3 d_alpha = perturbed.alpha() - nominal.alpha();
    const Vec3 d_beta = perturbed.beta() - nominal.beta();
    const Vec3 d_theta =
        2.0 * (nominal.gamma().conjugate() * perturbed.gamma()).vec();
    // first order in dt and in the error magnitude
    const double tol = 5.0 * eps * 0.01 + 10.0 * eps * eps;
    CHECK((propagated.segment<3>(0) + d_alpha).norm() < tol);
    CHECK((propagated.segment<3>(3) + d_beta).norm() < tol);
    CHECK((propagated.segment<3>(6) + d_theta).norm() < tol);
  }
}

TEST_CASE("covariance stays PSD and its trace grows monotonically") {
  std::mt19937 rng(211);
  const auto samples = smooth_samples(rng, 0.0, 0.25, 100.0);
  double last_trace = 0.0;
  for (double t1 = 0.02; t1 <= 0.2; t1 += 0.02) {
    const auto p = Preintegration::integrate(samples, 0.0, t1, Vec3::Zero(),
                                             Vec3::Zero(), NoiseParams{});
    const Mat15 cov = p.covariance();
    CHECK((cov - cov.transpose()).norm() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat15> eig(cov);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
    CHECK(cov.trace() > last_trace);
    last_trace = cov.trace();
  }
}

TEST_CASE("33 ms windows carry strictly less covariance than 100 ms "
          "windows") {
  std::mt19937 rng(213);
  for (int trial = 0; trial < 20; ++trial) {
    const double t0 = 0.1 * trial;
    const auto samples = smooth_samples(rng, t0, t0 + 0.15, 100.0);
    const auto short_window = Preintegration::integrate(
        samples, t0, t0 + 0.033, Vec3::Zero(), Vec3::Zero(), NoiseParams{});
    const auto long_window = Preintegration::integrate(
        samples, t0, t0 + 0.1, Vec3::Zero(), Vec3::Zero(), NoiseParams{});
    CHECK(short_window.covariance().trace() <
          long_window.covariance().trace());
  }
}

TEST_CASE("gamma stays unit after every step") {
  std::mt19937 rng(215);
  const auto samples = smooth_samples(rng, 0.0, 1.0, 100.0);
  const auto p = Preintegration::integrate(samples, 0.0, 1.0, Vec3::Zero(),
                                           Vec3::Zero(), NoiseParams{});
  CHECK(std::abs(p.gamma().norm() - 1.0) < 1e-12);
}

TEST_CASE("concatenation consistency over a shared sample grid") {
  std::mt19937 rng(217);
  for (int trial = 0; trial < 10; ++trial) {
    const auto samples = smooth_samples(rng, 0.0, 0.1, 100.0);
    const Vec3 ba = test::random_vec(rng, 0.02);
    const Vec3 bw = test::random_vec(rng, 0.002);
    const double t1 = 0.03;  // on the sample grid
    const double t2 = 0.07;
    const auto full = Preintegration::integrate(samples, 0.0, t2, ba, bw,
                                                NoiseParams{});
    const auto a = Preintegration::integrate(samples, 0.0, t1, ba, bw,
                                             NoiseParams{});
    const auto b = Preintegration::integrate(samples, t1, t2, ba, bw,
                                             NoiseParams{});
    const Vec3 alpha_composed =
        a.alpha() + a.beta() * (t2 - t1) + a.gamma() * b.alpha();
    const Vec3 beta_composed = a.beta() + a.gamma() * b.beta();
    const Quat gamma_composed = (a.gamma() * b.gamma()).normalized();
    CHECK((full.alpha() - alpha_composed).norm() < 1e-9);
    CHECK((full.beta() - beta_composed).norm() < 1e-9);
    CHECK(full.gamma().angularDistance(gamma_composed) < 1e-9);
  }
}

TEST_CASE("pre-integration error cases") {
  const auto samples =
      constant_samples(Vec3(0, 0, 9.81), Vec3::Zero(), 0.0, 0.1, 100.0);
  CHECK_THROWS_AS(Preintegration::integrate(samples, 0.05, 0.05, Vec3::Zero(),
                                            Vec3::Zero(), NoiseParams{}),
                  DataError);
  CHECK_THROWS_AS(Preintegration::integrate(samples, 0.0, 0.5, Vec3::Zero(),
                                            Vec3::Zero(), NoiseParams{}),
                  DataError);
  auto shuffled = samples;
  std::swap(shuffled[2], shuffled[3]);
  CHECK_THROWS_AS(slice_window(shuffled, 0.0, 0.05), DataError);
}

TEST_CASE("predict_states: stationary equilibrium") {
  const Vec3 gravity(0, 0, 9.81);
  const Vec3 ba(0.01, -0.02, 0.005);
  const auto samples =
      constant_samples(gravity + ba, Vec3::Zero(), 0.0, 0.1, 100.0);
  State anchor;
  anchor.timestamp = 0.0;
  anchor.accel_bias = ba;
  State prev_begin = anchor;
  const auto [x_b, x_e] =
      predict_states(anchor, prev_begin, samples, 0.033, gravity);
  CHECK((x_e.translation - anchor.translation).norm() < 1e-12);
  CHECK((x_e.velocity - anchor.velocity).norm() < 1e-12);
  CHECK(x_e.rotation.angularDistance(anchor.rotation) < 1e-12);
  CHECK((x_b.translation - prev_begin.translation).norm() == 0.0);
}

TEST_CASE("predict_states: constant rate advances the rotation linearly") {
  const Vec3 gravity(0, 0, 9.81);
  const Vec3 omega(0, 0, 1.0);
  // accel follows gravity in the rotating body frame so velocity stays zero
  std::vector<ImuSample> samples;
  for (long k = 0; k <= 6; ++k) {
    const double t = k * 0.01;
    ImuSample s;
    s.timestamp = t;
    const Quat q = quat_exp(omega * t);
    s.accel = q.conjugate() * gravity;
    s.gyro = omega;
    samples.push_back(s);
  }
  State anchor;
  anchor.timestamp = 0.0;
  const auto [x_b, x_e] =
      predict_states(anchor, anchor, samples, 0.033, gravity);
  (void)x_b;
  CHECK(x_e.rotation.angularDistance(quat_exp(omega * 0.033)) < 1e-6);
  CHECK((x_e.velocity).norm() < 1e-4);
}

TEST_CASE("predicted biases equal the anchor biases exactly") {
  std::mt19937 rng(219);
  const auto samples = smooth_samples(rng, 0.0, 0.05, 100.0);
  State anchor = test::random_state(rng, 0.0);
  const auto [x_b, x_e] =
      predict_states(anchor, anchor, samples, 0.033, Vec3(0, 0, 9.81));
  (void)x_b;
  CHECK((x_e.accel_bias - anchor.accel_bias).norm() == 0.0);
  CHECK((x_e.gyro_bias - anchor.gyro_bias).norm() == 0.0);
}

TEST_CASE("predict_states requires IMU coverage") {
  const auto samples =
      constant_samples(Vec3(0, 0, 9.81), Vec3::Zero(), 0.0, 0.02, 100.0);
  State anchor;
  anchor.timestamp = 0.0;
  CHECK_THROWS_AS(
      predict_states(anchor, anchor, samples, 0.5, Vec3(0, 0, 9.81)),
      DataError);
}

TEST_CASE("slice_window interpolates the boundary samples linearly") {
  std::vector<ImuSample> samples;
  samples.push_back({0.00, Vec3(0, 0, 0), Vec3(0, 0, 0)});
  samples.push_back({0.01, Vec3(1, 0, 0), Vec3(0, 1, 0)});
  samples.push_back({0.02, Vec3(2, 0, 0), Vec3(0, 2, 0)});
  const auto sliced = slice_window(samples, 0.005, 0.015);
  REQUIRE(sliced.size() == 3);
  CHECK(sliced[0].accel.x() == doctest::Approx(0.5));
  CHECK(sliced[1].accel.x() == doctest::Approx(1.0));
  CHECK(sliced[2].accel.x() == doctest::Approx(1.5));
  CHECK(sliced[2].gyro.y() == doctest::Approx(1.5));
}

TEST_CASE("upsample_linear doubles a 50 Hz stream to 100 Hz") {
  std::vector<ImuSample> samples;
  for (long k = 0; k <= 10; ++k) {
    samples.push_back({k * 0.02, Vec3(k * 1.0, 0, 0), Vec3(0, 0, k * 0.1)});
  }
  const auto up = upsample_linear(samples, 100.0);
  CHECK(up.size() == 21);
  CHECK(up[1].timestamp == doctest::Approx(0.01));
  CHECK(up[1].accel.x() == doctest::Approx(0.5));
  CHECK(up[3].gyro.z() == doctest::Approx(0.15));
}
