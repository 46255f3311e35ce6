#include "qnc/decoders.hpp"

#include <cmath>
#include <stdexcept>

#include "doctest.h"

using namespace qnc;

TEST_SUITE("decoders_common") {

TEST_CASE("snr of a perfect estimate is the 200 dB sentinel") {
  Eigen::VectorXd x(3);
  x << 1.0, -2.0, 0.5;
  CHECK(snr(x, x) == doctest::Approx(200.0));
}

TEST_CASE("snr of the zero estimate is 0 dB") {
  Eigen::VectorXd x(4);
  x << 1.0, 2.0, -1.0, 0.5;
  CHECK(snr(x, Eigen::VectorXd::Zero(4)) == doctest::Approx(0.0));
}

TEST_CASE("snr with error norm^2 = signal norm^2 / 100 is 20 dB") {
  Eigen::VectorXd x(5);
  x << 3.0, -1.0, 2.0, 0.25, -4.0;
  const Eigen::VectorXd x_hat = x - x / 10.0;  // ||e||^2 = ||x||^2/100
  CHECK(snr(x, x_hat) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("snr is capped at 200 dB for near-perfect estimates") {
  Eigen::VectorXd x(2);
  x << 1.0, 1.0;
  Eigen::VectorXd x_hat = x;
  x_hat(0) += 1e-30;
  CHECK(snr(x, x_hat) == doctest::Approx(200.0));
}

TEST_CASE("snr rejects an all-zero reference") {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd y = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(snr(z, y), std::invalid_argument);
  CHECK_THROWS_AS(snr(z, Eigen::VectorXd::Ones(4)), std::invalid_argument);
}

}  // TEST_SUITE
