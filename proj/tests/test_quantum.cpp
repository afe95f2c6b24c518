#include <doctest.h>

#include <entsim/quantum.hpp>

#include <cmath>

using namespace entsim;

TEST_CASE("singlet state vector has the expected amplitudes") {
  const Vector4c v = bell_singlet_vector();
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(v(0)) == doctest::Approx(0.0));
  CHECK(v(1).real() == doctest::Approx(r));
  CHECK(v(2).real() == doctest::Approx(-r));
  CHECK(std::abs(v(3)) == doctest::Approx(0.0));
  CHECK(v.norm() == doctest::Approx(1.0));
}

TEST_CASE("excitation flags follow basis ordering |n_A n_B>") {
  // basis index b = 2*n_A + n_B
  CHECK(excitation(0, 0) == 0);
  CHECK(excitation(0, 1) == 0);
  CHECK(excitation(1, 0) == 0);
  CHECK(excitation(1, 1) == 1);
  CHECK(excitation(2, 0) == 1);
  CHECK(excitation(2, 1) == 0);
  CHECK(excitation(3, 0) == 1);
  CHECK(excitation(3, 1) == 1);
}

TEST_CASE("lowering operator maps excited basis states down on one qubit only") {
  const Matrix4c la = lowering_on(0);
  const Matrix4c lb = lowering_on(1);
  Vector4c e10 = Vector4c::Zero();
  e10(2) = 1.0;  // |10>
  Vector4c got = la * e10;
  CHECK(std::abs(got(0) - std::complex<double>(1.0, 0.0)) < 1e-15);  // -> |00>
  CHECK((lb * e10).norm() == doctest::Approx(0.0));                  // B already in ground

  Vector4c e11 = Vector4c::Zero();
  e11(3) = 1.0;  // |11>
  CHECK(std::abs((la * e11)(1) - std::complex<double>(1.0, 0.0)) < 1e-15);  // -> |01>
  CHECK(std::abs((lb * e11)(2) - std::complex<double>(1.0, 0.0)) < 1e-15);  // -> |10>
}

TEST_CASE("pauli-z operator signs: ground +1, excited -1") {
  const Matrix4c za = pauli_z_on(0);
  const Matrix4c zb = pauli_z_on(1);
  CHECK(za(0, 0).real() == doctest::Approx(1.0));
  CHECK(za(2, 2).real() == doctest::Approx(-1.0));
  CHECK(zb(0, 0).real() == doctest::Approx(1.0));
  CHECK(zb(1, 1).real() == doctest::Approx(-1.0));
  CHECK((za * za - Matrix4c::Identity()).norm() == doctest::Approx(0.0));
}

TEST_CASE("fidelity of canonical states against the singlet") {
  CHECK(fidelity(TwoQubitState::singlet()) == doctest::Approx(1.0));
  CHECK(fidelity(TwoQubitState::maximally_mixed()) == doctest::Approx(0.25));

  Vector4c e00 = Vector4c::Zero();
  e00(0) = 1.0;
  CHECK(fidelity(TwoQubitState::from_pure(e00)) == doctest::Approx(0.0));

  // triplet (|01>+|10>)/sqrt(2) is orthogonal to the singlet
  Vector4c trip = Vector4c::Zero();
  trip(1) = 1.0 / std::sqrt(2.0);
  trip(2) = 1.0 / std::sqrt(2.0);
  CHECK(fidelity(TwoQubitState::from_pure(trip)) == doctest::Approx(0.0));
}

TEST_CASE("state validation rejects malformed density matrices") {
  StateTolerances tol;

  SUBCASE("non-hermitian") {
    TwoQubitState s = TwoQubitState::singlet();
    s.rho(0, 1) = std::complex<double>(0.3, 0.0);  // no conjugate partner
    CHECK_THROWS_AS(s.validate(tol), numerical_error);
  }
  SUBCASE("trace away from one") {
    TwoQubitState s = TwoQubitState::maximally_mixed();
    s.rho *= 1.5;
    CHECK_THROWS_AS(s.validate(tol), numerical_error);
  }
  SUBCASE("negative eigenvalue") {
    TwoQubitState s;
    s.rho = Matrix4c::Zero();
    s.rho(0, 0) = 1.5;
    s.rho(1, 1) = -0.5;
    CHECK_THROWS_AS(s.validate(tol), numerical_error);
  }
  SUBCASE("valid states pass") {
    CHECK_NOTHROW(TwoQubitState::singlet().validate(tol));
    CHECK_NOTHROW(TwoQubitState::maximally_mixed().validate(tol));
  }
}

TEST_CASE("pure-state fidelity template works for other scalar types") {
  const PairVector<long double> v = bell_singlet_vector<long double>();
  CHECK(static_cast<double>(pure_fidelity(v)) == doctest::Approx(1.0));
}
