#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qpake/harness.hpp"
#include "qpake/qchannel.hpp"

using namespace qpake;

namespace {
BitString bits(std::string_view s) { return BitString::from_string(s); }
}  // namespace

TEST_CASE("encode is elementwise") {
  const QuantumRegister reg = encode_bb84(bits("0"), bits("0"));
  CHECK(reg.size() == 1);
  CHECK(reg.qubit(0).basis == Basis::Plus);
  CHECK(reg.qubit(0).bit == 0);

  // x=1011 in bases +,x,+,x
  const QuantumRegister reg2 = encode_bb84(bits("1011"), bits("0101"));
  CHECK(reg2.qubit(0).basis == Basis::Plus);
  CHECK(reg2.qubit(0).bit == 1);
  CHECK(reg2.qubit(1).basis == Basis::Times);
  CHECK(reg2.qubit(1).bit == 0);
  CHECK(reg2.qubit(2).basis == Basis::Plus);
  CHECK(reg2.qubit(2).bit == 1);
  CHECK(reg2.qubit(3).basis == Basis::Times);
  CHECK(reg2.qubit(3).bit == 1);

  CHECK_THROWS_AS(encode_bb84(bits("01"), bits("0")), std::invalid_argument);
  CHECK_THROWS_AS(encode_bb84(BitString(), BitString()), std::invalid_argument);
}

TEST_CASE("matched-basis measurement returns the stored bit") {
  Rng rng(1);
  QuantumRegister reg = encode_bb84(bits("1"), bits("0"));
  CHECK(measure(reg, bits("0"), rng) == bits("1"));
}

TEST_CASE("matched-basis round trip, exhaustive k<=4") {
  for (std::size_t k = 1; k <= 4; ++k) {
    for (std::uint64_t xv = 0; xv < (1ull << k); ++xv) {
      for (std::uint64_t tv = 0; tv < (1ull << k); ++tv) {
        BitString x(k), theta(k);
        for (std::size_t i = 0; i < k; ++i) {
          x.set(i, (xv >> i) & 1);
          theta.set(i, (tv >> i) & 1);
        }
        Rng rng(99);
        QuantumRegister reg = encode_bb84(x, theta);
        CHECK(measure(reg, theta, rng) == x);
      }
    }
  }
}

TEST_CASE("matched-basis round trip, randomized long registers") {
  Rng rng(5);
  const BitString x = BitString::random(10000, rng);
  const BitString theta = BitString::random(10000, rng);
  QuantumRegister reg = encode_bb84(x, theta);
  CHECK(measure(reg, theta, rng) == x);
}

TEST_CASE("double measurement is a usage error") {
  Rng rng(1);
  QuantumRegister reg = encode_bb84(bits("10"), bits("00"));
  (void)measure(reg, bits("00"), rng);
  CHECK(reg.consumed());
  CHECK_THROWS_AS(measure(reg, bits("00"), rng), std::logic_error);
}

TEST_CASE("mismatched basis is a fair coin") {
  Rng rng(7);
  std::size_t ones = 0;
  const std::size_t trials = 100000;
  for (std::size_t t = 0; t < trials; ++t) {
    QuantumRegister reg = encode_bb84(bits("0"), bits("0"));
    if (measure(reg, bits("1"), rng).get(0)) ++ones;
  }
  const double mean = static_cast<double>(ones) / trials;
  CHECK(std::fabs(mean - 0.5) < 0.01);
}

TEST_CASE("mismatched-basis outcomes independent across positions") {
  // 4 mismatched positions -> 16 equally likely outcomes; chi-square at
  // significance 1e-3 with 15 dof.
  Rng rng(11);
  const std::size_t trials = 100000;
  std::array<std::uint64_t, 16> counts{};
  for (std::size_t t = 0; t < trials; ++t) {
    QuantumRegister reg = encode_bb84(bits("0000"), bits("0000"));
    const BitString out = measure(reg, bits("1111"), rng);
    std::size_t v = 0;
    for (std::size_t i = 0; i < 4; ++i) v = (v << 1) | (out.get(i) ? 1 : 0);
    ++counts[v];
  }
  double chi = 0.0;
  const double expected = trials / 16.0;
  for (auto c : counts) {
    const double diff = static_cast<double>(c) - expected;
    chi += diff * diff / expected;
  }
  CHECK(gamma_q(15.0 / 2.0, chi / 2.0) > 1e-3);
}

TEST_CASE("identical seeds give identical outputs") {
  for (int rep = 0; rep < 2; ++rep) {
    Rng r1(123), r2(123);
    const BitString x = BitString::random(64, r1);
    const BitString x2 = BitString::random(64, r2);
    CHECK(x == x2);
    QuantumRegister a = encode_bb84(x, BitString(64));
    QuantumRegister b = encode_bb84(x2, BitString(64));
    QuantumRegister am = apply_channel(std::move(a), ChannelModel::bit_flip(0.3), r1);
    QuantumRegister bm = apply_channel(std::move(b), ChannelModel::bit_flip(0.3), r2);
    BitString theta(64);
    CHECK(measure(am, theta, r1) == measure(bm, theta, r2));
  }
}

TEST_CASE("ideal channel is the identity") {
  Rng rng(2);
  const BitString x = BitString::random(32, rng);
  const BitString theta = BitString::random(32, rng);
  QuantumRegister reg = encode_bb84(x, theta);
  QuantumRegister out = apply_channel(std::move(reg), ChannelModel::ideal(), rng);
  for (std::size_t i = 0; i < 32; ++i) {
    CHECK(out.qubit(i).bit == (x.get(i) ? 1 : 0));
    CHECK((out.qubit(i).basis == Basis::Times) == theta.get(i));
  }
}

TEST_CASE("bitflip(1.0) flips every bit and keeps bases") {
  Rng rng(2);
  const BitString x = BitString::random(32, rng);
  const BitString theta = BitString::random(32, rng);
  QuantumRegister reg = encode_bb84(x, theta);
  QuantumRegister out = apply_channel(std::move(reg), ChannelModel::bit_flip(1.0), rng);
  for (std::size_t i = 0; i < 32; ++i) {
    CHECK(out.qubit(i).bit == (x.get(i) ? 0 : 1));
    CHECK((out.qubit(i).basis == Basis::Times) == theta.get(i));
  }
  CHECK_THROWS_AS(ChannelModel::bit_flip(1.5), std::invalid_argument);
}

TEST_CASE("intercept-resend disturbs a quarter of matched positions") {
  Rng rng(3);
  const std::size_t n = 100000;
  const BitString x = BitString::random(n, rng);
  const BitString theta = BitString::random(n, rng);
  QuantumRegister reg = encode_bb84(x, theta);
  QuantumRegister attacked =
      apply_channel(std::move(reg), ChannelModel::intercept_resend_random(), rng);
  const BitString measured = measure(attacked, theta, rng);
  const double err = relative_hamming(measured, x);
  CHECK(std::fabs(err - 0.25) < 0.01);
}

TEST_CASE("intercept-resend exact on fully matched basis triples") {
  // adversary basis = sender basis = receiver basis -> zero disturbance
  for (int basis = 0; basis < 2; ++basis) {
    for (int bit = 0; bit < 2; ++bit) {
      Rng rng(17);
      BitString x(1), theta(1);
      x.set(0, bit);
      theta.set(0, basis);
      QuantumRegister reg = encode_bb84(x, theta);
      QuantumRegister attacked = apply_channel(
          std::move(reg),
          ChannelModel::intercept_resend_fixed(basis ? Basis::Times : Basis::Plus),
          rng);
      CHECK(measure(attacked, theta, rng) == x);
    }
  }
}

TEST_CASE("register hex round trip") {
  Rng rng(9);
  const BitString x = BitString::random(13, rng);
  const BitString theta = BitString::random(13, rng);
  const QuantumRegister reg = encode_bb84(x, theta);
  const std::string hex = reg.to_hex();
  const QuantumRegister back = QuantumRegister::from_hex(hex, 13);
  for (std::size_t i = 0; i < 13; ++i) {
    CHECK(back.qubit(i).bit == reg.qubit(i).bit);
    CHECK(back.qubit(i).basis == reg.qubit(i).basis);
  }
  CHECK_THROWS_AS(QuantumRegister::from_hex("0", 13), std::invalid_argument);
}

TEST_CASE("scripted hook is invoked") {
  ChannelModel model;
  model.kind = ChannelModel::Kind::Scripted;
  model.scripted = [](QuantumRegister reg, Rng&) {
    return reg;  // identity hook
  };
  Rng rng(4);
  QuantumRegister reg = encode_bb84(bits("101"), bits("000"));
  QuantumRegister out = apply_channel(std::move(reg), model, rng);
  CHECK(out.qubit(0).bit == 1);

  ChannelModel unbound;
  unbound.kind = ChannelModel::Kind::Scripted;
  QuantumRegister reg2 = encode_bb84(bits("1"), bits("0"));
  CHECK_THROWS_AS(apply_channel(std::move(reg2), unbound, rng),
                  std::invalid_argument);
}
