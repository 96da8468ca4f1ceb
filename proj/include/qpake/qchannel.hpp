#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qpake/bitstring.hpp"
#include "qpake/rng.hpp"

namespace qpake {

// Product-state BB84 simulation. A qubit is a classical (basis, bit) pair;
// measuring in the wrong basis yields a fair coin. This covers the honest
// protocol and every channel attack modelled here; entangled adversaries are
// out of scope and handled only by the bounds module.

enum class Basis : std::uint8_t { Plus = 0, Times = 1 };

inline Basis basis_from_bit(bool b) { return b ? Basis::Times : Basis::Plus; }
inline bool basis_bit(Basis b) { return b == Basis::Times; }
inline char basis_char(Basis b) { return b == Basis::Times ? 'x' : '+'; }

struct Qubit {
  Basis basis = Basis::Plus;
  std::uint8_t bit = 0;
};

// Single-use register: measurement consumes it, enforcing no-cloning at the
// type level.
class QuantumRegister {
 public:
  QuantumRegister() = default;
  explicit QuantumRegister(std::vector<Qubit> qubits)
      : qubits_(std::move(qubits)) {}

  std::size_t size() const { return qubits_.size(); }
  const Qubit& qubit(std::size_t i) const { return qubits_.at(i); }
  bool consumed() const { return consumed_; }

  // 2 bits per qubit (basis then bit), big-endian within each byte.
  std::string to_hex() const;
  static QuantumRegister from_hex(std::string_view hex, std::size_t count);

  friend BitString measure(QuantumRegister& reg, const BitString& theta_hat,
                           Rng& rng);
  friend QuantumRegister apply_channel_impl(QuantumRegister reg,
                                            const struct ChannelModel& model,
                                            Rng& rng);

 private:
  std::vector<Qubit> qubits_;
  bool consumed_ = false;
};

struct ChannelModel {
  enum class Kind { Ideal, BitFlip, InterceptResend, Scripted };
  enum class Strategy { RandomBasis, FixedBasis };

  Kind kind = Kind::Ideal;
  double flip_prob = 0.0;
  Strategy strategy = Strategy::RandomBasis;
  Basis fixed_basis = Basis::Plus;
  std::string hook;  // scripted hooks are resolved by the harness registry
  std::function<QuantumRegister(QuantumRegister, Rng&)> scripted;

  static ChannelModel ideal() { return {}; }
  static ChannelModel bit_flip(double p);
  static ChannelModel intercept_resend_random();
  static ChannelModel intercept_resend_fixed(Basis b);
};

// theta: 0 = Plus, 1 = Times. Deterministic.
QuantumRegister encode_bb84(const BitString& x, const BitString& theta);

// Matching basis returns the stored bit; otherwise an independent fair coin.
// Consumes the register; measuring twice is a usage error.
BitString measure(QuantumRegister& reg, const BitString& theta_hat, Rng& rng);

QuantumRegister apply_channel(QuantumRegister reg, const ChannelModel& model,
                              Rng& rng);

}  // namespace qpake
