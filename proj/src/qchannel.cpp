#include "qpake/qchannel.hpp"

#include <stdexcept>

namespace qpake {

namespace {
int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw std::invalid_argument("register hex: invalid digit");
}
}  // namespace

ChannelModel ChannelModel::bit_flip(double p) {
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("ChannelModel: flip probability outside [0,1]");
  ChannelModel m;
  m.kind = Kind::BitFlip;
  m.flip_prob = p;
  return m;
}

ChannelModel ChannelModel::intercept_resend_random() {
  ChannelModel m;
  m.kind = Kind::InterceptResend;
  m.strategy = Strategy::RandomBasis;
  return m;
}

ChannelModel ChannelModel::intercept_resend_fixed(Basis b) {
  ChannelModel m;
  m.kind = Kind::InterceptResend;
  m.strategy = Strategy::FixedBasis;
  m.fixed_basis = b;
  return m;
}

std::string QuantumRegister::to_hex() const {
  static const char* digits = "0123456789abcdef";
  const std::size_t bits = qubits_.size() * 2;
  std::string out((bits + 7) / 8 * 2, '0');
  for (std::size_t i = 0; i < qubits_.size(); ++i) {
    // qubit i occupies bit positions 2i (basis) and 2i+1 (bit), MSB-first
    const std::size_t pos = 2 * i;
    const std::size_t byte = pos / 8;
    int v = hex_value(out[byte * 2]) << 4 | hex_value(out[byte * 2 + 1]);
    const int shift = 6 - static_cast<int>(pos % 8);
    v |= (basis_bit(qubits_[i].basis) ? 2 : 0) << shift;
    v |= (qubits_[i].bit ? 1 : 0) << shift;
    out[byte * 2] = digits[(v >> 4) & 0xf];
    out[byte * 2 + 1] = digits[v & 0xf];
  }
  return out;
}

QuantumRegister QuantumRegister::from_hex(std::string_view hex,
                                          std::size_t count) {
  const std::size_t bits = count * 2;
  if (hex.size() != (bits + 7) / 8 * 2)
    throw std::invalid_argument("register hex: length mismatch");
  std::vector<Qubit> qs(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t pos = 2 * i;
    const int byte = hex_value(hex[pos / 8 * 2]) << 4 |
                     hex_value(hex[pos / 8 * 2 + 1]);
    const int shift = 6 - static_cast<int>(pos % 8);
    qs[i].basis = basis_from_bit((byte >> (shift + 1)) & 1);
    qs[i].bit = static_cast<std::uint8_t>((byte >> shift) & 1);
  }
  return QuantumRegister(std::move(qs));
}

QuantumRegister encode_bb84(const BitString& x, const BitString& theta) {
  if (x.size() != theta.size() || x.size() == 0)
    throw std::invalid_argument("encode_bb84: |x| and |theta| must match and be >= 1");
  std::vector<Qubit> qs(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    qs[i].basis = basis_from_bit(theta.get(i));
    qs[i].bit = x.get(i) ? 1 : 0;
  }
  return QuantumRegister(std::move(qs));
}

BitString measure(QuantumRegister& reg, const BitString& theta_hat, Rng& rng) {
  if (reg.consumed_)
    throw std::logic_error("measure: register already measured");
  if (theta_hat.size() != reg.size())
    throw std::invalid_argument("measure: basis string length mismatch");
  reg.consumed_ = true;
  BitString out(reg.size());
  for (std::size_t i = 0; i < reg.size(); ++i) {
    const Qubit& q = reg.qubits_[i];
    bool bit;
    if (basis_from_bit(theta_hat.get(i)) == q.basis)
      bit = q.bit != 0;
    else
      bit = rng.bit();
    out.set(i, bit);
  }
  return out;
}

QuantumRegister apply_channel_impl(QuantumRegister reg,
                                   const ChannelModel& model, Rng& rng) {
  switch (model.kind) {
    case ChannelModel::Kind::Ideal:
      return reg;
    case ChannelModel::Kind::BitFlip:
      for (auto& q : reg.qubits_)
        if (rng.unit() < model.flip_prob) q.bit ^= 1;
      return reg;
    case ChannelModel::Kind::InterceptResend:
      for (auto& q : reg.qubits_) {
        const Basis adv = model.strategy == ChannelModel::Strategy::RandomBasis
                              ? basis_from_bit(rng.bit())
                              : model.fixed_basis;
        const std::uint8_t observed =
            adv == q.basis ? q.bit : static_cast<std::uint8_t>(rng.bit());
        q = Qubit{adv, observed};
      }
      return reg;
    case ChannelModel::Kind::Scripted:
      if (!model.scripted)
        throw std::invalid_argument("apply_channel: scripted hook not bound");
      return model.scripted(std::move(reg), rng);
  }
  return reg;
}

QuantumRegister apply_channel(QuantumRegister reg, const ChannelModel& model,
                              Rng& rng) {
  return apply_channel_impl(std::move(reg), model, rng);
}

}  // namespace qpake
