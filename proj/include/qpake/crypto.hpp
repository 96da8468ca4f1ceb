#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpake/rng.hpp"

namespace qpake {

// Prime-order-q subgroup of Z_p^*. Sizes are configurable: the q = 11 group
// supports exhaustive verification, mid-size groups back the protocol
// experiments, and the 2048-bit MODP group is the production default.
class Group {
 public:
  static std::shared_ptr<const Group> tiny();          // p = 23, q = 11, g = 2
  static std::shared_ptr<const Group> experiment();    // q ~ 2^14
  static std::shared_ptr<const Group> signature61();   // q ~ 2^61
  static std::shared_ptr<const Group> modp2048();      // RFC 3526 group 14
  static std::shared_ptr<const Group> make(unsigned q_bits, std::uint64_t seed);
  static std::shared_ptr<const Group> by_name(const std::string& name);

  const mpz_class& p() const { return p_; }
  const mpz_class& q() const { return q_; }
  const mpz_class& g() const { return g_; }

  mpz_class pow(const mpz_class& base, const mpz_class& e) const;
  mpz_class mul(const mpz_class& a, const mpz_class& b) const;
  mpz_class inv(const mpz_class& a) const;

  mpz_class rand_exponent(Rng& rng) const;  // uniform in [0, q)
  bool in_subgroup(const mpz_class& e) const;

  std::size_t element_hex_width() const;
  std::string element_hex(const mpz_class& e) const;
  mpz_class element_from_hex(std::string_view hex) const;
  std::string exponent_hex(const mpz_class& e) const;
  mpz_class exponent_from_hex(std::string_view hex) const;

  Group(mpz_class p, mpz_class q, mpz_class g);

 private:
  mpz_class p_, q_, g_;
};

using GroupPtr = std::shared_ptr<const Group>;

enum class CommitMode { Hiding, Binding };

// Two-generator dual-mode commitment: C = (g^r h^s, u^r v^s g^m).
// Binding when (g, h, u, v) is a DDH tuple (v = h^beta with u = g^beta),
// perfectly hiding when the exponent matrix [[1, alpha], [beta, delta]] is
// invertible mod q. Messages are single bits; multi-bit values are
// committed bitwise.
struct CommitKey {
  CommitMode mode = CommitMode::Hiding;
  GroupPtr group;
  mpz_class h, u, v;

  // Full fixed-base power tables, built when q is small enough; they make
  // per-bit commitments O(1) in the experiment groups.
  std::shared_ptr<const std::vector<std::vector<mpz_class>>> tables;

  std::string fingerprint() const;
};

struct Trapdoor {
  CommitMode mode = CommitMode::Hiding;
  mpz_class alpha, beta, delta;  // Binding uses beta only
};

struct Commitment {
  mpz_class c1, c2;
  bool operator==(const Commitment&) const = default;
};

struct Opening {
  unsigned m = 0;  // committed bit
  mpz_class r, s;
};

std::pair<CommitKey, Trapdoor> keygen(const GroupPtr& group, CommitMode mode,
                                      Rng& rng);
// Deterministic variant used by exhaustive tests and the CRS setup.
std::pair<CommitKey, Trapdoor> keygen_from_exponents(const GroupPtr& group,
                                                     CommitMode mode,
                                                     const mpz_class& alpha,
                                                     const mpz_class& beta,
                                                     const mpz_class& delta);

std::pair<Commitment, Opening> commit(const CommitKey& ck, unsigned m,
                                      Rng& rng);
Commitment commit_with(const CommitKey& ck, unsigned m, const mpz_class& r,
                       const mpz_class& s);
bool verify_open(const CommitKey& ck, const Commitment& c, const Opening& o);

// Hiding-mode trapdoor: reopen c (currently opened by o1) to bit m2.
Opening equivocate(const CommitKey& ck, const Trapdoor& tk,
                   const Commitment& c, const Opening& o1, unsigned m2);

// Binding-mode trapdoor: recover the committed bit, or nullopt for a
// malformed commitment.
std::optional<unsigned> extract(const CommitKey& ck, const Trapdoor& xk,
                                const Commitment& c);

// Schnorr signatures over the same kind of group; challenge-response form.
struct SigKeyPair {
  mpz_class sk, vk;
};

struct Signature {
  mpz_class e, z;
};

SigKeyPair sig_keygen(const GroupPtr& group, Rng& rng);
Signature sign(const GroupPtr& group, const mpz_class& sk,
               std::span<const std::uint8_t> message, Rng& rng);
bool verify_sig(const GroupPtr& group, const mpz_class& vk,
                std::span<const std::uint8_t> message, const Signature& sig);

// SHA-256 of (domain tag || data), reduced mod q.
mpz_class hash_to_exponent(const Group& group, std::string_view domain_tag,
                           std::span<const std::uint8_t> data);

std::vector<std::uint8_t> sha256(std::span<const std::uint8_t> data);

inline constexpr std::string_view kSigDomainTag = "qpake/sig/v1";
inline constexpr std::string_view kCommitDomainTag = "qpake/commit/v1";

}  // namespace qpake
