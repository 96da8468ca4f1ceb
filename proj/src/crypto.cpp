#include "qpake/crypto.hpp"

#include <openssl/evp.h>

#include <mutex>
#include <stdexcept>

namespace qpake {

namespace {

// RFC 3526, 2048-bit MODP group (group 14). p is a safe prime; the squares
// form the order-(p-1)/2 subgroup generated by 4.
constexpr const char* kModp2048Hex =
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74"
    "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437"
    "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05"
    "98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB"
    "9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718"
    "3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF";

mpz_class mpz_from_u64(std::uint64_t v) {
  mpz_class out;
  mpz_import(out.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
  return out;
}

mpz_class random_bits(Rng& rng, std::size_t bits) {
  const std::size_t words = (bits + 63) / 64;
  mpz_class out = 0;
  for (std::size_t i = 0; i < words; ++i) {
    out <<= 64;
    out += mpz_from_u64(rng.next());
  }
  // keep exactly `bits` low bits
  mpz_class mask = (mpz_class(1) << bits) - 1;
  return out & mask;
}

std::string fixed_hex(const mpz_class& v, std::size_t width) {
  std::string s = v.get_str(16);
  if (s.size() > width) throw std::invalid_argument("value too wide for field");
  return std::string(width - s.size(), '0') + s;
}

constexpr std::size_t kFullTableMaxQ = std::size_t{1} << 20;

std::shared_ptr<const std::vector<std::vector<mpz_class>>> build_tables(
    const Group& group, const std::vector<mpz_class>& bases) {
  if (group.q() > kFullTableMaxQ) return nullptr;
  const std::size_t q = static_cast<std::size_t>(group.q().get_ui());
  auto tables = std::make_shared<std::vector<std::vector<mpz_class>>>();
  tables->reserve(bases.size());
  for (const auto& base : bases) {
    std::vector<mpz_class> t(q);
    t[0] = 1;
    for (std::size_t i = 1; i < q; ++i) t[i] = group.mul(t[i - 1], base);
    tables->push_back(std::move(t));
  }
  return tables;
}

// tables layout: [0] g, [1] h, [2] u, [3] v
mpz_class table_pow(const CommitKey& ck, std::size_t which,
                    const mpz_class& base, const mpz_class& e) {
  if (ck.tables)
    return (*ck.tables)[which][static_cast<std::size_t>(e.get_ui())];
  return ck.group->pow(base, e);
}

}  // namespace

Group::Group(mpz_class p, mpz_class q, mpz_class g)
    : p_(std::move(p)), q_(std::move(q)), g_(std::move(g)) {
  if (p_ < 3 || q_ < 2) throw std::invalid_argument("Group: degenerate parameters");
  if ((p_ - 1) % q_ != 0)
    throw std::invalid_argument("Group: q must divide p-1");
  if (g_ <= 1 || pow(g_, q_) != 1)
    throw std::invalid_argument("Group: g does not generate an order-q subgroup");
}

mpz_class Group::pow(const mpz_class& base, const mpz_class& e) const {
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), e.get_mpz_t(), p_.get_mpz_t());
  return out;
}

mpz_class Group::mul(const mpz_class& a, const mpz_class& b) const {
  return mpz_class(a * b % p_);
}

mpz_class Group::inv(const mpz_class& a) const {
  mpz_class out;
  if (mpz_invert(out.get_mpz_t(), a.get_mpz_t(), p_.get_mpz_t()) == 0)
    throw std::invalid_argument("Group: element not invertible");
  return out;
}

mpz_class Group::rand_exponent(Rng& rng) const {
  const std::size_t bits = mpz_sizeinbase(q_.get_mpz_t(), 2);
  while (true) {
    mpz_class v = random_bits(rng, bits);
    if (v < q_) return v;
  }
}

bool Group::in_subgroup(const mpz_class& e) const {
  return e >= 1 && e < p_ && pow(e, q_) == 1;
}

std::size_t Group::element_hex_width() const {
  return (mpz_sizeinbase(p_.get_mpz_t(), 2) + 7) / 8 * 2;
}

std::string Group::element_hex(const mpz_class& e) const {
  return fixed_hex(e, element_hex_width());
}

mpz_class Group::element_from_hex(std::string_view hex) const {
  if (hex.size() != element_hex_width())
    throw std::invalid_argument("element hex: width mismatch");
  mpz_class out;
  if (mpz_set_str(out.get_mpz_t(), std::string(hex).c_str(), 16) != 0)
    throw std::invalid_argument("element hex: parse failure");
  if (out < 0 || out >= p_) throw std::invalid_argument("element hex: out of range");
  return out;
}

std::string Group::exponent_hex(const mpz_class& e) const {
  return fixed_hex(e, (mpz_sizeinbase(q_.get_mpz_t(), 2) + 7) / 8 * 2);
}

mpz_class Group::exponent_from_hex(std::string_view hex) const {
  mpz_class out;
  if (mpz_set_str(out.get_mpz_t(), std::string(hex).c_str(), 16) != 0)
    throw std::invalid_argument("exponent hex: parse failure");
  if (out < 0 || out >= q_) throw std::invalid_argument("exponent hex: out of range");
  return out;
}

std::shared_ptr<const Group> Group::tiny() {
  static const auto g = std::make_shared<const Group>(23, 11, 2);
  return g;
}

std::shared_ptr<const Group> Group::make(unsigned q_bits, std::uint64_t seed) {
  if (q_bits < 3 || q_bits > 4096)
    throw std::invalid_argument("Group::make: unsupported size");
  Rng rng(seed);
  mpz_class q = random_bits(rng, q_bits);
  mpz_setbit(q.get_mpz_t(), q_bits - 1);
  mpz_nextprime(q.get_mpz_t(), q.get_mpz_t());
  mpz_class p;
  mpz_class c = 2;
  while (true) {
    p = c * q + 1;
    if (mpz_probab_prime_p(p.get_mpz_t(), 30) > 0) break;
    c += 1;
  }
  const mpz_class exponent = (p - 1) / q;
  mpz_class g;
  for (mpz_class x = 2;; x += 1) {
    mpz_powm(g.get_mpz_t(), x.get_mpz_t(), exponent.get_mpz_t(), p.get_mpz_t());
    if (g != 1) break;
  }
  return std::make_shared<const Group>(p, q, g);
}

std::shared_ptr<const Group> Group::experiment() {
  static const auto g = make(14, 0x71c4e5a3902bd1f0ULL);
  return g;
}

std::shared_ptr<const Group> Group::signature61() {
  static const auto g = make(61, 0x3b9e12f7c85a6d04ULL);
  return g;
}

std::shared_ptr<const Group> Group::modp2048() {
  static const auto grp = [] {
    mpz_class p;
    mpz_set_str(p.get_mpz_t(), kModp2048Hex, 16);
    mpz_class q = (p - 1) / 2;
    return std::make_shared<const Group>(p, q, 4);
  }();
  return grp;
}

std::shared_ptr<const Group> Group::by_name(const std::string& name) {
  if (name == "tiny") return tiny();
  if (name == "experiment") return experiment();
  if (name == "signature61") return signature61();
  if (name == "modp2048") return modp2048();
  throw std::invalid_argument("unknown group preset: " + name);
}

// ------------------------------------------------------------ commitments

std::pair<CommitKey, Trapdoor> keygen_from_exponents(const GroupPtr& group,
                                                     CommitMode mode,
                                                     const mpz_class& alpha,
                                                     const mpz_class& beta,
                                                     const mpz_class& delta) {
  CommitKey ck;
  ck.mode = mode;
  ck.group = group;
  ck.h = group->pow(group->g(), alpha);
  ck.u = group->pow(group->g(), beta);
  Trapdoor td;
  td.mode = mode;
  if (mode == CommitMode::Binding) {
    ck.v = group->pow(ck.h, beta);
    td.beta = beta;
  } else {
    if (delta == mpz_class(alpha * beta % group->q()))
      throw std::invalid_argument("keygen: hiding key needs delta != alpha*beta");
    ck.v = group->pow(group->g(), delta);
    td.alpha = alpha;
    td.beta = beta;
    td.delta = delta;
  }
  ck.tables = build_tables(*group, {group->g(), ck.h, ck.u, ck.v});
  return {std::move(ck), std::move(td)};
}

std::pair<CommitKey, Trapdoor> keygen(const GroupPtr& group, CommitMode mode,
                                      Rng& rng) {
  const mpz_class alpha = group->rand_exponent(rng);
  const mpz_class beta = group->rand_exponent(rng);
  mpz_class delta = 0;
  if (mode == CommitMode::Hiding) {
    do {
      delta = group->rand_exponent(rng);
    } while (delta == mpz_class(alpha * beta % group->q()));
  }
  return keygen_from_exponents(group, mode, alpha, beta, delta);
}

Commitment commit_with(const CommitKey& ck, unsigned m, const mpz_class& r,
                       const mpz_class& s) {
  if (m > 1) throw std::invalid_argument("commit: message must be a bit");
  const Group& G = *ck.group;
  Commitment c;
  c.c1 = G.mul(table_pow(ck, 0, G.g(), r), table_pow(ck, 1, ck.h, s));
  c.c2 = G.mul(table_pow(ck, 2, ck.u, r), table_pow(ck, 3, ck.v, s));
  if (m == 1) c.c2 = G.mul(c.c2, G.g());
  return c;
}

std::pair<Commitment, Opening> commit(const CommitKey& ck, unsigned m,
                                      Rng& rng) {
  Opening o;
  o.m = m;
  o.r = ck.group->rand_exponent(rng);
  o.s = ck.group->rand_exponent(rng);
  return {commit_with(ck, m, o.r, o.s), std::move(o)};
}

bool verify_open(const CommitKey& ck, const Commitment& c, const Opening& o) {
  if (o.m > 1) return false;
  if (o.r < 0 || o.r >= ck.group->q() || o.s < 0 || o.s >= ck.group->q())
    return false;
  return commit_with(ck, o.m, o.r, o.s) == c;
}

Opening equivocate(const CommitKey& ck, const Trapdoor& tk,
                   const Commitment& c, const Opening& o1, unsigned m2) {
  if (tk.mode != CommitMode::Hiding || ck.mode != CommitMode::Hiding)
    throw std::logic_error("equivocate: requires a hiding-mode trapdoor");
  if (m2 > 1) throw std::invalid_argument("equivocate: message must be a bit");
  if (!verify_open(ck, c, o1))
    throw std::invalid_argument("equivocate: o1 does not open c");
  if (m2 == o1.m) return o1;

  const mpz_class& q = ck.group->q();
  // Solve r2 + alpha*s2 = r1 + alpha*s1 and
  //       beta*r2 + delta*s2 = beta*r1 + delta*s1 + (m1 - m2)  (mod q).
  const mpz_class a = (o1.r + tk.alpha * o1.s) % q;
  mpz_class b = (tk.beta * o1.r + tk.delta * o1.s) % q;
  b = (b + mpz_class(o1.m) - mpz_class(m2) + q) % q;

  mpz_class det = (tk.delta - tk.alpha * tk.beta) % q;
  det = (det + q) % q;
  mpz_class det_inv;
  mpz_invert(det_inv.get_mpz_t(), det.get_mpz_t(), q.get_mpz_t());

  mpz_class s2 = ((b - tk.beta * a) % q + q) % q;
  s2 = s2 * det_inv % q;
  mpz_class r2 = ((a - tk.alpha * s2) % q + q) % q;

  Opening o2;
  o2.m = m2;
  o2.r = r2;
  o2.s = s2;
  return o2;
}

std::optional<unsigned> extract(const CommitKey& ck, const Trapdoor& xk,
                                const Commitment& c) {
  if (xk.mode != CommitMode::Binding || ck.mode != CommitMode::Binding)
    throw std::logic_error("extract: requires a binding-mode trapdoor");
  const Group& G = *ck.group;
  const mpz_class base = G.pow(c.c1, xk.beta);  // u^r v^s for honest c
  if (c.c2 == base) return 0;
  if (c.c2 == G.mul(base, G.g())) return 1;
  return std::nullopt;
}

std::string CommitKey::fingerprint() const {
  std::string data = group->element_hex(h) + group->element_hex(u) +
                     group->element_hex(v) +
                     (mode == CommitMode::Binding ? "B" : "H");
  const auto digest = sha256(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 0; i < 8; ++i) {
    out.push_back(digits[digest[i] >> 4]);
    out.push_back(digits[digest[i] & 0xf]);
  }
  return out;
}

// ------------------------------------------------------------- signatures

std::vector<std::uint8_t> sha256(std::span<const std::uint8_t> data) {
  std::vector<std::uint8_t> digest(32);
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(),
                 nullptr) != 1 ||
      len != 32)
    throw std::runtime_error("sha256 failure");
  return digest;
}

mpz_class hash_to_exponent(const Group& group, std::string_view domain_tag,
                           std::span<const std::uint8_t> data) {
  std::vector<std::uint8_t> buf;
  buf.reserve(domain_tag.size() + 1 + data.size());
  buf.insert(buf.end(), domain_tag.begin(), domain_tag.end());
  buf.push_back(0);
  buf.insert(buf.end(), data.begin(), data.end());
  const auto digest = sha256(buf);
  mpz_class v;
  mpz_import(v.get_mpz_t(), digest.size(), 1, 1, 0, 0, digest.data());
  return v % group.q();
}

SigKeyPair sig_keygen(const GroupPtr& group, Rng& rng) {
  SigKeyPair kp;
  do {
    kp.sk = group->rand_exponent(rng);
  } while (kp.sk == 0);
  kp.vk = group->pow(group->g(), kp.sk);
  return kp;
}

namespace {
mpz_class challenge(const Group& group, const mpz_class& commitment_elem,
                    std::span<const std::uint8_t> message) {
  std::vector<std::uint8_t> buf;
  const std::string a_hex = group.element_hex(commitment_elem);
  buf.insert(buf.end(), a_hex.begin(), a_hex.end());
  buf.insert(buf.end(), message.begin(), message.end());
  return hash_to_exponent(group, kSigDomainTag, buf);
}
}  // namespace

Signature sign(const GroupPtr& group, const mpz_class& sk,
               std::span<const std::uint8_t> message, Rng& rng) {
  mpz_class nonce;
  do {
    nonce = group->rand_exponent(rng);
  } while (nonce == 0);
  const mpz_class a = group->pow(group->g(), nonce);
  Signature sig;
  sig.e = challenge(*group, a, message);
  sig.z = (nonce + sig.e * sk) % group->q();
  return sig;
}

bool verify_sig(const GroupPtr& group, const mpz_class& vk,
                std::span<const std::uint8_t> message, const Signature& sig) {
  if (!group->in_subgroup(vk)) return false;
  if (sig.e < 0 || sig.e >= group->q() || sig.z < 0 || sig.z >= group->q())
    return false;
  // a' = g^z * vk^{-e}
  const mpz_class neg_e = (group->q() - sig.e) % group->q();
  const mpz_class a = group->mul(group->pow(group->g(), sig.z),
                                 group->pow(vk, neg_e));
  return challenge(*group, a, message) == sig.e;
}

}  // namespace qpake
