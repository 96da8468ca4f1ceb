#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qpake/crypto.hpp"
#include "qpake/pake.hpp"

namespace qpake {

// Split-authentication compiler: link initialization binds a session id to
// both verification keys, then every classical message is signed together
// with (sid, recipient, counter). Quantum flows pass through unsigned;
// tampering there is caught by parameter estimation instead.

struct SignedEnvelope {
  std::string sender;
  std::uint64_t counter = 0;
  std::vector<std::uint8_t> message;
  Signature sig;
};

class LinkState {
 public:
  LinkState(GroupPtr group, std::string own_id, std::string peer_id,
            SigKeyPair own_keys, mpz_class peer_vk);

  const std::string& sid() const { return sid_; }
  const std::string& own_id() const { return own_id_; }
  const mpz_class& own_vk() const { return own_keys_.vk; }

  SignedEnvelope wrap_message(std::span<const std::uint8_t> m, Rng& rng);

  // Accepts iff the counter is unseen and the signature covers
  // (sid, m, recipient = this party, counter) under the peer key.
  std::optional<std::vector<std::uint8_t>> unwrap_message(
      const SignedEnvelope& env);

  std::uint64_t send_counter() const { return send_counter_; }

 private:
  GroupPtr group_;
  std::string own_id_, peer_id_;
  SigKeyPair own_keys_;
  mpz_class peer_vk_;
  std::string sid_;
  std::uint64_t send_counter_ = 0;
  std::set<std::uint64_t> seen_counters_;
};

// Canonical sid: the (party id, vk) pairs in lexicographic order, so both
// endpoints of an untampered link derive byte-identical strings.
std::string canonical_sid(const Group& group, const std::string& id_a,
                          const mpz_class& vk_a, const std::string& id_b,
                          const mpz_class& vk_b);

// Byte string signed for an envelope: length-prefixed sid || m || recipient,
// then the counter in big-endian.
std::vector<std::uint8_t> signed_tuple(const std::string& sid,
                                       std::span<const std::uint8_t> m,
                                       const std::string& recipient,
                                       std::uint64_t counter);

std::string envelope_to_wire(const Group& group, const SignedEnvelope& env);
SignedEnvelope envelope_from_wire(const Group& group, std::string_view wire);

// Tamper hook over the two link-initialization rounds (0: verification
// keys, 1: signed sids). from is the sending party index. Empty = drop.
using LinkInitTamper = std::function<std::optional<std::string>(
    int round, int from, const std::string& wire)>;

struct LinkInitResult {
  std::optional<LinkState> party0, party1;
  bool completed() const { return party0.has_value() && party1.has_value(); }
};

LinkInitResult link_init(const GroupPtr& group, const std::string& id0,
                         const std::string& id1, Rng& rng0, Rng& rng1,
                         const LinkInitTamper& tamper = {});

struct CompiledStats {
  std::uint64_t envelopes_sent = 0;
  std::uint64_t envelopes_accepted = 0;
  // accepted envelopes whose (payload, counter) the peer never produced
  std::uint64_t accepted_forgeries = 0;
  bool link_established = false;
};

// The compiled runner: identical session semantics, with every classical
// flow wrapped in a signed envelope. Any unwrap failure aborts the session.
SessionResult run_compiled_session(const ParamsPtr& params,
                                   const GroupPtr& sig_group,
                                   std::size_t pw_client, std::size_t pw_server,
                                   const ChannelModel& channel,
                                   const ClassicalTamper& tamper,
                                   std::uint64_t seed,
                                   const RunOptions& opts = {},
                                   CompiledStats* stats = nullptr);

}  // namespace qpake
