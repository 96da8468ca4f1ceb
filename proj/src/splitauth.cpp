#include "qpake/splitauth.hpp"

#include <json.hpp>

#include <algorithm>
#include <stdexcept>

namespace qpake {

using nlohmann::json;

namespace {

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back((v >> (8 * i)) & 0xff);
}

void append_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) out.push_back((v >> (8 * i)) & 0xff);
}

void append_block(std::vector<std::uint8_t>& out, std::span<const std::uint8_t> b) {
  append_u32(out, static_cast<std::uint32_t>(b.size()));
  out.insert(out.end(), b.begin(), b.end());
}

std::span<const std::uint8_t> as_bytes(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

// Wire hex is strictly lowercase; anything else is malformed. (A permissive
// parser would accept case-flipped envelopes that still verify.)
void require_lower_hex(std::string_view s) {
  for (char c : s)
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')))
      throw std::invalid_argument("envelope: invalid hex");
}

std::string bytes_to_hex(std::span<const std::uint8_t> data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

std::vector<std::uint8_t> hex_to_bytes(std::string_view hex) {
  require_lower_hex(hex);
  if (hex.size() % 2 != 0)
    throw std::invalid_argument("envelope: odd hex length");
  std::vector<std::uint8_t> out(hex.size() / 2);
  auto nibble = [](char c) {
    return c <= '9' ? c - '0' : c - 'a' + 10;
  };
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 |
                                       nibble(hex[2 * i + 1]));
  return out;
}

std::string counter_hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

std::uint64_t counter_from_hex(std::string_view s) {
  require_lower_hex(s);
  if (s.size() != 16) throw std::invalid_argument("envelope: bad counter");
  std::uint64_t v = 0;
  for (char c : s)
    v = (v << 4) | static_cast<std::uint64_t>(c <= '9' ? c - '0' : c - 'a' + 10);
  return v;
}

}  // namespace

std::string canonical_sid(const Group& group, const std::string& id_a,
                          const mpz_class& vk_a, const std::string& id_b,
                          const mpz_class& vk_b) {
  std::pair<std::string, std::string> pa{id_a, group.element_hex(vk_a)};
  std::pair<std::string, std::string> pb{id_b, group.element_hex(vk_b)};
  if (pb < pa) std::swap(pa, pb);
  return "(" + pa.first + "," + pa.second + ")(" + pb.first + "," + pb.second +
         ")";
}

std::vector<std::uint8_t> signed_tuple(const std::string& sid,
                                       std::span<const std::uint8_t> m,
                                       const std::string& recipient,
                                       std::uint64_t counter) {
  std::vector<std::uint8_t> out;
  out.reserve(sid.size() + m.size() + recipient.size() + 20);
  append_block(out, as_bytes(sid));
  append_block(out, m);
  append_block(out, as_bytes(recipient));
  append_u64(out, counter);
  return out;
}

LinkState::LinkState(GroupPtr group, std::string own_id, std::string peer_id,
                     SigKeyPair own_keys, mpz_class peer_vk)
    : group_(std::move(group)), own_id_(std::move(own_id)),
      peer_id_(std::move(peer_id)), own_keys_(std::move(own_keys)),
      peer_vk_(std::move(peer_vk)) {
  sid_ = canonical_sid(*group_, own_id_, own_keys_.vk, peer_id_, peer_vk_);
}

SignedEnvelope LinkState::wrap_message(std::span<const std::uint8_t> m,
                                       Rng& rng) {
  SignedEnvelope env;
  env.sender = own_id_;
  env.counter = send_counter_++;
  env.message.assign(m.begin(), m.end());
  const auto tuple = signed_tuple(sid_, m, peer_id_, env.counter);
  env.sig = sign(group_, own_keys_.sk, tuple, rng);
  return env;
}

std::optional<std::vector<std::uint8_t>> LinkState::unwrap_message(
    const SignedEnvelope& env) {
  if (env.sender != peer_id_) return std::nullopt;
  if (seen_counters_.count(env.counter) != 0) return std::nullopt;
  const auto tuple = signed_tuple(sid_, env.message, own_id_, env.counter);
  if (!verify_sig(group_, peer_vk_, tuple, env.sig)) return std::nullopt;
  seen_counters_.insert(env.counter);
  return env.message;
}

std::string envelope_to_wire(const Group& group, const SignedEnvelope& env) {
  json rec = {{"sender", env.sender},
              {"counter", counter_hex(env.counter)},
              {"m", bytes_to_hex(env.message)},
              {"e", group.exponent_hex(env.sig.e)},
              {"z", group.exponent_hex(env.sig.z)}};
  return rec.dump();
}

SignedEnvelope envelope_from_wire(const Group& group, std::string_view wire) {
  const json rec = json::parse(wire);
  SignedEnvelope env;
  env.sender = rec.at("sender").get<std::string>();
  env.counter = counter_from_hex(rec.at("counter").get<std::string>());
  env.message = hex_to_bytes(rec.at("m").get<std::string>());
  const std::string e_hex = rec.at("e").get<std::string>();
  const std::string z_hex = rec.at("z").get<std::string>();
  require_lower_hex(e_hex);
  require_lower_hex(z_hex);
  env.sig.e = group.exponent_from_hex(e_hex);
  env.sig.z = group.exponent_from_hex(z_hex);
  return env;
}

LinkInitResult link_init(const GroupPtr& group, const std::string& id0,
                         const std::string& id1, Rng& rng0, Rng& rng1,
                         const LinkInitTamper& tamper) {
  auto pass = [&tamper](int round, int from,
                        const std::string& wire) -> std::optional<std::string> {
    if (!tamper) return wire;
    return tamper(round, from, wire);
  };

  const SigKeyPair kp0 = sig_keygen(group, rng0);
  const SigKeyPair kp1 = sig_keygen(group, rng1);

  // Round 0: verification keys cross the unauthenticated network.
  const auto vk0_wire = pass(0, 0, group->element_hex(kp0.vk));
  const auto vk1_wire = pass(0, 1, group->element_hex(kp1.vk));
  if (!vk0_wire || !vk1_wire) return {};  // dropped: both sides stall

  mpz_class vk1_at_0, vk0_at_1;
  try {
    vk1_at_0 = group->element_from_hex(*vk1_wire);
    vk0_at_1 = group->element_from_hex(*vk0_wire);
  } catch (const std::exception&) {
    return {};
  }

  const std::string sid0 = canonical_sid(*group, id0, kp0.vk, id1, vk1_at_0);
  const std::string sid1 = canonical_sid(*group, id1, kp1.vk, id0, vk0_at_1);

  // Round 1: each party signs its sid; the peer checks signature and value.
  const Signature sig0 = sign(group, kp0.sk, as_bytes(sid0), rng0);
  const Signature sig1 = sign(group, kp1.sk, as_bytes(sid1), rng1);
  const json msg0 = {{"sid", sid0},
                     {"e", group->exponent_hex(sig0.e)},
                     {"z", group->exponent_hex(sig0.z)}};
  const json msg1 = {{"sid", sid1},
                     {"e", group->exponent_hex(sig1.e)},
                     {"z", group->exponent_hex(sig1.z)}};
  const auto wire0 = pass(1, 0, msg0.dump());
  const auto wire1 = pass(1, 1, msg1.dump());
  if (!wire0 || !wire1) return {};

  auto check = [&](const std::string& wire, const std::string& own_sid,
                   const mpz_class& peer_vk) -> bool {
    try {
      const json rec = json::parse(wire);
      const std::string sid = rec.at("sid").get<std::string>();
      Signature sig;
      sig.e = group->exponent_from_hex(rec.at("e").get<std::string>());
      sig.z = group->exponent_from_hex(rec.at("z").get<std::string>());
      return sid == own_sid && verify_sig(group, peer_vk, as_bytes(sid), sig);
    } catch (const std::exception&) {
      return false;
    }
  };

  LinkInitResult result;
  if (check(*wire1, sid0, vk1_at_0))
    result.party0.emplace(group, id0, id1, kp0, vk1_at_0);
  if (check(*wire0, sid1, vk0_at_1))
    result.party1.emplace(group, id1, id0, kp1, vk0_at_1);
  return result;
}

SessionResult run_compiled_session(const ParamsPtr& params,
                                   const GroupPtr& sig_group,
                                   std::size_t pw_client, std::size_t pw_server,
                                   const ChannelModel& channel,
                                   const ClassicalTamper& tamper,
                                   std::uint64_t seed, const RunOptions& opts,
                                   CompiledStats* stats) {
  Rng base(seed);
  const std::uint64_t session_id = base.split(4).next();

  SessionState client = SessionState::make(params, Role::Client, pw_client,
                                           base.split(0).seed(), session_id);
  SessionState server = SessionState::make(params, Role::Server, pw_server,
                                           base.split(1).seed(), session_id);
  Rng channel_rng = base.split(2);
  Rng tamper_rng = base.split(3);
  Rng link_rng0 = base.split(5);
  Rng link_rng1 = base.split(6);
  Rng sig_rng0 = base.split(7);
  Rng sig_rng1 = base.split(8);

  CompiledStats local_stats;
  CompiledStats& st = stats != nullptr ? *stats : local_stats;

  SessionResult result;
  result.transcript.params_fingerprint = params->fingerprint;
  result.transcript.seed = seed;
  result.transcript.session_id = session_id;

  auto finish = [&]() {
    client.force_abort("session stalled");
    server.force_abort("session stalled");
    result.client = client.outcome();
    result.server = server.outcome();
    result.transcript.client_outcome = result.client;
    result.transcript.server_outcome = result.server;
    result.test_errors.insert(result.test_errors.end(),
                              client.test_errors().begin(),
                              client.test_errors().end());
    result.test_errors.insert(result.test_errors.end(),
                              server.test_errors().begin(),
                              server.test_errors().end());
    if (client.block() && server.block())
      result.block_error_weight = client.block()->hamming(*server.block());
    return result;
  };

  auto links = link_init(sig_group, "P1", "P2", link_rng0, link_rng1);
  if (!links.completed()) return finish();
  st.link_established = true;
  LinkState& client_link = *links.party0;
  LinkState& server_link = *links.party1;

  // Ground-truth sends, for the authenticity audit.
  std::vector<std::pair<std::uint64_t, std::vector<std::uint8_t>>> sent[2];

  struct InFlight {
    Flow flow;
    Role to;
  };
  std::optional<InFlight> inflight;
  if (auto first = client.advance(std::nullopt))
    inflight = InFlight{std::move(*first), Role::Server};

  while (inflight) {
    Flow flow = std::move(inflight->flow);
    const Role to = inflight->to;
    const Role from = to == Role::Server ? Role::Client : Role::Server;
    inflight.reset();

    SessionState& receiver = to == Role::Client ? client : server;
    std::optional<Flow> reply;

    if (flow_is_quantum(flow.tag)) {
      auto& z = std::get<FlowZero>(flow.payload);
      z.reg = apply_channel(std::move(z.reg), channel, channel_rng);
      result.transcript.entries.push_back(
          {from, flow.tag,
           opts.record_transcript ? flow_to_wire(flow, *params) : std::string{}});
      reply = receiver.advance(std::move(flow));
    } else {
      LinkState& out_link = from == Role::Client ? client_link : server_link;
      LinkState& in_link = to == Role::Client ? client_link : server_link;
      Rng& sig_rng = from == Role::Client ? sig_rng0 : sig_rng1;
      const std::string wire = flow_to_wire(flow, *params);
      const SignedEnvelope env = out_link.wrap_message(as_bytes(wire), sig_rng);
      sent[from == Role::Client ? 0 : 1].emplace_back(env.counter, env.message);
      ++st.envelopes_sent;
      std::string env_wire = envelope_to_wire(*sig_group, env);

      if (tamper) {
        const auto mutated = tamper(flow.tag, env_wire, tamper_rng);
        if (!mutated) break;  // dropped
        env_wire = *mutated;
      }

      SignedEnvelope received;
      try {
        received = envelope_from_wire(*sig_group, env_wire);
      } catch (const std::exception&) {
        receiver.force_abort("authentication failure");
        break;
      }
      const auto payload = in_link.unwrap_message(received);
      if (!payload) {
        receiver.force_abort("authentication failure");
        break;
      }
      ++st.envelopes_accepted;
      const auto& peer_sent = sent[from == Role::Client ? 0 : 1];
      const bool genuine =
          std::any_of(peer_sent.begin(), peer_sent.end(), [&](const auto& p) {
            return p.first == received.counter && p.second == *payload;
          });
      if (!genuine) ++st.accepted_forgeries;

      Flow delivered;
      try {
        delivered = flow_from_wire(
            std::string(payload->begin(), payload->end()), *params);
      } catch (const std::exception&) {
        receiver.force_abort("malformed flow");
        break;
      }
      result.transcript.entries.push_back(
          {from, delivered.tag,
           opts.record_transcript ? flow_to_wire(delivered, *params)
                                  : std::string{}});
      reply = receiver.advance(std::move(delivered));
    }

    if (reply) {
      inflight = InFlight{std::move(*reply), from};
      continue;
    }
    if (receiver.outcome().aborted()) break;
    SessionState& other = to == Role::Client ? server : client;
    if (receiver.wants_to_send()) {
      if (auto next = receiver.advance(std::nullopt))
        inflight = InFlight{std::move(*next), from};
    } else if (other.wants_to_send()) {
      if (auto next = other.advance(std::nullopt))
        inflight = InFlight{std::move(*next), to};
    }
  }

  return finish();
}

}  // namespace qpake
