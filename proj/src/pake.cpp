#include "qpake/pake.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qpake {

using nlohmann::json;

namespace {

std::string hex16(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

std::uint64_t parse_hex16(std::string_view s) {
  if (s.size() != 16) throw std::invalid_argument("expected 16 hex digits");
  std::uint64_t v = 0;
  for (char c : s) {
    int d;
    if (c >= '0' && c <= '9')
      d = c - '0';
    else if (c >= 'a' && c <= 'f')
      d = c - 'a' + 10;
    else
      throw std::invalid_argument("invalid hex digit");
    v = (v << 4) | static_cast<std::uint64_t>(d);
  }
  return v;
}

BitString mask_from_indices(std::span<const std::uint32_t> indices,
                            std::size_t width) {
  BitString mask(width);
  for (auto i : indices) mask.set(i, true);
  return mask;
}

std::vector<std::uint32_t> indices_from_mask(const BitString& mask) {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask.get(i)) out.push_back(static_cast<std::uint32_t>(i));
  return out;
}

bool sorted_unique_in_range(const std::vector<std::uint32_t>& v,
                            std::size_t bound) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] >= bound) return false;
    if (i > 0 && v[i] <= v[i - 1]) return false;
  }
  return true;
}

}  // namespace

// --------------------------------------------------------------- params

ProtocolParams ProtocolParams::make(const Spec& spec) {
  if (spec.lambda == 0) throw std::invalid_argument("params: lambda must be >= 1");
  if (spec.k == 0) throw std::invalid_argument("params: k must be >= 1");
  if (spec.alpha <= 0.0 || spec.alpha >= 0.5)
    throw std::invalid_argument("params: alpha outside (0, 1/2)");
  if (spec.tau <= 0.0 || spec.tau >= 0.5)
    throw std::invalid_argument("params: tau outside (0, 1/2)");

  const double ts = spec.alpha * static_cast<double>(spec.k);
  const auto test_size = static_cast<std::size_t>(std::llround(ts));
  if (std::abs(ts - static_cast<double>(test_size)) > 1e-9)
    throw std::invalid_argument("params: alpha*k must be an integer");
  if (spec.k < 2 * test_size + 1)
    throw std::invalid_argument("params: n = k - 2*alpha*k must be >= 1");

  ProtocolParams p;
  p.lambda = spec.lambda;
  p.k = spec.k;
  p.alpha = spec.alpha;
  p.tau = spec.tau;
  p.gamma = spec.repetition_code ? 1.0 : spec.gamma;
  p.beta = spec.beta;
  p.test_size = test_size;
  p.n = spec.k - 2 * test_size;
  p.ell = (p.n + 1) / 2;
  if (p.lambda > p.ell)
    throw std::invalid_argument("params: lambda exceeds the hashed block length");

  p.dictionary = spec.repetition_code
                     ? PasswordCode::repetition(p.n)
                     : PasswordCode::random(spec.code_seed, spec.dict_size,
                                            p.n, spec.gamma);

  const std::size_t synd_len =
      spec.syndrome_len != 0 ? spec.syndrome_len : (p.ell + 1) / 2;
  const double delta_bound =
      std::exp2(-spec.beta * static_cast<double>(p.n) / 4.0);
  p.family = SyndromeFamily(spec.family_seed, spec.family_size, p.ell,
                            synd_len, spec.tau, delta_bound);

  const GroupPtr group = Group::by_name(spec.commit_group);
  Rng crs_rng(spec.crs_seed);
  // Honest CRS: two perfectly hiding keys; trapdoors are discarded.
  p.ck = keygen(group, CommitMode::Hiding, crs_rng).first;
  p.ck_prime = keygen(group, CommitMode::Hiding, crs_rng).first;

  std::string desc = "lambda=" + std::to_string(p.lambda) +
                     ",k=" + std::to_string(p.k) +
                     ",alpha=" + std::to_string(p.alpha) +
                     ",tau=" + std::to_string(p.tau) +
                     ",gamma=" + std::to_string(p.gamma) +
                     ",beta=" + std::to_string(p.beta) +
                     ",dict=" + std::to_string(p.dictionary.size()) +
                     ",n=" + std::to_string(p.n) +
                     ",ell=" + std::to_string(p.ell) +
                     ",synd=" + std::to_string(synd_len) +
                     ",ck=" + p.ck.fingerprint() +
                     ",ck'=" + p.ck_prime.fingerprint();
  const auto digest = sha256(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(desc.data()), desc.size()));
  std::uint64_t fp = 0;
  for (int i = 0; i < 8; ++i) fp = (fp << 8) | digest[static_cast<size_t>(i)];
  p.fingerprint = hex16(fp);
  return p;
}

ParamsPtr make_params(const ProtocolParams::Spec& spec) {
  return std::make_shared<const ProtocolParams>(ProtocolParams::make(spec));
}

// ---------------------------------------------------------------- flows

std::string_view flow_tag_name(FlowTag tag) {
  switch (tag) {
    case FlowTag::Zero: return "zero";
    case FlowTag::One1: return "one1";
    case FlowTag::One2: return "one2";
    case FlowTag::One3: return "one3";
    case FlowTag::Two1: return "two1";
    case FlowTag::Two2: return "two2";
    case FlowTag::Two3: return "two3";
    case FlowTag::Three1: return "three1";
    case FlowTag::Three2: return "three2";
    case FlowTag::Four: return "four";
    case FlowTag::Five: return "five";
  }
  return "?";
}

FlowTag flow_tag_from_name(std::string_view name) {
  for (int t = 0; t <= static_cast<int>(FlowTag::Five); ++t)
    if (flow_tag_name(static_cast<FlowTag>(t)) == name)
      return static_cast<FlowTag>(t);
  throw std::invalid_argument("unknown flow tag: " + std::string(name));
}

std::vector<FlowTag> classical_flow_tags() {
  std::vector<FlowTag> tags;
  for (int t = static_cast<int>(FlowTag::One1);
       t <= static_cast<int>(FlowTag::Five); ++t)
    tags.push_back(static_cast<FlowTag>(t));
  return tags;
}

std::string flow_to_wire(const Flow& flow, const ProtocolParams& params) {
  const Group& G = *params.ck.group;
  json payload;
  switch (flow.tag) {
    case FlowTag::Zero: {
      const auto& z = std::get<FlowZero>(flow.payload);
      payload["reg"] = z.reg.to_hex();
      break;
    }
    case FlowTag::One1:
    case FlowTag::Two1: {
      const auto& c = std::get<FlowCommitments>(flow.payload);
      payload["mask"] = mask_from_indices(c.indices, params.k).to_hex();
      json list = json::array();
      for (const auto& pair : c.pairs)
        list.push_back({G.element_hex(pair.bit_c.c1),
                        G.element_hex(pair.bit_c.c2),
                        G.element_hex(pair.basis_c.c1),
                        G.element_hex(pair.basis_c.c2)});
      payload["commits"] = std::move(list);
      break;
    }
    case FlowTag::One2:
    case FlowTag::Two2: {
      const auto& s = std::get<FlowIndexSet>(flow.payload);
      payload["mask"] = mask_from_indices(s.indices, params.k).to_hex();
      break;
    }
    case FlowTag::One3:
    case FlowTag::Two3: {
      const auto& o = std::get<FlowOpenings>(flow.payload);
      json list = json::array();
      for (const auto& op : o.opens)
        list.push_back({op.index, op.bit_o.m, G.exponent_hex(op.bit_o.r),
                        G.exponent_hex(op.bit_o.s), op.basis_o.m,
                        G.exponent_hex(op.basis_o.r),
                        G.exponent_hex(op.basis_o.s)});
      payload["opens"] = std::move(list);
      break;
    }
    case FlowTag::Three1:
    case FlowTag::Three2: {
      const auto& m = std::get<FlowMask>(flow.payload);
      payload["phi"] = m.phi.to_hex();
      break;
    }
    case FlowTag::Four: {
      const auto& f = std::get<FlowSyndrome>(flow.payload);
      payload["j"] = hex16(f.j);
      payload["s"] = f.s.to_hex();
      break;
    }
    case FlowTag::Five: {
      const auto& f = std::get<FlowHash>(flow.payload);
      payload["f"] = {{"seed", hex16(f.f.seed)},
                      {"in", f.f.input_len},
                      {"out", f.f.output_len}};
      break;
    }
  }
  json record = {{"sid", hex16(flow.session_id)},
                 {"tag", std::string(flow_tag_name(flow.tag))},
                 {"payload", std::move(payload)}};
  return record.dump();
}

Flow flow_from_wire(std::string_view wire, const ProtocolParams& params) {
  const Group& G = *params.ck.group;
  json record = json::parse(wire);  // throws on malformed text
  Flow flow;
  flow.session_id = parse_hex16(record.at("sid").get<std::string>());
  flow.tag = flow_tag_from_name(record.at("tag").get<std::string>());
  const json& payload = record.at("payload");
  switch (flow.tag) {
    case FlowTag::Zero: {
      FlowZero z;
      z.reg = QuantumRegister::from_hex(payload.at("reg").get<std::string>(),
                                        params.k);
      flow.payload = std::move(z);
      break;
    }
    case FlowTag::One1:
    case FlowTag::Two1: {
      FlowCommitments c;
      c.indices = indices_from_mask(BitString::from_hex(
          payload.at("mask").get<std::string>(), params.k));
      for (const auto& item : payload.at("commits")) {
        if (!item.is_array() || item.size() != 4)
          throw std::invalid_argument("commitment record shape");
        CommitmentPair pair;
        pair.bit_c.c1 = G.element_from_hex(item[0].get<std::string>());
        pair.bit_c.c2 = G.element_from_hex(item[1].get<std::string>());
        pair.basis_c.c1 = G.element_from_hex(item[2].get<std::string>());
        pair.basis_c.c2 = G.element_from_hex(item[3].get<std::string>());
        c.pairs.push_back(std::move(pair));
      }
      if (c.pairs.size() != c.indices.size())
        throw std::invalid_argument("commitment list size mismatch");
      flow.payload = std::move(c);
      break;
    }
    case FlowTag::One2:
    case FlowTag::Two2: {
      FlowIndexSet s;
      s.indices = indices_from_mask(BitString::from_hex(
          payload.at("mask").get<std::string>(), params.k));
      flow.payload = std::move(s);
      break;
    }
    case FlowTag::One3:
    case FlowTag::Two3: {
      FlowOpenings o;
      for (const auto& item : payload.at("opens")) {
        if (!item.is_array() || item.size() != 7)
          throw std::invalid_argument("opening record shape");
        OpeningPair op;
        op.index = item[0].get<std::uint32_t>();
        op.bit_o.m = item[1].get<unsigned>();
        op.bit_o.r = G.exponent_from_hex(item[2].get<std::string>());
        op.bit_o.s = G.exponent_from_hex(item[3].get<std::string>());
        op.basis_o.m = item[4].get<unsigned>();
        op.basis_o.r = G.exponent_from_hex(item[5].get<std::string>());
        op.basis_o.s = G.exponent_from_hex(item[6].get<std::string>());
        if (op.bit_o.m > 1 || op.basis_o.m > 1)
          throw std::invalid_argument("opened value not a bit");
        o.opens.push_back(std::move(op));
      }
      flow.payload = std::move(o);
      break;
    }
    case FlowTag::Three1:
    case FlowTag::Three2: {
      FlowMask m;
      m.phi =
          BitString::from_hex(payload.at("phi").get<std::string>(), params.n);
      flow.payload = std::move(m);
      break;
    }
    case FlowTag::Four: {
      FlowSyndrome f;
      f.j = parse_hex16(payload.at("j").get<std::string>());
      f.s = BitString::from_hex(payload.at("s").get<std::string>(),
                                params.family.syndrome_len());
      flow.payload = std::move(f);
      break;
    }
    case FlowTag::Five: {
      FlowHash f;
      f.f.seed = parse_hex16(payload.at("f").at("seed").get<std::string>());
      f.f.input_len = payload.at("f").at("in").get<std::uint32_t>();
      f.f.output_len = payload.at("f").at("out").get<std::uint32_t>();
      flow.payload = std::move(f);
      break;
    }
  }
  return flow;
}

// -------------------------------------------------------------- sessions

std::vector<std::uint32_t> sift_indices(const BitString& phi,
                                        const BitString& phi_hat) {
  if (phi.size() != phi_hat.size())
    throw std::invalid_argument("sift_indices: length mismatch");
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < phi.size(); ++i)
    if (phi.get(i) == phi_hat.get(i)) out.push_back(static_cast<std::uint32_t>(i));
  return out;
}

SessionState::SessionState(ParamsPtr params, Role role, std::size_t pw,
                           std::uint64_t seed, std::uint64_t session_id)
    : params_(std::move(params)), role_(role),
      phase_(role == Role::Client ? Phase::ClientStart : Phase::ServerAwaitZero),
      pw_(pw), rng_(seed), session_id_(session_id) {}

SessionState SessionState::make(ParamsPtr params, Role role, std::size_t pw,
                                std::uint64_t seed, std::uint64_t session_id) {
  if (!params) throw std::invalid_argument("session: null params");
  if (pw >= params->dictionary.size())
    throw std::invalid_argument("session: password index outside dictionary");
  return SessionState(std::move(params), role, pw, seed, session_id);
}

void SessionState::abort(const std::string& reason) {
  outcome_.kind = Outcome::Kind::Abort;
  outcome_.reason = reason;
  phase_ = Phase::Done;
}

void SessionState::force_abort(const std::string& reason) {
  if (outcome_.pending()) abort(reason);
}

Flow SessionState::wrap(FlowTag tag,
                        std::variant<FlowZero, FlowCommitments, FlowIndexSet,
                                     FlowOpenings, FlowMask, FlowSyndrome,
                                     FlowHash>
                            payload) const {
  Flow f;
  f.session_id = session_id_;
  f.tag = tag;
  f.payload = std::move(payload);
  return f;
}

std::vector<std::uint32_t> SessionState::sample_subset(
    const std::vector<std::uint32_t>& candidates, std::size_t count) {
  std::vector<std::uint32_t> pool = candidates;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t pick = i + rng_.below(pool.size() - i);
    std::swap(pool[i], pool[pick]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<std::uint32_t> SessionState::complement(
    const std::vector<std::uint32_t>& sorted_set) const {
  std::vector<std::uint32_t> out;
  out.reserve(params_->k - sorted_set.size());
  std::size_t pos = 0;
  for (std::uint32_t i = 0; i < params_->k; ++i) {
    if (pos < sorted_set.size() && sorted_set[pos] == i) {
      ++pos;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

std::optional<Flow> SessionState::advance(std::optional<Flow> incoming) {
  if (!outcome_.pending() || phase_ == Phase::Done)
    throw std::logic_error("advance: session already finished");
  if (incoming && incoming->session_id != session_id_) {
    abort("session mismatch");
    return std::nullopt;
  }
  return role_ == Role::Client ? client_step(incoming) : server_step(incoming);
}

std::optional<Flow> SessionState::client_step(std::optional<Flow>& incoming) {
  const ProtocolParams& P = *params_;

  switch (phase_) {
    case Phase::ClientStart: {  // step 1
      if (incoming) {
        abort("unexpected flow");
        return std::nullopt;
      }
      x_ = BitString::random(P.k, rng_);
      theta_ = BitString::random(P.k, rng_);
      FlowZero z{encode_bb84(x_, theta_)};
      phase_ = Phase::ClientAwaitOne1;
      return wrap(FlowTag::Zero, std::move(z));
    }

    case Phase::ClientAwaitOne1: {  // step 3
      if (!incoming || incoming->tag != FlowTag::One1) {
        abort("unexpected flow");
        return std::nullopt;
      }
      auto* c = std::get_if<FlowCommitments>(&incoming->payload);
      if (c == nullptr || c->pairs.size() != P.k ||
          c->indices.size() != P.k) {
        abort("malformed commitment list");
        return std::nullopt;
      }
      peer_commits_ = std::move(c->pairs);
      peer_commit_present_.assign(P.k, 1);
      t1_ = sample_subset(complement({}), P.test_size);
      phase_ = Phase::ClientAwaitOne3;
      return wrap(FlowTag::One2, FlowIndexSet{t1_});
    }

    case Phase::ClientAwaitOne3: {  // step 5
      if (!incoming || incoming->tag != FlowTag::One3) {
        abort("unexpected flow");
        return std::nullopt;
      }
      auto* o = std::get_if<FlowOpenings>(&incoming->payload);
      if (o == nullptr || o->opens.size() != t1_.size()) {
        abort("malformed opening list");
        return std::nullopt;
      }
      opened_bits_ = BitString(P.k);
      opened_bases_ = BitString(P.k);
      opened_present_.assign(P.k, 0);
      for (std::size_t idx = 0; idx < o->opens.size(); ++idx) {
        const OpeningPair& op = o->opens[idx];
        if (op.index != t1_[idx]) {
          abort("opening indices do not match T1");
          return std::nullopt;
        }
        if (!verify_open(P.ck, peer_commits_[op.index].bit_c, op.bit_o) ||
            !verify_open(P.ck, peer_commits_[op.index].basis_c, op.basis_o)) {
          abort("commitment verification");
          return std::nullopt;
        }
        opened_bits_.set(op.index, op.bit_o.m != 0);
        opened_bases_.set(op.index, op.basis_o.m != 0);
        opened_present_[op.index] = 1;
      }
      // T1' = matched-basis test positions
      std::vector<std::uint32_t> t1_prime;
      for (auto i : t1_)
        if (theta_.get(i) == opened_bases_.get(i)) t1_prime.push_back(i);
      const double err = relative_hamming(x_.select(t1_prime),
                                          opened_bits_.select(t1_prime));
      test_errors_.push_back(err);
      if (err > P.tau / 2.0) {
        abort("error rate");
        return std::nullopt;
      }
      // step 5b: commit to (x, theta) outside T1 under ck'
      FlowCommitments out;
      out.indices = complement(t1_);
      own_opens_.assign(P.k, {});
      out.pairs.reserve(out.indices.size());
      for (auto i : out.indices) {
        auto [cb, ob] = commit(P.ck_prime, x_.get(i) ? 1 : 0, rng_);
        auto [ct, ot] = commit(P.ck_prime, theta_.get(i) ? 1 : 0, rng_);
        own_opens_[i] = {std::move(ob), std::move(ot)};
        out.pairs.push_back(CommitmentPair{std::move(cb), std::move(ct)});
      }
      phase_ = Phase::ClientAwaitTwo2;
      return wrap(FlowTag::Two1, std::move(out));
    }

    case Phase::ClientAwaitTwo2: {  // step 7
      if (!incoming || incoming->tag != FlowTag::Two2) {
        abort("unexpected flow");
        return std::nullopt;
      }
      auto* s = std::get_if<FlowIndexSet>(&incoming->payload);
      if (s == nullptr || s->indices.size() != P.test_size ||
          !sorted_unique_in_range(s->indices, P.k)) {
        abort("malformed T2");
        return std::nullopt;
      }
      t2_ = s->indices;
      // T2 must avoid T1
      for (auto i : t2_)
        if (std::binary_search(t1_.begin(), t1_.end(), i)) {
          abort("malformed T2");
          return std::nullopt;
        }
      FlowOpenings opens;
      opens.opens.reserve(t2_.size());
      for (auto i : t2_) {
        OpeningPair op;
        op.index = i;
        op.bit_o = own_opens_[i].first;
        op.basis_o = own_opens_[i].second;
        opens.opens.push_back(std::move(op));
      }
      phase_ = Phase::ClientAwaitThree1;
      return wrap(FlowTag::Two3, std::move(opens));
    }

    case Phase::ClientAwaitThree1: {  // steps 9-10
      if (!incoming || incoming->tag != FlowTag::Three1) {
        abort("unexpected flow");
        return std::nullopt;
      }
      auto* m = std::get_if<FlowMask>(&incoming->payload);
      if (m == nullptr || m->phi.size() != P.n) {
        abort("malformed basis mask");
        return std::nullopt;
      }
      phi_hat_ = m->phi;
      std::vector<std::uint32_t> t_union = t1_;
      t_union.insert(t_union.end(), t2_.begin(), t2_.end());
      std::sort(t_union.begin(), t_union.end());
      t_bar_ = complement(t_union);
      phi_ = theta_.select(t_bar_) ^ P.dictionary.encode(pw_);
      phase_ = Phase::ClientReadyFour;
      return wrap(FlowTag::Three2, FlowMask{phi_});
    }

    case Phase::ClientReadyFour: {  // step 11
      if (incoming) {
        abort("unexpected flow");
        return std::nullopt;
      }
      i_w_ = sift_indices(phi_, phi_hat_);
      block_ = x_.select(t_bar_).select(i_w_).fit(P.ell);
      FlowSyndrome f;
      f.j = rng_.below(P.family.family_size());
      f.s = P.family.syndrome(f.j, *block_);
      phase_ = Phase::ClientAwaitFive;
      return wrap(FlowTag::Four, std::move(f));
    }

    case Phase::ClientAwaitFive: {  // step 13
      if (!incoming || incoming->tag != FlowTag::Five) {
        abort("unexpected flow");
        return std::nullopt;
      }
      auto* f = std::get_if<FlowHash>(&incoming->payload);
      if (f == nullptr || f->f.input_len != P.ell ||
          f->f.output_len != P.lambda) {
        abort("malformed hash descriptor");
        return std::nullopt;
      }
      const UniversalHash hash =
          UniversalHash::sample(f->f.seed, P.ell, P.lambda);
      outcome_.kind = Outcome::Kind::Key;
      outcome_.key = hash.eval(*block_);
      phase_ = Phase::Done;
      return std::nullopt;
    }

    default:
      abort("unexpected flow");
      return std::nullopt;
  }
}

std::optional<Flow> SessionState::server_step(std::optional<Flow>& incoming) {
  const ProtocolParams& P = *params_;

  switch (phase_) {
    case Phase::ServerAwaitZero: {  // step 2
      if (!incoming || incoming->tag != FlowTag::Zero) {
        abort("unexpected flow");
        return std::nullopt;
      }
      auto* z = std::get_if<FlowZero>(&incoming->payload);
      if (z == nullptr || z->reg.size() != P.k) {
        abort("malformed register");
        return std::nullopt;
      }
      theta_hat_ = BitString::random(P.k, rng_);
      x_hat_ = measure(z->reg, theta_hat_, rng_);
      FlowCommitments out;
      out.indices.resize(P.k);
      for (std::uint32_t i = 0; i < P.k; ++i) out.indices[i] = i;
      own_opens_.assign(P.k, {});
      out.pairs.reserve(P.k);
      for (std::uint32_t i = 0; i < P.k; ++i) {
        auto [cb, ob] = commit(P.ck, x_hat_.get(i) ? 1 : 0, rng_);
        auto [ct, ot] = commit(P.ck, theta_hat_.get(i) ? 1 : 0, rng_);
        own_opens_[i] = {std::move(ob), std::move(ot)};
        out.pairs.push_back(CommitmentPair{std::move(cb), std::move(ct)});
      }
      phase_ = Phase::ServerAwaitOne2;
      return wrap(FlowTag::One1, std::move(out));
    }

    case Phase::ServerAwaitOne2: {  // step 4
      if (!incoming || incoming->tag != FlowTag::One2) {
        abort("unexpected flow");
        return std::nullopt;
      }
      auto* s = std::get_if<FlowIndexSet>(&incoming->payload);
      if (s == nullptr || s->indices.size() != P.test_size ||
          !sorted_unique_in_range(s->indices, P.k)) {
        abort("malformed T1");
        return std::nullopt;
      }
      t1_ = s->indices;
      FlowOpenings opens;
      opens.opens.reserve(t1_.size());
      for (auto i : t1_) {
        OpeningPair op;
        op.index = i;
        op.bit_o = own_opens_[i].first;
        op.basis_o = own_opens_[i].second;
        opens.opens.push_back(std::move(op));
      }
      phase_ = Phase::ServerAwaitTwo1;
      return wrap(FlowTag::One3, std::move(opens));
    }

    case Phase::ServerAwaitTwo1: {  // step 6
      if (!incoming || incoming->tag != FlowTag::Two1) {
        abort("unexpected flow");
        return std::nullopt;
      }
      auto* c = std::get_if<FlowCommitments>(&incoming->payload);
      const std::vector<std::uint32_t> expected = complement(t1_);
      if (c == nullptr || c->indices != expected ||
          c->pairs.size() != expected.size()) {
        abort("malformed commitment list");
        return std::nullopt;
      }
      peer_commits_.assign(P.k, {});
      peer_commit_present_.assign(P.k, 0);
      for (std::size_t idx = 0; idx < c->indices.size(); ++idx) {
        peer_commits_[c->indices[idx]] = std::move(c->pairs[idx]);
        peer_commit_present_[c->indices[idx]] = 1;
      }
      t2_ = sample_subset(expected, P.test_size);
      phase_ = Phase::ServerAwaitTwo3;
      return wrap(FlowTag::Two2, FlowIndexSet{t2_});
    }

    case Phase::ServerAwaitTwo3: {  // steps 8-9
      if (!incoming || incoming->tag != FlowTag::Two3) {
        abort("unexpected flow");
        return std::nullopt;
      }
      auto* o = std::get_if<FlowOpenings>(&incoming->payload);
      if (o == nullptr || o->opens.size() != t2_.size()) {
        abort("malformed opening list");
        return std::nullopt;
      }
      opened_bits_ = BitString(P.k);
      opened_bases_ = BitString(P.k);
      opened_present_.assign(P.k, 0);
      for (std::size_t idx = 0; idx < o->opens.size(); ++idx) {
        const OpeningPair& op = o->opens[idx];
        if (op.index != t2_[idx]) {
          abort("opening indices do not match T2");
          return std::nullopt;
        }
        if (!peer_commit_present_[op.index] ||
            !verify_open(P.ck_prime, peer_commits_[op.index].bit_c, op.bit_o) ||
            !verify_open(P.ck_prime, peer_commits_[op.index].basis_c,
                         op.basis_o)) {
          abort("commitment verification");
          return std::nullopt;
        }
        opened_bits_.set(op.index, op.bit_o.m != 0);
        opened_bases_.set(op.index, op.basis_o.m != 0);
        opened_present_[op.index] = 1;
      }
      std::vector<std::uint32_t> t2_prime;
      for (auto i : t2_)
        if (opened_bases_.get(i) == theta_hat_.get(i)) t2_prime.push_back(i);
      const double err = relative_hamming(opened_bits_.select(t2_prime),
                                          x_hat_.select(t2_prime));
      test_errors_.push_back(err);
      if (err > P.tau / 2.0) {
        abort("error rate");
        return std::nullopt;
      }
      // step 9: basis mask
      std::vector<std::uint32_t> t_union = t1_;
      t_union.insert(t_union.end(), t2_.begin(), t2_.end());
      std::sort(t_union.begin(), t_union.end());
      t_bar_ = complement(t_union);
      phi_hat_ = theta_hat_.select(t_bar_) ^ P.dictionary.encode(pw_);
      phase_ = Phase::ServerAwaitThree2;
      return wrap(FlowTag::Three1, FlowMask{phi_hat_});
    }

    case Phase::ServerAwaitThree2: {  // step 11 (server side of the sift)
      if (!incoming || incoming->tag != FlowTag::Three2) {
        abort("unexpected flow");
        return std::nullopt;
      }
      auto* m = std::get_if<FlowMask>(&incoming->payload);
      if (m == nullptr || m->phi.size() != P.n) {
        abort("malformed basis mask");
        return std::nullopt;
      }
      phi_ = m->phi;
      i_w_ = sift_indices(phi_, phi_hat_);
      block_ = x_hat_.select(t_bar_).select(i_w_).fit(P.ell);
      phase_ = Phase::ServerAwaitFour;
      return std::nullopt;
    }

    case Phase::ServerAwaitFour: {  // step 12
      if (!incoming || incoming->tag != FlowTag::Four) {
        abort("unexpected flow");
        return std::nullopt;
      }
      auto* f = std::get_if<FlowSyndrome>(&incoming->payload);
      if (f == nullptr || f->j >= P.family.family_size() ||
          f->s.size() != P.family.syndrome_len()) {
        abort("malformed syndrome");
        return std::nullopt;
      }
      const auto decoded = P.family.decode(f->j, f->s, *block_);
      if (!decoded) {
        abort("decode failure");
        return std::nullopt;
      }
      FlowHash out;
      out.f.seed = rng_.next();
      out.f.input_len = static_cast<std::uint32_t>(P.ell);
      out.f.output_len = static_cast<std::uint32_t>(P.lambda);
      const UniversalHash hash =
          UniversalHash::sample(out.f.seed, P.ell, P.lambda);
      outcome_.kind = Outcome::Kind::Key;
      outcome_.key = hash.eval(*decoded);
      phase_ = Phase::Done;
      return wrap(FlowTag::Five, std::move(out));
    }

    default:
      abort("unexpected flow");
      return std::nullopt;
  }
}

// ---------------------------------------------------------------- driver

std::string Transcript::to_jsonl() const {
  auto outcome_json = [](const Outcome& o) {
    json j;
    switch (o.kind) {
      case Outcome::Kind::Pending: j["kind"] = "pending"; break;
      case Outcome::Kind::Key:
        j["kind"] = "key";
        j["key"] = o.key.to_hex();
        break;
      case Outcome::Kind::Abort:
        j["kind"] = "abort";
        j["reason"] = o.reason;
        break;
    }
    return j;
  };
  std::string out;
  json header = {{"type", "header"},
                 {"params", params_fingerprint},
                 {"seed", hex16(seed)},
                 {"sid", hex16(session_id)}};
  out += header.dump();
  out += '\n';
  for (std::size_t i = 0; i < entries.size(); ++i) {
    json rec = {{"type", "flow"},
                {"step", i},
                {"dir", entries[i].from == Role::Client ? "c2s" : "s2c"},
                {"tag", std::string(flow_tag_name(entries[i].tag))}};
    if (!entries[i].wire.empty()) rec["wire"] = entries[i].wire;
    out += rec.dump();
    out += '\n';
  }
  json footer = {{"type", "outcome"},
                 {"client", outcome_json(client_outcome)},
                 {"server", outcome_json(server_outcome)}};
  out += footer.dump();
  out += '\n';
  return out;
}

SessionResult run_session(const ParamsPtr& params, std::size_t pw_client,
                          std::size_t pw_server, const ChannelModel& channel,
                          const ClassicalTamper& tamper, std::uint64_t seed,
                          const RunOptions& opts) {
  Rng base(seed);
  const std::uint64_t session_id = base.split(4).next();

  SessionState client = SessionState::make(params, Role::Client, pw_client,
                                           base.split(0).seed(), session_id);
  SessionState server = SessionState::make(params, Role::Server, pw_server,
                                           base.split(1).seed(), session_id);
  Rng channel_rng = base.split(2);
  Rng tamper_rng = base.split(3);

  SessionResult result;
  result.transcript.params_fingerprint = params->fingerprint;
  result.transcript.seed = seed;
  result.transcript.session_id = session_id;

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

    bool deliver = true;
    if (flow_is_quantum(flow.tag)) {
      auto& z = std::get<FlowZero>(flow.payload);
      z.reg = apply_channel(std::move(z.reg), channel, channel_rng);
    } else if (tamper) {
      const std::string wire = flow_to_wire(flow, *params);
      const auto mutated = tamper(flow.tag, wire, tamper_rng);
      if (!mutated) {
        deliver = false;  // dropped; the peer stalls
      } else if (*mutated != wire) {
        try {
          flow = flow_from_wire(*mutated, *params);
        } catch (const std::exception&) {
          (to == Role::Client ? client : server)
              .force_abort("malformed flow");
          deliver = false;
        }
      }
    }
    if (!deliver) break;

    if (opts.record_transcript) {
      result.transcript.entries.push_back(
          {from, flow.tag, flow_to_wire(flow, *params)});
    } else {
      result.transcript.entries.push_back({from, flow.tag, {}});
    }

    SessionState& receiver = to == Role::Client ? client : server;
    std::optional<Flow> reply = receiver.advance(std::move(flow));
    if (reply) {
      inflight = InFlight{std::move(*reply), from};
      continue;
    }
    if (receiver.outcome().aborted()) break;
    // A party may be due to send without input (client flow-four).
    SessionState& other = to == Role::Client ? server : client;
    if (receiver.wants_to_send()) {
      if (auto next = receiver.advance(std::nullopt))
        inflight = InFlight{std::move(*next), from};
    } else if (other.wants_to_send()) {
      if (auto next = other.advance(std::nullopt))
        inflight = InFlight{std::move(*next), to};
    }
  }

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
}

}  // namespace qpake
