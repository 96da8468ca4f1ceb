#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qpake/bitstring.hpp"
#include "qpake/crypto.hpp"
#include "qpake/gf2.hpp"
#include "qpake/qchannel.hpp"
#include "qpake/rng.hpp"

namespace qpake {

// All public protocol parameters plus the CRS. Invariants are enforced by
// make(); sessions share an immutable instance.
struct ProtocolParams {
  std::size_t lambda = 0;     // session-key bits
  std::size_t k = 0;          // qubit count
  double alpha = 0.0;         // test fraction; alpha*k must be integral
  double tau = 0.0;           // error threshold
  double gamma = 0.0;         // password-code distance rate
  double beta = 0.0;          // code-bias rate
  std::size_t test_size = 0;  // alpha * k
  std::size_t n = 0;          // |T-bar| = k - 2*alpha*k
  std::size_t ell = 0;        // ceil(n/2), padded block length
  PasswordCode dictionary;
  SyndromeFamily family;
  CommitKey ck;        // flow-one commitments
  CommitKey ck_prime;  // flow-two commitments
  std::string fingerprint;

  struct Spec {
    std::size_t lambda = 16;
    std::size_t k = 256;
    double alpha = 0.25;
    double tau = 0.1;
    double gamma = 0.3;
    double beta = 0.5;
    std::size_t dict_size = 16;
    bool repetition_code = false;  // |D| = 2, gamma = 1
    std::uint64_t code_seed = 1;
    std::uint64_t family_seed = 2;
    std::size_t family_size = 8;
    std::size_t syndrome_len = 0;  // 0 = default ceil(ell/2)
    std::string commit_group = "experiment";
    std::uint64_t crs_seed = 3;
  };
  static ProtocolParams make(const Spec& spec);
};

using ParamsPtr = std::shared_ptr<const ProtocolParams>;
ParamsPtr make_params(const ProtocolParams::Spec& spec);

// ------------------------------------------------------------------ flows

enum class FlowTag {
  Zero,
  One1,
  One2,
  One3,
  Two1,
  Two2,
  Two3,
  Three1,
  Three2,
  Four,
  Five
};

std::string_view flow_tag_name(FlowTag tag);
FlowTag flow_tag_from_name(std::string_view name);
inline bool flow_is_quantum(FlowTag tag) { return tag == FlowTag::Zero; }
inline constexpr std::size_t kClassicalFlowCount = 10;
std::vector<FlowTag> classical_flow_tags();

struct CommitmentPair {
  Commitment bit_c;    // c^0: the data bit
  Commitment basis_c;  // c^1: the basis bit
};

struct OpeningPair {
  std::uint32_t index = 0;  // global qubit index
  Opening bit_o, basis_o;
};

struct HashDescriptor {
  std::uint64_t seed = 0;
  std::uint32_t input_len = 0, output_len = 0;
};

struct FlowZero {
  QuantumRegister reg;
};
struct FlowCommitments {
  std::vector<std::uint32_t> indices;  // global indices, ascending
  std::vector<CommitmentPair> pairs;
};
struct FlowIndexSet {
  std::vector<std::uint32_t> indices;  // sorted, duplicate-free
};
struct FlowOpenings {
  std::vector<OpeningPair> opens;
};
struct FlowMask {
  BitString phi;
};
struct FlowSyndrome {
  std::uint64_t j = 0;
  BitString s;
};
struct FlowHash {
  HashDescriptor f;
};

struct Flow {
  std::uint64_t session_id = 0;
  FlowTag tag = FlowTag::Zero;
  std::variant<FlowZero, FlowCommitments, FlowIndexSet, FlowOpenings, FlowMask,
               FlowSyndrome, FlowHash>
      payload;
};

// One JSON record per flow; bit-exact across runs given equal seeds.
std::string flow_to_wire(const Flow& flow, const ProtocolParams& params);
Flow flow_from_wire(std::string_view wire, const ProtocolParams& params);

// --------------------------------------------------------------- sessions

enum class Role { Client, Server };

enum class Phase {
  ClientStart,
  ClientAwaitOne1,
  ClientAwaitOne3,
  ClientAwaitTwo2,
  ClientAwaitThree1,
  ClientReadyFour,
  ClientAwaitFive,
  ServerAwaitZero,
  ServerAwaitOne2,
  ServerAwaitTwo1,
  ServerAwaitTwo3,
  ServerAwaitThree2,
  ServerAwaitFour,
  Done
};

struct Outcome {
  enum class Kind { Pending, Key, Abort };
  Kind kind = Kind::Pending;
  BitString key;
  std::string reason;

  bool pending() const { return kind == Kind::Pending; }
  bool has_key() const { return kind == Kind::Key; }
  bool aborted() const { return kind == Kind::Abort; }
};

std::vector<std::uint32_t> sift_indices(const BitString& phi,
                                        const BitString& phi_hat);

class SessionState {
 public:
  static SessionState make(ParamsPtr params, Role role, std::size_t pw,
                           std::uint64_t seed, std::uint64_t session_id);

  // Executes exactly one protocol step. `incoming` is empty only where the
  // protocol lets a party send without input (client activation, flow-four).
  std::optional<Flow> advance(std::optional<Flow> incoming);

  Role role() const { return role_; }
  Phase phase() const { return phase_; }
  const Outcome& outcome() const { return outcome_; }
  bool wants_to_send() const {
    return phase_ == Phase::ClientStart || phase_ == Phase::ClientReadyFour;
  }
  void force_abort(const std::string& reason);

  // Observed test-set error rates (step 5 for the client, step 8 for the
  // server); experiment statistics read these.
  const std::vector<double>& test_errors() const { return test_errors_; }
  // Padded I_w block of the party's own string, once computed.
  const std::optional<BitString>& block() const { return block_; }
  const std::vector<std::uint32_t>& sift_set() const { return i_w_; }

 private:
  SessionState(ParamsPtr params, Role role, std::size_t pw, std::uint64_t seed,
               std::uint64_t session_id);

  std::optional<Flow> client_step(std::optional<Flow>& incoming);
  std::optional<Flow> server_step(std::optional<Flow>& incoming);
  Flow wrap(FlowTag tag,
            std::variant<FlowZero, FlowCommitments, FlowIndexSet, FlowOpenings,
                         FlowMask, FlowSyndrome, FlowHash>
                payload) const;
  void abort(const std::string& reason);
  std::vector<std::uint32_t> sample_subset(
      const std::vector<std::uint32_t>& candidates, std::size_t count);
  std::vector<std::uint32_t> complement(
      const std::vector<std::uint32_t>& sorted_set) const;

  ParamsPtr params_;
  Role role_;
  Phase phase_;
  std::size_t pw_;
  Rng rng_;
  std::uint64_t session_id_;
  Outcome outcome_;

  // locals, populated at or after their defining step
  BitString x_, theta_;          // client
  BitString x_hat_, theta_hat_;  // server
  std::vector<CommitmentPair> peer_commits_;     // indexed by global index
  std::vector<char> peer_commit_present_;
  std::vector<std::pair<Opening, Opening>> own_opens_;  // by global index
  std::vector<std::uint32_t> t1_, t2_, t_bar_;
  BitString opened_bits_, opened_bases_;  // peer's opened values (by index)
  std::vector<char> opened_present_;
  BitString phi_, phi_hat_;
  std::vector<std::uint32_t> i_w_;
  std::optional<BitString> block_;
  std::vector<double> test_errors_;
};

// ----------------------------------------------------------------- driver

// Tampers with a classical flow's wire bytes. Empty result drops the flow.
using ClassicalTamper = std::function<std::optional<std::string>(
    FlowTag tag, const std::string& wire, Rng& rng)>;

struct TranscriptEntry {
  Role from = Role::Client;
  FlowTag tag = FlowTag::Zero;
  std::string wire;  // empty unless recording is enabled
};

struct Transcript {
  std::string params_fingerprint;
  std::uint64_t seed = 0;
  std::uint64_t session_id = 0;
  std::vector<TranscriptEntry> entries;
  Outcome client_outcome, server_outcome;
  std::string to_jsonl() const;
};

struct RunOptions {
  bool record_transcript = false;
};

struct SessionResult {
  Outcome client, server;
  Transcript transcript;
  std::vector<double> test_errors;
  // weight of (x xor x-hat) on the padded block when both parties got there
  std::optional<std::size_t> block_error_weight;

  bool completed() const { return client.has_key() && server.has_key(); }
  bool agreed() const { return completed() && client.key == server.key; }
  bool any_abort() const { return client.aborted() || server.aborted(); }
};

SessionResult run_session(const ParamsPtr& params, std::size_t pw_client,
                          std::size_t pw_server, const ChannelModel& channel,
                          const ClassicalTamper& tamper, std::uint64_t seed,
                          const RunOptions& opts = {});

}  // namespace qpake
