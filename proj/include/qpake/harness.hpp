#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qpake/pake.hpp"
#include "qpake/splitauth.hpp"

namespace qpake {

// ------------------------------------------------------------- adversary

struct MutationRule {
  enum class Kind { Passthrough, Drop, FlipBits, Replace };
  FlowTag tag = FlowTag::One1;
  Kind kind = Kind::Passthrough;
  std::vector<std::uint8_t> mask;  // FlipBits: XORed cyclically over the wire
  std::string replacement;         // Replace: substituted record
};

struct AdversaryScript {
  ChannelModel quantum = ChannelModel::ideal();
  std::vector<MutationRule> classical;
  std::optional<std::size_t> password_guess;  // injected as a MITM client run

  bool tampers_classically() const;
};

// Wire-level tamper hook implementing the script's mutation rules.
ClassicalTamper make_tamper(const AdversaryScript& script);

// Registry for scripted quantum hooks referenced by name in configs.
void register_quantum_hook(
    const std::string& name,
    std::function<QuantumRegister(QuantumRegister, Rng&)> fn);
ChannelModel resolve_channel(ChannelModel model);

// ------------------------------------------------------------ experiments

enum class PasswordMode { Equal, Distinct, Random };

struct RunConfig {
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  bool compiled = false;
  unsigned jobs = 1;
  PasswordMode password_mode = PasswordMode::Equal;
  GroupPtr sig_group;  // defaults to signature61() when compiled
};

struct ExperimentStats {
  std::uint64_t trials = 0;
  std::uint64_t completions = 0;      // both parties output keys
  std::uint64_t aborts = 0;           // at least one abort
  std::uint64_t key_agreements = 0;
  std::uint64_t guess_successes = 0;  // only meaningful with password_guess
  std::array<std::uint64_t, 32> error_hist{};  // test-set error rates, bin 1/32
  std::uint64_t error_observations = 0;
  double error_sum = 0.0;
  std::array<std::uint64_t, 256> key_byte_freq{};
  std::string config_fingerprint;

  double completion_rate() const;
  double abort_rate() const;
  double agreement_rate() const;
  double guess_rate() const;
  double mean_test_error() const;
  std::string to_json() const;

  void merge(const ExperimentStats& other);
};

ExperimentStats run_experiment(const ParamsPtr& params,
                               const AdversaryScript& script,
                               const RunConfig& config);

// --------------------------------------------------------- key statistics

struct UniformityReport {
  double collision_estimate = 0.0;
  double chi_square = 0.0;
  std::size_t dof = 0;
  double p_value = 0.0;
};

// Collision probability and per-cell chi-square against uniform. Requires
// at least 1000 samples and key length <= 16 bits.
UniformityReport estimate_uniformity(const std::vector<BitString>& keys);

// Same test over an already-aggregated byte histogram.
UniformityReport uniformity_from_byte_counts(
    const std::array<std::uint64_t, 256>& counts);

// Regularized upper incomplete gamma Q(a, x); the chi-square tail.
double gamma_q(double a, double x);

// ------------------------------------------------------------ ideal model

// The password-based key-exchange functionality, exactly as specified:
// records move fresh -> {compromised | interrupted} -> completed, a correct
// TestPwd lets the adversary fix the key, matching fresh sessions share one.
class Fpwke {
 public:
  enum class Status { Fresh, Compromised, Interrupted, Completed };

  Fpwke(std::size_t lambda, std::uint64_t seed);

  void set_corrupted(const std::string& party);
  void new_session(const std::string& pi, const std::string& pj,
                   std::size_t pw);
  // "correct guess" / "wrong guess"; no effect on non-fresh records.
  std::string test_pwd(const std::string& pi, std::size_t guess);
  // Key output to pi, or nullopt (no record / repeated NewKey).
  std::optional<BitString> new_key(const std::string& pi,
                                   const BitString& adversary_key);

  std::optional<Status> record_status(const std::string& pi) const;

 private:
  struct Record {
    std::string peer;
    std::size_t pw = 0;
    Status status = Status::Fresh;
    bool key_sent = false;
    bool fresh_at_key = false;
    BitString issued_key;
  };

  std::size_t lambda_;
  Rng rng_;
  std::map<std::string, Record> records_;
  std::set<std::string> corrupted_;
};

// -------------------------------------------------------- real-vs-ideal

struct RateTriple {
  double abort = 0.0;
  double agreement = 0.0;
  double guess_success = 0.0;
};

struct RealIdealReport {
  std::uint64_t trials = 0;
  RateTriple real, ideal;
  double sigma_abort = 0.0, sigma_agreement = 0.0, sigma_guess = 0.0;
  bool within(double z) const;
  std::string to_json() const;
};

// Paired runs: real sessions against the script vs the F_pwKE oracle driven
// by the matching ideal adversary. The script must stay within what F_pwKE
// can express: honest/passive, a single password guess, or tamper-to-abort.
RealIdealReport compare_real_ideal(const ParamsPtr& params,
                                   const AdversaryScript& script,
                                   const RunConfig& config);

}  // namespace qpake
