#include "qpake/harness.hpp"

#include <json.hpp>

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace qpake {

using nlohmann::json;

// ------------------------------------------------------------- adversary

bool AdversaryScript::tampers_classically() const {
  for (const auto& rule : classical)
    if (rule.kind != MutationRule::Kind::Passthrough) return true;
  return false;
}

ClassicalTamper make_tamper(const AdversaryScript& script) {
  if (!script.tampers_classically()) return {};
  auto rules = script.classical;
  return [rules](FlowTag tag, const std::string& wire,
                 Rng&) -> std::optional<std::string> {
    for (const auto& rule : rules) {
      if (rule.tag != tag) continue;
      switch (rule.kind) {
        case MutationRule::Kind::Passthrough:
          break;
        case MutationRule::Kind::Drop:
          return std::nullopt;
        case MutationRule::Kind::FlipBits: {
          if (rule.mask.empty()) break;
          std::string out = wire;
          for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = static_cast<char>(out[i] ^
                                       rule.mask[i % rule.mask.size()]);
          return out;
        }
        case MutationRule::Kind::Replace:
          return rule.replacement;
      }
    }
    return wire;
  };
}

namespace {
std::mutex g_hook_mutex;
std::unordered_map<std::string,
                   std::function<QuantumRegister(QuantumRegister, Rng&)>>
    g_quantum_hooks;
}  // namespace

void register_quantum_hook(
    const std::string& name,
    std::function<QuantumRegister(QuantumRegister, Rng&)> fn) {
  std::lock_guard<std::mutex> lock(g_hook_mutex);
  g_quantum_hooks[name] = std::move(fn);
}

ChannelModel resolve_channel(ChannelModel model) {
  if (model.kind == ChannelModel::Kind::Scripted && !model.scripted) {
    std::lock_guard<std::mutex> lock(g_hook_mutex);
    const auto it = g_quantum_hooks.find(model.hook);
    if (it == g_quantum_hooks.end())
      throw std::invalid_argument("unknown quantum hook: " + model.hook);
    model.scripted = it->second;
  }
  return model;
}

// ------------------------------------------------------------ experiments

double ExperimentStats::completion_rate() const {
  return trials == 0 ? 0.0
                     : static_cast<double>(completions) /
                           static_cast<double>(trials);
}
double ExperimentStats::abort_rate() const {
  return trials == 0 ? 0.0
                     : static_cast<double>(aborts) / static_cast<double>(trials);
}
double ExperimentStats::agreement_rate() const {
  return trials == 0 ? 0.0
                     : static_cast<double>(key_agreements) /
                           static_cast<double>(trials);
}
double ExperimentStats::guess_rate() const {
  return trials == 0 ? 0.0
                     : static_cast<double>(guess_successes) /
                           static_cast<double>(trials);
}
double ExperimentStats::mean_test_error() const {
  return error_observations == 0
             ? 0.0
             : error_sum / static_cast<double>(error_observations);
}

void ExperimentStats::merge(const ExperimentStats& other) {
  trials += other.trials;
  completions += other.completions;
  aborts += other.aborts;
  key_agreements += other.key_agreements;
  guess_successes += other.guess_successes;
  for (std::size_t i = 0; i < error_hist.size(); ++i)
    error_hist[i] += other.error_hist[i];
  error_observations += other.error_observations;
  error_sum += other.error_sum;
  for (std::size_t i = 0; i < key_byte_freq.size(); ++i)
    key_byte_freq[i] += other.key_byte_freq[i];
}

std::string ExperimentStats::to_json() const {
  json rec = {{"config", config_fingerprint},
              {"trials", trials},
              {"completions", completions},
              {"aborts", aborts},
              {"key_agreements", key_agreements},
              {"guess_successes", guess_successes},
              {"completion_rate", completion_rate()},
              {"abort_rate", abort_rate()},
              {"agreement_rate", agreement_rate()},
              {"guess_rate", guess_rate()},
              {"mean_test_error", mean_test_error()},
              {"error_hist", error_hist},
              {"key_byte_freq", key_byte_freq}};
  return rec.dump();
}

namespace {

void accumulate_key_bytes(ExperimentStats& stats, const BitString& key) {
  // Pack the key MSB-first into bytes, zero-padding the tail.
  std::size_t byte = 0;
  std::size_t nbits = 0;
  for (std::size_t i = 0; i < key.size(); ++i) {
    byte = (byte << 1) | (key.get(i) ? 1u : 0u);
    if (++nbits == 8) {
      ++stats.key_byte_freq[byte];
      byte = 0;
      nbits = 0;
    }
  }
  if (nbits != 0) ++stats.key_byte_freq[byte << (8 - nbits)];
}

std::pair<std::size_t, std::size_t> pick_passwords(PasswordMode mode,
                                                   std::size_t dict_size,
                                                   Rng& rng) {
  switch (mode) {
    case PasswordMode::Equal: {
      const std::size_t pw = rng.below(dict_size);
      return {pw, pw};
    }
    case PasswordMode::Distinct: {
      const std::size_t a = rng.below(dict_size);
      if (dict_size <= 1) return {a, a};
      const std::size_t b = (a + 1 + rng.below(dict_size - 1)) % dict_size;
      return {a, b};
    }
    case PasswordMode::Random:
      return {rng.below(dict_size), rng.below(dict_size)};
  }
  return {0, 0};
}

ExperimentStats run_trial_block(const ParamsPtr& params,
                                const AdversaryScript& script,
                                const RunConfig& config, std::uint64_t begin,
                                std::uint64_t end) {
  ExperimentStats stats;
  const ChannelModel channel = resolve_channel(script.quantum);
  const ClassicalTamper tamper = make_tamper(script);
  const GroupPtr sig_group =
      config.sig_group ? config.sig_group : Group::signature61();
  Rng master(config.seed);

  for (std::uint64_t t = begin; t < end; ++t) {
    Rng trial_rng = master.split(t);
    const std::uint64_t session_seed = trial_rng.next();

    std::size_t pw_client, pw_server;
    if (script.password_guess) {
      // Full MITM: the adversary runs the client with its guess against an
      // honest server holding a uniformly drawn password.
      pw_client = *script.password_guess;
      pw_server = trial_rng.below(params->dictionary.size());
      if (pw_client >= params->dictionary.size())
        throw std::invalid_argument("password guess outside dictionary");
    } else {
      std::tie(pw_client, pw_server) = pick_passwords(
          config.password_mode, params->dictionary.size(), trial_rng);
    }

    const SessionResult result =
        config.compiled
            ? run_compiled_session(params, sig_group, pw_client, pw_server,
                                   channel, tamper, session_seed)
            : run_session(params, pw_client, pw_server, channel, tamper,
                          session_seed);

    ++stats.trials;
    if (result.completed()) ++stats.completions;
    if (result.any_abort()) ++stats.aborts;
    if (result.agreed()) {
      ++stats.key_agreements;
      if (script.password_guess) ++stats.guess_successes;
    }
    for (double err : result.test_errors) {
      const auto bin = std::min<std::size_t>(
          stats.error_hist.size() - 1,
          static_cast<std::size_t>(err * static_cast<double>(
                                             stats.error_hist.size())));
      ++stats.error_hist[bin];
      ++stats.error_observations;
      stats.error_sum += err;
    }
    if (result.client.has_key()) accumulate_key_bytes(stats, result.client.key);
  }
  return stats;
}

}  // namespace

ExperimentStats run_experiment(const ParamsPtr& params,
                               const AdversaryScript& script,
                               const RunConfig& config) {
  if (config.trials == 0)
    throw std::invalid_argument("run_experiment: trials must be >= 1");

  ExperimentStats total;
  const unsigned jobs = std::max(1u, config.jobs);
  if (jobs == 1) {
    total = run_trial_block(params, script, config, 0, config.trials);
  } else {
    // Trials carry independent split streams, so any partition reduces to
    // the same totals; blocks are merged in index order.
    const std::uint64_t chunk = (config.trials + jobs - 1) / jobs;
    std::vector<ExperimentStats> parts(jobs);
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < jobs; ++w) {
      const std::uint64_t begin = std::min<std::uint64_t>(w * chunk, config.trials);
      const std::uint64_t end =
          std::min<std::uint64_t>(begin + chunk, config.trials);
      threads.emplace_back([&, w, begin, end] {
        parts[w] = run_trial_block(params, script, config, begin, end);
      });
    }
    for (auto& th : threads) th.join();
    for (const auto& part : parts) total.merge(part);
  }

  std::string desc = params->fingerprint + "/" +
                     std::to_string(config.trials) + "/" +
                     std::to_string(config.seed) + "/" +
                     (config.compiled ? "compiled" : "plain");
  const auto digest = sha256(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(desc.data()), desc.size()));
  static const char* digits = "0123456789abcdef";
  for (int i = 0; i < 8; ++i) {
    total.config_fingerprint.push_back(digits[digest[static_cast<size_t>(i)] >> 4]);
    total.config_fingerprint.push_back(digits[digest[static_cast<size_t>(i)] & 0xf]);
  }
  return total;
}

// --------------------------------------------------------- key statistics

namespace {

double gamma_p_series(double a, double x) {
  double sum = 1.0 / a;
  double term = sum;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
  // Lentz continued fraction for Q(a, x).
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_q domain");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

UniformityReport estimate_uniformity(const std::vector<BitString>& keys) {
  if (keys.size() < 1000)
    throw std::invalid_argument("estimate_uniformity: need >= 1000 samples");
  const std::size_t bits = keys[0].size();
  if (bits == 0 || bits > 16)
    throw std::invalid_argument("estimate_uniformity: key length outside 1..16 bits");

  const std::size_t cells = std::size_t{1} << bits;
  std::vector<std::uint64_t> counts(cells, 0);
  for (const auto& key : keys) {
    if (key.size() != bits)
      throw std::invalid_argument("estimate_uniformity: ragged key lengths");
    std::size_t v = 0;
    for (std::size_t i = 0; i < bits; ++i) v = (v << 1) | (key.get(i) ? 1 : 0);
    ++counts[v];
  }

  const double n = static_cast<double>(keys.size());
  UniformityReport report;
  double coll = 0.0;
  double chi = 0.0;
  const double expected = n / static_cast<double>(cells);
  for (auto c : counts) {
    const double cd = static_cast<double>(c);
    coll += cd * (cd - 1.0) / 2.0;
    const double diff = cd - expected;
    chi += diff * diff / expected;
  }
  report.collision_estimate = coll / (n * (n - 1.0) / 2.0);
  report.chi_square = chi;
  report.dof = cells - 1;
  report.p_value = gamma_q(static_cast<double>(report.dof) / 2.0, chi / 2.0);
  return report;
}

UniformityReport uniformity_from_byte_counts(
    const std::array<std::uint64_t, 256>& counts) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total < 1000)
    throw std::invalid_argument("uniformity_from_byte_counts: need >= 1000 samples");
  const double n = static_cast<double>(total);
  const double expected = n / 256.0;
  UniformityReport report;
  double coll = 0.0, chi = 0.0;
  for (auto c : counts) {
    const double cd = static_cast<double>(c);
    coll += cd * (cd - 1.0) / 2.0;
    const double diff = cd - expected;
    chi += diff * diff / expected;
  }
  report.collision_estimate = coll / (n * (n - 1.0) / 2.0);
  report.chi_square = chi;
  report.dof = 255;
  report.p_value = gamma_q(static_cast<double>(report.dof) / 2.0, chi / 2.0);
  return report;
}

// ------------------------------------------------------------ ideal model

Fpwke::Fpwke(std::size_t lambda, std::uint64_t seed)
    : lambda_(lambda), rng_(seed) {
  if (lambda == 0) throw std::invalid_argument("Fpwke: lambda must be >= 1");
}

void Fpwke::set_corrupted(const std::string& party) {
  corrupted_.insert(party);
}

void Fpwke::new_session(const std::string& pi, const std::string& pj,
                        std::size_t pw) {
  if (records_.count(pi) != 0) return;
  if (records_.empty()) {
    records_[pi] = Record{pj, pw, Status::Fresh, false, false, {}};
    return;
  }
  const auto peer = records_.find(pj);
  if (records_.size() == 1 && peer != records_.end() && peer->second.peer == pi)
    records_[pi] = Record{pj, pw, Status::Fresh, false, false, {}};
}

std::string Fpwke::test_pwd(const std::string& pi, std::size_t guess) {
  const auto it = records_.find(pi);
  if (it == records_.end() || it->second.status != Status::Fresh)
    return "no effect";
  if (it->second.pw == guess) {
    it->second.status = Status::Compromised;
    return "correct guess";
  }
  it->second.status = Status::Interrupted;
  return "wrong guess";
}

std::optional<BitString> Fpwke::new_key(const std::string& pi,
                                        const BitString& adversary_key) {
  const auto it = records_.find(pi);
  if (it == records_.end() || it->second.key_sent) return std::nullopt;
  Record& rec = it->second;

  BitString out;
  const bool corrupted =
      corrupted_.count(pi) != 0 || corrupted_.count(rec.peer) != 0;
  if (rec.status == Status::Compromised || corrupted) {
    if (adversary_key.size() != lambda_)
      throw std::invalid_argument("Fpwke: adversary key length mismatch");
    out = adversary_key;
  } else {
    const auto peer = records_.find(rec.peer);
    const bool matched = rec.status == Status::Fresh &&
                         peer != records_.end() && peer->second.peer == pi &&
                         peer->second.pw == rec.pw && peer->second.key_sent &&
                         peer->second.fresh_at_key;
    if (matched)
      out = peer->second.issued_key;
    else
      out = BitString::random(lambda_, rng_);
  }

  rec.key_sent = true;
  rec.fresh_at_key = rec.status == Status::Fresh;
  rec.issued_key = out;
  rec.status = Status::Completed;
  return out;
}

std::optional<Fpwke::Status> Fpwke::record_status(const std::string& pi) const {
  const auto it = records_.find(pi);
  if (it == records_.end()) return std::nullopt;
  return it->second.status;
}

// -------------------------------------------------------- real-vs-ideal

bool RealIdealReport::within(double z) const {
  const auto ok = [z](double a, double b, double sigma) {
    return std::fabs(a - b) <= z * sigma + 1e-12;
  };
  return ok(real.abort, ideal.abort, sigma_abort) &&
         ok(real.agreement, ideal.agreement, sigma_agreement) &&
         ok(real.guess_success, ideal.guess_success, sigma_guess);
}

std::string RealIdealReport::to_json() const {
  json rec = {{"trials", trials},
              {"real",
               {{"abort", real.abort},
                {"agreement", real.agreement},
                {"guess_success", real.guess_success}}},
              {"ideal",
               {{"abort", ideal.abort},
                {"agreement", ideal.agreement},
                {"guess_success", ideal.guess_success}}},
              {"sigma",
               {{"abort", sigma_abort},
                {"agreement", sigma_agreement},
                {"guess", sigma_guess}}}};
  return rec.dump();
}

RealIdealReport compare_real_ideal(const ParamsPtr& params,
                                   const AdversaryScript& script,
                                   const RunConfig& config) {
  if (script.quantum.kind != ChannelModel::Kind::Ideal &&
      !script.tampers_classically() && !script.password_guess)
    throw std::invalid_argument(
        "compare_real_ideal: script must be honest, guess, or tamper");

  const ExperimentStats real = run_experiment(params, script, config);

  // Matching ideal executions through the functionality.
  std::uint64_t ideal_aborts = 0, ideal_agreements = 0, ideal_guesses = 0;
  Rng master(config.seed ^ 0x1dea1ULL);
  const bool tampering = script.tampers_classically();
  for (std::uint64_t t = 0; t < config.trials; ++t) {
    Rng trial_rng = master.split(t);
    Fpwke func(params->lambda, trial_rng.next());

    if (script.password_guess) {
      // Corrupted client: the simulator extracts the guess and tests it.
      func.set_corrupted("P1");
      const std::size_t pw_true = trial_rng.below(params->dictionary.size());
      func.new_session("P2", "P1", pw_true);
      const std::string answer = func.test_pwd("P2", *script.password_guess);
      BitString adversary_key = BitString::random(params->lambda, trial_rng);
      const auto server_key = func.new_key("P2", adversary_key);
      if (server_key && *server_key == adversary_key) {
        ++ideal_agreements;
        ++ideal_guesses;
      }
      (void)answer;
    } else if (tampering) {
      // The ideal adversary interrupts delivery: abort before any key.
      ++ideal_aborts;
    } else {
      const auto [pw1, pw2] = pick_passwords(
          config.password_mode, params->dictionary.size(), trial_rng);
      func.new_session("P1", "P2", pw1);
      func.new_session("P2", "P1", pw2);
      BitString dummy(params->lambda);
      const auto k2 = func.new_key("P2", dummy);
      const auto k1 = func.new_key("P1", dummy);
      if (k1 && k2 && *k1 == *k2) ++ideal_agreements;
    }
  }

  RealIdealReport report;
  report.trials = config.trials;
  report.real = {real.abort_rate(), real.agreement_rate(), real.guess_rate()};
  const double n = static_cast<double>(config.trials);
  report.ideal = {static_cast<double>(ideal_aborts) / n,
                  static_cast<double>(ideal_agreements) / n,
                  static_cast<double>(ideal_guesses) / n};
  const auto sigma = [n](double p_real, double p_ideal) {
    const double p = (p_real + p_ideal) / 2.0;
    // Paired binomial comparison; two independent samples of size n.
    return std::sqrt(2.0 * std::max(p * (1.0 - p), 1e-9) / n);
  };
  report.sigma_abort = sigma(report.real.abort, report.ideal.abort);
  report.sigma_agreement = sigma(report.real.agreement, report.ideal.agreement);
  report.sigma_guess = sigma(report.real.guess_success, report.ideal.guess_success);
  return report;
}

}  // namespace qpake
