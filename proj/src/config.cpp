#include "qpake/config.hpp"

#include <charconv>
#include <map>
#include <sstream>
#include <vector>

namespace qpake {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::uint64_t parse_u64(const std::string& v, int line) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError(line, "expected unsigned integer, got '" + v + "'");
  return out;
}

double parse_double(const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return out;
  } catch (const std::exception&) {
    throw ConfigError(line, "expected number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(line, "expected true/false, got '" + v + "'");
}

std::vector<std::uint8_t> parse_hex_bytes(const std::string& v, int line) {
  if (v.size() % 2 != 0) throw ConfigError(line, "hex value has odd length");
  std::vector<std::uint8_t> out(v.size() / 2);
  auto nibble = [&](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    throw ConfigError(line, "invalid hex digit in '" + v + "'");
  };
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>(nibble(v[2 * i]) << 4 | nibble(v[2 * i + 1]));
  return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (auto b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

// mutate = tag:kind[:hex][,tag:kind[:hex]...]
std::vector<MutationRule> parse_mutations(const std::string& v, int line) {
  std::vector<MutationRule> rules;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::vector<std::string> parts;
    std::stringstream ps(item);
    std::string part;
    while (std::getline(ps, part, ':')) parts.push_back(part);
    if (parts.size() < 2 || parts.size() > 3)
      throw ConfigError(line, "mutation entry must be tag:kind[:hex]");
    MutationRule rule;
    try {
      rule.tag = flow_tag_from_name(parts[0]);
    } catch (const std::exception&) {
      throw ConfigError(line, "unknown flow tag '" + parts[0] + "'");
    }
    if (rule.tag == FlowTag::Zero)
      throw ConfigError(line, "flow zero is quantum; it cannot be mutated classically");
    if (parts[1] == "drop") {
      rule.kind = MutationRule::Kind::Drop;
    } else if (parts[1] == "flip") {
      rule.kind = MutationRule::Kind::FlipBits;
      rule.mask = parts.size() == 3 ? parse_hex_bytes(parts[2], line)
                                    : std::vector<std::uint8_t>{0x01};
    } else if (parts[1] == "replace") {
      rule.kind = MutationRule::Kind::Replace;
      if (parts.size() != 3)
        throw ConfigError(line, "replace mutation needs replacement hex");
      const auto bytes = parse_hex_bytes(parts[2], line);
      rule.replacement.assign(bytes.begin(), bytes.end());
    } else if (parts[1] == "passthrough") {
      rule.kind = MutationRule::Kind::Passthrough;
    } else {
      throw ConfigError(line, "unknown mutation kind '" + parts[1] + "'");
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::string mutations_to_string(const std::vector<MutationRule>& rules) {
  std::string out;
  for (const auto& rule : rules) {
    if (!out.empty()) out += ",";
    out += std::string(flow_tag_name(rule.tag));
    switch (rule.kind) {
      case MutationRule::Kind::Passthrough: out += ":passthrough"; break;
      case MutationRule::Kind::Drop: out += ":drop"; break;
      case MutationRule::Kind::FlipBits:
        out += ":flip:" + to_hex(rule.mask);
        break;
      case MutationRule::Kind::Replace: {
        std::vector<std::uint8_t> bytes(rule.replacement.begin(),
                                        rule.replacement.end());
        out += ":replace:" + to_hex(bytes);
        break;
      }
    }
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(int line_number, const std::string& message)
    : std::runtime_error("config line " + std::to_string(line_number) + ": " +
                         message),
      line(line_number) {}

Config parse_config(std::string_view text) {
  Config cfg;
  std::string section;
  int line_no = 0;
  std::stringstream stream{std::string(text)};
  std::string raw;

  while (std::getline(stream, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(line_no, "unterminated section header");
      section = line.substr(1, line.size() - 2);
      if (section != "protocol" && section != "adversary" && section != "run")
        throw ConfigError(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError(line_no, "key outside any section");

    if (section == "protocol") {
      auto& p = cfg.protocol;
      if (key == "lambda") p.lambda = parse_u64(value, line_no);
      else if (key == "k") p.k = parse_u64(value, line_no);
      else if (key == "alpha") p.alpha = parse_double(value, line_no);
      else if (key == "tau") p.tau = parse_double(value, line_no);
      else if (key == "gamma") p.gamma = parse_double(value, line_no);
      else if (key == "beta") p.beta = parse_double(value, line_no);
      else if (key == "dict_size") p.dict_size = parse_u64(value, line_no);
      else if (key == "repetition_code") p.repetition_code = parse_bool(value, line_no);
      else if (key == "code_seed") p.code_seed = parse_u64(value, line_no);
      else if (key == "family_seed") p.family_seed = parse_u64(value, line_no);
      else if (key == "family_size") p.family_size = parse_u64(value, line_no);
      else if (key == "syndrome_len") p.syndrome_len = parse_u64(value, line_no);
      else if (key == "commit_group") p.commit_group = value;
      else if (key == "crs_seed") p.crs_seed = parse_u64(value, line_no);
      else throw ConfigError(line_no, "unknown key '" + key + "' in [protocol]");
    } else if (section == "adversary") {
      auto& a = cfg.adversary;
      if (key == "channel") {
        if (value == "ideal") a.quantum = ChannelModel::ideal();
        else if (value == "bitflip") a.quantum.kind = ChannelModel::Kind::BitFlip;
        else if (value == "intercept_random")
          a.quantum = ChannelModel::intercept_resend_random();
        else if (value == "intercept_plus")
          a.quantum = ChannelModel::intercept_resend_fixed(Basis::Plus);
        else if (value == "intercept_times")
          a.quantum = ChannelModel::intercept_resend_fixed(Basis::Times);
        else if (value == "scripted") a.quantum.kind = ChannelModel::Kind::Scripted;
        else throw ConfigError(line_no, "unknown channel '" + value + "'");
      } else if (key == "flip_prob") {
        const double p = parse_double(value, line_no);
        if (p < 0.0 || p > 1.0)
          throw ConfigError(line_no, "flip_prob outside [0,1]");
        a.quantum.flip_prob = p;
      } else if (key == "hook") {
        a.quantum.hook = value;
      } else if (key == "password_guess") {
        a.password_guess = parse_u64(value, line_no);
      } else if (key == "mutate") {
        a.classical = parse_mutations(value, line_no);
      } else {
        throw ConfigError(line_no, "unknown key '" + key + "' in [adversary]");
      }
    } else {  // run
      auto& r = cfg.run;
      if (key == "trials") r.trials = parse_u64(value, line_no);
      else if (key == "seed") r.seed = parse_u64(value, line_no);
      else if (key == "compile") r.compiled = parse_bool(value, line_no);
      else if (key == "jobs") r.jobs = static_cast<unsigned>(parse_u64(value, line_no));
      else if (key == "password_mode") {
        if (value == "equal") r.password_mode = PasswordMode::Equal;
        else if (value == "distinct") r.password_mode = PasswordMode::Distinct;
        else if (value == "random") r.password_mode = PasswordMode::Random;
        else throw ConfigError(line_no, "unknown password_mode '" + value + "'");
      } else if (key == "sig_group") cfg.sig_group_name = value;
      else if (key == "out") cfg.out_dir = value;
      else if (key == "record_transcripts")
        cfg.record_transcripts = parse_bool(value, line_no);
      else throw ConfigError(line_no, "unknown key '" + key + "' in [run]");
    }
  }

  if (cfg.run.trials == 0) throw ConfigError(line_no, "[run] trials must be >= 1");

  // Validate against the module constructors; rethrow with the invariant.
  try {
    (void)ProtocolParams::make(cfg.protocol);
  } catch (const std::exception& e) {
    throw ConfigError(0, std::string("invalid [protocol]: ") + e.what());
  }
  try {
    cfg.run.sig_group = Group::by_name(cfg.sig_group_name);
  } catch (const std::exception& e) {
    throw ConfigError(0, std::string("invalid [run] sig_group: ") + e.what());
  }
  if (cfg.adversary.password_guess &&
      *cfg.adversary.password_guess >= cfg.protocol.dict_size)
    throw ConfigError(0, "password_guess outside the dictionary");
  return cfg;
}

ParamsPtr Config::build_params() const { return make_params(protocol); }

std::string serialize_config(const Config& cfg) {
  std::ostringstream out;
  const auto& p = cfg.protocol;
  out << "[protocol]\n";
  out << "lambda = " << p.lambda << "\n";
  out << "k = " << p.k << "\n";
  out << "alpha = " << p.alpha << "\n";
  out << "tau = " << p.tau << "\n";
  out << "gamma = " << p.gamma << "\n";
  out << "beta = " << p.beta << "\n";
  out << "dict_size = " << p.dict_size << "\n";
  out << "repetition_code = " << (p.repetition_code ? "true" : "false") << "\n";
  out << "code_seed = " << p.code_seed << "\n";
  out << "family_seed = " << p.family_seed << "\n";
  out << "family_size = " << p.family_size << "\n";
  out << "syndrome_len = " << p.syndrome_len << "\n";
  out << "commit_group = " << p.commit_group << "\n";
  out << "crs_seed = " << p.crs_seed << "\n";
  out << "\n[adversary]\n";
  const auto& a = cfg.adversary;
  out << "channel = ";
  switch (a.quantum.kind) {
    case ChannelModel::Kind::Ideal: out << "ideal"; break;
    case ChannelModel::Kind::BitFlip: out << "bitflip"; break;
    case ChannelModel::Kind::InterceptResend:
      if (a.quantum.strategy == ChannelModel::Strategy::RandomBasis)
        out << "intercept_random";
      else
        out << (a.quantum.fixed_basis == Basis::Plus ? "intercept_plus"
                                                     : "intercept_times");
      break;
    case ChannelModel::Kind::Scripted: out << "scripted"; break;
  }
  out << "\n";
  out << "flip_prob = " << a.quantum.flip_prob << "\n";
  if (!a.quantum.hook.empty()) out << "hook = " << a.quantum.hook << "\n";
  if (a.password_guess) out << "password_guess = " << *a.password_guess << "\n";
  if (!a.classical.empty())
    out << "mutate = " << mutations_to_string(a.classical) << "\n";
  out << "\n[run]\n";
  out << "trials = " << cfg.run.trials << "\n";
  out << "seed = " << cfg.run.seed << "\n";
  out << "compile = " << (cfg.run.compiled ? "true" : "false") << "\n";
  out << "jobs = " << cfg.run.jobs << "\n";
  out << "password_mode = "
      << (cfg.run.password_mode == PasswordMode::Equal      ? "equal"
          : cfg.run.password_mode == PasswordMode::Distinct ? "distinct"
                                                            : "random")
      << "\n";
  out << "sig_group = " << cfg.sig_group_name << "\n";
  if (!cfg.out_dir.empty()) out << "out = " << cfg.out_dir << "\n";
  out << "record_transcripts = " << (cfg.record_transcripts ? "true" : "false")
      << "\n";
  return out.str();
}

}  // namespace qpake
