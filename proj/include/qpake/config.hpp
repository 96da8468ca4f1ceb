#pragma once

#include <string>
#include <string_view>

#include "qpake/harness.hpp"
#include "qpake/pake.hpp"

namespace qpake {

// Experiment configuration: [protocol], [adversary] and [run] sections of
// key = value lines. Unknown keys are rejected; every invariant is checked
// against the module constructors before any run.
struct Config {
  ProtocolParams::Spec protocol;
  AdversaryScript adversary;
  RunConfig run;
  std::string sig_group_name = "signature61";
  std::string out_dir;
  bool record_transcripts = false;

  ParamsPtr build_params() const;
};

struct ConfigError : std::runtime_error {
  int line;
  ConfigError(int line_number, const std::string& message);
};

Config parse_config(std::string_view text);

// Canonical form: every key explicit, fixed order. parse(serialize(c))
// round-trips.
std::string serialize_config(const Config& config);

}  // namespace qpake
