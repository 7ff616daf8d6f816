#pragma once

#include <map>
#include <string>
#include <vector>

#include "franson/detection.hpp"
#include "franson/model.hpp"

namespace franson {

/// One experiment, fully resolved from config file + CLI overrides.
struct ExperimentSpec {
  std::string kind;  // benchmark | dynamics | g2 | visibility | sweep | oracle
  ModelParams params{};
  std::vector<double> phi_t_list;  // used by benchmark; defaults to {phi_t}
  std::string output_path;
  int threads = 0;  // 0 = leave OpenMP defaults alone
  bool check = false;
  SweepSpec sweep{};  // used by the sweep kind
};

/// Parse flat `key = value` lines ('#' comments, blank lines allowed).
/// Throws std::invalid_argument on malformed lines or duplicate keys.
std::map<std::string, std::string> parse_key_values(const std::string& text);

/// Build an ExperimentSpec from config text. Unknown keys, unparsable
/// values and kind-specific missing fields are all reported together in a
/// single std::invalid_argument.
ExperimentSpec spec_from_config(const std::string& text);

/// Shortest decimal form that round-trips a double (deterministic).
std::string format_double(double value);

/// Resolved parameters as ordered key/value pairs for CSV headers and the
/// JSON sidecar.
std::vector<std::pair<std::string, std::string>> describe(const ExperimentSpec& spec);

/// CSV body: '#'-prefixed header lines with the full parameter set, one
/// column-name line, then rows. Byte-identical across reruns.
std::string csv_document(const ExperimentSpec& spec, const std::vector<std::string>& columns,
                         const std::vector<std::vector<double>>& rows);

/// JSON sidecar string with the same metadata as the CSV header.
std::string json_sidecar(const ExperimentSpec& spec, const std::vector<std::string>& columns);

void write_file(const std::string& path, const std::string& body);

}  // namespace franson
