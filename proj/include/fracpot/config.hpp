#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fracpot/geometry.hpp"
#include "fracpot/kernels.hpp"
#include "fracpot/sampler.hpp"

namespace fracpot {

/// Invalid configuration document; the message starts with the offending node path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::json;

/// Parsed and validated common part of a run configuration.
struct RunConfig {
  StableParams params;
  std::optional<DomainSpec> domain;
  std::string domain_hash;  // FNV-1a of the canonical domain subtree, hex
  WalkConfig walk;
  std::uint64_t walks = 10000;
  Json doc;  // the whole document, for command-specific fields
};

/// Reads "d", "alpha", "domain", "walks" and "walk" from a parsed document.
/// The domain is optional only when `require_domain` is false.
RunConfig parse_run_config(const Json& doc, bool require_domain = true);

/// Reads and parses a configuration file.
Json load_config_file(const std::string& path);

DomainSpec parse_domain(const Json& node, int d, const std::string& path);
Point parse_point(const Json& node, int d, const std::string& path);
std::vector<Point> parse_points(const Json& node, int d, const std::string& path);
Payoff parse_payoff(const Json& node, const StableParams& p, const std::string& path);

/// The member `key` of an object; ConfigError naming path.key when absent.
const Json& require_field(const Json& obj, const std::string& key, const std::string& path);

double get_number(const Json& obj, const std::string& key, const std::string& path);
double get_number_or(const Json& obj, const std::string& key, double fallback, const std::string& path);
std::uint64_t get_count_or(const Json& obj, const std::string& key, std::uint64_t fallback, const std::string& path);

/// 64-bit FNV-1a hash as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Shortest decimal that round-trips to the same double ("inf", "-inf", "nan" otherwise).
std::string format_double(double v);

}  // namespace fracpot
