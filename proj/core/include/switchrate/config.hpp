#pragma once

#include <map>
#include <string>

#include "switchrate/model.hpp"

namespace switchrate {

using KeyValues = std::map<std::string, std::string>;

// INI-style file: `key = value` lines grouped under `[section]` headers.
// Keys before the first header land in section "".
struct Config {
  std::map<std::string, KeyValues> sections;

  const KeyValues* section(const std::string& name) const;
  // Value from `name`, falling back to `fallback` when absent.
  std::string get(const std::string& section_name, const std::string& key,
                  const std::string& fallback = "") const;
};

Config read_config(const std::string& path);
Config parse_config(const std::string& text);

// Applies parameter keys (delta, kerr, kappa1, kappa2, kappa_phi,
// lambdaN_re/_im or lambdaN_abs/_phase, alpha0_sq_re/_im, unit) and ignores
// the rest. A complex quantity given in both forms is rejected.
void apply_overrides(SystemParams& p, const KeyValues& kv);

double parse_real(const std::string& text, const std::string& key);

}  // namespace switchrate
