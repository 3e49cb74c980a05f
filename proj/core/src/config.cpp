#include "switchrate/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <sstream>

#include "switchrate/errors.hpp"

namespace switchrate {

namespace pt = boost::property_tree;

namespace {

Config from_tree(const pt::ptree& tree) {
  Config cfg;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      cfg.sections[""][name] = node.data();
      continue;
    }
    auto& sec = cfg.sections[name];
    for (const auto& [key, leaf] : node) sec[key] = leaf.data();
  }
  return cfg;
}

}  // namespace

const KeyValues* Config::section(const std::string& name) const {
  auto it = sections.find(name);
  return it == sections.end() ? nullptr : &it->second;
}

std::string Config::get(const std::string& section_name, const std::string& key,
                        const std::string& fallback) const {
  if (const auto* s = section(section_name)) {
    auto it = s->find(key);
    if (it != s->end()) return it->second;
  }
  return fallback;
}

Config read_config(const std::string& path) {
  pt::ptree tree;
  try {
    pt::read_ini(path, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InvalidParams(std::string("config: ") + e.what());
  }
  return from_tree(tree);
}

Config parse_config(const std::string& text) {
  std::istringstream in(text);
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InvalidParams(std::string("config: ") + e.what());
  }
  return from_tree(tree);
}

double parse_real(const std::string& text, const std::string& key) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw InvalidParams("config key '" + key + "': cannot parse '" + text + "' as a number");
  }
}

namespace {

// Resolves one complex quantity from rectangular or polar keys.
void complex_key(const KeyValues& kv, const std::string& stem, cplx& target) {
  auto has = [&](const std::string& k) { return kv.count(stem + k) > 0; };
  auto val = [&](const std::string& k) { return parse_real(kv.at(stem + k), stem + k); };
  const bool rect = has("_re") || has("_im");
  const bool polar = has("_abs") || has("_phase");
  if (rect && polar)
    throw InvalidParams("config: " + stem + " given in both rectangular and polar form");
  if (rect) {
    if (has("_re")) target.real(val("_re"));
    if (has("_im")) target.imag(val("_im"));
  } else if (polar) {
    double r = has("_abs") ? val("_abs") : std::abs(target);
    double ph = has("_phase") ? val("_phase") : std::arg(target);
    target = from_polar(r, ph);
  }
}

}  // namespace

void apply_overrides(SystemParams& p, const KeyValues& kv) {
  auto real_key = [&](const char* key, double& target) {
    auto it = kv.find(key);
    if (it != kv.end()) target = parse_real(it->second, key);
  };
  real_key("delta", p.delta);
  real_key("kerr", p.kerr);
  real_key("kappa1", p.kappa1);
  real_key("kappa2", p.kappa2);
  real_key("kappa_phi", p.kappa_phi);
  complex_key(kv, "lambda1", p.lambda1);
  complex_key(kv, "lambda2", p.lambda2);
  complex_key(kv, "lambda3", p.lambda3);
  const bool a0 = kv.count("alpha0_sq_re") || kv.count("alpha0_sq_im") ||
                  kv.count("alpha0_sq_abs") || kv.count("alpha0_sq_phase");
  if (a0) {
    cplx c = p.alpha0_sq.value_or(cplx{});
    complex_key(kv, "alpha0_sq", c);
    p.alpha0_sq = c;
  }
  if (auto it = kv.find("unit"); it != kv.end()) p.unit = it->second;
  p.validate();
}

}  // namespace switchrate
