#include "proxident/config.hpp"

#include <charconv>
#include <cstdlib>
#include <string>

#include "proxident/errors.hpp"

namespace proxident {
namespace {

double parse_number(std::string_view text) {
  std::string owned(text);
  char* end = nullptr;
  const double value = std::strtod(owned.c_str(), &end);
  if (owned.empty() || end != owned.c_str() + owned.size() || !(value >= 0.0)) {
    throw DomainError("invalid tolerance value '" + owned + "'");
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

Tolerances Tolerances::from_env() {
  Tolerances tol;
  if (const char* env = std::getenv(kToleranceEnvVar); env != nullptr && *env != '\0') {
    tol = tol.with_overrides(env);
  }
  return tol;
}

Tolerances Tolerances::with_overrides(std::string_view spec) const {
  Tolerances out = *this;
  spec = trim(spec);
  if (spec.empty()) return out;
  if (spec.find('=') == std::string_view::npos) {
    out.bridge_residual = parse_number(spec);
    return out;
  }
  while (!spec.empty()) {
    const auto comma = spec.find(',');
    const std::string_view item = trim(spec.substr(0, comma));
    spec = comma == std::string_view::npos ? std::string_view{} : spec.substr(comma + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw DomainError("tolerance override '" + std::string(item) + "' is not key=value");
    }
    const std::string_view key = trim(item.substr(0, eq));
    const double value = parse_number(trim(item.substr(eq + 1)));
    if (key == "normalization") out.normalization = value;
    else if (key == "ci") out.ci = value;
    else if (key == "rank") out.rank = value;
    else if (key == "bridge_residual") out.bridge_residual = value;
    else if (key == "bridge_audit") out.bridge_audit = value;
    else if (key == "drift") out.drift = value;
    else if (key == "negative_clip") out.negative_clip = value;
    else if (key == "eigen_gap") out.eigen_gap = value;
    else if (key == "imaginary") out.imaginary = value;
    else if (key == "negative_recovery") out.negative_recovery = value;
    else if (key == "label") out.label = value;
    else if (key == "cp_fit") out.cp_fit = value;
    else throw DomainError("unknown tolerance key '" + std::string(key) + "'");
  }
  return out;
}

}  // namespace proxident
