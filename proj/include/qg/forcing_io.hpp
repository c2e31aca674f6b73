#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "qg/forcing.hpp"

namespace qg {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Parse "k l amplitude; k l amplitude; ..." into a field on g. Problems are appended to `errors`.
inline SpectralField parse_mode_list(const std::string& text, const Grid& g, const std::string& key,
                                     std::vector<std::string>& errors) {
  SpectralField f(g);
  std::stringstream all(text);
  std::string item;
  while (std::getline(all, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    std::istringstream in(item);
    int k = 0, l = 0;
    double amp = 0.0;
    std::string extra;
    if (!(in >> k >> l >> amp) || (in >> extra)) {
      errors.push_back(key + ": expected 'k l amplitude', got '" + item + "'");
      continue;
    }
    if (k < 1 || k > g.nx || l < 1 || l > g.ny) {
      errors.push_back(key + ": mode (" + std::to_string(k) + "," + std::to_string(l) +
                       ") outside the " + std::to_string(g.nx) + "x" + std::to_string(g.ny) + " grid");
      continue;
    }
    if (!std::isfinite(amp)) {
      errors.push_back(key + ": amplitude must be finite");
      continue;
    }
    f(k, l) += amp;
  }
  return f;
}

template <typename T>
std::optional<T> get_number(const boost::property_tree::ptree& pt, const std::string& key,
                            const std::string& where, std::vector<std::string>& errors) {
  const auto raw = pt.get_optional<std::string>(key);
  if (!raw) return std::nullopt;
  std::istringstream in(trim(*raw));
  T value{};
  std::string extra;
  if (!(in >> value) || (in >> extra)) {
    errors.push_back(where + key + ": cannot parse '" + *raw + "' as a number");
    return std::nullopt;
  }
  return value;
}

}  // namespace detail

/// Parse a forcing spec:
///
///     eta = 16
///     mean = 1 1 0.1; 2 2 0.05
///     [term1]
///     modes = 2 1 0.2
///     omega = 1
///     phase = 0
///
/// Mode lists are ';'-separated "k l amplitude" triples. Every section whose name starts with
/// "term" adds one oscillating term, in file order. Comments go on their own lines.
inline ForcingSpec parse_forcing(std::istream& in, const Grid& g) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError({std::string("forcing: ") + e.message() + " (line " + std::to_string(e.line()) + ")"});
  }
  std::vector<std::string> errors;
  ForcingSpec spec;
  spec.mean = SpectralField(g);
  if (auto eta = detail::get_number<double>(pt, "eta", "forcing: ", errors)) spec.eta = *eta;
  if (!(spec.eta >= 1.0)) errors.push_back("forcing: eta must be >= 1");
  if (auto mean = pt.get_optional<std::string>("mean"))
    spec.mean = detail::parse_mode_list(*mean, g, "forcing: mean", errors);

  for (const auto& [name, section] : pt) {
    if (section.empty()) {
      if (name != "eta" && name != "mean") errors.push_back("forcing: unknown key '" + name + "'");
      continue;
    }
    if (name.rfind("term", 0) != 0) {
      errors.push_back("forcing: unknown section [" + name + "]");
      continue;
    }
    const std::string where = "forcing: [" + name + "] ";
    ForcingTerm term;
    const auto modes = section.get_optional<std::string>("modes");
    if (!modes) errors.push_back(where + "missing key 'modes'");
    term.amplitude = modes ? detail::parse_mode_list(*modes, g, where + "modes", errors) : SpectralField(g);
    if (auto w = detail::get_number<double>(section, "omega", where, errors)) term.omega = *w;
    else if (!section.get_optional<std::string>("omega")) errors.push_back(where + "missing key 'omega'");
    if (!(term.omega > 0.0)) errors.push_back(where + "omega must be > 0");
    if (auto ph = detail::get_number<double>(section, "phase", where, errors)) term.phase = *ph;
    for (const auto& [key, _] : section)
      if (key != "modes" && key != "omega" && key != "phase")
        errors.push_back(where + "unknown key '" + key + "'");
    spec.terms.push_back(std::move(term));
  }
  if (!errors.empty()) throw ParseError(std::move(errors));
  return spec;
}

inline ForcingSpec parse_forcing_text(const std::string& text, const Grid& g) {
  std::istringstream in(text);
  return parse_forcing(in, g);
}

inline ForcingSpec load_forcing(const std::filesystem::path& path, const Grid& g) {
  std::ifstream in(path);
  if (!in) throw ParseError({"forcing: cannot open '" + path.string() + "'"});
  return parse_forcing(in, g);
}

}  // namespace qg
