#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kappa/core.hpp"
#include "kappa/density.hpp"
#include "kappa/gibbs.hpp"

namespace kappa {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string word;
  while (in >> word) out.push_back(word);
  return out;
}

inline double parse_number(const std::string& word, const char* what) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(word, &used);
  } catch (const std::exception&) {
    throw ParseError(std::string(what) + ": not a number: '" + word + "'");
  }
  if (used != word.size()) {
    throw ParseError(std::string(what) + ": not a number: '" + word + "'");
  }
  return value;
}

}  // namespace detail

/// Model description loaded from a key/value text file:
///
///   kappa = 0.5
///   states = 1 2 3 4 5
///   energy = 0 0 1 2 2
///   lattice_step = 1        # optional
///
/// '#' starts a comment; keys may appear in any order.
struct ModelSpec {
  double kappa = 0.0;
  std::vector<std::string> states;
  std::vector<double> energy;
  std::optional<double> lattice_step;

  static ModelSpec parse(std::istream& in) {
    ModelSpec spec;
    bool saw_kappa = false;
    bool saw_states = false;
    bool saw_energy = false;
    std::string line;
    while (std::getline(in, line)) {
      if (const auto hash = line.find('#'); hash != std::string::npos) {
        line.erase(hash);
      }
      line = detail::strip(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ParseError("model spec: expected 'key = value', got '" + line + "'");
      }
      const std::string key = detail::strip(line.substr(0, eq));
      const auto words = detail::split_words(line.substr(eq + 1));
      if (words.empty()) {
        throw ParseError("model spec: empty value for '" + key + "'");
      }
      if (key == "kappa") {
        spec.kappa = detail::parse_number(words.at(0), "kappa");
        saw_kappa = true;
      } else if (key == "states") {
        spec.states = words;
        saw_states = true;
      } else if (key == "energy") {
        spec.energy.clear();
        for (const auto& w : words) spec.energy.push_back(detail::parse_number(w, "energy"));
        saw_energy = true;
      } else if (key == "lattice_step") {
        spec.lattice_step = detail::parse_number(words.at(0), "lattice_step");
      } else {
        throw ParseError("model spec: unknown key '" + key + "'");
      }
    }
    if (!saw_kappa || !saw_states || !saw_energy) {
      throw ParseError("model spec: kappa, states and energy are required");
    }
    if (spec.states.size() != spec.energy.size()) {
      throw ParseError("model spec: states and energy lengths differ");
    }
    return spec;
  }

  static ModelSpec parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
      throw ParseError("cannot open model spec '" + path + "'");
    }
    return parse(in);
  }

  Kappa kappa_param() const {
    try {
      return Kappa(kappa);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what());
    }
  }

  EnergyModel to_model() const {
    try {
      StateSpace space(states);
      RandomVariable u(space, energy);
      return EnergyModel(std::move(space), std::move(u), lattice_step);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what());
    }
  }
};

/// Reads a one-value-per-line vector file. The first content line must be a
/// header naming the state order:
///
///   # states: 1 2 3 4 5
///   0.2
///   ...
///
/// The header is checked against the expected space.
inline std::vector<double> read_vector(std::istream& in, const StateSpace& space,
                                       const char* what) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    line = detail::strip(line);
    if (line.empty()) continue;
    const std::string tag = "# states:";
    if (line.rfind(tag, 0) != 0) {
      throw ParseError(std::string(what) + ": missing '# states:' header line");
    }
    header = detail::split_words(line.substr(tag.size()));
    break;
  }
  if (header != space.labels()) {
    throw ParseError(std::string(what) + ": state order does not match the model");
  }
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = detail::strip(line);
    if (line.empty()) continue;
    values.push_back(detail::parse_number(line, what));
  }
  if (values.size() != space.size()) {
    throw ParseError(std::string(what) + ": expected " + std::to_string(space.size()) +
                     " values, got " + std::to_string(values.size()));
  }
  return values;
}

inline std::vector<double> read_vector_file(const std::string& path, const StateSpace& space,
                                            const char* what) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(std::string(what) + ": cannot open '" + path + "'");
  }
  return read_vector(in, space, what);
}

inline FiniteDensity read_density_file(const std::string& path, const StateSpace& space) {
  try {
    return FiniteDensity(space, read_vector_file(path, space, "density"));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

/// 17 significant digits: enough to round-trip any double exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace kappa
