#include "zest/config.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include "zest/errors.hpp"

namespace zest {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"run",
       {"method", "target", "particles", "rounds", "seed", "workers", "out",
        "epsilon_list"}},
      {"target", {"m", "dim", "cov_scale", "mean", "recenter", "beta_override"}},
      {"schedule",
       {"lambda0", "r", "steps", "step_time", "total_time", "init_lmc_steps"}},
      {"ti",
       {"lambda0", "decay", "lambda_min", "particles", "lmc_steps",
        "lmc_step_scale", "smoothness"}},
      {"je", {"curve", "total_time", "n_steps", "pull_length", "pull_stiffness"}},
      {"rds", {"total_time", "delta", "steps", "init_scale"}},
      {"score",
       {"kind", "budget", "lmc_steps", "lmc_step", "depth", "aux_steps",
        "polish_steps", "max_tries", "proposal"}},
      {"mmd", {"sigmas"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

ConfigFile ConfigFile::parse_string(const std::string& text) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!schema().count(section))
        throw ConfigError("unknown config section '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError("config key '" + key + "' outside any section");
    if (!schema().at(section).count(key))
      throw ConfigError("unknown config key '" + section + "." + key + "'");
    cfg.values_[section + "." + key] = value;
  }
  return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

bool ConfigFile::has(const std::string& key) const {
  return values_.count(key) > 0;
}

std::string ConfigFile::get_string(const std::string& key,
                                   const std::string& dflt) const {
  auto it = values_.find(key);
  return it == values_.end() ? dflt : it->second;
}

double ConfigFile::get_double(const std::string& key, double dflt) const {
  auto it = values_.find(key);
  if (it == values_.end()) return dflt;
  try {
    std::size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" +
                      it->second + "'");
  }
}

int ConfigFile::get_int(const std::string& key, int dflt) const {
  const double v = get_double(key, double(dflt));
  const int i = int(v);
  if (double(i) != v)
    throw ConfigError("config key '" + key + "': expected an integer");
  return i;
}

std::uint64_t ConfigFile::get_u64(const std::string& key,
                                  std::uint64_t dflt) const {
  auto it = values_.find(key);
  if (it == values_.end()) return dflt;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected an unsigned integer");
  }
}

bool ConfigFile::get_bool(const std::string& key, bool dflt) const {
  auto it = values_.find(key);
  if (it == values_.end()) return dflt;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected a boolean");
}

std::vector<double> ConfigFile::get_double_list(
    const std::string& key, const std::vector<double>& dflt) const {
  auto it = values_.find(key);
  if (it == values_.end()) return dflt;
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': bad list entry '" + tok +
                        "'");
    }
  }
  if (out.empty())
    throw ConfigError("config key '" + key + "': empty list");
  return out;
}

}  // namespace zest
