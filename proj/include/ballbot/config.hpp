#ifndef BALLBOT_CONFIG_HPP
#define BALLBOT_CONFIG_HPP

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "ballbot/errors.hpp"
#include "ballbot/params.hpp"

namespace ballbot {

// Flat key/value configuration with dotted sections, one `key = value` per
// line, '#' starts a comment.
class Config {
 public:
  Config() = default;

  static Config parse(std::istream& in) {
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": expected key = value");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string val = trim(trimmed.substr(eq + 1));
      if (key.empty())
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": empty key");
      cfg.values_[key] = val;
    }
    return cfg;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse(in);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
  }

  double get_double(const std::string& key) const {
    const std::string s = get_string(key);
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": not a number: " + s);
    }
  }

  double get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  int get_int(const std::string& key, int fallback) const {
    return has(key) ? static_cast<int>(get_double(key)) : fallback;
  }

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }
  void set(const std::string& key, double value) {
    std::ostringstream os;
    os.precision(17);
    os << value;
    values_[key] = os.str();
  }

  const std::map<std::string, std::string>& values() const { return values_; }

  void save(std::ostream& out) const {
    for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
  }

  // model.* keys: b1,b2,b3,b4,ell,r_b,r_w,g,alpha
  PhysicalParams physical_params() const {
    PhysicalParams p;
    p.b1 = get_double("model.b1");
    p.b2 = get_double("model.b2");
    p.b3 = get_double("model.b3");
    p.b4 = get_double("model.b4");
    p.ell = get_double("model.ell");
    p.r_b = get_double("model.r_b");
    p.r_w = get_double("model.r_w");
    p.g = get_double("model.g");
    p.alpha = get_double("model.alpha");
    p.validate();
    return p;
  }

  void set_physical_params(const PhysicalParams& p) {
    set("model.b1", p.b1);
    set("model.b2", p.b2);
    set("model.b3", p.b3);
    set("model.b4", p.b4);
    set("model.ell", p.ell);
    set("model.r_b", p.r_b);
    set("model.r_w", p.r_w);
    set("model.g", p.g);
    set("model.alpha", p.alpha);
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::string> values_;
};

}  // namespace ballbot

#endif  // BALLBOT_CONFIG_HPP
