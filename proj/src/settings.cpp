#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>

#include "dfst/errors.hpp"
#include "dfst/harness.hpp"

namespace dfst::harness {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string unquote(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(trim(v), &used);
    if (used == trim(v).size()) return d;
  } catch (const std::exception&) {
  }
  throw UsageError("setting '" + key + "': expected a number, got '" + v + "'");
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != static_cast<int>(d)) throw UsageError("setting '" + key + "': expected an integer, got '" + v + "'");
  return static_cast<int>(d);
}

bool to_bool(const std::string& key, std::string v) {
  v = trim(v);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw UsageError("setting '" + key + "': expected a boolean, got '" + v + "'");
}

std::optional<double> to_auto_double(const std::string& key, const std::string& v) {
  if (trim(v) == "auto") return std::nullopt;
  return to_double(key, v);
}

std::vector<double> to_list(const std::string& key, std::string v) {
  v = trim(v);
  if (!v.empty() && v.front() == '[') v = v.substr(1);
  if (!v.empty() && v.back() == ']') v.pop_back();
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!trim(item).empty()) out.push_back(to_double(key, item));
  }
  if (out.empty()) throw UsageError("setting '" + key + "': empty list");
  return out;
}

std::string json_scalar(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "auto";
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : ",") + e.dump();
    return s;
  }
  return v.dump();
}

}  // namespace

Settings load_settings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path.string());
  Settings out;
  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw UsageError("config file must hold a flat JSON object");
    for (const auto& [k, v] : j.items()) {
      if (v.is_object()) {
        for (const auto& [k2, v2] : v.items()) out[k + "." + k2] = json_scalar(v2);
      } else {
        out[k] = json_scalar(v);
      }
    }
    return out;
  }

  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']' && line.find('=') == std::string::npos) {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path.string() + " line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    out[key] = unquote(line.substr(eq + 1));
  }
  return out;
}

std::pair<std::string, std::string> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("expected key=value, got '" + text + "'");
  return {trim(text.substr(0, eq)), unquote(text.substr(eq + 1))};
}

void apply_settings(cft::TrackerConfig& cfg, const Settings& settings) {
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters{
      {"lr_appearance", [&](auto& k, auto& v) { cfg.lr_appearance = to_double(k, v); }},
      {"lr_dim", [&](auto& k, auto& v) { cfg.lr_dim = to_double(k, v); }},
      {"num_selected", [&](auto& k, auto& v) { cfg.num_selected = to_int(k, v); }},
      {"compressed_dim", [&](auto& k, auto& v) { cfg.compressed_dim = to_int(k, v); }},
      {"kernel_sigma", [&](auto& k, auto& v) { cfg.kernel_sigma = to_double(k, v); }},
      {"label_sigma_factor", [&](auto& k, auto& v) { cfg.label_sigma_factor = to_double(k, v); }},
      {"lambda_reg", [&](auto& k, auto& v) { cfg.lambda_reg = to_double(k, v); }},
      {"padding", [&](auto& k, auto& v) { cfg.padding = to_auto_double(k, v); }},
      {"inffs_decay", [&](auto& k, auto& v) { cfg.inffs_decay = to_auto_double(k, v); }},
      {"microshift", [&](auto& k, auto& v) { cfg.microshift = to_bool(k, v); }},
      {"scale_adapt", [&](auto& k, auto& v) { cfg.scale_adapt = to_bool(k, v); }},
      {"max_template_cells", [&](auto& k, auto& v) { cfg.max_template_cells = to_int(k, v); }},
      {"rng_seed", [&](auto& k, auto& v) { cfg.scale.rng_seed = static_cast<std::uint64_t>(to_int(k, v)); }},
      {"scale.atoms", [&](auto& k, auto& v) { cfg.scale.atoms = to_int(k, v); }},
      {"scale.max_iters", [&](auto& k, auto& v) { cfg.scale.max_iters = to_int(k, v); }},
      {"scale.sparsity", [&](auto& k, auto& v) { cfg.scale.sparsity = to_double(k, v); }},
      {"scale.patch_side", [&](auto& k, auto& v) { cfg.scale.patch_side = to_int(k, v); }},
      {"scale.scales", [&](auto& k, auto& v) { cfg.scale.scales = to_list(k, v); }},
      {"scale.shifts", [&](auto& k, auto& v) { cfg.scale.shifts = to_list(k, v); }},
      {"scale.damping", [&](auto& k, auto& v) { cfg.scale.damping = to_double(k, v); }},
      {"scale.rng_seed", [&](auto& k, auto& v) { cfg.scale.rng_seed = static_cast<std::uint64_t>(to_int(k, v)); }},
  };
  for (const auto& [key, value] : settings) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw UsageError("unknown setting '" + key + "'");
    it->second(key, value);
  }
}

nlohmann::json to_json(const cft::TrackerConfig& cfg) {
  nlohmann::json j = {
      {"lr_appearance", cfg.lr_appearance},
      {"lr_dim", cfg.lr_dim},
      {"num_selected", cfg.num_selected},
      {"compressed_dim", cfg.compressed_dim},
      {"kernel_sigma", cfg.kernel_sigma},
      {"label_sigma_factor", cfg.label_sigma_factor},
      {"lambda_reg", cfg.lambda_reg},
      {"padding", cfg.padding ? nlohmann::json(*cfg.padding) : nlohmann::json("auto")},
      {"inffs_decay", cfg.inffs_decay ? nlohmann::json(*cfg.inffs_decay) : nlohmann::json("auto")},
      {"microshift", cfg.microshift},
      {"scale_adapt", cfg.scale_adapt},
      {"max_template_cells", cfg.max_template_cells},
      {"scale",
       {{"atoms", cfg.scale.atoms},
        {"max_iters", cfg.scale.max_iters},
        {"sparsity", cfg.scale.sparsity},
        {"patch_side", cfg.scale.patch_side},
        {"scales", cfg.scale.scales},
        {"shifts", cfg.scale.shifts},
        {"damping", cfg.scale.damping},
        {"rng_seed", cfg.scale.rng_seed}}},
  };
  return j;
}

}  // namespace dfst::harness
