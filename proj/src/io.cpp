#include "franson/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace franson {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

const std::set<std::string> kKnownKeys = {
    "kind",          "gamma_a",       "gamma_b",        "dt",
    "n_steps",       "m",             "phi_fb",         "n_t",
    "phi_t",         "feedback_enabled", "photon_cutoff", "epsilon",
    "max_bond",      "phi_t_list",    "output_path",    "threads",
    "gamma_a_T_list", "gamma_b_T_list", "dt_over_T",    "fb_delay_over_T",
    "residual_target"};

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  std::vector<std::string> errors;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      errors.push_back("line " + std::to_string(line_no) + ": empty key");
    } else if (out.count(key) != 0U) {
      errors.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    } else {
      out[key] = value;
    }
  }
  if (!errors.empty()) {
    std::string msg = "config parse errors:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
  return out;
}

ExperimentSpec spec_from_config(const std::string& text) {
  const auto kv = parse_key_values(text);
  std::vector<std::string> errors;

  auto take = [&](const std::string& key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  auto as_double = [&](const std::string& key, double& target) {
    if (const std::string* v = take(key)) {
      try {
        size_t used = 0;
        target = std::stod(*v, &used);
        if (used != v->size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        errors.push_back(key + ": not a number: '" + *v + "'");
      }
    }
  };
  auto as_int = [&](const std::string& key, auto& target) {
    if (const std::string* v = take(key)) {
      try {
        size_t used = 0;
        const long long x = std::stoll(*v, &used);
        if (used != v->size()) throw std::invalid_argument("trailing");
        target = static_cast<std::decay_t<decltype(target)>>(x);
      } catch (const std::exception&) {
        errors.push_back(key + ": not an integer: '" + *v + "'");
      }
    }
  };
  auto as_bool = [&](const std::string& key, bool& target) {
    if (const std::string* v = take(key)) {
      if (*v == "true" || *v == "1") {
        target = true;
      } else if (*v == "false" || *v == "0") {
        target = false;
      } else {
        errors.push_back(key + ": expected true/false: '" + *v + "'");
      }
    }
  };
  auto as_list = [&](const std::string& key, std::vector<double>& target) {
    if (const std::string* v = take(key)) {
      target.clear();
      for (const std::string& item : split(*v, ',')) {
        try {
          size_t used = 0;
          target.push_back(std::stod(item, &used));
          if (used != item.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
          errors.push_back(key + ": not a number in list: '" + item + "'");
        }
      }
    }
  };

  for (const auto& [key, value] : kv) {
    (void)value;
    if (kKnownKeys.count(key) == 0U) errors.push_back("unknown key '" + key + "'");
  }

  ExperimentSpec spec;
  if (const std::string* v = take("kind")) {
    spec.kind = *v;
  } else {
    errors.push_back("kind: missing (one of benchmark, dynamics, g2, visibility, sweep, oracle)");
  }
  static const std::set<std::string> kKinds = {"benchmark", "dynamics", "g2",
                                               "visibility", "sweep", "oracle"};
  if (!spec.kind.empty() && kKinds.count(spec.kind) == 0U) {
    errors.push_back("kind: unknown experiment '" + spec.kind + "'");
  }

  as_double("gamma_a", spec.params.gamma_a);
  as_double("gamma_b", spec.params.gamma_b);
  as_double("dt", spec.params.dt);
  as_int("n_steps", spec.params.n_steps);
  as_int("m", spec.params.m);
  as_double("phi_fb", spec.params.phi_fb);
  as_int("n_t", spec.params.n_t);
  as_double("phi_t", spec.params.phi_t);
  as_bool("feedback_enabled", spec.params.feedback_enabled);
  as_int("photon_cutoff", spec.params.photon_cutoff);
  as_double("epsilon", spec.params.truncation.epsilon);
  if (take("max_bond") != nullptr) {
    Index mb = 0;
    as_int("max_bond", mb);
    if (mb > 0) spec.params.truncation.max_bond = mb;
  }
  as_list("phi_t_list", spec.phi_t_list);
  if (spec.phi_t_list.empty()) spec.phi_t_list = {spec.params.phi_t};
  if (const std::string* v = take("output_path")) spec.output_path = *v;
  as_int("threads", spec.threads);

  as_list("gamma_a_T_list", spec.sweep.gamma_a_T);
  as_list("gamma_b_T_list", spec.sweep.gamma_b_T);
  as_double("dt_over_T", spec.sweep.dt_over_T);
  as_double("fb_delay_over_T", spec.sweep.fb_delay_over_T);
  as_double("residual_target", spec.sweep.residual_target);
  spec.sweep.phi_fb = spec.params.phi_fb;
  spec.sweep.truncation = spec.params.truncation;

  if (spec.kind == "sweep") {
    if (spec.sweep.gamma_a_T.empty()) errors.push_back("gamma_a_T_list: required for kind=sweep");
    if (spec.sweep.gamma_b_T.empty()) errors.push_back("gamma_b_T_list: required for kind=sweep");
  } else if (!spec.kind.empty()) {
    try {
      spec.params = validate(spec.params);
    } catch (const std::invalid_argument& ex) {
      errors.push_back(ex.what());
    }
  }

  if (!errors.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
  return spec;
}

std::string format_double(double value) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, value);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == value) break;
  }
  return buf;
}

std::vector<std::pair<std::string, std::string>> describe(const ExperimentSpec& spec) {
  const ModelParams& p = spec.params;
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("kind", spec.kind);
  out.emplace_back("gamma_a", format_double(p.gamma_a));
  out.emplace_back("gamma_b", format_double(p.gamma_b));
  out.emplace_back("dt", format_double(p.dt));
  out.emplace_back("n_steps", std::to_string(p.n_steps));
  out.emplace_back("m", std::to_string(p.m));
  out.emplace_back("phi_fb", format_double(p.phi_fb));
  out.emplace_back("n_t", std::to_string(p.n_t));
  out.emplace_back("phi_t", format_double(p.phi_t));
  out.emplace_back("feedback_enabled", p.feedback_enabled ? "true" : "false");
  out.emplace_back("photon_cutoff", std::to_string(p.photon_cutoff));
  out.emplace_back("epsilon", format_double(p.truncation.epsilon));
  out.emplace_back("max_bond",
                   p.truncation.max_bond ? std::to_string(*p.truncation.max_bond) : "none");
  if (spec.kind == "benchmark") {
    std::string list;
    for (double phi : spec.phi_t_list) {
      if (!list.empty()) list += ",";
      list += format_double(phi);
    }
    out.emplace_back("phi_t_list", list);
  }
  if (spec.kind == "sweep") {
    auto join = [](const std::vector<double>& xs) {
      std::string s;
      for (double x : xs) {
        if (!s.empty()) s += ",";
        s += format_double(x);
      }
      return s;
    };
    out.emplace_back("gamma_a_T_list", join(spec.sweep.gamma_a_T));
    out.emplace_back("gamma_b_T_list", join(spec.sweep.gamma_b_T));
    out.emplace_back("dt_over_T", format_double(spec.sweep.dt_over_T));
    out.emplace_back("fb_delay_over_T", format_double(spec.sweep.fb_delay_over_T));
    out.emplace_back("residual_target", format_double(spec.sweep.residual_target));
  }
  return out;
}

std::string csv_document(const ExperimentSpec& spec, const std::vector<std::string>& columns,
                         const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (const auto& [key, value] : describe(spec)) {
    out += "# " + key + " = " + value + "\n";
  }
  for (size_t i = 0; i < columns.size(); ++i) {
    out += (i == 0 ? "" : ",") + columns[i];
  }
  out += "\n";
  for (const auto& row : rows) {
    if (row.size() != columns.size()) throw std::logic_error("csv_document: ragged row");
    for (size_t i = 0; i < row.size(); ++i) {
      if (i != 0) out += ",";
      out += format_double(row[i]);
    }
    out += "\n";
  }
  return out;
}

std::string json_sidecar(const ExperimentSpec& spec, const std::vector<std::string>& columns) {
  nlohmann::ordered_json j;
  for (const auto& [key, value] : describe(spec)) j["params"][key] = value;
  j["columns"] = columns;
  return j.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << body;
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace franson
