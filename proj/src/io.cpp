#include "dnaplan/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dnaplan/error.hpp"

namespace dnaplan::io {

namespace {

void emit(const Json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in + Json(it.key()).dump() + ": ";
        emit(it.value(), out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& v : j) flat = flat && !v.is_structured();
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          emit(j[i], out, indent + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad_in;
        emit(j[i], out, indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

std::vector<double> number_array(const Json& j, const char* what) {
  if (!j.is_array()) {
    throw InvalidInput(std::string(what) + " must be an array of numbers");
  }
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) throw InvalidInput(std::string(what) + " must contain only numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

Json array_of(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw InvalidInput(std::string("missing field '") + name + "'");
  }
  return j.at(name);
}

DnaProfile make_profile(std::vector<double> grid, std::vector<double> values, Json meta) {
  if (!grid.empty()) {
    double hi = grid.front();
    for (double t : grid) hi = std::max(hi, t);
    if (std::isfinite(hi) && hi > 1.0) {
      for (double& t : grid) t /= hi;
      meta["time_scale"] = hi;
    }
  }
  if (auto report = validate(grid, values); !report.ok()) {
    throw InvalidInput(report.to_string());
  }
  return DnaProfile(TimeGrid(std::move(grid)), std::move(values), std::move(meta));
}

}  // namespace

std::string format_double(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string dump_stable(const Json& j) {
  std::string out;
  emit(j, out, 0);
  out += "\n";
  return out;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) {
    throw InvalidInput("cannot open " + p.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& contents) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + p.string());
  }
  out << contents;
}

Json read_json(const std::filesystem::path& p) {
  try {
    return Json::parse(read_file(p));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(p.string() + ": " + e.what());
  }
}

DnaProfile dna_from_json(const Json& j) {
  Json meta = j.contains("meta") ? j.at("meta") : Json::object();
  if (!meta.is_object()) {
    throw InvalidInput("'meta' must be an object");
  }
  return make_profile(number_array(field(j, "grid"), "grid"), number_array(field(j, "values"), "values"),
                      std::move(meta));
}

Json dna_to_json(const DnaProfile& dna) {
  Json j;
  j["grid"] = array_of(dna.grid.points());
  j["values"] = array_of(dna.values);
  j["meta"] = dna.meta;
  return j;
}

DnaProfile dna_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw InvalidInput("empty CSV");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,c") {
    throw InvalidInput("CSV header must be 't,c'");
  }
  std::vector<double> grid, values;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw InvalidInput("CSV row " + std::to_string(row) + " needs two columns");
    }
    try {
      std::size_t used = 0;
      const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
      grid.push_back(std::stod(a, &used));
      if (used != a.size()) throw std::invalid_argument(a);
      values.push_back(std::stod(b, &used));
      if (used != b.size()) throw std::invalid_argument(b);
    } catch (const std::logic_error&) {
      throw InvalidInput("CSV row " + std::to_string(row) + " is not numeric");
    }
  }
  return make_profile(std::move(grid), std::move(values), Json{{"format", "csv"}});
}

DnaProfile load_dna(const std::filesystem::path& p) {
  const std::string text = read_file(p);
  if (p.extension() == ".csv" || text.rfind("t,c", 0) == 0) {
    return dna_from_csv(text);
  }
  try {
    return dna_from_json(Json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(p.string() + ": " + e.what());
  }
}

Json schedule_to_json(const Schedule& s, const Json& source) {
  Json j;
  j["timesteps"] = array_of(s.timesteps);
  j["total_cost"] = s.total_cost;
  j["gain"] = s.gain;
  j["steps"] = s.steps;
  j["source"] = source;
  return j;
}

Json adaptive_to_json(const AdaptivePlanResult& r, const Json& source) {
  Json j;
  j["timesteps"] = array_of(r.schedule.timesteps);
  j["total_cost"] = r.schedule.total_cost;
  j["gain"] = r.schedule.gain;
  j["steps"] = r.schedule.steps;
  Json curve = Json::array();
  for (const auto& [n, rho] : r.rho_curve) curve.push_back(Json::array({n, rho}));
  j["rho_curve"] = std::move(curve);
  j["rho_threshold"] = r.threshold;
  j["rho_mode"] = r.mode == RhoMode::replan ? "replan" : "prefix";
  j["w_max"] = r.w_max;
  j["w_min"] = r.w_min;
  j["source"] = source;
  return j;
}

Json oracle_to_json(const oracle::OracleResult& r, const DnaProfile& dna) {
  Json j;
  j["timesteps"] = array_of(r.best_sequence);
  j["total_cost"] = r.best_cost;
  j["gain"] = -r.best_cost;
  j["steps"] = r.best_sequence.size() - 1;
  j["enumerated_count"] = r.enumerated_count;
  j["source"] = dna.meta;
  return j;
}

ScheduleFile schedule_from_json(const Json& j) {
  ScheduleFile s;
  s.timesteps = number_array(field(j, "timesteps"), "timesteps");
  if (j.contains("total_cost") && j.at("total_cost").is_number()) s.total_cost = j.at("total_cost").get<double>();
  return s;
}

Json params_to_json(const predictor::RegressorParams& p) {
  Json j;
  j["format"] = "dnaplan-regressor";
  j["version"] = 1;
  j["activation"] = "relu";
  j["dropout"] = p.dropout;
  Json layers = Json::array();
  for (const auto& l : p.layers) {
    Json lj;
    lj["in"] = l.in;
    lj["out"] = l.out;
    Json rows = Json::array();
    for (std::size_t o = 0; o < l.out; ++o) {
      rows.push_back(array_of(std::span<const double>(l.weight).subspan(o * l.in, l.in)));
    }
    lj["weight"] = std::move(rows);
    lj["bias"] = array_of(l.bias);
    layers.push_back(std::move(lj));
  }
  j["layers"] = std::move(layers);
  return j;
}

predictor::RegressorParams params_from_json(const Json& j) {
  if (!j.is_object() || j.value("format", "") != "dnaplan-regressor") {
    throw InvalidInput("not a dnaplan-regressor document");
  }
  if (j.value("version", 0) != 1) {
    throw InvalidInput("unsupported regressor version");
  }
  const auto& layers = field(j, "layers");
  if (!layers.is_array() || layers.size() != 3) {
    throw InvalidInput("regressor needs exactly 3 layers");
  }
  predictor::RegressorParams p;
  p.dropout = field(j, "dropout").get<double>();
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& lj = layers[k];
    auto& l = p.layers[k];
    l.in = field(lj, "in").get<std::size_t>();
    l.out = field(lj, "out").get<std::size_t>();
    const auto& rows = field(lj, "weight");
    if (!rows.is_array() || rows.size() != l.out) {
      throw InvalidInput("layer " + std::to_string(k) + " weight rows do not match 'out'");
    }
    l.weight.clear();
    for (const auto& row : rows) {
      auto r = number_array(row, "weight row");
      if (r.size() != l.in) throw InvalidInput("layer " + std::to_string(k) + " weight row does not match 'in'");
      l.weight.insert(l.weight.end(), r.begin(), r.end());
    }
    l.bias = number_array(field(lj, "bias"), "bias");
  }
  p.check();
  return p;
}

std::vector<predictor::Sample> dataset_from_json(const Json& j) {
  if (!j.is_array()) {
    throw InvalidInput("dataset must be a JSON array");
  }
  std::vector<predictor::Sample> out;
  out.reserve(j.size());
  for (const auto& item : j) {
    predictor::Sample s;
    s.embedding = number_array(field(item, "embedding"), "embedding");
    s.dna = dna_from_json(field(item, "dna")).values;
    out.push_back(std::move(s));
  }
  return out;
}

Json dataset_to_json(const std::vector<predictor::Sample>& data, std::span<const double> grid) {
  Json j = Json::array();
  for (const auto& s : data) {
    Json item;
    item["embedding"] = array_of(s.embedding);
    item["dna"] = Json{{"grid", array_of(grid)}, {"values", array_of(s.dna)}, {"meta", Json::object()}};
    j.push_back(std::move(item));
  }
  return j;
}

flow::SimScenario scenario_from_json(const Json& j) {
  flow::SimScenario s;
  s.x0 = number_array(field(j, "x0"), "x0");
  s.z = number_array(field(j, "z"), "z");
  s.u = number_array(field(j, "u"), "u");
  const auto& e = field(j, "e");
  s.e_grid = TimeGrid(number_array(field(e, "grid"), "e.grid"));
  s.e_values = number_array(field(e, "values"), "e.values");
  if (j.contains("off_manifold_gain")) s.off_manifold_gain = j.at("off_manifold_gain").get<double>();
  s.check();
  return s;
}

Json scenario_to_json(const flow::SimScenario& s) {
  Json j;
  j["x0"] = array_of(s.x0);
  j["z"] = array_of(s.z);
  j["u"] = array_of(s.u);
  j["e"] = Json{{"grid", array_of(s.e_grid.points())}, {"values", array_of(s.e_values)}};
  j["off_manifold_gain"] = s.off_manifold_gain;
  return j;
}

std::string rollout_to_csv(const flow::RolloutReport& r) {
  std::string out = "step,t,drift_sq,err_sq\n";
  for (const auto& s : r.steps) {
    out += std::to_string(s.step) + "," + format_double(s.t) + "," + format_double(s.drift_sq) + "," +
           format_double(s.err_sq) + "\n";
  }
  return out;
}

Json report_to_json(const diagnostics::StabilityReport& r) {
  Json j;
  j["label"] = diagnostics::to_string(r.label);
  Json regions = Json::array();
  for (const auto& [lo, hi] : r.negative_gain_regions) regions.push_back(Json::array({lo, hi}));
  j["negative_gain_regions"] = std::move(regions);
  j["suggested_start"] = r.suggested_start;
  j["suggested_stop"] = r.suggested_stop;
  j["metrics"] = Json{{"first_gain_normalized", r.first_gain_normalized},
                      {"late_sign_changes", r.late_sign_changes},
                      {"late_mean_gain", r.late_mean_gain},
                      {"early_mean_gain", r.early_mean_gain}};
  j["thresholds"] = Json{{"tau_neg", r.thresholds.tau_neg},
                         {"t_late", r.thresholds.t_late},
                         {"n_osc", r.thresholds.n_osc},
                         {"kappa", r.thresholds.kappa},
                         {"monotone_tol", r.thresholds.monotone_tol}};
  j["notes"] = Json::array({"kappa is a heuristic stand-in for 'persistently high' late-stage gain"});
  return j;
}

std::string gains_to_csv(const diagnostics::GainSeries& g) {
  std::string out = "t_mid,gain\n";
  for (std::size_t m = 0; m < g.gains.size(); ++m) {
    out += format_double(0.5 * (g.grid[m] + g.grid[m + 1])) + "," + format_double(g.gains[m]) + "\n";
  }
  return out;
}

}  // namespace dnaplan::io
