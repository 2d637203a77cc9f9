#include "gecopt/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace gecopt {

using nlohmann::json;

int CoupledSystem::bus_index(const std::string& id) const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == id) return static_cast<int>(i);
  return -1;
}

int CoupledSystem::gas_node_index(const std::string& id) const {
  for (std::size_t i = 0; i < gas_nodes.size(); ++i)
    if (gas_nodes[i].id == id) return static_cast<int>(i);
  return -1;
}

int CoupledSystem::reference_bus() const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].is_reference) return static_cast<int>(i);
  return -1;
}

double CoupledSystem::electric_load(const std::string& bus_id, int t) const {
  auto it = loads.electric.find(bus_id);
  if (it == loads.electric.end()) return 0.0;
  return it->second.at(static_cast<std::size_t>(t));
}

double CoupledSystem::gas_load(const std::string& node_id, int t) const {
  auto it = loads.gas.find(node_id);
  if (it == loads.gas.end()) return 0.0;
  return it->second.at(static_cast<std::size_t>(t));
}

double DispatchSolution::total_export_mw() const {
  double s = 0.0;
  for (const auto& row : tie_mw) s = std::accumulate(row.begin(), row.end(), s);
  return s;
}

double DispatchSolution::total_generation_mw() const {
  double s = 0.0;
  for (const auto& row : gen_mw) s = std::accumulate(row.begin(), row.end(), s);
  return s;
}

double DispatchSolution::total_supply_ksm3() const {
  double s = 0.0;
  for (const auto& row : supply_ksm3h)
    s = std::accumulate(row.begin(), row.end(), s);
  return s;
}

ValidationError::ValidationError(std::string summary,
                                 std::vector<std::string> violations)
    : std::runtime_error(std::move(summary)), violations_(std::move(violations)) {}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double get_num(const json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key))
    throw ParseError("missing field '" + std::string(key) + "' in " + ctx);
  if (!j[key].is_number())
    throw ParseError("field '" + std::string(key) + "' in " + ctx +
                     " is not a number");
  return j[key].get<double>();
}

std::string get_str(const json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key))
    throw ParseError("missing field '" + std::string(key) + "' in " + ctx);
  return j[key].get<std::string>();
}

// union-find connectivity over an edge list of index pairs
bool connected(int n, const std::vector<std::pair<int, int>>& edges) {
  if (n <= 1) return true;
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (auto [a, b] : edges) parent[find(a)] = find(b);
  int root = find(0);
  for (int i = 1; i < n; ++i)
    if (find(i) != root) return false;
  return true;
}

void validate(CoupledSystem& sys) {
  std::vector<std::string>& warn = sys.warnings;
  std::vector<std::string> bad;
  const int T = sys.horizon;
  if (T <= 0) bad.push_back("horizon must be positive");
  if (sys.base_mva <= 0) bad.push_back("base_mva must be positive");

  // bus ids unique, exactly one reference
  {
    std::map<std::string, int> seen;
    int refs = 0;
    for (auto& b : sys.buses) {
      if (++seen[b.id] > 1) bad.push_back("duplicate bus id '" + b.id + "'");
      if (b.is_reference) ++refs;
    }
    if (refs > 1) bad.push_back("more than one reference bus");
    if (refs == 0 && !sys.buses.empty()) {
      auto it = std::min_element(
          sys.buses.begin(), sys.buses.end(),
          [](const Bus& a, const Bus& b) { return a.id < b.id; });
      it->is_reference = true;
      warn.push_back("no reference bus marked; using lowest-id bus '" +
                     it->id + "'");
    }
  }

  auto check_bus = [&](const std::string& id, const std::string& ctx) {
    if (sys.bus_index(id) < 0)
      bad.push_back(ctx + " references unknown bus '" + id + "'");
  };
  auto check_node = [&](const std::string& id, const std::string& ctx) {
    if (sys.gas_node_index(id) < 0)
      bad.push_back(ctx + " references unknown gas node '" + id + "'");
  };

  for (auto& br : sys.branches) {
    const std::string ctx = "branch '" + br.id + "'";
    if (br.reactance <= 0) bad.push_back(ctx + ": reactance must be > 0");
    if (br.flow_limit < 0) bad.push_back(ctx + ": flow_limit must be >= 0");
    if (br.from_bus == br.to_bus) bad.push_back(ctx + ": endpoints equal");
    check_bus(br.from_bus, ctx);
    check_bus(br.to_bus, ctx);
  }
  for (auto& tl : sys.tie_lines) {
    const std::string ctx = "tie_line '" + tl.id + "'";
    if (tl.reactance <= 0) bad.push_back(ctx + ": reactance must be > 0");
    if (tl.export_limit < 0) bad.push_back(ctx + ": export_limit must be >= 0");
    check_bus(tl.from_bus, ctx);
  }
  for (auto& g : sys.generators) {
    const std::string ctx = "generator '" + g.id + "'";
    if (g.p_min < 0 || g.p_min > g.p_max)
      bad.push_back(ctx + ": requires 0 <= p_min <= p_max");
    if (g.ramp_up < 0 || g.ramp_down < 0)
      bad.push_back(ctx + ": ramp limits must be >= 0");
    check_bus(g.bus, ctx);
    if (g.gas_link) {
      if (g.gas_link->conversion < 0)
        bad.push_back(ctx + ": gas conversion must be >= 0");
      check_node(g.gas_link->node, ctx);
    }
  }
  for (auto& w : sys.wind_units) {
    const std::string ctx = "wind_unit '" + w.id + "'";
    if (static_cast<int>(w.p_max_profile.size()) != T)
      bad.push_back(ctx + ": p_max_profile length != horizon");
    if (w.p_min < 0) bad.push_back(ctx + ": p_min must be >= 0");
    for (double v : w.p_max_profile)
      if (v < w.p_min) {
        bad.push_back(ctx + ": p_max_profile entry below p_min");
        break;
      }
    check_bus(w.bus, ctx);
  }
  {
    std::map<std::string, int> seen;
    for (auto& n : sys.gas_nodes) {
      const std::string ctx = "gas_node '" + n.id + "'";
      if (++seen[n.id] > 1) bad.push_back("duplicate gas node id '" + n.id + "'");
      if (!(n.pressure_min > 0 && n.pressure_min <= n.pressure_max))
        bad.push_back(ctx + ": requires 0 < pressure_min <= pressure_max");
    }
  }
  for (auto& p : sys.pipelines) {
    const std::string ctx = "pipeline '" + p.id + "'";
    if (p.weymouth_const <= 0)
      bad.push_back(ctx + ": weymouth_const must be > 0");
    if (p.from_node == p.to_node) bad.push_back(ctx + ": endpoints equal");
    check_node(p.from_node, ctx);
    check_node(p.to_node, ctx);
  }
  for (auto& s : sys.suppliers) {
    const std::string ctx = "supplier '" + s.id + "'";
    if (s.s_min < 0 || s.s_min > s.s_max)
      bad.push_back(ctx + ": requires 0 <= s_min <= s_max");
    check_node(s.node, ctx);
  }
  for (auto& [bus, prof] : sys.loads.electric) {
    const std::string ctx = "electric load at '" + bus + "'";
    check_bus(bus, ctx);
    if (static_cast<int>(prof.size()) != T)
      bad.push_back(ctx + ": profile length != horizon");
    for (double v : prof)
      if (v < 0) {
        bad.push_back(ctx + ": negative load value");
        break;
      }
  }
  for (auto& [node, prof] : sys.loads.gas) {
    const std::string ctx = "gas load at '" + node + "'";
    check_node(node, ctx);
    if (static_cast<int>(prof.size()) != T)
      bad.push_back(ctx + ": profile length != horizon");
    for (double v : prof)
      if (v < 0) {
        bad.push_back(ctx + ": negative load value");
        break;
      }
  }

  if (!bad.empty())
    throw ValidationError("system validation failed (" +
                              std::to_string(bad.size()) + " violations)",
                          bad);

  // non-fatal checks
  {
    std::vector<std::pair<int, int>> edges;
    for (auto& br : sys.branches)
      edges.emplace_back(sys.bus_index(br.from_bus), sys.bus_index(br.to_bus));
    if (!connected(static_cast<int>(sys.buses.size()), edges))
      warn.push_back("electric network is disconnected");
  }
  {
    std::vector<std::pair<int, int>> edges;
    for (auto& p : sys.pipelines)
      edges.emplace_back(sys.gas_node_index(p.from_node),
                         sys.gas_node_index(p.to_node));
    if (!connected(static_cast<int>(sys.gas_nodes.size()), edges))
      warn.push_back("gas network is disconnected");
  }
  if (sys.tie_lines.empty())
    warn.push_back("no tie lines: export revenue term is vacuous");
}

}  // namespace

CoupledSystem parse_system(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed system JSON: ") + e.what());
  }
  CoupledSystem sys;
  try {
    sys.base_mva = get_num(j, "base_mva", "document");
    sys.horizon = static_cast<int>(get_num(j, "horizon", "document"));
    for (const auto& b : j.value("buses", json::array())) {
      Bus bus;
      bus.id = get_str(b, "id", "bus");
      bus.is_reference = b.value("is_reference", false);
      sys.buses.push_back(bus);
    }
    int k = 0;
    for (const auto& e : j.value("branches", json::array())) {
      Branch br;
      br.id = e.value("id", "branch" + std::to_string(k++));
      br.from_bus = get_str(e, "from_bus", "branch");
      br.to_bus = get_str(e, "to_bus", "branch");
      br.reactance = get_num(e, "reactance", "branch '" + br.id + "'");
      br.flow_limit = get_num(e, "flow_limit", "branch '" + br.id + "'");
      sys.branches.push_back(br);
    }
    k = 0;
    for (const auto& e : j.value("tie_lines", json::array())) {
      TieLine tl;
      tl.id = e.value("id", "tie" + std::to_string(k++));
      tl.from_bus = get_str(e, "from_bus", "tie_line");
      tl.external_zone = get_str(e, "external_zone", "tie_line");
      tl.reactance = get_num(e, "reactance", "tie_line '" + tl.id + "'");
      tl.export_limit = get_num(e, "export_limit", "tie_line '" + tl.id + "'");
      sys.tie_lines.push_back(tl);
    }
    for (const auto& e : j.value("generators", json::array())) {
      Generator g;
      g.id = get_str(e, "id", "generator");
      const std::string ctx = "generator '" + g.id + "'";
      g.bus = get_str(e, "bus", ctx);
      g.cost_coeff = get_num(e, "cost_coeff", ctx);
      g.p_min = get_num(e, "p_min", ctx);
      g.p_max = get_num(e, "p_max", ctx);
      g.ramp_up = get_num(e, "ramp_up", ctx);
      g.ramp_down = get_num(e, "ramp_down", ctx);
      if (e.contains("initial_output") && !e["initial_output"].is_null())
        g.initial_output = e["initial_output"].get<double>();
      if (e.contains("gas_link") && !e["gas_link"].is_null()) {
        GasLink link;
        link.node = get_str(e["gas_link"], "node", ctx + " gas_link");
        link.conversion = get_num(e["gas_link"], "conversion", ctx + " gas_link");
        g.gas_link = link;
      }
      sys.generators.push_back(g);
    }
    for (const auto& e : j.value("wind_units", json::array())) {
      WindUnit w;
      w.id = get_str(e, "id", "wind_unit");
      w.bus = get_str(e, "bus", "wind_unit '" + w.id + "'");
      w.p_min = get_num(e, "p_min", "wind_unit '" + w.id + "'");
      w.p_max_profile = e.value("p_max_profile", std::vector<double>{});
      sys.wind_units.push_back(w);
    }
    for (const auto& e : j.value("gas_nodes", json::array())) {
      GasNode n;
      n.id = get_str(e, "id", "gas_node");
      n.pressure_min = get_num(e, "pressure_min", "gas_node '" + n.id + "'");
      n.pressure_max = get_num(e, "pressure_max", "gas_node '" + n.id + "'");
      sys.gas_nodes.push_back(n);
    }
    k = 0;
    for (const auto& e : j.value("pipelines", json::array())) {
      Pipeline p;
      p.id = e.value("id", "pipe" + std::to_string(k++));
      p.from_node = get_str(e, "from_node", "pipeline");
      p.to_node = get_str(e, "to_node", "pipeline");
      p.weymouth_const = get_num(e, "weymouth_const", "pipeline '" + p.id + "'");
      p.has_compressor = e.value("has_compressor", false);
      sys.pipelines.push_back(p);
    }
    for (const auto& e : j.value("suppliers", json::array())) {
      GasSupplier s;
      s.id = get_str(e, "id", "supplier");
      s.node = get_str(e, "node", "supplier '" + s.id + "'");
      s.cost_coeff = get_num(e, "cost_coeff", "supplier '" + s.id + "'");
      s.s_min = get_num(e, "s_min", "supplier '" + s.id + "'");
      s.s_max = get_num(e, "s_max", "supplier '" + s.id + "'");
      sys.suppliers.push_back(s);
    }
    const json eloads = j.value("electric_loads", json::object());
    for (const auto& [key, val] : eloads.items())
      sys.loads.electric[key] = val.get<std::vector<double>>();
    const json gloads = j.value("gas_loads", json::object());
    for (const auto& [key, val] : gloads.items())
      sys.loads.gas[key] = val.get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed system JSON: ") + e.what());
  }
  validate(sys);
  return sys;
}

CoupledSystem load_system(const std::string& path) {
  return parse_system(read_file(path));
}

std::string system_to_json(const CoupledSystem& sys) {
  json j;
  j["base_mva"] = sys.base_mva;
  j["horizon"] = sys.horizon;
  j["buses"] = json::array();
  for (const auto& b : sys.buses)
    j["buses"].push_back({{"id", b.id}, {"is_reference", b.is_reference}});
  j["branches"] = json::array();
  for (const auto& br : sys.branches)
    j["branches"].push_back({{"id", br.id},
                             {"from_bus", br.from_bus},
                             {"to_bus", br.to_bus},
                             {"reactance", br.reactance},
                             {"flow_limit", br.flow_limit}});
  j["tie_lines"] = json::array();
  for (const auto& tl : sys.tie_lines)
    j["tie_lines"].push_back({{"id", tl.id},
                              {"from_bus", tl.from_bus},
                              {"external_zone", tl.external_zone},
                              {"reactance", tl.reactance},
                              {"export_limit", tl.export_limit}});
  j["generators"] = json::array();
  for (const auto& g : sys.generators) {
    json e = {{"id", g.id},           {"bus", g.bus},
              {"cost_coeff", g.cost_coeff}, {"p_min", g.p_min},
              {"p_max", g.p_max},     {"ramp_up", g.ramp_up},
              {"ramp_down", g.ramp_down}};
    if (g.initial_output) e["initial_output"] = *g.initial_output;
    if (g.gas_link)
      e["gas_link"] = {{"node", g.gas_link->node},
                       {"conversion", g.gas_link->conversion}};
    j["generators"].push_back(e);
  }
  j["wind_units"] = json::array();
  for (const auto& w : sys.wind_units)
    j["wind_units"].push_back({{"id", w.id},
                               {"bus", w.bus},
                               {"p_min", w.p_min},
                               {"p_max_profile", w.p_max_profile}});
  j["gas_nodes"] = json::array();
  for (const auto& n : sys.gas_nodes)
    j["gas_nodes"].push_back({{"id", n.id},
                              {"pressure_min", n.pressure_min},
                              {"pressure_max", n.pressure_max}});
  j["pipelines"] = json::array();
  for (const auto& p : sys.pipelines)
    j["pipelines"].push_back({{"id", p.id},
                              {"from_node", p.from_node},
                              {"to_node", p.to_node},
                              {"weymouth_const", p.weymouth_const},
                              {"has_compressor", p.has_compressor}});
  j["suppliers"] = json::array();
  for (const auto& s : sys.suppliers)
    j["suppliers"].push_back({{"id", s.id},
                              {"node", s.node},
                              {"cost_coeff", s.cost_coeff},
                              {"s_min", s.s_min},
                              {"s_max", s.s_max}});
  j["electric_loads"] = sys.loads.electric;
  j["gas_loads"] = sys.loads.gas;
  return j.dump(2) + "\n";
}

PriceForecast parse_prices(const std::string& csv_text, int horizon) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty prices file");
  // header: hour,lambda_tilde
  PriceForecast fc;
  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ParseError("prices row " + std::to_string(row + 1) +
                       ": expected 'hour,lambda_tilde'");
    double v;
    try {
      v = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw ParseError("prices row " + std::to_string(row + 1) +
                       ": bad number '" + line.substr(comma + 1) + "'");
    }
    if (v < 0)
      throw ParseError("prices row " + std::to_string(row + 1) +
                       ": negative price " + std::to_string(v));
    fc.lambda_tilde.push_back(v);
    ++row;
  }
  if (row != horizon)
    throw ParseError("prices length mismatch: got " + std::to_string(row) +
                     " rows, horizon is " + std::to_string(horizon));
  return fc;
}

PriceForecast load_prices(const std::string& path, int horizon) {
  return parse_prices(read_file(path), horizon);
}

}  // namespace gecopt
