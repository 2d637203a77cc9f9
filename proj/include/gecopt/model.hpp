#ifndef GECOPT_MODEL_HPP
#define GECOPT_MODEL_HPP

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gecopt {

// Unit conventions (fixed repo-wide): power in MW, angles in rad, branch
// reactance in per-unit on base_mva, pressure in bar, gas flow/supply/load
// in kSm3/h, costs in currency/MWh and currency/kSm3.

struct Bus {
  std::string id;
  bool is_reference = false;
};

struct Branch {
  std::string id;
  std::string from_bus;
  std::string to_bus;
  double reactance = 0.0;   // pu, > 0
  double flow_limit = 0.0;  // MW, >= 0
};

struct TieLine {
  std::string id;
  std::string from_bus;       // zone-one bus
  std::string external_zone;  // neighbour zone identifier
  double reactance = 0.0;     // pu, > 0
  double export_limit = 0.0;  // MW, >= 0
};

struct GasLink {
  std::string node;        // gas node consuming the fuel
  double conversion = 0.0; // kSm3/h per MW
};

struct Generator {
  std::string id;
  std::string bus;
  double cost_coeff = 0.0;  // currency/MWh
  double p_min = 0.0;
  double p_max = 0.0;
  double ramp_up = 0.0;     // MW/h
  double ramp_down = 0.0;   // MW/h
  std::optional<double> initial_output;
  std::optional<GasLink> gas_link;

  bool is_gas_fired() const { return gas_link.has_value(); }
};

struct WindUnit {
  std::string id;
  std::string bus;
  double p_min = 0.0;
  std::vector<double> p_max_profile;  // MW, one entry per hour
};

struct GasNode {
  std::string id;
  double pressure_min = 0.0;  // bar, > 0
  double pressure_max = 0.0;  // bar
};

struct Pipeline {
  std::string id;
  std::string from_node;
  std::string to_node;
  double weymouth_const = 0.0;  // kSm3/h per bar
  bool has_compressor = false;
};

struct GasSupplier {
  std::string id;
  std::string node;
  double cost_coeff = 0.0;  // currency/kSm3
  double s_min = 0.0;
  double s_max = 0.0;
};

struct LoadProfiles {
  std::map<std::string, std::vector<double>> electric;  // bus id -> MW per hour
  std::map<std::string, std::vector<double>> gas;       // gas node id -> kSm3/h per hour
};

struct CoupledSystem {
  double base_mva = 100.0;
  int horizon = 0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<TieLine> tie_lines;
  std::vector<Generator> generators;
  std::vector<WindUnit> wind_units;
  std::vector<GasNode> gas_nodes;
  std::vector<Pipeline> pipelines;
  std::vector<GasSupplier> suppliers;
  LoadProfiles loads;

  // non-fatal validation findings (disconnected subnetworks, missing
  // reference bus, no tie lines)
  std::vector<std::string> warnings;

  int bus_index(const std::string& id) const;
  int gas_node_index(const std::string& id) const;
  int reference_bus() const;

  double electric_load(const std::string& bus_id, int t) const;
  double gas_load(const std::string& node_id, int t) const;
};

struct PriceForecast {
  std::vector<double> lambda_tilde;  // currency/MWh, length = horizon
};

struct SolverDiagnostics {
  int slp_iterations = 0;
  double max_weymouth_residual = 0.0;   // kSm3/h
  double max_power_imbalance_pu = 0.0;  // pu
  double max_gas_imbalance = 0.0;       // kSm3/h
};

struct DispatchSolution {
  int horizon = 0;
  // indexed [t][entity], entity order matching the CoupledSystem vectors
  std::vector<std::vector<double>> gen_mw;
  std::vector<std::vector<double>> wind_mw;
  std::vector<std::vector<double>> branch_mw;
  std::vector<std::vector<double>> tie_mw;
  std::vector<std::vector<double>> angle_rad;
  std::vector<std::vector<double>> supply_ksm3h;
  std::vector<std::vector<double>> pipe_flow_ksm3h;
  std::vector<std::vector<double>> pressure_bar;

  double generation_cost = 0.0;
  double gas_cost = 0.0;
  double export_revenue = 0.0;
  double total_cost = 0.0;  // generation_cost + gas_cost - export_revenue

  SolverDiagnostics diagnostics;

  double total_export_mw() const;
  double total_generation_mw() const;
  double total_supply_ksm3() const;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string summary, std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

CoupledSystem load_system(const std::string& path);
CoupledSystem parse_system(const std::string& json_text);
std::string system_to_json(const CoupledSystem& sys);

PriceForecast load_prices(const std::string& path, int horizon);
PriceForecast parse_prices(const std::string& csv_text, int horizon);

}  // namespace gecopt

#endif
