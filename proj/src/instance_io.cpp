#include "lubyndt/instance_io.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <string>

namespace lubyndt::io {

using nlohmann::json;

json instance_to_json(const Instance& inst) {
  json nodes = json::array();
  for (const auto& n : inst.connectivity.nodes) {
    nodes.push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}});
  }
  json links = json::array();
  for (const auto& l : inst.connectivity.links) {
    links.push_back({{"id", l.id}, {"src", l.src}, {"dst", l.dst}});
  }
  json conflicts = json::array();
  for (const auto& e : inst.conflicts.edges) conflicts.push_back({e.a, e.b});
  json flows = json::array();
  for (const auto& f : inst.flows.flows) {
    flows.push_back(
        {{"id", f.id}, {"src", f.src}, {"dst", f.dst}, {"a_f", f.base_rate}, {"path", f.path}});
  }
  json lambda = json::array();
  for (std::size_t e = 0; e < inst.routing.num_links; ++e) {
    json row = json::array();
    for (std::size_t f = 0; f < inst.routing.num_flows; ++f) {
      row.push_back(inst.routing(static_cast<LinkId>(e), static_cast<FlowId>(f)));
    }
    lambda.push_back(std::move(row));
  }
  return {{"schema_version", kInstanceSchemaVersion},
          {"nodes", nodes},
          {"links", links},
          {"conflicts", conflicts},
          {"flows", flows},
          {"lambda", lambda},
          {"rates", inst.rates},
          {"beta", inst.flows.load},
          {"seeds", {{"topology", inst.seeds.topology}, {"realization", inst.seeds.realization}}}};
}

namespace {

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw std::invalid_argument(where + ": missing field '" + key + "'");
  }
  return j.at(key);
}

template <typename T>
T get(const json& j, const char* key, const std::string& where) {
  const auto& v = require(j, key, where);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(where + ": malformed field '" + key + "'");
  }
}

}  // namespace

Instance instance_from_json(const json& j) {
  const std::string where = "instance";
  const int version = get<int>(j, "schema_version", where);
  if (version != kInstanceSchemaVersion) {
    throw std::invalid_argument(where + ": unsupported schema_version " + std::to_string(version));
  }
  Instance inst;
  for (const auto& n : require(j, "nodes", where)) {
    inst.connectivity.nodes.push_back(
        {get<NodeId>(n, "id", "nodes[]"), get<double>(n, "x", "nodes[]"), get<double>(n, "y", "nodes[]")});
  }
  for (const auto& l : require(j, "links", where)) {
    inst.connectivity.links.push_back(
        {get<LinkId>(l, "id", "links[]"), get<NodeId>(l, "src", "links[]"), get<NodeId>(l, "dst", "links[]")});
  }
  std::vector<std::pair<LinkId, LinkId>> pairs;
  try {
    for (const auto& c : require(j, "conflicts", where)) {
      pairs.emplace_back(c.at(0).get<LinkId>(), c.at(1).get<LinkId>());
    }
  } catch (const json::exception&) {
    throw std::invalid_argument(where + ": malformed field 'conflicts'");
  }
  inst.conflicts = ConflictGraph::from_edges(inst.connectivity.num_links(), std::move(pairs));
  inst.flows.load = get<double>(j, "beta", where);
  for (const auto& f : require(j, "flows", where)) {
    Flow flow;
    flow.id = get<FlowId>(f, "id", "flows[]");
    flow.src = get<NodeId>(f, "src", "flows[]");
    flow.dst = get<NodeId>(f, "dst", "flows[]");
    flow.base_rate = get<double>(f, "a_f", "flows[]");
    flow.path = get<std::vector<LinkId>>(f, "path", "flows[]");
    inst.flows.flows.push_back(std::move(flow));
  }
  const auto lambda = get<std::vector<std::vector<double>>>(j, "lambda", where);
  inst.routing = RoutingMatrix(inst.connectivity.num_links(), inst.flows.size());
  if (lambda.size() != inst.routing.num_links) {
    throw std::invalid_argument(where + ": field 'lambda' must have one row per link");
  }
  for (std::size_t e = 0; e < lambda.size(); ++e) {
    if (lambda[e].size() != inst.routing.num_flows) {
      throw std::invalid_argument(where + ": field 'lambda' must have one column per flow");
    }
    for (std::size_t f = 0; f < lambda[e].size(); ++f) {
      inst.routing(static_cast<LinkId>(e), static_cast<FlowId>(f)) = lambda[e][f];
    }
  }
  inst.rates = get<std::vector<double>>(j, "rates", where);
  const auto& seeds = require(j, "seeds", where);
  inst.seeds.topology = get<std::uint64_t>(seeds, "topology", "seeds");
  inst.seeds.realization = get<std::uint64_t>(seeds, "realization", "seeds");
  return inst;
}

json sim_result_to_json(const sim::SimResult& r, const ConflictGraph& g) {
  json joint = json::object();
  for (std::size_t k = 0; k < r.joint_b.size() && k < g.num_edges(); ++k) {
    joint[std::to_string(g.edges[k].a) + "-" + std::to_string(g.edges[k].b)] = r.joint_b[k];
  }
  json echo = {{"rounds", r.rounds},
               {"horizon", r.horizon},
               {"rate_sigma", r.rate_sigma},
               {"seed", r.seed},
               {"gated", r.gated},
               {"arrived", r.arrived},
               {"delivered", r.delivered}};
  if (r.gated) echo["gating"] = {{"window", r.gating_window}, {"factor", r.gating_factor}};
  return {{"duty_cycles", r.duty_cycles},
          {"terminal_queues", r.terminal_queues},
          {"marginal_b", r.marginal_b},
          {"joint_b", joint},
          {"wall_clock_s", r.wall_clock_s},
          {"config_echo", echo}};
}

json policy_to_json(const opt::PolicyBundle& p) {
  return {{"z_tilde", std::vector<double>(p.z_tilde.values().begin(), p.z_tilde.values().end())},
          {"x_tilde", p.x_tilde},
          {"gating", {{"window", p.gating_window}, {"factor", p.gating_factor}}},
          {"loss_trajectory", p.loss_trajectory}};
}

opt::PolicyBundle policy_from_json(const json& j) {
  const std::string where = "policy";
  opt::PolicyBundle p;
  p.z_tilde = PriorityVector(get<std::vector<double>>(j, "z_tilde", where));
  p.x_tilde = get<std::vector<double>>(j, "x_tilde", where);
  const auto& gating = require(j, "gating", where);
  p.gating_window = get<int>(gating, "window", "gating");
  p.gating_factor = get<double>(gating, "factor", "gating");
  p.loss_trajectory = get<std::vector<double>>(j, "loss_trajectory", where);
  if (!p.loss_trajectory.empty()) {
    p.best_loss = *std::min_element(p.loss_trajectory.begin(), p.loss_trajectory.end());
  }
  return p;
}

json prediction_to_json(const ndt::NdtResult& r, std::span<const double> overload) {
  json out = {{"duty_cycles", r.duty_cycles},
              {"overload_index", std::vector<double>(overload.begin(), overload.end())}};
  if (!r.trace.duty.empty()) {
    out["trace"] = {{"duty", r.trace.duty},
                    {"capacity", r.trace.capacity},
                    {"contention", r.trace.contention}};
  }
  return out;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + " is not valid JSON: " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace lubyndt::io
