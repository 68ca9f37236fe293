#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "normsim/config.hpp"
#include "normsim/sim.hpp"

namespace normsim {

namespace {

const char* initial_name(InitialMode m) {
  switch (m) {
    case InitialMode::AllTop: return "all-top";
    case InitialMode::AllZero: return "all-zero";
    default: return "uniform";
  }
}

InitialMode parse_initial(const std::string& s) {
  if (s == "uniform") return InitialMode::Uniform;
  if (s == "all-top") return InitialMode::AllTop;
  if (s == "all-zero") return InitialMode::AllZero;
  throw ConfigError("spec: key 'initial' must be one of uniform, all-top, all-zero (got '" + s + "')");
}

bool is_sim_mode(const std::string& mode) {
  return mode == "evolution" || mode == "delta-sweep" || mode == "mixed" || mode == "varying-b" ||
         mode == "adaptive-belief";
}

std::string label_of(const char* name, double value) {
  std::ostringstream os;
  os << name << '=' << value;
  return os.str();
}

}  // namespace

ExperimentSpec parse_experiment_spec(const nlohmann::json& j) {
  const std::string where = "spec";
  if (!j.is_object()) throw ConfigError("spec: expected a JSON object");
  ExperimentSpec spec;
  spec.mode = read_field<std::string>(j, "mode", where);

  std::vector<std::string> allowed = {"schema_version", "mode", "params", "seed"};
  const auto allow = [&](std::initializer_list<const char*> keys) { allowed.insert(allowed.end(), keys.begin(), keys.end()); };
  if (is_sim_mode(spec.mode)) allow({"periods", "sample_stride", "tail_fraction", "initial"});
  if (spec.mode == "delta-sweep") allow({"deltas", "benefits"});
  else if (spec.mode == "mixed") allow({"groups"});
  else if (spec.mode == "varying-b") allow({"b_variance"});
  else if (spec.mode == "chain") allow({"eps_ladder"});
  else if (spec.mode == "design") allow({"delta_grid", "cb_grid", "boundary_lenient"});
  else if (spec.mode == "bestresponse") allow({"eta"});
  else if (!is_sim_mode(spec.mode)) throw ConfigError("spec: unknown mode '" + spec.mode + "'");
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ConfigError("spec: unknown key '" + item.key() + "' for mode '" + spec.mode + "'");
    }
  }

  const int version = read_field<int>(j, "schema_version", where, kSchemaVersion);
  if (version != kSchemaVersion) throw ConfigError("spec: unsupported schema_version " + std::to_string(version));
  if (!j.contains("params")) throw ConfigError("spec: missing required key 'params'");
  const NormConfig cfg = parse_norm_config(j.at("params"), "spec.params");
  spec.params = cfg.params;
  spec.h = cfg.h;
  if (j.contains("seed")) spec.seed = read_field<std::uint64_t>(j, "seed", where);

  if (is_sim_mode(spec.mode)) {
    spec.run.periods = read_field<std::uint64_t>(j, "periods", where, spec.run.periods);
    spec.run.sample_stride = read_field<std::uint64_t>(j, "sample_stride", where, spec.run.sample_stride);
    spec.run.tail_fraction = read_field<double>(j, "tail_fraction", where, spec.run.tail_fraction);
    spec.initial = parse_initial(read_field<std::string>(j, "initial", where, "uniform"));
    if (spec.run.periods == 0) throw ConfigError("spec: 'periods' must be positive");
    if (spec.run.sample_stride == 0) throw ConfigError("spec: 'sample_stride' must be positive");
    if (!(spec.run.tail_fraction > 0.0 && spec.run.tail_fraction <= 1.0)) {
      throw ConfigError("spec: 'tail_fraction' must lie in (0,1]");
    }
  }
  if (spec.mode == "delta-sweep") {
    spec.deltas = read_field<std::vector<double>>(j, "deltas", where);
    spec.benefits = read_field<std::vector<double>>(j, "benefits", where, {});
    if (spec.deltas.empty()) throw ConfigError("spec: 'deltas' must be nonempty");
    for (double d : spec.deltas) {
      if (!(d >= 0.0 && d < 1.0)) throw ConfigError("spec: 'deltas' entries must lie in [0,1)");
    }
    for (double b : spec.benefits) {
      if (!(b > spec.params.c)) throw ConfigError("spec: 'benefits' entries must exceed c");
    }
  } else if (spec.mode == "mixed") {
    if (!j.contains("groups") || !j.at("groups").is_array() || j.at("groups").empty()) {
      throw ConfigError("spec: 'groups' must be a nonempty array");
    }
    int total = 0;
    for (std::size_t i = 0; i < j.at("groups").size(); ++i) {
      const auto& g = j.at("groups")[i];
      const std::string gw = "spec.groups[" + std::to_string(i) + "]";
      reject_unknown_keys(g, {"size", "delta"}, gw);
      GroupSpec group{read_field<int>(g, "size", gw), read_field<double>(g, "delta", gw)};
      if (group.size < 1) throw ConfigError(gw + ": 'size' must be positive");
      if (!(group.delta >= 0.0 && group.delta < 1.0)) throw ConfigError(gw + ": 'delta' must lie in [0,1)");
      total += group.size;
      spec.groups.push_back(group);
    }
    if (total != spec.params.N) throw ConfigError("spec: group sizes add up to " + std::to_string(total) + ", not N");
  } else if (spec.mode == "varying-b") {
    spec.b_variance = read_field<double>(j, "b_variance", where);
    if (!(spec.b_variance > 0.0)) throw ConfigError("spec: 'b_variance' must be positive");
  } else if (spec.mode == "chain") {
    spec.eps_ladder = read_field<std::vector<double>>(j, "eps_ladder", where, {1e-2, 1e-3, 1e-4, 1e-5});
  } else if (spec.mode == "design") {
    spec.delta_grid = read_field<std::string>(j, "delta_grid", where);
    spec.cb_grid = read_field<std::string>(j, "cb_grid", where);
    spec.boundary_lenient = read_field<bool>(j, "boundary_lenient", where, false);
  } else if (spec.mode == "bestresponse") {
    spec.eta = read_field<std::vector<int>>(j, "eta", where);
  }
  return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  return parse_experiment_spec(read_json_file(path));
}

ExperimentResult run_experiment(const ExperimentSpec& spec, std::uint64_t seed) {
  if (!is_sim_mode(spec.mode)) throw ConfigError("mode '" + spec.mode + "' is not a simulation mode");
  ExperimentResult result;
  result.spec = spec;
  result.seed = seed;

  CommunitySpec base;
  base.params = spec.params;
  base.h = spec.h;
  base.initial = spec.initial;

  // Every run of one experiment shares the seed (common random numbers), so differences
  // between runs come from the parameters rather than from independent noise.
  const auto add_run = [&](std::string label, const CommunitySpec& community) {
    result.runs.push_back({std::move(label), community, run_community(community, spec.run, seed)});
  };

  if (spec.mode == "evolution") {
    add_run("evolution", base);
  } else if (spec.mode == "delta-sweep") {
    const std::vector<double> benefits = spec.benefits.empty() ? std::vector<double>{spec.params.b} : spec.benefits;
    for (double b : benefits) {
      for (double d : spec.deltas) {
        CommunitySpec c = base;
        c.params.b = b;
        c.params.delta = d;
        add_run(label_of("b", b) + "," + label_of("delta", d), c);
      }
    }
  } else if (spec.mode == "mixed") {
    CommunitySpec mixed = base;
    mixed.groups = spec.groups;
    add_run("mixed", mixed);
    for (const GroupSpec& g : spec.groups) {
      CommunitySpec pure = base;
      pure.params.delta = g.delta;
      add_run("pure " + label_of("delta", g.delta), pure);
    }
  } else if (spec.mode == "varying-b") {
    CommunitySpec c = base;
    c.b_variance = spec.b_variance;
    add_run("varying-b", c);
  } else if (spec.mode == "adaptive-belief") {
    add_run("fixed-belief", base);
    CommunitySpec c = base;
    c.adaptive_beliefs = true;
    add_run("adaptive-belief", c);
  }
  return result;
}

void write_timeseries_csv(std::ostream& os, const ExperimentResult& result) {
  const int L = result.spec.params.L;
  os << "run,period";
  for (int r = 0; r <= L; ++r) os << ",n" << r;
  os << ",U,services\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < result.runs.size(); ++i) {
    for (const PeriodMetrics& m : result.runs[i].result.samples) {
      os << i << ',' << m.period;
      for (int r = 0; r <= L; ++r) os << ',' << m.configuration.count(r);
      os << ',' << m.social_welfare << ',' << m.services_rendered << '\n';
    }
  }
}

nlohmann::json summary_json(const ExperimentResult& result) {
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t i = 0; i < result.runs.size(); ++i) {
    const ExperimentRun& run = result.runs[i];
    nlohmann::json groups = nlohmann::json::array();
    const auto& gs = run.community.groups;
    for (std::size_t g = 0; g < run.result.group_defection.size(); ++g) {
      groups.push_back({{"size", gs.empty() ? run.community.params.N : gs[g].size},
                        {"delta", gs.empty() ? run.community.params.delta : gs[g].delta},
                        {"defection_fraction", run.result.group_defection[g]},
                        {"zero_fraction", run.result.group_zero_fraction[g]}});
    }
    runs.push_back({{"run", i},
                    {"label", run.label},
                    {"delta", run.community.params.delta},
                    {"b", run.community.params.b},
                    {"adaptive_beliefs", run.community.adaptive_beliefs},
                    {"terminal_configuration", run.result.terminal.counts()},
                    {"tail_mean_fraction", run.result.tail_mean_fraction},
                    {"tail_mean_welfare", run.result.tail_mean_welfare},
                    {"convergence_period", run.result.convergence_period ? nlohmann::json(*run.result.convergence_period)
                                                                         : nlohmann::json(nullptr)},
                    {"groups", groups},
                    {"best_response_solves", run.result.solves}});
  }
  return {{"schema_version", kSchemaVersion},
          {"mode", result.spec.mode},
          {"seed", result.seed},
          {"params", to_json(result.spec.params, result.spec.h)},
          {"periods", result.spec.run.periods},
          {"sample_stride", result.spec.run.sample_stride},
          {"tail_fraction", result.spec.run.tail_fraction},
          {"initial", initial_name(result.spec.initial)},
          {"runs", runs}};
}

void check_summary_schema(const nlohmann::json& j) {
  const std::string where = "summary";
  reject_unknown_keys(j, {"schema_version", "mode", "seed", "params", "periods", "sample_stride", "tail_fraction",
                          "initial", "runs"},
                      where);
  if (read_field<int>(j, "schema_version", where) != kSchemaVersion) throw ConfigError("summary: wrong schema_version");
  (void)read_field<std::string>(j, "mode", where);
  (void)read_field<std::uint64_t>(j, "seed", where);
  (void)parse_norm_config(j.at("params"), "summary.params");
  (void)read_field<std::uint64_t>(j, "periods", where);
  (void)read_field<std::uint64_t>(j, "sample_stride", where);
  (void)read_field<double>(j, "tail_fraction", where);
  (void)parse_initial(read_field<std::string>(j, "initial", where));
  if (!j.contains("runs") || !j.at("runs").is_array()) throw ConfigError("summary: 'runs' must be an array");
  for (const auto& run : j.at("runs")) {
    const std::string rw = "summary.runs[]";
    reject_unknown_keys(run, {"run", "label", "delta", "b", "adaptive_beliefs", "terminal_configuration",
                              "tail_mean_fraction", "tail_mean_welfare", "convergence_period", "groups",
                              "best_response_solves"},
                        rw);
    (void)read_field<std::size_t>(run, "run", rw);
    (void)read_field<std::string>(run, "label", rw);
    (void)read_field<double>(run, "delta", rw);
    (void)read_field<double>(run, "b", rw);
    (void)read_field<bool>(run, "adaptive_beliefs", rw);
    (void)Configuration(read_field<std::vector<int>>(run, "terminal_configuration", rw));
    (void)read_field<std::vector<double>>(run, "tail_mean_fraction", rw);
    (void)read_field<double>(run, "tail_mean_welfare", rw);
    if (!run.contains("convergence_period")) throw ConfigError(rw + ": missing 'convergence_period'");
    if (!run.at("convergence_period").is_null()) (void)read_field<std::uint64_t>(run, "convergence_period", rw);
    if (!run.contains("groups") || !run.at("groups").is_array()) throw ConfigError(rw + ": 'groups' must be an array");
    for (const auto& g : run.at("groups")) {
      reject_unknown_keys(g, {"size", "delta", "defection_fraction", "zero_fraction"}, rw + ".groups[]");
      (void)read_field<int>(g, "size", rw);
      (void)read_field<double>(g, "delta", rw);
      (void)read_field<double>(g, "defection_fraction", rw);
      (void)read_field<double>(g, "zero_fraction", rw);
    }
    (void)read_field<std::size_t>(run, "best_response_solves", rw);
  }
}

void write_experiment_outputs(const std::filesystem::path& dir, const ExperimentResult& result) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / "timeseries.csv");
    if (!csv) throw ConfigError("cannot write " + (dir / "timeseries.csv").string());
    write_timeseries_csv(csv, result);
  }
  std::ofstream js(dir / "summary.json");
  if (!js) throw ConfigError("cannot write " + (dir / "summary.json").string());
  js << std::setw(2) << summary_json(result) << '\n';
}

}  // namespace normsim
