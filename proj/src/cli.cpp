#include "mctrl/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "mctrl/oracle1d.hpp"
#include "mctrl/vec.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mctrl {

namespace {

const std::vector<std::string> kPresets = {
    "two_box_dirichlet", "bump_dirichlet_disk", "neumann_boundary", "oracle_1d",
    "slater_check"};

struct HelpRequested : std::runtime_error {
  explicit HelpRequested(std::string text) : std::runtime_error(std::move(text)) {}
};

void validate_config(const RunConfig& cfg) {
  bool known = false;
  for (const auto& p : kPresets) known = known || p == cfg.preset;
  if (!known) throw std::invalid_argument("unknown preset '" + cfg.preset + "'");
  if (cfg.nx < 2 || (cfg.ny >= 0 && cfg.ny < 2))
    throw std::invalid_argument("nx and ny must be at least 2");
  if (!(cfg.alpha_factor > 0.0 && cfg.alpha_factor < 1.0))
    throw std::invalid_argument("alpha-factor must lie in (0,1)");
  if (!(cfg.alpha_min > 0.0) || !(cfg.alpha_start > cfg.alpha_min))
    throw std::invalid_argument("need alpha-start > alpha-min > 0");
  if (cfg.beta < 0.0) throw std::invalid_argument("beta must be >= 0");
  if (!(cfg.newton_tol > 0.0) || !(cfg.linear_tol > 0.0))
    throw std::invalid_argument("tolerances must be positive");
}

void merge_config_file(RunConfig& cfg, const std::set<std::string>& from_flags) {
  std::ifstream in(cfg.config_file);
  if (!in) throw std::invalid_argument("cannot open config file " + cfg.config_file);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config file must hold a JSON object");

  auto want = [&](const char* key) { return j.contains(key) && !from_flags.count(key); };
  try {
    static const std::set<std::string> known = {
        "preset",      "nx",         "ny",        "alpha_start",
        "alpha_factor", "alpha_min",  "beta",      "newton_tol",
        "linear_tol",  "output_dir", "emit_matrices", "log_file"};
    for (const auto& item : j.items())
      if (!known.count(item.key()))
        throw std::invalid_argument("unknown config key '" + item.key() + "'");

    if (want("preset")) cfg.preset = j["preset"].get<std::string>();
    if (want("nx")) cfg.nx = j["nx"].get<int>();
    if (want("ny")) cfg.ny = j["ny"].get<int>();
    if (want("alpha_start")) cfg.alpha_start = j["alpha_start"].get<double>();
    if (want("alpha_factor")) cfg.alpha_factor = j["alpha_factor"].get<double>();
    if (want("alpha_min")) cfg.alpha_min = j["alpha_min"].get<double>();
    if (want("beta")) cfg.beta = j["beta"].get<double>();
    if (want("newton_tol")) cfg.newton_tol = j["newton_tol"].get<double>();
    if (want("linear_tol")) cfg.linear_tol = j["linear_tol"].get<double>();
    if (want("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    if (want("emit_matrices")) cfg.emit_matrices = j["emit_matrices"].get<bool>();
    if (want("log_file")) cfg.log_file = j["log_file"].get<std::string>();
  } catch (const json::type_error& e) {
    throw std::invalid_argument(std::string("config value has the wrong type: ") + e.what());
  }
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return os;
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json solve_report_json(const SolveReport& rep) {
  json stages = json::array();
  for (const StageTrace& t : rep.stages) {
    json s;
    s["stage"] = t.stage;
    s["alpha"] = t.alpha;
    s["iterations"] = t.iterations;
    s["converged"] = t.converged;
    s["residual_history"] = t.residual_history;
    stages.push_back(s);
  }
  json j;
  j["stages"] = stages;
  j["converged"] = rep.converged;
  j["stationarity_residual"] = rep.stationarity_residual;
  j["state_residual"] = rep.state_residual;
  j["complementarity_residual"] = rep.complementarity_residual;
  // Wall time stays out so repeated runs serialize identically.
  return j;
}

int run_solver_preset(const RunConfig& cfg) {
  PresetSetup setup = make_preset_setup(cfg);

  std::ofstream log_stream;
  std::ostream* log = &std::cerr;
  if (!cfg.log_file.empty()) {
    log_stream = open_out(cfg.log_file);
    log = &log_stream;
  }

  ContinuationOptions copts;
  copts.alpha_start = cfg.alpha_start;
  copts.alpha_factor = cfg.alpha_factor;
  copts.alpha_min = cfg.alpha_min;
  copts.beta = cfg.beta;
  copts.ssn.newton_tol = cfg.newton_tol;
  copts.ssn.linear_tol = cfg.linear_tol;
  copts.ssn.log = log;

  ContinuationResult res;
  try {
    res = continuation_path(setup.problem, copts);
  } catch (const SolveFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 2;
  }

  RunArtifacts art;
  art.state = res.state;
  art.report = res.report;
  art.path = res.path;
  art.optimality = check_optimality(res.state, setup.problem);
  art.slater = check_slater(setup.problem);
  art.sparsity = sparsity_stats(res.state.u, setup.problem.control_nodes);
  export_results(cfg, setup, art);

  if (!res.report.converged) {
    std::cerr << "solver did not converge (see report.json)\n";
    return 2;
  }
  return 0;
}

int run_oracle_preset(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directory(dir, ec);
  if (ec && !fs::is_directory(dir))
    throw std::runtime_error("cannot create output dir " + dir.string());

  std::vector<int> ns = {2, 4, 8, 16, 32};
  auto rows = nonattainment_demo(ns);
  auto os = open_out(dir / "nonattainment.csv");
  write_nonattainment_csv(rows, os);

  json j;
  j["preset"] = cfg.preset;
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back({{"n", r.n}, {"objective", r.objective}, {"mass", r.mass}});
  j["nonattainment"] = arr;
  auto rj = open_out(dir / "report.json");
  rj << j.dump(2) << '\n';
  return 0;
}

int run_slater_preset(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directory(dir, ec);
  if (ec && !fs::is_directory(dir))
    throw std::runtime_error("cannot create output dir " + dir.string());

  Mesh mesh = build_rect_mesh(cfg.nx, cfg.ny_effective(), -1.0, 1.0, -1.0, 1.0);
  NodeSet whole = select_nodes(mesh, Region::whole_domain(), "whole");

  json j;
  j["preset"] = cfg.preset;

  {
    // Dirichlet Laplacian, control everywhere: the certificate fails on the
    // boundary, where the multiplier vanishes.
    OperatorSpec op;
    DiscreteProblem pb;
    pb.free_nodes = free_nodes_for(mesh, op.bc_kind);
    pb.A_h = assemble_stiffness(mesh, op);
    pb.M_h = assemble_mass(mesh, whole).restricted(pb.free_nodes.indices,
                                                   pb.free_nodes.indices);
    pb.observation_nodes = whole;
    pb.control_nodes = whole;
    SlaterReport rep = check_slater(pb, whole);
    std::cout << "control=whole_domain bc=dirichlet\n";
    write_flat(rep, std::cout);
    j["dirichlet_whole_domain"] = json::parse(to_json(rep));

    NodeSet box = select_nodes(mesh, Region::inf_ball(0.75), "box");
    SlaterReport rep_box = check_slater(pb, box);
    std::cout << "control=sup_ball_0.75 bc=dirichlet\n";
    write_flat(rep_box, std::cout);
    j["dirichlet_sup_ball"] = json::parse(to_json(rep_box));
  }

  {
    RunConfig ncfg = cfg;
    ncfg.preset = "neumann_boundary";
    PresetSetup setup = make_preset_setup(ncfg);
    SlaterReport rep = check_slater(setup.problem);
    std::cout << "control=boundary bc=natural\n";
    write_flat(rep, std::cout);
    j["neumann_boundary"] = json::parse(to_json(rep));
  }

  auto rj = open_out(dir / "report.json");
  rj << j.dump(2) << '\n';
  return 0;
}

}  // namespace

const std::vector<std::string>& preset_names() { return kPresets; }

RunConfig load_config(const std::vector<std::string>& args) {
  RunConfig cfg;
  CLI::App app{"Sparse measure-control solver"};
  app.option_defaults()->always_capture_default();

  app.add_option("--preset", cfg.preset, "Problem preset");
  app.add_option("--nx", cfg.nx, "Grid nodes in x");
  app.add_option("--ny", cfg.ny, "Grid nodes in y (default: same as nx)");
  app.add_option("--alpha-start", cfg.alpha_start, "First regularization weight");
  app.add_option("--alpha-factor", cfg.alpha_factor, "Per-stage reduction factor");
  app.add_option("--alpha-min", cfg.alpha_min, "Last regularization weight");
  app.add_option("--beta", cfg.beta, "Complementarity shift of the final solve");
  app.add_option("--newton-tol", cfg.newton_tol, "Newton residual tolerance");
  app.add_option("--linear-tol", cfg.linear_tol, "Linear solver tolerance");
  app.add_option("--output-dir", cfg.output_dir, "Artifact directory");
  app.add_option("--config", cfg.config_file, "JSON config file");
  app.add_flag("--emit-matrices", cfg.emit_matrices, "Also write A_h/M_h/B_h");
  app.add_option("--log-file", cfg.log_file, "Solver log destination");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw std::invalid_argument(e.what());
  }

  if (!cfg.config_file.empty()) {
    std::set<std::string> from_flags;
    for (const auto* opt : app.get_options())
      if (opt->count() > 0) {
        std::string name = opt->get_name();  // "--alpha-start"
        if (name.rfind("--", 0) == 0) name = name.substr(2);
        for (auto& ch : name)
          if (ch == '-') ch = '_';
        from_flags.insert(name);
      }
    merge_config_file(cfg, from_flags);
  }

  validate_config(cfg);
  return cfg;
}

PresetSetup make_preset_setup(const RunConfig& cfg) {
  PresetSetup s;
  s.mesh = build_rect_mesh(cfg.nx, cfg.ny_effective(), -1.0, 1.0, -1.0, 1.0);
  NodeSet observation = select_nodes(s.mesh, Region::whole_domain(), "observation");

  if (cfg.preset == "two_box_dirichlet") {
    s.op = OperatorSpec{};
    s.target = TargetSpec::two_box();
    NodeSet control = select_nodes(s.mesh, Region::inf_ball(0.75), "control");
    s.problem = build_problem(s.mesh, s.op, control, observation, s.target);
  } else if (cfg.preset == "bump_dirichlet_disk") {
    s.op = OperatorSpec{};
    s.target = TargetSpec::smooth_bump();
    NodeSet control = select_nodes(s.mesh, Region::two_ball(0.75), "control");
    s.problem = build_problem(s.mesh, s.op, control, observation, s.target);
  } else if (cfg.preset == "neumann_boundary") {
    s.op = OperatorSpec{};
    s.op.reaction = 1e-2;
    s.op.bc_kind = BcKind::natural;
    s.target = TargetSpec::two_box();
    NodeSet control = select_nodes(s.mesh, Region::boundary(), "control");
    s.problem = build_problem(s.mesh, s.op, control, observation, s.target);
  } else {
    throw std::invalid_argument("preset '" + cfg.preset + "' has no 2D solver setup");
  }
  return s;
}

void export_results(const RunConfig& cfg, const PresetSetup& setup,
                    const RunArtifacts& art) {
  fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directory(dir, ec);
  if (ec && !fs::is_directory(dir))
    throw std::runtime_error("cannot create output dir " + dir.string());

  const Mesh& mesh = setup.mesh;
  const DiscreteProblem& pb = setup.problem;

  {
    auto os = open_out(dir / "control.csv");
    os << "node,x,y,u\n";
    for (std::size_t j = 0; j < pb.control_nodes.indices.size(); ++j) {
      int node = pb.control_nodes.indices[j];
      os << node << ',' << fmt(mesh.nodes[node].x) << ',' << fmt(mesh.nodes[node].y)
         << ',' << fmt(art.state.u[j]) << '\n';
    }
  }
  {
    auto os = open_out(dir / "state.csv");
    os << "node,x,y,yh\n";
    std::vector<double> y_full(mesh.node_count(), 0.0);
    for (std::size_t i = 0; i < pb.free_nodes.indices.size(); ++i)
      y_full[pb.free_nodes.indices[i]] = art.state.y[i];
    for (int k = 0; k < mesh.node_count(); ++k)
      os << k << ',' << fmt(mesh.nodes[k].x) << ',' << fmt(mesh.nodes[k].y) << ','
         << fmt(y_full[k]) << '\n';
  }
  {
    auto os = open_out(dir / "support.csv");
    os << "node,x,y\n";
    for (int node : art.sparsity.support_nodes)
      os << node << ',' << fmt(mesh.nodes[node].x) << ',' << fmt(mesh.nodes[node].y)
         << '\n';
  }
  {
    auto os = open_out(dir / "path.csv");
    os << "alpha_or_beta,objective,mass,support_size\n";
    for (const PathPoint& pt : art.path)
      os << fmt(pt.alpha_or_beta) << ',' << fmt(pt.objective) << ','
         << fmt(pt.control_norm) << ',' << pt.support_size << '\n';
  }
  {
    json j;
    j["preset"] = cfg.preset;
    j["nx"] = cfg.nx;
    j["ny"] = cfg.ny_effective();
    j["beta"] = cfg.beta;
    j["solve"] = solve_report_json(art.report);
    j["optimality"] = json::parse(to_json(art.optimality));
    j["slater"] = json::parse(to_json(art.slater));
    j["sparsity"] = json::parse(to_json(art.sparsity));
    auto os = open_out(dir / "report.json");
    os << j.dump(2) << '\n';
  }
  if (cfg.emit_matrices) {
    auto a = open_out(dir / "A_h.mtx");
    pb.A_h.write_matrix_market(a);
    auto m = open_out(dir / "M_h.mtx");
    pb.M_h.write_matrix_market(m);
    auto b = open_out(dir / "B_h.mtx");
    pb.B_h.write_matrix_market(b);
  }
}

int run(const RunConfig& cfg) {
  try {
    if (cfg.preset == "oracle_1d") return run_oracle_preset(cfg);
    if (cfg.preset == "slater_check") return run_slater_preset(cfg);
    return run_solver_preset(cfg);
  } catch (const SolveFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  RunConfig cfg;
  try {
    cfg = load_config(args);
  } catch (const HelpRequested& h) {
    std::cout << h.what();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return run(cfg);
}

}  // namespace mctrl
