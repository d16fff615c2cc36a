#include "gta/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <json.hpp>

#include "gta/baselines.hpp"
#include "gta/errors.hpp"
#include "gta/model.hpp"
#include "gta/plot.hpp"
#include "gta/realtime.hpp"
#include "gta/training.hpp"

namespace gta::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void write_manifest(const std::string& path, const json& resolved_config,
                    std::uint64_t seed) {
  RunManifest m;
  m.resolved_config = resolved_config;
  m.source_revision = current_source_revision();
  m.seed = seed;
  {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    m.start_time = buf;
  }
  m.write(path);
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot open config file: " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ParameterError("config file is not a JSON map: " + path);
  return j;
}

struct SolverSpec {
  std::string name;  // greedy | beam:K | rt | nn | dp | random
  EvalStrategy strategy;
  bool needs_model = false;
};

SolverSpec parse_solver(const std::string& s) {
  if (s == "greedy") return {s, EvalStrategy::greedy(), true};
  if (s.rfind("beam:", 0) == 0) {
    const int k = std::stoi(s.substr(5));
    if (k < 1) throw ParameterError("beam width must be >= 1");
    return {s, EvalStrategy::beam(k), true};
  }
  if (s.rfind("sample:", 0) == 0) {
    const int m = std::stoi(s.substr(7));
    if (m < 1) throw ParameterError("sample count must be >= 1");
    return {s, EvalStrategy::sample(m), true};
  }
  if (s == "rt") return {s, EvalStrategy::greedy(), true};
  if (s == "nn" || s == "dp" || s == "random")
    return {s, EvalStrategy::greedy(), false};
  throw ParameterError("unknown solver: " + s);
}

json solution_record(const Solution& sol, int index,
                     const std::string& solver) {
  json rec = {{"instance_index", index}, {"solver", solver},
              {"order", sol.order},     {"cost", sol.cost},
              {"feasible", sol.feasible}, {"violations", sol.violations}};
  if (sol.log_prob)
    rec["log_prob"] = *sol.log_prob;
  else
    rec["log_prob"] = nullptr;
  return rec;
}

// Applies CLI overrides on top of a config-file map, then parses.
TrainConfig resolve_train_config(const json& file_cfg, const json& overrides) {
  json merged = file_cfg;
  for (auto it = overrides.begin(); it != overrides.end(); ++it) {
    if (it->is_object()) {
      for (auto jt = it->begin(); jt != it->end(); ++jt)
        merged[it.key()][jt.key()] = jt.value();
    } else {
      merged[it.key()] = it.value();
    }
  }
  return TrainConfig::from_json(merged);
}

int cmd_gen(const std::string& kind, int n, int horizon, double delta_max,
            int capacity, int count, bool seed_given, std::uint64_t seed,
            const std::string& out) {
  if (count < 1) throw ParameterError("--count must be >= 1");
  if (!seed_given) seed = entropy_seed();
  ProblemConfig pc;
  pc.kind = problem_kind_from_string(kind);
  pc.n = n;
  pc.horizon = horizon;
  pc.delta_max = delta_max;
  pc.capacity = capacity;
  std::vector<DynamicInstance> instances;
  instances.reserve(count);
  for (int i = 0; i < count; ++i)
    instances.push_back(pc.generate(derive_seed(seed, 0, i)));
  save_instances(out, instances);
  write_manifest(out + ".manifest.json",
                 {{"command", "gen"},
                  {"kind", kind},
                  {"n", n},
                  {"horizon", pc.resolved_horizon()},
                  {"delta_max", delta_max},
                  {"capacity",
                   pc.kind == ProblemKind::VRP ? pc.resolved_capacity() : 0},
                  {"count", count},
                  {"seed", seed},
                  {"out", out}},
                 seed);
  std::cout << "wrote " << count << " instances to " << out << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& instances_path,
             const std::string& strategy_str, const std::string& mode_str,
             int jobs, bool seed_given, std::uint64_t seed,
             const std::string& out_dir) {
  if (!seed_given) seed = entropy_seed();
  auto [params, sidecar] = load_checkpoint(checkpoint);
  DecodeMode mode =
      mode_str.empty()
          ? decode_mode_from_string(sidecar.value("decode_mode", "temporal"))
          : decode_mode_from_string(mode_str);
  std::vector<DynamicInstance> instances = load_instances(instances_path);
  SolverSpec spec = parse_solver(strategy_str);

  fs::create_directories(out_dir);
  EvalSummary summary;
  if (spec.name == "rt") {
    const auto t0 = std::chrono::steady_clock::now();
    summary.per_instance.resize(instances.size());
    summary.solutions.resize(instances.size());
    parallel_for(static_cast<int>(instances.size()), jobs,
                 [&](int, int begin, int end) {
                   for (int i = begin; i < end; ++i) {
                     summary.solutions[i] = rt_solve_instance(
                         instances[i], params, Strategy::GREEDY, 0);
                     summary.per_instance[i] = summary.solutions[i].cost;
                   }
                 });
    summary.wall_time_s = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
    double acc = 0.0;
    for (double c : summary.per_instance) acc += c;
    summary.mean_cost = acc / static_cast<double>(instances.size());
    for (const auto& s : summary.solutions)
      if (!s.feasible) ++summary.infeasible_count;
  } else {
    summary = evaluate(params, instances, spec.strategy, mode, jobs, seed);
  }

  std::ofstream sols(out_dir + "/solutions.ndjson",
                     std::ios::binary | std::ios::trunc);
  for (std::size_t i = 0; i < summary.solutions.size(); ++i)
    sols << solution_record(summary.solutions[i], static_cast<int>(i),
                            spec.name)
                .dump()
         << '\n';
  json summary_json = {{"mean_cost", summary.mean_cost},
                       {"wall_time_s", summary.wall_time_s},
                       {"infeasible_count", summary.infeasible_count},
                       {"count", summary.per_instance.size()},
                       {"per_instance_costs", summary.per_instance}};
  std::ofstream sj(out_dir + "/summary.json",
                   std::ios::binary | std::ios::trunc);
  sj << summary_json.dump(2) << '\n';
  write_manifest(out_dir + "/manifest.json",
                 {{"command", "eval"},
                  {"checkpoint", checkpoint},
                  {"instances", instances_path},
                  {"strategy", strategy_str},
                  {"decode_mode", to_string(mode)},
                  {"jobs", jobs},
                  {"seed", seed},
                  {"out", out_dir}},
                 seed);
  std::cout << "mean cost " << summary.mean_cost << " over "
            << summary.per_instance.size() << " instances ("
            << summary.wall_time_s << " s, " << summary.infeasible_count
            << " infeasible)\n";
  return 0;
}

int cmd_compare(const std::string& instances_path, const std::string& solvers,
                const std::string& checkpoint, const std::string& mode_str,
                int jobs, bool seed_given, std::uint64_t seed,
                const std::string& out_dir) {
  if (!seed_given) seed = entropy_seed();
  std::vector<DynamicInstance> instances = load_instances(instances_path);
  if (instances.empty()) throw ParameterError("no instances in file");

  std::vector<SolverSpec> specs;
  std::stringstream ss(solvers);
  std::string token;
  while (std::getline(ss, token, ','))
    if (!token.empty()) specs.push_back(parse_solver(token));
  if (specs.empty()) throw ParameterError("--solvers list is empty");

  std::optional<ModelParams> params;
  DecodeMode mode = DecodeMode::TEMPORAL;
  for (const auto& spec : specs) {
    if (!spec.needs_model) continue;
    if (checkpoint.empty())
      throw ParameterError("solver " + spec.name + " needs --checkpoint");
    auto [p, sidecar] = load_checkpoint(checkpoint);
    params = std::move(p);
    mode = mode_str.empty()
               ? decode_mode_from_string(
                     sidecar.value("decode_mode", "temporal"))
               : decode_mode_from_string(mode_str);
    break;
  }

  const int count = static_cast<int>(instances.size());
  std::vector<double> dp_costs;
  struct Row {
    std::string solver;
    std::vector<double> costs;
    double mean = 0.0;
    double wall_s = 0.0;
    std::optional<double> mean_gap;
  };
  std::vector<Row> rows;

  for (const auto& spec : specs) {
    Row row;
    row.solver = spec.name;
    row.costs.resize(count);
    const auto t0 = std::chrono::steady_clock::now();
    if (spec.name == "nn") {
      parallel_for(count, jobs, [&](int, int b, int e) {
        for (int i = b; i < e; ++i)
          row.costs[i] = nearest_neighbor_dynamic(instances[i]).cost;
      });
    } else if (spec.name == "dp") {
      for (const auto& inst : instances)
        if (inst.n > 16)
          throw CapacityError("dp solver: instance with n > 16 in file");
      parallel_for(count, jobs, [&](int, int b, int e) {
        for (int i = b; i < e; ++i)
          row.costs[i] = exact_dp_tsp_min_over_starts(instances[i]).cost;
      });
    } else if (spec.name == "random") {
      parallel_for(count, jobs, [&](int, int b, int e) {
        for (int i = b; i < e; ++i)
          row.costs[i] =
              random_policy(instances[i], derive_seed(seed, 11, i)).cost;
      });
    } else if (spec.name == "rt") {
      parallel_for(count, jobs, [&](int, int b, int e) {
        for (int i = b; i < e; ++i)
          row.costs[i] =
              rt_solve_instance(instances[i], *params, Strategy::GREEDY, 0)
                  .cost;
      });
    } else {
      EvalSummary s =
          evaluate(*params, instances, spec.strategy, mode, jobs, seed);
      row.costs = s.per_instance;
    }
    row.wall_s = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - t0)
                     .count();
    double acc = 0.0;
    for (double c : row.costs) acc += c;
    row.mean = acc / count;
    if (spec.name == "dp") dp_costs = row.costs;
    rows.push_back(std::move(row));
  }

  if (!dp_costs.empty()) {
    for (auto& row : rows) {
      double acc = 0.0;
      for (int i = 0; i < count; ++i)
        acc += (row.costs[i] - dp_costs[i]) / dp_costs[i];
      row.mean_gap = acc / count;
    }
  }

  fs::create_directories(out_dir);
  std::ofstream records(out_dir + "/compare.ndjson",
                        std::ios::binary | std::ios::trunc);
  std::ostringstream table;
  table << "solver        mean_cost   mean_gap_vs_dp   wall_time_s\n";
  for (const auto& row : rows) {
    json rec = {{"solver", row.solver},
                {"mean_cost", row.mean},
                {"wall_time_s", row.wall_s},
                {"per_instance_costs", row.costs}};
    rec["mean_gap_vs_dp"] =
        row.mean_gap ? json(*row.mean_gap) : json(nullptr);
    records << rec.dump() << '\n';
    char line[128];
    if (row.mean_gap)
      std::snprintf(line, sizeof line, "%-12s %10.4f %15.2f%% %12.3f\n",
                    row.solver.c_str(), row.mean, *row.mean_gap * 100.0,
                    row.wall_s);
    else
      std::snprintf(line, sizeof line, "%-12s %10.4f %16s %12.3f\n",
                    row.solver.c_str(), row.mean, "-", row.wall_s);
    table << line;
  }
  std::ofstream txt(out_dir + "/compare.txt",
                    std::ios::binary | std::ios::trunc);
  txt << table.str();
  std::cout << table.str();
  write_manifest(out_dir + "/manifest.json",
                 {{"command", "compare"},
                  {"instances", instances_path},
                  {"solvers", solvers},
                  {"checkpoint", checkpoint},
                  {"decode_mode", to_string(mode)},
                  {"jobs", jobs},
                  {"seed", seed},
                  {"out", out_dir}},
                 seed);
  return 0;
}

int cmd_plot(const std::string& instance_path, int index,
             const std::string& solution_path, int solution_index,
             const std::string& out) {
  std::vector<DynamicInstance> instances = load_instances(instance_path);
  if (index < 0 || index >= static_cast<int>(instances.size()))
    throw ParameterError("--index out of range");
  std::ifstream in(solution_path, std::ios::binary);
  if (!in) throw ParameterError("cannot open solution file: " + solution_path);
  std::string line;
  int k = 0;
  Solution sol;
  bool found = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (k++ != solution_index) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw ParseError("solution record " + std::to_string(k - 1) +
                       ": invalid JSON");
    sol.order = j.at("order").get<std::vector<int>>();
    found = true;
    break;
  }
  if (!found) throw ParameterError("--solution-index out of range");
  const DynamicInstance& inst = instances[index];
  sol.cost = tour_cost(inst, sol.order);
  auto [ok, violations] = is_feasible(inst, sol.order);
  sol.feasible = ok;
  sol.violations = std::move(violations);
  write_tour_svg(out, inst, sol);
  write_manifest(out + ".manifest.json",
                 {{"command", "plot"},
                  {"instance", instance_path},
                  {"index", index},
                  {"solution", solution_path},
                  {"solution_index", solution_index},
                  {"out", out}},
                 0);
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Learned construction heuristics for dynamic TSP/VRP"};
  app.require_subcommand(1);

  // --- gen ---
  auto* gen = app.add_subcommand("gen", "Generate a dynamic instance file");
  std::string g_kind = "tsp", g_out = "instances.ndjson";
  int g_n = 10, g_horizon = 0, g_capacity = 0, g_count = 100;
  double g_delta = 0.1;
  std::uint64_t g_seed = 0;
  gen->add_option("--kind", g_kind)->check(CLI::IsMember({"tsp", "vrp"}));
  gen->add_option("--n", g_n);
  gen->add_option("--horizon", g_horizon);
  gen->add_option("--delta-max", g_delta);
  gen->add_option("--capacity", g_capacity);
  gen->add_option("--count", g_count);
  auto* g_seed_opt = gen->add_option("--seed", g_seed);
  gen->add_option("--out", g_out);

  // --- train / rt-train ---
  std::string t_config, t_out = "run", t_kind = "tsp", t_mode = "",
              t_init = "";
  int t_epochs = -1, t_ipe = -1, t_batch = -1, t_n = -1, t_horizon = -1,
      t_capacity = -1, t_hidden = -1, t_layers = -1, t_heads = -1,
      t_valsize = -1, t_jobs = -1;
  double t_lr = -1.0, t_delta = -1.0, t_alpha = -1.0, t_gclip = -1.0;
  std::uint64_t t_seed = 0;
  bool t_kind_given = false;
  auto add_train_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", t_config, "JSON config file");
    cmd->add_option("--epochs", t_epochs);
    cmd->add_option("--instances-per-epoch", t_ipe);
    cmd->add_option("--batch-size", t_batch);
    cmd->add_option("--lr", t_lr);
    cmd->add_option("--kind", t_kind)
        ->check(CLI::IsMember({"tsp", "vrp"}))
        ->each([&](const std::string&) { t_kind_given = true; });
    cmd->add_option("--n", t_n);
    cmd->add_option("--horizon", t_horizon);
    cmd->add_option("--delta-max", t_delta);
    cmd->add_option("--capacity", t_capacity);
    cmd->add_option("--hidden-dim", t_hidden);
    cmd->add_option("--layers", t_layers);
    cmd->add_option("--heads", t_heads);
    cmd->add_option("--decode-mode", t_mode)
        ->check(CLI::IsMember({"temporal", "sum", "first_slice"}));
    cmd->add_option("--alpha", t_alpha);
    cmd->add_option("--validation-size", t_valsize);
    cmd->add_option("--grad-clip", t_gclip);
    cmd->add_option("--jobs", t_jobs);
    cmd->add_option("--out", t_out);
    cmd->add_option("--init-checkpoint", t_init);
    return cmd->add_option("--seed", t_seed);
  };
  auto* train_cmd = app.add_subcommand("train", "Train the policy");
  auto* t_seed_opt = add_train_flags(train_cmd);
  auto* rt_train_cmd =
      app.add_subcommand("rt-train", "Train the real-time variant");
  auto* rt_seed_opt = add_train_flags(rt_train_cmd);

  // --- eval ---
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string e_ckpt, e_instances, e_strategy = "greedy", e_mode = "",
              e_out = "eval";
  int e_jobs = 0;
  std::uint64_t e_seed = 0;
  eval_cmd->add_option("--checkpoint", e_ckpt)->required();
  eval_cmd->add_option("--instances", e_instances)->required();
  eval_cmd->add_option("--strategy", e_strategy,
                       "greedy | beam:K | sample:M | rt");
  eval_cmd->add_option("--decode-mode", e_mode);
  eval_cmd->add_option("--jobs", e_jobs);
  auto* e_seed_opt = eval_cmd->add_option("--seed", e_seed);
  eval_cmd->add_option("--out", e_out);

  // --- compare ---
  auto* compare_cmd =
      app.add_subcommand("compare", "Run several solvers on one file");
  std::string c_instances, c_solvers = "nn", c_ckpt = "", c_mode = "",
              c_out = "compare";
  int c_jobs = 0;
  std::uint64_t c_seed = 0;
  compare_cmd->add_option("--instances", c_instances)->required();
  compare_cmd->add_option("--solvers", c_solvers,
                          "comma list of greedy,beam:K,rt,nn,dp,random");
  compare_cmd->add_option("--checkpoint", c_ckpt);
  compare_cmd->add_option("--decode-mode", c_mode);
  compare_cmd->add_option("--jobs", c_jobs);
  auto* c_seed_opt = compare_cmd->add_option("--seed", c_seed);
  compare_cmd->add_option("--out", c_out);

  // --- plot ---
  auto* plot_cmd = app.add_subcommand("plot", "Render a tour to SVG");
  std::string p_instance, p_solution, p_out = "tour.svg";
  int p_index = 0, p_sol_index = 0;
  plot_cmd->add_option("--instance", p_instance)->required();
  plot_cmd->add_option("--index", p_index);
  plot_cmd->add_option("--solution", p_solution)->required();
  plot_cmd->add_option("--solution-index", p_sol_index);
  plot_cmd->add_option("--out", p_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (gen->parsed())
      return cmd_gen(g_kind, g_n, g_horizon, g_delta, g_capacity, g_count,
                     g_seed_opt->count() > 0, g_seed, g_out);
    if (train_cmd->parsed() || rt_train_cmd->parsed()) {
      const bool rt = rt_train_cmd->parsed();
      json overrides = json::object();
      if (t_epochs >= 0) overrides["epochs"] = t_epochs;
      if (t_ipe >= 0) overrides["instances_per_epoch"] = t_ipe;
      if (t_batch >= 0) overrides["batch_size"] = t_batch;
      if (t_lr >= 0) overrides["learning_rate"] = t_lr;
      json problem = json::object();
      if (t_kind_given) problem["kind"] = t_kind;
      if (t_n >= 0) problem["n"] = t_n;
      if (t_horizon >= 0) problem["horizon"] = t_horizon;
      if (t_delta >= 0) problem["delta_max"] = t_delta;
      if (t_capacity >= 0) problem["capacity"] = t_capacity;
      if (!problem.empty()) overrides["problem"] = problem;
      json encoder = json::object();
      if (t_hidden >= 0) encoder["hidden_dim"] = t_hidden;
      if (t_layers >= 0) encoder["num_layers"] = t_layers;
      if (t_heads >= 0) encoder["num_heads"] = t_heads;
      if (!encoder.empty()) overrides["encoder"] = encoder;
      if (!t_mode.empty()) overrides["decode_mode"] = t_mode;
      if (t_alpha >= 0) overrides["baseline_alpha"] = t_alpha;
      if (t_valsize >= 0) overrides["validation_size"] = t_valsize;
      if (t_gclip >= 0) overrides["grad_clip"] = t_gclip;
      if (t_jobs >= 0) overrides["jobs"] = t_jobs;
      overrides["out_dir"] = t_out;
      if (!t_init.empty()) overrides["init_checkpoint"] = t_init;
      const bool seed_given =
          (rt ? rt_seed_opt->count() : t_seed_opt->count()) > 0;
      overrides["seed"] = seed_given ? t_seed : entropy_seed();
      TrainConfig cfg =
          resolve_train_config(load_config_file(t_config), overrides);
      RunManifest manifest = rt ? rt_train(cfg) : train(cfg);
      std::cout << "trained " << manifest.history.size()
                << " epochs; final val cost "
                << (manifest.history.empty()
                        ? 0.0
                        : manifest.history.back().val_cost)
                << "; outputs in " << cfg.out_dir << "\n";
      return 0;
    }
    if (eval_cmd->parsed())
      return cmd_eval(e_ckpt, e_instances, e_strategy, e_mode, e_jobs,
                      e_seed_opt->count() > 0, e_seed, e_out);
    if (compare_cmd->parsed())
      return cmd_compare(c_instances, c_solvers, c_ckpt, c_mode, c_jobs,
                         c_seed_opt->count() > 0, c_seed, c_out);
    if (plot_cmd->parsed())
      return cmd_plot(p_instance, p_index, p_solution, p_sol_index, p_out);
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace gta::cli
