// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#include "commands.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "ctqw/errors.hpp"
#include "ctqw/gradcheck.hpp"
#include "ctqw/model.hpp"
#include "ctqw/ops.hpp"
#include "ctqw/parameters.hpp"
#include "ctqw/qwe.hpp"
#include "ctqw/synthetic.hpp"
#include "ctqw/trainer.hpp"
#include "run_config.hpp"

namespace ctqw::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Globals {
  std::string config_path;
  std::string out_dir;
  std::string dataset_root;
  std::string fixture;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool seed_set = false;
};

struct PendingFile {
  fs::path path;
  std::string content;
};

// Every file is written to a temporary sibling first; nothing is renamed
// into place until all of them were written.
void commit(const std::vector<PendingFile>& files) {
  std::vector<fs::path> temps;
  try {
    for (const auto& f : files) {
      if (f.path.has_parent_path()) fs::create_directories(f.path.parent_path());
      fs::path tmp = f.path;
      tmp += ".tmp" + std::to_string(::getpid());
      std::ofstream o(tmp, std::ios::binary);
      temps.push_back(tmp);
      o << f.content;
      o.close();
      if (!o) throw std::runtime_error("cannot write " + tmp.string());
    }
  } catch (...) {
    for (const auto& t : temps) fs::remove(t);
    throw;
  }
  for (std::size_t i = 0; i < files.size(); ++i) fs::rename(temps[i], files[i].path);
}

RunConfig load_config(const Globals& g) {
  RunConfig c = g.config_path.empty() ? parse_run_config(json::object())
                                      : load_run_config(g.config_path);
  if (!g.out_dir.empty()) c.output_dir = g.out_dir;
  if (!g.fixture.empty()) c.fixture = g.fixture;
  if (g.seed_set) c.train.seed = g.seed;
  c.train.threads = g.threads;
  c.dataset_root = resolve_dataset_root(g.dataset_root, c).string();
  return c;
}

std::string dataset_label(const RunConfig& c, const Dataset& d) {
  if (!c.fixture.empty()) return fs::path(c.fixture).stem().string();
  return d.name.empty() ? c.dataset_name : d.name;
}

json header(const std::string& command, const RunConfig& c, const std::string& dataset) {
  return {{"version", kVersion},
          {"command", command},
          {"dataset", dataset},
          {"config", c.source},
          {"resolved_config", resolved_json(c)},
          {"threads", c.train.threads}};
}

json result_json(const std::string& command, RunConfig c, const std::string& dataset,
                 const CVResult& r) {
  c.train.model = r.config.model;
  json j = header(command, c, dataset);
  j["ablation"] = to_string(r.ablation);
  json folds = json::array();
  for (const auto& f : r.folds) {
    folds.push_back({{"fold", f.fold},
                     {"test_accuracy", f.test_accuracy},
                     {"best_val_accuracy", f.best_val_accuracy},
                     {"best_epoch", f.best_epoch},
                     {"epochs_run", f.epochs_run},
                     {"seconds", f.seconds}});
  }
  j["folds"] = folds;
  j["fold_accuracies"] = r.fold_accuracies;
  j["mean"] = r.mean;
  j["std"] = r.std;
  j["seconds"] = r.seconds;
  return j;
}

std::string folds_csv(const CVResult& r) {
  std::ostringstream s;
  s << std::setprecision(17);
  s << "fold,test_accuracy,best_val_accuracy,best_epoch,epochs_run,seconds\n";
  for (const auto& f : r.folds) {
    s << f.fold << ',' << f.test_accuracy << ',' << f.best_val_accuracy << ',' << f.best_epoch
      << ',' << f.epochs_run << ',' << f.seconds << '\n';
  }
  return s.str();
}

std::string summary_line(const std::string& label, const CVResult& r) {
  std::ostringstream s;
  s << label << ": " << std::fixed << std::setprecision(4) << r.mean << " ± " << r.std << " ("
    << r.folds.size() << " folds, " << std::setprecision(1) << r.seconds << " s)";
  return s.str();
}

int cmd_cv(const Globals& g, const std::string& checkpoint_dir, std::ostream& out,
           std::ostream& err) {
  RunConfig c = load_config(g);
  const Dataset ds = load_training_dataset(c, c.dataset_root);
  const std::string label = dataset_label(c, ds);
  const CVResult r = cross_validate(ds, c.train, &err, !checkpoint_dir.empty());

  const fs::path dir = c.output_dir;
  std::vector<PendingFile> files{
      {dir / ("cv_" + label + ".json"), result_json("cv", c, label, r).dump(2) + "\n"},
      {dir / ("cv_" + label + "_folds.csv"), folds_csv(r)}};
  if (!checkpoint_dir.empty()) {
    Model model(bind_to_dataset(c.train, ds).model, 0);
    for (const auto& f : r.folds) {
      model.parameters().restore(f.best_params);
      const fs::path path = fs::path(checkpoint_dir) / ("fold_" + std::to_string(f.fold) + ".ckpt");
      fs::create_directories(checkpoint_dir);
      fs::path tmp = path;
      tmp += ".tmp";
      save_checkpoint(tmp, model.parameters());
      fs::rename(tmp, path);
    }
  }
  commit(files);
  out << summary_line(label, r) << "\n";
  return kExitOk;
}

int cmd_ablate(const Globals& g, const std::string& which, std::ostream& out, std::ostream& err) {
  RunConfig c = load_config(g);
  std::vector<Ablation> runs;
  if (which == "all") {
    runs = {Ablation::none, Ablation::no_qwgt, Ablation::no_qwgr};
  } else {
    runs = {parse_ablation(which)};
  }
  for (Ablation a : runs) ablate(c.train.model, a);  // reject before any training
  const Dataset ds = load_training_dataset(c, c.dataset_root);
  const std::string label = dataset_label(c, ds);

  std::vector<PendingFile> files;
  std::ostringstream csv;
  csv << std::setprecision(17) << "ablation,mean,std,seconds,folds\n";
  for (Ablation a : runs) {
    const CVResult r = run_ablation(ds, c.train, a, &err);
    files.push_back({fs::path(c.output_dir) / ("ablate_" + label + "_" + to_string(a) + ".json"),
                     result_json("ablate", c, label, r).dump(2) + "\n"});
    csv << to_string(a) << ',' << r.mean << ',' << r.std << ',' << r.seconds << ','
        << r.folds.size() << '\n';
    out << summary_line(label + " " + to_string(a), r) << "\n";
  }
  files.push_back({fs::path(c.output_dir) / ("ablate_" + label + ".csv"), csv.str()});
  commit(files);
  return kExitOk;
}

int cmd_sweep(const Globals& g, const std::string& param_text,
              const std::vector<std::size_t>& values, std::ostream& out, std::ostream& err) {
  RunConfig c = load_config(g);
  const SweepParameter param = parse_sweep_parameter(param_text);
  if (values.empty()) throw ConfigError("--values needs at least one value");
  for (std::size_t v : values) {
    TrainConfig probe = c.train;
    (param == SweepParameter::time_steps ? probe.model.time_steps : probe.model.layers) = v;
    validate(probe);
  }
  const Dataset ds = load_training_dataset(c, c.dataset_root);
  const std::string label = dataset_label(c, ds);
  const std::string p = to_string(param);
  const std::vector<CVResult> results = sweep(ds, c.train, param, values, &err);

  std::vector<PendingFile> files;
  std::ostringstream csv;
  csv << std::setprecision(17) << "param,value,mean,std,seconds,folds\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    const CVResult& r = results[i];
    json j = result_json("sweep", c, label, r);
    j["sweep"] = {{"param", p}, {"value", values[i]}};
    files.push_back(
        {fs::path(c.output_dir) / ("sweep_" + label + "_" + p + std::to_string(values[i]) + ".json"),
         j.dump(2) + "\n"});
    csv << p << ',' << values[i] << ',' << r.mean << ',' << r.std << ',' << r.seconds << ','
        << r.folds.size() << '\n';
    out << summary_line(label + " " + p + "=" + std::to_string(values[i]), r) << "\n";
  }
  files.push_back({fs::path(c.output_dir) / ("sweep_" + label + "_" + p + ".csv"), csv.str()});
  commit(files);
  return kExitOk;
}

int cmd_simulate(const Globals& g, std::size_t graph_index, std::size_t steps,
                 const std::string& checkpoint, std::ostream& out) {
  RunConfig c = load_config(g);
  if (steps == 0) throw ConfigError("--T must be at least 1");
  const Dataset ds = load_dataset(c, c.dataset_root);
  if (graph_index >= ds.graphs.size()) {
    throw ConfigError("--graph-index " + std::to_string(graph_index) + " out of range (" +
                      std::to_string(ds.graphs.size()) + " graphs)");
  }
  const std::string label = dataset_label(c, ds);
  const Graph& graph = ds.graphs[graph_index];

  qwe::EvolutionTensor evo;
  if (checkpoint.empty()) {
    evo = qwe::simulate_ctqw(qwe::unit_hamiltonian(graph), steps);
  } else {
    Model model(bind_to_dataset(c.train, ds).model, 0);
    load_checkpoint(checkpoint, model.parameters());
    const GraphInput in = prepare(graph);
    evo = qwe::encode(in.features, in.edges, model.params().qwe, steps).evolution;
  }

  const std::size_t n = graph.node_count;
  double col_dev = 0.0, sym_dev = 0.0;
  std::ostringstream csv;
  csv << std::setprecision(17) << "t,i,j,p\n";
  for (std::size_t s = 0; s < evo.steps(); ++s) {
    const Tensor& p = evo.slices[s];
    for (std::size_t j = 0; j < n; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        col += p(i, j);
        sym_dev = std::max(sym_dev, std::abs(p(i, j) - p(j, i)));
        csv << evo.time_grid[s] << ',' << i << ',' << j << ',' << p(i, j) << '\n';
      }
      col_dev = std::max(col_dev, std::abs(col - 1.0));
    }
  }
  if (!std::isfinite(col_dev) || !std::isfinite(sym_dev)) {
    throw NumericError("simulate: non-finite probabilities");
  }

  const std::string stem = "simulate_" + label + "_g" + std::to_string(graph_index);
  json j = header("simulate", c, label);
  j["graph_index"] = graph_index;
  j["nodes"] = n;
  j["edges"] = graph.edges.size();
  j["T"] = steps;
  j["weights"] = checkpoint.empty() ? "unit" : "checkpoint";
  j["checkpoint"] = checkpoint;
  j["column_sum_max_deviation"] = col_dev;
  j["symmetry_max_deviation"] = sym_dev;
  j["csv"] = stem + ".csv";
  commit({{fs::path(c.output_dir) / (stem + ".csv"), csv.str()},
          {fs::path(c.output_dir) / (stem + ".json"), j.dump(2) + "\n"}});
  out << label << " graph " << graph_index << ": " << n << " nodes, T=" << steps
      << ", column-sum deviation " << col_dev << ", symmetry deviation " << sym_dev << "\n";
  return kExitOk;
}

struct GradcheckArgs {
  std::size_t nodes = 6;
  std::size_t feature_dim = 8;
  double threshold = 1e-4;
  double min_fraction = 0.99;
};

int cmd_gradcheck(const Globals& g, const GradcheckArgs& a, std::ostream& out) {
  RunConfig c = load_config(g);
  if (a.nodes == 0) throw ConfigError("--nodes must be at least 1");
  if (a.feature_dim == 0) throw ConfigError("--feature-dim must be at least 1");
  if (!(a.threshold >= 0.0)) throw ConfigError("--threshold must be non-negative");
  ModelConfig mc = c.train.model;
  mc.feature_dim = a.feature_dim;
  mc.num_classes = 2;
  validate(mc);

  const std::uint64_t seed = c.train.seed;
  Rng rng{seed, 3};
  const GraphInput graph = prepare(random_graph(a.nodes, 0.3, a.feature_dim, rng));
  Model model(mc, Rng{seed, 5}.next());
  GradCheckOptions opts;
  opts.threshold = a.threshold;
  const GradCheckReport r = check_gradients(model.parameters(), [&] {
    Rng mask{seed, 4};
    return loss(model.forward(graph, true, &mask), 1);
  }, opts);

  const bool pass = r.pass_fraction() >= a.min_fraction;
  out << std::setprecision(6) << "gradcheck: " << r.passed << "/" << r.coordinates
      << " coordinates within rel err " << a.threshold << " (" << 100.0 * r.pass_fraction()
      << "%, need " << 100.0 * a.min_fraction << "%)\n";
  out << "max relative error " << r.max_rel_error << "\n";
  for (const auto& w : r.worst) {
    out << "  " << w.parameter << "[" << w.index << "] analytic=" << w.analytic
        << " numeric=" << w.numeric << " rel=" << w.rel_error << "\n";
  }
  out << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kExitOk : kExitNumeric;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum-walk graph classifier: training, simulation and diagnostics"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "JSON run configuration");
  app.add_option("--out", g.out_dir, "output directory (overrides output.dir)");
  auto* seed_opt = app.add_option("--seed", g.seed, "master seed (overrides train.seed)");
  app.add_option("--threads", g.threads, "folds trained concurrently")->check(CLI::PositiveNumber);
  app.add_option("--dataset-root", g.dataset_root, "TU dataset root (else config, $CTQW_DATA_ROOT, data)");
  app.add_option("--fixture", g.fixture, "single-file dataset instead of a TU directory");

  auto* cv = app.add_subcommand("cv", "10-fold cross-validation");
  std::string checkpoint_dir;
  cv->add_option("--checkpoint-dir", checkpoint_dir, "write each fold's selected parameters here");

  auto* ablate = app.add_subcommand("ablate", "cross-validation with a module removed");
  std::string which = "all";
  ablate->add_option("--which", which, "no_qwgt, no_qwgr or all")
      ->check(CLI::IsMember({"no_qwgt", "no_qwgr", "all"}));

  auto* sweep_cmd = app.add_subcommand("sweep", "cross-validation over a grid of T or L");
  std::string param;
  std::vector<std::size_t> values;
  sweep_cmd->add_option("--param", param, "T or L")->required();
  sweep_cmd->add_option("--values", values, "grid values, comma separated")
      ->required()
      ->delimiter(',');

  auto* simulate = app.add_subcommand("simulate", "write the evolution tensor of one graph");
  std::size_t graph_index = 0, steps = 4;
  std::string checkpoint;
  simulate->add_option("--graph-index", graph_index, "graph to simulate");
  simulate->add_option("--T", steps, "number of time steps");
  simulate->add_option("--checkpoint", checkpoint, "use trained edge weights instead of unit weights");

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the full model");
  GradcheckArgs ga;
  gradcheck->add_option("--nodes", ga.nodes, "nodes in the random graph");
  gradcheck->add_option("--feature-dim", ga.feature_dim, "node feature width");
  gradcheck->add_option("--threshold", ga.threshold, "relative error threshold");
  gradcheck->add_option("--min-fraction", ga.min_fraction, "required fraction of passing coordinates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  g.seed_set = seed_opt->count() > 0;

  try {
    if (*cv) return cmd_cv(g, checkpoint_dir, out, err);
    if (*ablate) return cmd_ablate(g, which, out, err);
    if (*sweep_cmd) return cmd_sweep(g, param, values, out, err);
    if (*simulate) return cmd_simulate(g, graph_index, steps, checkpoint, out);
    if (*gradcheck) return cmd_gradcheck(g, ga, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DatasetError& e) {
    err << "dataset error: " << e.what() << "\n";
    return kExitDataset;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace ctqw::cli
