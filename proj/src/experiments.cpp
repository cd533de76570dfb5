#include "wedgescope/experiments.hpp"

#include "wedgescope/csv.hpp"
#include "wedgescope/parallel.hpp"
#include "wedgescope/random.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>

namespace wedge {

namespace fs = std::filesystem;

namespace {

void log(const ExperimentContext& ctx, const std::string& msg) {
  if (!ctx.quiet) std::cerr << msg << '\n';
}

void write_json(const fs::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

const Json kEmpty = Json::object();

enum class Needs { toy, network, either };

struct NetworkSetup {
  MLPSpec spec;
  Dataset data;
  Batch train_batch;
  Batch test_batch;
  TrainConfig train;
};

/// The loss surface an experiment runs on, plus how to make optima on it.
struct Problem {
  std::uint64_t seed = 0;
  std::optional<LandscapeConfig> landscape;
  std::optional<NetworkSetup> net;
  OptimizerConfig optimum_cfg;
  double init_scale = 1.0;
  std::unique_ptr<LossOracle> oracle;

  bool is_toy() const { return landscape.has_value(); }
  const WedgeLandscape& toy() const { return *oracle->toy(); }
  std::size_t dim() const { return oracle->dimension(); }

  MLPSpec net_spec(std::uint64_t index) const {
    MLPSpec s = net->spec;
    s.seed = derive_seed(seed, "net-init", index);
    return s;
  }

  ParamVector init_point(std::uint64_t index) const {
    if (is_toy()) return standard_normal(derive_seed(seed, "init", index), dim(), init_scale);
    return init_params(net_spec(index));
  }

  TrainResult train_net(std::uint64_t index) const {
    TrainConfig cfg = net->train;
    cfg.seed = derive_seed(seed, "net-train", index);
    return wedge::train(net_spec(index), net->data, cfg);
  }

  ParamVector optimum(std::uint64_t index) const {
    if (is_toy()) return minimize(*oracle, init_point(index), optimum_cfg).final_point;
    return train_net(index).params;
  }

  std::vector<ParamVector> optima(std::size_t count, int jobs) const {
    std::vector<ParamVector> out(count);
    parallel_for(count, jobs, [&](std::size_t i) { out[i] = optimum(i); });
    return out;
  }
};

OptimizerConfig toy_optimum_defaults() {
  OptimizerConfig c;
  c.method = OptimizerMethod::adam;
  c.learning_rate = 0.01;
  c.max_steps = 10000;
  return c;
}

Json parse_dataset(const Json& j, Dataset& out) {
  StrictObject o(j, "network.dataset");
  Json resolved;
  if (o.has("csv")) {
    const auto path = o.get_required<std::string>("csv");
    const auto label = o.get<std::string>("label_column", "label");
    const auto split_seed = o.get<std::uint64_t>("split_seed", 0);
    o.finish();
    out = load_csv(path, label, split_seed);
    resolved = {{"csv", path}, {"label_column", label}, {"split_seed", split_seed}};
  } else {
    const auto kind = o.get<std::string>("kind", "two_moons");
    const auto n = o.get<std::size_t>("n", 500);
    const auto noise = o.get<double>("noise", 0.2);
    const auto seed = o.get<std::uint64_t>("seed", 0);
    o.finish();
    out = generate_dataset(dataset_kind_from_string(kind), n, noise, seed);
    resolved = {{"kind", kind}, {"n", n}, {"noise", noise}, {"seed", seed}};
  }
  return resolved;
}

Json parse_network(const Json& j, NetworkSetup& setup) {
  StrictObject o(j, "network");
  const Json* dj = o.optional("dataset");
  Json resolved;
  resolved["dataset"] = parse_dataset(dj ? *dj : kEmpty, setup.data);
  if (const Json* sj = o.optional("spec")) {
    setup.spec = mlp_spec_from_json(*sj, "network.spec", false);
  } else {
    setup.spec.layer_sizes = {static_cast<int>(setup.data.inputs.cols()), 32, 32, setup.data.num_classes};
  }
  if (setup.spec.input_dim() != setup.data.inputs.cols())
    throw InvalidArgument("network.spec.layer_sizes[0] must equal the dataset feature count (" +
                          std::to_string(setup.data.inputs.cols()) + ")");
  if (setup.spec.num_classes() < setup.data.num_classes)
    throw InvalidArgument("network.spec has fewer outputs than the dataset has classes");
  const Json* tj = o.optional("train");
  setup.train = train_config_from_json(tj ? *tj : kEmpty, "network.train", TrainConfig{}, false);
  o.finish();
  setup.train_batch = setup.data.train();
  setup.test_batch = setup.data.test();
  resolved["spec"] = to_json(setup.spec, false);
  resolved["train"] = to_json(setup.train, false);
  return resolved;
}

Problem parse_problem(StrictObject& o, Json& resolved, std::uint64_t seed, Needs needs,
                      const char* experiment) {
  Problem p;
  p.seed = seed;
  const Json* lj = o.optional("landscape");
  const Json* nj = o.optional("network");
  if (lj && nj) throw InvalidArgument("config has both 'landscape' and 'network'; pick one");
  if (!lj && !nj) {
    if (needs == Needs::network) throw InvalidArgument("missing required config key 'network'");
    if (needs == Needs::toy) throw InvalidArgument("missing required config key 'landscape'");
    throw InvalidArgument("missing required config key 'landscape' (or 'network')");
  }
  if (lj && needs == Needs::network)
    throw InvalidArgument(std::string(experiment) + " runs on networks; missing required config key 'network'");
  if (nj && needs == Needs::toy)
    throw InvalidArgument(std::string(experiment) + " runs on the toy landscape; missing required config key 'landscape'");
  const Json* optj = o.optional("optimizer");
  const Json* scalej = o.optional("init_scale");
  if (lj) {
    p.landscape = landscape_config_from_json(*lj);
    resolved["landscape"] = to_json(*p.landscape);
    p.optimum_cfg = optimizer_config_from_json(optj ? *optj : kEmpty, "optimizer", toy_optimum_defaults());
    p.init_scale = o.get<double>("init_scale", 1.0);
    if (!(p.init_scale > 0.0)) throw InvalidArgument("init_scale must be > 0");
    resolved["optimizer"] = to_json(p.optimum_cfg);
    resolved["init_scale"] = p.init_scale;
    p.oracle = std::make_unique<ToyOracle>(p.landscape->build());
  } else {
    if (optj) throw InvalidArgument("config key 'optimizer' applies to toy landscapes; networks use 'network.train'");
    if (scalej) throw InvalidArgument("config key 'init_scale' applies to toy landscapes only");
    NetworkSetup setup;
    resolved["network"] = parse_network(*nj, setup);
    p.net = std::move(setup);
    p.oracle = std::make_unique<NetOracle>(p.net->spec, p.net->train_batch, p.net->train.l2_coeff);
  }
  return p;
}

struct InnerSetup {
  OptimizerConfig cfg;
  bool stop_at_endpoint_loss = true;

  OptimizerConfig for_endpoints(double endpoint_loss) const {
    OptimizerConfig c = cfg;
    if (stop_at_endpoint_loss) c.loss_tolerance = std::max(c.loss_tolerance, endpoint_loss);
    return c;
  }
};

InnerSetup parse_inner(StrictObject& o, Json& resolved, const Problem& p) {
  OptimizerConfig defaults;
  if (p.is_toy()) {
    defaults.method = OptimizerMethod::gd;
    defaults.learning_rate = 0.01;
    defaults.max_steps = 10000;
  } else {
    defaults.method = OptimizerMethod::adam;
    defaults.learning_rate = 1e-3;
    defaults.max_steps = 3000;
    defaults.plateau_patience = 0;
  }
  InnerSetup s;
  const Json* ij = o.optional("inner_optimizer");
  s.cfg = optimizer_config_from_json(ij ? *ij : kEmpty, "inner_optimizer", defaults);
  s.stop_at_endpoint_loss = o.get("stop_at_endpoint_loss", true);
  resolved["inner_optimizer"] = to_json(s.cfg);
  resolved["stop_at_endpoint_loss"] = s.stop_at_endpoint_loss;
  return s;
}

std::uint64_t read_seed(StrictObject& o, const ExperimentContext& ctx) {
  const auto from_config = o.get<std::uint64_t>("seed", 0);
  return ctx.seed.value_or(from_config);
}

// The flag wins over the config key. Only a config-supplied directory is echoed
// into resolved_config.json, so re-runs into another directory stay identical.
fs::path read_output_dir(StrictObject& o, const ExperimentContext& ctx, Json& resolved) {
  const Json* v = o.optional("output_dir");
  if (ctx.output_dir) return *ctx.output_dir;
  if (!v) throw InvalidArgument("missing required config key 'output_dir' (or pass --output)");
  const auto dir = o.get<std::string>("output_dir", "");
  resolved["output_dir"] = dir;
  return fs::path(dir);
}

void write_linear_path(const fs::path& path, const BarrierReport& r) {
  CsvWriter csv(path, {"index", "t", "loss"});
  const std::size_t n = r.losses.size();
  for (std::size_t i = 0; i < n; ++i) {
    csv.cell(i).cell(static_cast<double>(i) / static_cast<double>(n - 1)).cell(r.losses[i]);
    csv.end_row();
  }
}

std::size_t wedge_changes(const WedgeLandscape& toy, const std::vector<ParamVector>& points) {
  std::size_t changes = 0;
  for (std::size_t i = 1; i < points.size(); ++i)
    changes += toy.nearest_wedge(points[i]) == toy.nearest_wedge(points[i - 1]) ? 0 : 1;
  return changes;
}

struct Run {
  StrictObject& cfg;
  Json& resolved;
  const ExperimentContext& ctx;
  fs::path out;
  std::uint64_t seed;
};

// ---------------------------------------------------------------------------

Json toy_optimize(Run& r) {
  Json& res = r.resolved;
  Problem p = parse_problem(r.cfg, res, r.seed, Needs::toy, "toy-optimize");
  r.cfg.finish();
  fs::create_directories(r.out);
  const ParamVector p0 = p.init_point(0);
  const Trajectory t = minimize(*p.oracle, p0, p.optimum_cfg);
  t.write_csv(r.out / "trajectory.csv");
  write_json(r.out / "final_point.json", to_json(t.final_point));
  return {{"initial_loss", t.initial_loss()},
          {"final_loss", t.final_loss()},
          {"converged", t.converged},
          {"steps", t.points.back().step},
          {"final_radius", t.final_point.norm()},
          {"nearest_wedge", p.toy().nearest_wedge(t.final_point).to_string()}};
}

Json hyperplane_sweep(Run& r) {
  Json& res = r.resolved;
  Problem p = parse_problem(r.cfg, res, r.seed, Needs::toy, "hyperplane-sweep");
  const int dim = static_cast<int>(p.dim());
  std::vector<int> d_values;
  if (const Json* dv = r.cfg.optional("d_values")) {
    d_values = dv->get<std::vector<int>>();
  } else {
    for (int d = 2; d <= std::min(dim, 20); ++d) d_values.push_back(d);
  }
  if (d_values.empty()) throw InvalidArgument("d_values must not be empty");
  for (int d : d_values)
    if (d < 1 || d > dim) throw InvalidArgument("every d in d_values must satisfy 1 <= d <= D");
  const int seeds = r.cfg.get("seeds", 20);
  const double success_loss = r.cfg.get("success_loss", 1e-3);
  const double offset_scale = r.cfg.get("offset_scale", 1.0);
  r.cfg.finish();
  if (seeds < 1) throw InvalidArgument("seeds must be >= 1");
  res["d_values"] = d_values;
  res["seeds"] = seeds;
  res["success_loss"] = success_loss;
  res["offset_scale"] = offset_scale;
  fs::create_directories(r.out);

  const std::size_t cells = d_values.size() * static_cast<std::size_t>(seeds);
  std::vector<double> final_loss(cells);
  parallel_for(cells, r.ctx.jobs, [&](std::size_t c) {
    const int d = d_values[c / static_cast<std::size_t>(seeds)];
    const auto s = static_cast<std::uint64_t>(c % static_cast<std::size_t>(seeds));
    const auto run_seed = derive_seed(r.seed, "hyperplane-run", s);
    const ParamVector offset = standard_normal(derive_seed(run_seed, "offset"), p.dim(), offset_scale);
    const Hyperplane plane = random_hyperplane(dim, d, offset, derive_seed(run_seed, "basis"));
    final_loss[c] = hyperplane_minimize(*p.oracle, plane, ParamVector::Zero(d), p.optimum_cfg)
                        .trajectory.final_loss();
  });
  log(r.ctx, "hyperplane-sweep: " + std::to_string(cells) + " runs done");

  CsvWriter csv(r.out / "sweep.csv", {"d", "seed", "final_loss"});
  for (std::size_t c = 0; c < cells; ++c) {
    csv.cell(d_values[c / static_cast<std::size_t>(seeds)]).cell(c % static_cast<std::size_t>(seeds)).cell(final_loss[c]);
    csv.end_row();
  }
  Json rates = Json::object();
  std::vector<double> rate(d_values.size());
  CsvWriter rcsv(r.out / "success.csv", {"d", "success_rate", "median_final_loss"});
  for (std::size_t i = 0; i < d_values.size(); ++i) {
    std::vector<double> losses(final_loss.begin() + static_cast<long>(i * seeds),
                               final_loss.begin() + static_cast<long>((i + 1) * seeds));
    rate[i] = static_cast<double>(std::count_if(losses.begin(), losses.end(),
                                                [&](double l) { return l < success_loss; })) /
              seeds;
    rates[std::to_string(d_values[i])] = rate[i];
    rcsv.cell(d_values[i]).cell(rate[i]).cell(percentile(losses, 0.5));
    rcsv.end_row();
  }
  // Smallest d from which every larger tested d succeeds in >= 90% of seeds.
  Json boundary = nullptr;
  for (std::size_t i = d_values.size(); i-- > 0;) {
    if (rate[i] < 0.9) break;
    boundary = d_values[i];
  }
  return {{"runs", cells}, {"success_rate", rates}, {"boundary_d", boundary},
          {"predicted_d", p.toy().short_dim()}};
}

struct TunnelOutcome {
  std::vector<ParamVector> ends;
  BarrierReport linear;
  Connector connector;
};

TunnelOutcome run_tunnel(const Problem& p, const InnerSetup& inner, int segments, int subsegments,
                         int jobs) {
  TunnelOutcome t;
  t.ends = p.optima(2, jobs);
  t.linear = barrier_profile(*p.oracle, linear_interpolate(t.ends[0], t.ends[1], segments + 1));
  ConnectorOptions opts;
  opts.jobs = jobs;
  opts.subsegment_samples = subsegments;
  t.connector = build_tunnel(*p.oracle, t.ends[0], t.ends[1], segments,
                             inner.for_endpoints(t.linear.endpoint_max), opts);
  return t;
}

Json tunnel_like(Run& r, const char* name, bool full_outputs) {
  Json& res = r.resolved;
  Problem p = parse_problem(r.cfg, res, r.seed, Needs::either, name);
  const InnerSetup inner = parse_inner(r.cfg, res, p);
  const int segments = r.cfg.get("segments", 20);
  const int subsegments = r.cfg.get("subsegment_samples", 0);
  r.cfg.finish();
  if (segments < 2) throw InvalidArgument("segments must be >= 2");
  if (subsegments < 0) throw InvalidArgument("subsegment_samples must be >= 0");
  res["segments"] = segments;
  res["subsegment_samples"] = subsegments;
  fs::create_directories(r.out);

  const TunnelOutcome t = run_tunnel(p, inner, segments, subsegments, r.ctx.jobs);
  const CosineMatrix cos = deviation_cosines(t.connector);
  const CosineSummary cs = summarize_cosines(t.connector, cos);
  t.connector.write_csv(r.out / "connector.csv");
  cos.write_csv(r.out / "cosines.csv");
  write_json(r.out / "cosines.json", to_json(cs));
  Json summary{{"endpoint_losses", {t.linear.losses.front(), t.linear.losses.back()}},
               {"tunnel_max_loss", t.connector.max_loss()},
               {"cosines", to_json(cs)}};
  if (full_outputs) {
    write_linear_path(r.out / "linear_path.csv", t.linear);
    write_json(r.out / "connector.json", connector_sidecar(t.connector, inner.cfg));
    summary["linear_max_loss"] = t.linear.max_loss;
    summary["barrier_height"] = t.linear.barrier_height;
    if (t.connector.subsegment_max_loss) summary["subsegment_max_loss"] = *t.connector.subsegment_max_loss;
    if (p.is_toy()) summary["wedge_changes"] = wedge_changes(p.toy(), t.connector.waypoints);
  }
  return summary;
}

Json tunnel(Run& r) { return tunnel_like(r, "tunnel", true); }
Json deviation_cosines_cmd(Run& r) { return tunnel_like(r, "deviation-cosines", false); }

struct ShortDirSetup {
  ShortDirectionMethod method;
  double kappa;
  ShortDirectionOptions options;
};

ShortDirSetup parse_short_dirs(const Json& j, const std::string& path, const Problem& p, Json& resolved) {
  StrictObject o(j, path);
  ShortDirSetup s;
  s.method = short_direction_method_from_string(
      o.get<std::string>("method", p.is_toy() ? "exact_toy" : "hessian_fd"));
  s.kappa = o.get("kappa", 0.5);
  s.options.fd_step = o.get("fd_step", s.options.fd_step);
  s.options.toy_tolerance = o.get("tolerance", s.options.toy_tolerance);
  s.options.max_dim = o.get("max_dim", s.options.max_dim);
  o.finish();
  resolved = {{"method", to_string(s.method)},
              {"kappa", s.kappa},
              {"fd_step", s.options.fd_step},
              {"tolerance", s.options.toy_tolerance},
              {"max_dim", s.options.max_dim}};
  return s;
}

Json m_connector(Run& r) {
  Json& res = r.resolved;
  Problem p = parse_problem(r.cfg, res, r.seed, Needs::either, "m-connector");
  const InnerSetup inner = parse_inner(r.cfg, res, p);
  const int m = r.cfg.get("m", 2);
  const int grid = r.cfg.get("grid_points_per_edge", 5);
  const Json* sj = r.cfg.optional("short_dirs");
  Json sres;
  ShortDirSetup sd = parse_short_dirs(sj ? *sj : kEmpty, "short_dirs", p, sres);
  r.cfg.finish();
  if (m < 1 || m > 10) throw InvalidArgument("m must lie in [1, 10]");
  res["m"] = m;
  res["grid_points_per_edge"] = grid;
  res["short_dirs"] = sres;
  fs::create_directories(r.out);

  const auto optima = p.optima(static_cast<std::size_t>(m) + 1, r.ctx.jobs);
  double endpoint_max = 0.0;
  for (const auto& o : optima) endpoint_max = std::max(endpoint_max, p.oracle->loss(o));
  const OptimizerConfig cfg = inner.for_endpoints(endpoint_max);
  ConnectorOptions opts;
  opts.jobs = r.ctx.jobs;
  const Connector c = build_m_connector(*p.oracle, optima, grid, cfg, opts);
  c.write_csv(r.out / "connector.csv");
  write_json(r.out / "connector.json", connector_sidecar(c, inner.cfg));

  const std::vector<double> centroid_w(static_cast<std::size_t>(m) + 1, 1.0 / (m + 1));
  const HullPoint centroid = optimize_hull_point(*p.oracle, optima, centroid_w, cfg);
  sd.options.jobs = r.ctx.jobs;
  const ShortDirectionReport count = short_direction_count(*p.oracle, centroid.point, sd.kappa, sd.method, sd.options);
  write_json(r.out / "centroid_short_dirs.json", to_json(count));
  return {{"waypoints", c.size()},
          {"max_loss", c.max_loss()},
          {"endpoint_max_loss", c.endpoint_max_loss()},
          {"centroid_start_loss", centroid.start_loss},
          {"centroid_loss", centroid.loss},
          {"centroid_short_count", count.count}};
}

/// Point on a random wedge with the given norm (toy only).
ParamVector wedge_point(const Problem& p, double norm, std::uint64_t seed) {
  const WedgeLandscape& toy = p.toy();
  Rng rng(derive_seed(seed, "wedge-point"));
  std::vector<int> axes(static_cast<std::size_t>(toy.dim()));
  std::iota(axes.begin(), axes.end(), 0);
  std::shuffle(axes.begin(), axes.end(), rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  ParamVector q = ParamVector::Zero(toy.dim());
  for (int i = 0; i < toy.wedge_dim(); ++i) q[axes[static_cast<std::size_t>(i)]] = normal(rng);
  q *= norm / q.norm();
  return toy.from_frame(q);
}

Json probe_width(Run& r) {
  Json& res = r.resolved;
  Problem p = parse_problem(r.cfg, res, r.seed, Needs::either, "probe-width");
  const auto center_kind = r.cfg.get<std::string>("center", p.is_toy() ? "wedge" : "optimum");
  if (center_kind != "wedge" && center_kind != "optimum")
    throw InvalidArgument("center must be 'wedge' or 'optimum'");
  if (center_kind == "wedge" && !p.is_toy()) throw InvalidArgument("center 'wedge' needs the toy landscape");
  const double center_norm = r.cfg.get("center_norm", 10.0);
  const Json* thr = r.cfg.optional("threshold");
  const double fraction = r.cfg.get("threshold_fraction", 0.5);
  const int k = r.cfg.get("K", 200);
  const double r_max = r.cfg.get("r_max", 100.0);
  r.cfg.finish();
  fs::create_directories(r.out);

  ParamVector center;
  double threshold = 0.0;
  Json thr_info;
  if (center_kind == "wedge") {
    center = wedge_point(p, center_norm, r.seed);
    threshold = thr ? thr->get<double>() : 0.5;
    res["center_norm"] = center_norm;
  } else {
    center = p.optimum(0);
    if (thr) {
      threshold = thr->get<double>();
    } else {
      const double end = p.oracle->loss(center);
      const double init = p.oracle->loss(p.init_point(0));
      threshold = end + fraction * (init - end);
      thr_info = {{"endpoint_loss", end}, {"init_loss", init}};
    }
    res["threshold_fraction"] = fraction;
  }
  res["center"] = center_kind;
  res["threshold"] = thr ? Json(threshold) : Json(nullptr);
  res["K"] = k;
  res["r_max"] = r_max;

  const TunnelWidthReport w = radial_tunnel_width(*p.oracle, center, threshold, k, r_max,
                                                  derive_seed(r.seed, "probe"), r.ctx.jobs);
  w.write_csv(r.out / "width.csv");
  Json summary = to_json(w);
  summary["median_angular"] = percentile(w.angular, 0.5);
  if (!thr_info.is_null()) summary["threshold_rule"] = thr_info;
  write_json(r.out / "width.json", summary);
  return summary;
}

Json short_dirs(Run& r) {
  Json& res = r.resolved;
  Problem p = parse_problem(r.cfg, res, r.seed, Needs::either, "short-dirs");
  const auto point = r.cfg.get<std::string>("point", "tunnel_midpoint");
  Json sres;
  const Json* sj = r.cfg.optional("short_dirs");
  ShortDirSetup sd = parse_short_dirs(sj ? *sj : kEmpty, "short_dirs", p, sres);
  std::optional<InnerSetup> inner;
  int segments = 0;
  if (point == "tunnel_midpoint") {
    inner = parse_inner(r.cfg, res, p);
    segments = r.cfg.get("segments", 20);
    if (segments < 2) throw InvalidArgument("segments must be >= 2");
    res["segments"] = segments;
  } else if (point != "optimum") {
    throw InvalidArgument("point must be 'optimum' or 'tunnel_midpoint'");
  }
  r.cfg.finish();
  res["point"] = point;
  res["short_dirs"] = sres;
  fs::create_directories(r.out);

  ParamVector x;
  if (inner) {
    const TunnelOutcome t = run_tunnel(p, *inner, segments, 0, r.ctx.jobs);
    x = t.connector.waypoints[t.connector.size() / 2];
  } else {
    x = p.optimum(0);
  }
  sd.options.jobs = r.ctx.jobs;
  const ShortDirectionReport rep = short_direction_count(*p.oracle, x, sd.kappa, sd.method, sd.options);
  if (rep.eigenvalues) rep.write_eigenvalues(r.out / "eigenvalues.txt");
  write_json(r.out / "short_dirs.json", to_json(rep));
  Json summary{{"count", rep.count}, {"method", to_string(rep.method)}, {"loss", p.oracle->loss(x)}};
  if (p.is_toy()) summary["short_dim"] = p.toy().short_dim();
  return summary;
}

Json train_net(Run& r) {
  Json& res = r.resolved;
  Problem p = parse_problem(r.cfg, res, r.seed, Needs::network, "train-net");
  r.cfg.finish();
  fs::create_directories(r.out);
  const TrainResult t = p.train_net(0);
  t.write_csv(r.out / "training.csv");
  save_checkpoint(r.out / "checkpoint.wsck", p.net_spec(0), t.params);
  const EpochRecord& last = t.epochs.back();
  return {{"parameters", p.dim()},
          {"epochs", last.epoch},
          {"train_loss", last.train_loss},
          {"train_accuracy", last.train_accuracy},
          {"test_loss", last.test_loss},
          {"test_accuracy", last.test_accuracy},
          {"radius", last.radius}};
}

Json barrier(Run& r) {
  Json& res = r.resolved;
  Problem p = parse_problem(r.cfg, res, r.seed, Needs::either, "barrier");
  const int k = r.cfg.get("k", 21);
  r.cfg.finish();
  res["k"] = k;
  fs::create_directories(r.out);
  const auto ends = p.optima(2, r.ctx.jobs);
  const BarrierReport b = barrier_profile(*p.oracle, linear_interpolate(ends[0], ends[1], k));
  write_linear_path(r.out / "linear_path.csv", b);
  Json summary = to_json(b);
  summary["midpoint_loss"] = b.losses[b.losses.size() / 2];
  write_json(r.out / "barrier.json", summary);
  return summary;
}

Json swa_compare(Run& r) {
  Json& res = r.resolved;
  Problem p = parse_problem(r.cfg, res, r.seed, Needs::either, "swa-compare");
  const Json* schj = r.cfg.optional("schedule");
  const CyclicalSchedule base = schedule_from_json(schj ? *schj : kEmpty);
  std::vector<double> lr_values{base.lr_max};
  if (const Json* lv = r.cfg.optional("lr_max_values")) lr_values = lv->get<std::vector<double>>();
  if (lr_values.empty()) throw InvalidArgument("lr_max_values must not be empty");
  const int seeds = r.cfg.get("seeds", 1);
  OptimizerConfig snap_defaults;
  snap_defaults.method = p.is_toy() ? OptimizerMethod::gd : OptimizerMethod::adam;
  const Json* sj = r.cfg.optional("snapshot_optimizer");
  const OptimizerConfig snap_cfg = optimizer_config_from_json(sj ? *sj : kEmpty, "snapshot_optimizer", snap_defaults);
  r.cfg.finish();
  if (seeds < 1) throw InvalidArgument("seeds must be >= 1");
  res["schedule"] = to_json(base);
  res["lr_max_values"] = lr_values;
  res["seeds"] = seeds;
  res["snapshot_optimizer"] = to_json(snap_cfg);
  fs::create_directories(r.out);

  const std::size_t cells = lr_values.size() * static_cast<std::size_t>(seeds);
  std::vector<SwaSweepRow> rows(cells);
  parallel_for(cells, r.ctx.jobs, [&](std::size_t c) {
    CyclicalSchedule s = base;
    s.lr_max = lr_values[c / static_cast<std::size_t>(seeds)];
    if (s.lr_min > s.lr_max) s.lr_min = s.lr_max;
    const auto seed_index = static_cast<std::uint64_t>(c % static_cast<std::size_t>(seeds));
    const ParamVector p0 = p.init_point(seed_index);
    rows[c].lr_max = s.lr_max;
    rows[c].seed = seed_index;
    if (p.is_toy()) {
      rows[c].report = swa_experiment(*p.oracle, p0, snap_cfg, s);
    } else {
      rows[c].report = swa_experiment(static_cast<const NetOracle&>(*p.oracle), p0, snap_cfg, s,
                                      p.net->test_batch);
    }
  });
  write_swa_sweep_csv(r.out / "swa_sweep.csv", rows);
  Json all = Json::array();
  for (const auto& row : rows) all.push_back({{"lr_max", row.lr_max}, {"seed", row.seed}, {"report", to_json(row.report)}});
  write_json(r.out / "swa.json", all);

  Json per_lr = Json::array();
  for (std::size_t i = 0; i < lr_values.size(); ++i) {
    std::size_t same = 0, high = 0, pred_wins = 0;
    for (int s = 0; s < seeds; ++s) {
      const SwaReport& rep = rows[i * static_cast<std::size_t>(seeds) + static_cast<std::size_t>(s)].report;
      if (rep.same_wedge && *rep.same_wedge) ++same;
      if (rep.same_wedge && !*rep.same_wedge && rep.weight_avg_loss > 10.0 * rep.median_snapshot_loss) ++high;
      if (rep.pred_avg_loss && *rep.pred_avg_loss <= rep.weight_avg_loss) ++pred_wins;
    }
    Json e{{"lr_max", lr_values[i]}};
    if (p.is_toy()) {
      e["same_wedge_fraction"] = static_cast<double>(same) / seeds;
      e["high_avg_loss_fraction"] = static_cast<double>(high) / seeds;
    } else {
      e["pred_beats_weight_fraction"] = static_cast<double>(pred_wins) / seeds;
    }
    per_lr.push_back(e);
  }
  return {{"runs", cells}, {"by_lr_max", per_lr}};
}

// Regular grid over the feature bounding box widened by half its extent on
// every side (2-feature datasets only; one row per grid node).
Matrix input_grid(const Matrix& data, int per_axis) {
  if (data.cols() != 2) throw InvalidArgument("inputs 'grid' needs a dataset with 2 features");
  Matrix g(static_cast<Eigen::Index>(per_axis) * per_axis, 2);
  Eigen::Vector2d lo = data.colwise().minCoeff().transpose();
  Eigen::Vector2d hi = data.colwise().maxCoeff().transpose();
  const Eigen::Vector2d pad = 0.5 * (hi - lo);
  lo -= pad;
  hi += pad;
  Eigen::Index row = 0;
  for (int i = 0; i < per_axis; ++i) {
    for (int j = 0; j < per_axis; ++j) {
      g(row, 0) = lo[0] + (hi[0] - lo[0]) * i / (per_axis - 1);
      g(row, 1) = lo[1] + (hi[1] - lo[1]) * j / (per_axis - 1);
      ++row;
    }
  }
  return g;
}

Json prediction_profile(Run& r) {
  Json& res = r.resolved;
  Problem p = parse_problem(r.cfg, res, r.seed, Needs::network, "prediction-profile");
  const InnerSetup inner = parse_inner(r.cfg, res, p);
  const int segments = r.cfg.get("segments", 10);
  const auto inputs = r.cfg.get<std::string>("inputs", "test");
  r.cfg.finish();
  if (segments < 2) throw InvalidArgument("segments must be >= 2");
  if (inputs != "test" && inputs != "train" && inputs != "grid")
    throw InvalidArgument("inputs must be 'test', 'train' or 'grid'");
  res["segments"] = segments;
  res["inputs"] = inputs;
  fs::create_directories(r.out);

  const TunnelOutcome t = run_tunnel(p, inner, segments, 0, r.ctx.jobs);
  const Matrix x = inputs == "grid"   ? input_grid(p.net->data.inputs, 50)
                  : inputs == "test" ? p.net->test_batch.inputs
                                     : p.net->train_batch.inputs;
  const auto profile = prediction_change_profile(p.net->spec, t.connector, x);
  CsvWriter csv(r.out / "profile.csv", {"index", "t", "disagreement"});
  for (std::size_t i = 0; i < profile.size(); ++i) {
    csv.cell(i).cell(t.connector.position(i)).cell(profile[i]);
    csv.end_row();
  }
  t.connector.write_csv(r.out / "connector.csv");
  const std::size_t mid = (profile.size() - 1) / 2;
  const auto [lo1, hi1] = std::minmax_element(profile.begin(), profile.begin() + static_cast<long>(mid) + 1);
  const auto [lo2, hi2] = std::minmax_element(profile.begin() + static_cast<long>(mid), profile.end());
  return {{"profile", profile},
          {"first_half_span", *hi1 - *lo1},
          {"second_half_range", *hi2 - *lo2},
          {"endpoint_disagreement", profile.back()},
          {"endpoint_losses", {t.linear.losses.front(), t.linear.losses.back()}},
          {"linear_midpoint_loss", t.linear.losses[t.linear.losses.size() / 2]},
          {"tunnel_max_loss", t.connector.max_loss()},
          {"linear_max_loss", t.linear.max_loss}};
}

Json sweep(Run& r);

using Handler = std::function<Json(Run&)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table{
      {"toy-optimize", toy_optimize},
      {"hyperplane-sweep", hyperplane_sweep},
      {"tunnel", tunnel},
      {"m-connector", m_connector},
      {"probe-width", probe_width},
      {"short-dirs", short_dirs},
      {"train-net", train_net},
      {"barrier", barrier},
      {"swa-compare", swa_compare},
      {"deviation-cosines", deviation_cosines_cmd},
      {"prediction-profile", prediction_profile},
      {"sweep", sweep},
  };
  return table;
}

void set_path(Json& j, const std::string& dotted, const Json& value) {
  Json* cur = &j;
  std::size_t start = 0;
  for (;;) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw InvalidArgument("bad grid key '" + dotted + "'");
    if (!cur->is_object()) throw InvalidArgument("grid key '" + dotted + "' walks into a non-object");
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      return;
    }
    if (!cur->contains(key)) (*cur)[key] = Json::object();
    cur = &(*cur)[key];
    start = dot + 1;
  }
}

Json sweep(Run& r) {
  Json& res = r.resolved;
  const auto sub = r.cfg.get_required<std::string>("subcommand");
  if (sub == "sweep" || !handlers().count(sub)) throw InvalidArgument("sweep.subcommand '" + sub + "' is not a runnable subcommand");
  const Json base = r.cfg.get<Json>("base", Json::object());
  if (!base.is_object()) throw InvalidArgument("config key 'base' must be an object");
  const Json& grid = r.cfg.required("grid");
  const int seeds = r.cfg.get("seeds", 1);
  r.cfg.finish();
  if (!grid.is_object() || grid.empty()) throw InvalidArgument("sweep grid must name at least one key");
  if (grid.size() > 2) throw InvalidArgument("sweep grid supports one or two keys");
  if (seeds < 1) throw InvalidArgument("seeds must be >= 1");
  std::vector<std::string> keys;
  std::vector<std::vector<Json>> values;
  for (const auto& item : grid.items()) {
    if (!item.value().is_array() || item.value().empty())
      throw InvalidArgument("sweep grid '" + item.key() + "' must be a nonempty array");
    keys.push_back(item.key());
    values.emplace_back(item.value().begin(), item.value().end());
  }
  res["subcommand"] = sub;
  res["base"] = base;
  res["grid"] = grid;
  res["seeds"] = seeds;
  fs::create_directories(r.out);

  std::size_t n_cells = 1;
  for (const auto& v : values) n_cells *= v.size();
  const std::size_t runs = n_cells * static_cast<std::size_t>(seeds);
  struct Outcome {
    std::vector<Json> assignment;
    std::uint64_t seed = 0;
    std::string status;
    Json summary;
  };
  std::vector<Outcome> outcomes(runs);
  parallel_for(runs, r.ctx.jobs, [&](std::size_t i) {
    Outcome& o = outcomes[i];
    std::size_t cell = i / static_cast<std::size_t>(seeds);
    const auto s = static_cast<std::uint64_t>(i % static_cast<std::size_t>(seeds));
    Json cfg = base;
    for (std::size_t k = keys.size(); k-- > 0;) {
      o.assignment.insert(o.assignment.begin(), values[k][cell % values[k].size()]);
      cell /= values[k].size();
    }
    for (std::size_t k = 0; k < keys.size(); ++k) set_path(cfg, keys[k], o.assignment[k]);
    o.seed = derive_seed(r.seed, "sweep", s);
    ExperimentContext sub_ctx;
    sub_ctx.output_dir = r.out / ("run_" + std::to_string(i));
    sub_ctx.seed = o.seed;
    sub_ctx.jobs = 1;
    sub_ctx.quiet = true;
    try {
      o.summary = run_experiment(sub, cfg, sub_ctx).summary;
      o.status = "ok";
    } catch (const Error& e) {
      o.status = std::string(e.kind() == ErrorKind::numerical ? "numerical_error: " : "error: ") + e.what();
    }
    log(r.ctx, "sweep: run " + std::to_string(i) + " " + o.status);
  });

  std::vector<std::string> metrics;
  for (const auto& o : outcomes) {
    if (o.status != "ok") continue;
    for (const auto& item : o.summary.items()) {
      if ((item.value().is_number() || item.value().is_boolean()) &&
          std::find(metrics.begin(), metrics.end(), item.key()) == metrics.end())
        metrics.push_back(item.key());
    }
  }
  std::vector<std::string> header{"run"};
  header.insert(header.end(), keys.begin(), keys.end());
  header.insert(header.end(), {"seed", "status"});
  header.insert(header.end(), metrics.begin(), metrics.end());
  CsvWriter csv(r.out / "sweep.csv", header);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < runs; ++i) {
    const Outcome& o = outcomes[i];
    csv.cell(i);
    for (const auto& v : o.assignment) {
      if (v.is_number()) {
        csv.cell(v.get<double>());
      } else {
        csv.cell(v.is_string() ? v.get<std::string>() : v.dump());
      }
    }
    csv.cell(static_cast<long long>(o.seed));
    std::string status = o.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    csv.cell(status);
    ok += o.status == "ok" ? 1 : 0;
    for (const auto& m : metrics) {
      const auto it = o.summary.is_object() ? o.summary.find(m) : o.summary.end();
      if (o.status != "ok" || it == o.summary.end()) {
        csv.cell("");
      } else if (it->is_boolean()) {
        csv.cell(it->get<bool>());
      } else {
        csv.cell(it->get<double>());
      }
    }
    csv.end_row();
  }
  return {{"runs", runs}, {"succeeded", ok}, {"failed", runs - ok}};
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "toy-optimize", "hyperplane-sweep", "tunnel",      "m-connector",
      "probe-width",  "short-dirs",       "train-net",   "barrier",
      "swa-compare",  "deviation-cosines", "prediction-profile", "sweep"};
  return names;
}

ExperimentResult run_experiment(const std::string& name, const Json& config,
                                const ExperimentContext& ctx) {
  const auto it = handlers().find(name);
  if (it == handlers().end()) throw InvalidArgument("unknown subcommand '" + name + "'");
  StrictObject cfg(config, "");
  ExperimentResult result;
  result.resolved_config = Json::object();
  const std::uint64_t seed = read_seed(cfg, ctx);
  result.resolved_config["seed"] = seed;
  const fs::path out = read_output_dir(cfg, ctx, result.resolved_config);
  Run run{cfg, result.resolved_config, ctx, out, seed};
  log(ctx, name + ": writing to " + out.string());
  Json summary;
  try {
    summary = it->second(run);
  } catch (const nlohmann::json::type_error& e) {
    throw InvalidArgument(std::string("config value has the wrong type: ") + e.what());
  }
  result.summary = Json{{"subcommand", name}, {"seed", seed}};
  result.summary.update(summary);
  write_json(out / "resolved_config.json", result.resolved_config);
  write_json(out / "summary.json", result.summary);
  return result;
}

}  // namespace wedge
