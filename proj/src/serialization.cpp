#include "wedgescope/serialization.hpp"

#include <cmath>

namespace wedge {

StrictObject::StrictObject(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
  if (!j_.is_object()) throw InvalidArgument("config section '" + path_ + "' must be a JSON object");
}

std::string StrictObject::child_path(const std::string& key) const {
  return path_.empty() ? key : path_ + "." + key;
}

bool StrictObject::has(const std::string& key) const { return j_.contains(key); }

const Json& StrictObject::required(const std::string& key) {
  const Json* v = optional(key);
  if (!v) throw InvalidArgument("missing required config key '" + child_path(key) + "'");
  return *v;
}

const Json* StrictObject::optional(const std::string& key) {
  seen_.insert(key);
  const auto it = j_.find(key);
  if (it == j_.end() || it->is_null()) return nullptr;
  return &*it;
}

void StrictObject::finish() const {
  for (const auto& item : j_.items()) {
    if (!seen_.count(item.key()))
      throw InvalidArgument("unknown config key '" + child_path(item.key()) + "'");
  }
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json to_json(const OptimizerConfig& cfg) {
  return Json{{"method", to_string(cfg.method)},
              {"learning_rate", cfg.learning_rate},
              {"momentum_coeff", cfg.momentum_coeff},
              {"adam_betas", {cfg.adam_beta1, cfg.adam_beta2}},
              {"adam_eps", cfg.adam_eps},
              {"max_steps", cfg.max_steps},
              {"loss_tolerance", cfg.loss_tolerance},
              {"seed", cfg.seed},
              {"plateau_patience", cfg.plateau_patience},
              {"plateau_factor", cfg.plateau_factor}};
}

OptimizerConfig optimizer_config_from_json(const Json& j, const std::string& path,
                                           const OptimizerConfig& defaults) {
  StrictObject o(j, path);
  OptimizerConfig c = defaults;
  if (const Json* m = o.optional("method")) {
    try {
      c.method = optimizer_method_from_string(m->get<std::string>());
    } catch (const nlohmann::json::exception&) {
      throw InvalidArgument("config key '" + o.child_path("method") + "' must be a string");
    }
  }
  c.learning_rate = o.get("learning_rate", c.learning_rate);
  c.momentum_coeff = o.get("momentum_coeff", c.momentum_coeff);
  if (const Json* b = o.optional("adam_betas")) {
    if (!b->is_array() || b->size() != 2)
      throw InvalidArgument("config key '" + o.child_path("adam_betas") + "' must be [beta1, beta2]");
    c.adam_beta1 = (*b)[0].get<double>();
    c.adam_beta2 = (*b)[1].get<double>();
  }
  c.adam_eps = o.get("adam_eps", c.adam_eps);
  c.max_steps = o.get("max_steps", c.max_steps);
  c.loss_tolerance = o.get("loss_tolerance", c.loss_tolerance);
  c.seed = o.get("seed", c.seed);
  c.plateau_patience = o.get("plateau_patience", c.plateau_patience);
  c.plateau_factor = o.get("plateau_factor", c.plateau_factor);
  o.finish();
  c.validate();
  return c;
}

WedgeLandscape LandscapeConfig::build() const {
  if (rotation_seed) return WedgeLandscape::with_rotation_seed(dim, wedge_dim, *rotation_seed);
  return WedgeLandscape(dim, wedge_dim);
}

Json to_json(const LandscapeConfig& cfg) {
  Json j{{"D", cfg.dim}, {"n", cfg.wedge_dim}};
  j["rotation_seed"] = cfg.rotation_seed ? Json(*cfg.rotation_seed) : Json(nullptr);
  return j;
}

LandscapeConfig landscape_config_from_json(const Json& j, const std::string& path) {
  StrictObject o(j, path);
  LandscapeConfig c;
  c.dim = o.get_required<int>("D");
  c.wedge_dim = o.get_required<int>("n");
  if (const Json* r = o.optional("rotation_seed")) c.rotation_seed = r->get<std::uint64_t>();
  o.finish();
  if (!(c.wedge_dim > 0 && c.wedge_dim < c.dim))
    throw InvalidArgument("landscape needs 0 < n < D (got D=" + std::to_string(c.dim) +
                          ", n=" + std::to_string(c.wedge_dim) + ")");
  return c;
}

Json to_json(const MLPSpec& spec, bool with_seed) {
  Json j{{"layer_sizes", spec.layer_sizes}, {"activation", to_string(spec.activation)}};
  if (with_seed) j["seed"] = spec.seed;
  return j;
}

MLPSpec mlp_spec_from_json(const Json& j, const std::string& path, bool allow_seed) {
  StrictObject o(j, path);
  MLPSpec s;
  s.layer_sizes = o.get_required<std::vector<int>>("layer_sizes");
  s.activation = activation_from_string(o.get<std::string>("activation", "tanh"));
  if (allow_seed) s.seed = o.get<std::uint64_t>("seed", 0);
  o.finish();
  s.validate();
  return s;
}

Json to_json(const TrainConfig& cfg, bool with_seed) {
  Json j{{"learning_rate", cfg.learning_rate},
              {"batch_size", cfg.batch_size},
              {"l2_coeff", cfg.l2_coeff},
              {"dropout_rate", cfg.dropout_rate},
              {"epochs", cfg.epochs},
              {"optimizer", cfg.optimizer == OptimizerMethod::gd ? "sgd" : to_string(cfg.optimizer)},
              {"snapshot_every", cfg.snapshot_every}};
  if (with_seed) j["seed"] = cfg.seed;
  return j;
}

TrainConfig train_config_from_json(const Json& j, const std::string& path, const TrainConfig& defaults,
                                   bool allow_seed) {
  StrictObject o(j, path);
  TrainConfig c = defaults;
  c.learning_rate = o.get("learning_rate", c.learning_rate);
  c.batch_size = o.get("batch_size", c.batch_size);
  c.l2_coeff = o.get("l2_coeff", c.l2_coeff);
  c.dropout_rate = o.get("dropout_rate", c.dropout_rate);
  c.epochs = o.get("epochs", c.epochs);
  if (const Json* m = o.optional("optimizer")) c.optimizer = optimizer_method_from_string(m->get<std::string>());
  if (allow_seed) c.seed = o.get("seed", c.seed);
  c.snapshot_every = o.get("snapshot_every", c.snapshot_every);
  o.finish();
  c.validate();
  return c;
}

Json to_json(const CyclicalSchedule& s) {
  return Json{{"lr_max", s.lr_max}, {"lr_min", s.lr_min}, {"cycle_len", s.cycle_len}, {"n_cycles", s.n_cycles}};
}

CyclicalSchedule schedule_from_json(const Json& j, const std::string& path, const CyclicalSchedule& defaults) {
  StrictObject o(j, path);
  CyclicalSchedule s = defaults;
  s.lr_max = o.get("lr_max", s.lr_max);
  s.lr_min = o.get("lr_min", s.lr_min);
  s.cycle_len = o.get("cycle_len", s.cycle_len);
  s.n_cycles = o.get("n_cycles", s.n_cycles);
  o.finish();
  s.validate();
  return s;
}

Json to_json(const ParamVector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ParamVector param_vector_from_json(const Json& j, const std::string& path) {
  if (!j.is_array()) throw InvalidArgument("'" + path + "' must be an array of numbers");
  ParamVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InvalidArgument("'" + path + "' must be an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Json to_json(const BarrierReport& r) {
  return Json{{"max_loss", r.max_loss},
              {"endpoint_max", r.endpoint_max},
              {"barrier_height", r.barrier_height},
              {"argmax_fraction", r.argmax_fraction},
              {"argmax_index", r.argmax_index}};
}

Json to_json(const CosineSummary& s) {
  return Json{{"split_index", s.split_index},
              {"within_mean", s.within_mean},
              {"cross_abs_mean", s.cross_abs_mean},
              {"within_pairs", s.within_pairs},
              {"cross_pairs", s.cross_pairs}};
}

Json to_json(const ShortDirectionReport& r) {
  Json j{{"count", r.count}, {"threshold", r.threshold}, {"method", to_string(r.method)}};
  if (r.eigenvalues) {
    j["eigenvalues"] = *r.eigenvalues;
    j["asymmetry"] = r.asymmetry;
  }
  return j;
}

Json to_json(const TunnelWidthReport& r) {
  return Json{{"loss_threshold", r.loss_threshold},
              {"r_max", r.r_max},
              {"directions", r.distances.size()},
              {"censored", r.censored_count()},
              {"center_norm", r.center.norm()},
              {"mean", r.mean},
              {"mean_uncensored", number_or_null(r.mean_uncensored)},
              {"median", r.median},
              {"p10", r.p10},
              {"p90", r.p90},
              {"stddev", r.stddev},
              {"relative_std", r.relative_std()}};
}

Json to_json(const SwaReport& r) {
  Json j{{"lr_max", r.lr_max},
         {"snapshot_losses", r.snapshot_losses},
         {"median_snapshot_loss", r.median_snapshot_loss},
         {"weight_avg_loss", r.weight_avg_loss}};
  if (r.pred_avg_loss) j["pred_avg_loss"] = *r.pred_avg_loss;
  if (r.pred_avg_accuracy) j["pred_avg_accuracy"] = *r.pred_avg_accuracy;
  if (r.weight_avg_accuracy) j["weight_avg_accuracy"] = *r.weight_avg_accuracy;
  if (r.same_wedge) {
    Json ids = Json::array();
    for (const auto& w : r.wedge_ids) ids.push_back(w.to_string());
    j["wedge_ids"] = ids;
    j["unconverged"] = r.unconverged;
    j["same_wedge"] = *r.same_wedge;
  }
  return j;
}

Json connector_sidecar(const Connector& c, const OptimizerConfig& inner_cfg) {
  Json endpoints = Json::array();
  for (const auto& e : c.endpoints) endpoints.push_back(to_json(e));
  std::size_t converged = 0;
  for (bool b : c.converged) converged += b ? 1 : 0;
  Json j{{"m", c.m},
         {"waypoints", c.size()},
         {"max_loss", c.max_loss()},
         {"endpoint_max_loss", c.endpoint_max_loss()},
         {"converged_waypoints", converged},
         {"inner_optimizer", to_json(inner_cfg)},
         {"endpoints", endpoints}};
  if (c.subsegment_max_loss) j["subsegment_max_loss"] = *c.subsegment_max_loss;
  return j;
}

}  // namespace wedge
