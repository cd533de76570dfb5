#include "wedgescope/wedgescope.h"

#include "wedgescope/connectors.hpp"
#include "wedgescope/experiments.hpp"
#include "wedgescope/serialization.hpp"
#include "wedgescope/tinynet.hpp"
#include "wedgescope/wedge_landscape.hpp"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

struct ws_landscape {
  wedge::ToyOracle oracle;
};

struct ws_connector {
  wedge::Connector connector;
};

struct ws_network {
  wedge::MLPSpec spec;
  wedge::Dataset data;
  wedge::Batch train;
};

namespace {

thread_local std::string g_error;
thread_local long g_error_step = -1;

ws_status fail(ws_status s, const std::string& msg, long step = -1) {
  g_error = msg;
  g_error_step = step;
  return s;
}

template <class F>
ws_status guarded(F&& body) {
  g_error.clear();
  g_error_step = -1;
  try {
    body();
    return WS_OK;
  } catch (const wedge::NumericalError& e) {
    return fail(WS_ERR_NUMERICAL, e.what(), e.step());
  } catch (const wedge::Error& e) {
    switch (e.kind()) {
      case wedge::ErrorKind::invalid_argument: return fail(WS_ERR_INVALID_ARGUMENT, e.what());
      case wedge::ErrorKind::dimension_mismatch: return fail(WS_ERR_DIMENSION_MISMATCH, e.what());
      case wedge::ErrorKind::io: return fail(WS_ERR_IO, e.what());
      case wedge::ErrorKind::numerical: return fail(WS_ERR_NUMERICAL, e.what());
    }
    return fail(WS_ERR_INTERNAL, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(WS_ERR_INVALID_ARGUMENT, std::string("invalid JSON: ") + e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(WS_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(WS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(WS_ERR_INTERNAL, e.what());
  }
}

void need(const void* p, const char* what) {
  if (!p) throw wedge::InvalidArgument(std::string(what) + " must not be NULL");
}

wedge::ParamVector vec(const double* data, std::size_t len, std::size_t expected, const char* what) {
  need(data, what);
  if (len != expected) throw wedge::DimensionMismatch(what, expected, len);
  return Eigen::Map<const Eigen::VectorXd>(data, static_cast<Eigen::Index>(len));
}

void copy_out(const wedge::ParamVector& v, double* out, std::size_t len, const char* what) {
  need(out, what);
  if (len != static_cast<std::size_t>(v.size()))
    throw wedge::DimensionMismatch(what, static_cast<std::size_t>(v.size()), len);
  std::memcpy(out, v.data(), len * sizeof(double));
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

wedge::Json parse(const char* text, const char* what) {
  if (!text) return wedge::Json::object();
  try {
    return wedge::Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw wedge::InvalidArgument(std::string(what) + " is not valid JSON: " + e.what());
  }
}

}  // namespace

extern "C" {

const char* ws_version(void) { return "0.3.0"; }
const char* ws_last_error(void) { return g_error.c_str(); }
long ws_last_error_step(void) { return g_error_step; }
void ws_string_free(char* s) { std::free(s); }

ws_status ws_landscape_create(const char* config_json, ws_landscape** out) {
  return guarded([&] {
    need(config_json, "config_json");
    need(out, "out");
    const auto cfg = wedge::landscape_config_from_json(parse(config_json, "landscape config"), "landscape");
    *out = new ws_landscape{wedge::ToyOracle(cfg.build())};
  });
}

void ws_landscape_destroy(ws_landscape* l) { delete l; }

ws_status ws_landscape_dim(const ws_landscape* l, size_t* dim, size_t* wedge_dim) {
  return guarded([&] {
    need(l, "landscape");
    if (dim) *dim = static_cast<size_t>(l->oracle.landscape().dim());
    if (wedge_dim) *wedge_dim = static_cast<size_t>(l->oracle.landscape().wedge_dim());
  });
}

ws_status ws_landscape_loss(const ws_landscape* l, const double* p, size_t len, double* loss) {
  return guarded([&] {
    need(l, "landscape");
    need(loss, "loss");
    *loss = l->oracle.loss(vec(p, len, l->oracle.dimension(), "point"));
  });
}

ws_status ws_landscape_grad(const ws_landscape* l, const double* p, size_t len, double* grad) {
  return guarded([&] {
    need(l, "landscape");
    copy_out(l->oracle.grad(vec(p, len, l->oracle.dimension(), "point")), grad, len, "grad");
  });
}

ws_status ws_landscape_nearest_wedge(const ws_landscape* l, const double* p, size_t len, int* axes,
                                     size_t axes_cap) {
  return guarded([&] {
    need(l, "landscape");
    need(axes, "axes");
    const auto id = l->oracle.landscape().nearest_wedge(vec(p, len, l->oracle.dimension(), "point"));
    if (axes_cap < id.axes.size()) throw wedge::InvalidArgument("axes buffer too small");
    std::copy(id.axes.begin(), id.axes.end(), axes);
  });
}

ws_status ws_landscape_short_count(const ws_landscape* l, const double* p, size_t len, double tol,
                                   size_t* count) {
  return guarded([&] {
    need(l, "landscape");
    need(count, "count");
    *count = l->oracle.landscape().exact_short_count(vec(p, len, l->oracle.dimension(), "point"), tol);
  });
}

ws_status ws_landscape_minimize(const ws_landscape* l, const double* p0, size_t len,
                                const char* optimizer_json, double* p_out, char** report_json) {
  return guarded([&] {
    need(l, "landscape");
    const auto cfg = wedge::optimizer_config_from_json(parse(optimizer_json, "optimizer config"));
    const auto t = wedge::minimize(l->oracle, vec(p0, len, l->oracle.dimension(), "p0"), cfg);
    copy_out(t.final_point, p_out, len, "p_out");
    if (report_json) {
      const wedge::Json r{{"initial_loss", t.initial_loss()},
                          {"final_loss", t.final_loss()},
                          {"converged", t.converged},
                          {"steps", t.points.back().step}};
      *report_json = dup(r.dump());
    }
  });
}

ws_status ws_tunnel_build(const ws_landscape* l, const double* a, const double* b, size_t len,
                          int segments, const char* inner_optimizer_json, int jobs,
                          ws_connector** out) {
  return guarded([&] {
    need(l, "landscape");
    need(out, "out");
    const auto cfg = wedge::optimizer_config_from_json(parse(inner_optimizer_json, "inner optimizer config"),
                                                       "inner_optimizer");
    wedge::ConnectorOptions opts;
    opts.jobs = jobs;
    auto c = wedge::build_tunnel(l->oracle, vec(a, len, l->oracle.dimension(), "a"),
                                 vec(b, len, l->oracle.dimension(), "b"), segments, cfg, opts);
    *out = new ws_connector{std::move(c)};
  });
}

void ws_connector_destroy(ws_connector* c) { delete c; }

ws_status ws_connector_size(const ws_connector* c, size_t* waypoints, size_t* dim) {
  return guarded([&] {
    need(c, "connector");
    if (waypoints) *waypoints = c->connector.size();
    if (dim) *dim = c->connector.size() ? static_cast<size_t>(c->connector.waypoints[0].size()) : 0;
  });
}

ws_status ws_connector_waypoint(const ws_connector* c, size_t index, double* out, size_t len) {
  return guarded([&] {
    need(c, "connector");
    if (index >= c->connector.size()) throw wedge::InvalidArgument("waypoint index out of range");
    copy_out(c->connector.waypoints[index], out, len, "waypoint buffer");
  });
}

ws_status ws_connector_loss(const ws_connector* c, size_t index, double* loss) {
  return guarded([&] {
    need(c, "connector");
    need(loss, "loss");
    if (index >= c->connector.size()) throw wedge::InvalidArgument("waypoint index out of range");
    *loss = c->connector.losses[index];
  });
}

ws_status ws_connector_report(const ws_connector* c, char** report_json) {
  return guarded([&] {
    need(c, "connector");
    need(report_json, "report_json");
    wedge::Json r{{"waypoints", c->connector.size()},
                  {"max_loss", c->connector.max_loss()},
                  {"endpoint_max_loss", c->connector.endpoint_max_loss()}};
    if (c->connector.m == 1 && c->connector.size() >= 3) {
      const auto cos = wedge::deviation_cosines(c->connector);
      r["cosines"] = wedge::to_json(wedge::summarize_cosines(c->connector, cos));
    }
    *report_json = dup(r.dump());
  });
}

ws_status ws_connector_write_csv(const ws_connector* c, const char* path) {
  return guarded([&] {
    need(c, "connector");
    need(path, "path");
    c->connector.write_csv(path);
  });
}

ws_status ws_network_create(const char* config_json, ws_network** out) {
  return guarded([&] {
    need(out, "out");
    const wedge::Json config = parse(config_json, "network config");
    wedge::StrictObject o(config, "network");
    auto net = std::make_unique<ws_network>();
    const wedge::Json* sj = o.optional("spec");
    if (!sj) throw wedge::InvalidArgument("missing required config key 'network.spec'");
    net->spec = wedge::mlp_spec_from_json(*sj, "network.spec");
    const wedge::Json* dj = o.optional("dataset");
    if (!dj) throw wedge::InvalidArgument("missing required config key 'network.dataset'");
    wedge::StrictObject d(*dj, "network.dataset");
    if (d.has("csv")) {
      const auto path = d.get_required<std::string>("csv");
      const auto label = d.get<std::string>("label_column", "label");
      const auto split_seed = d.get<std::uint64_t>("split_seed", 0);
      d.finish();
      net->data = wedge::load_csv(path, label, split_seed);
    } else {
      const auto kind = wedge::dataset_kind_from_string(d.get<std::string>("kind", "two_moons"));
      const auto n = d.get<std::size_t>("n", 500);
      const auto noise = d.get<double>("noise", 0.2);
      const auto seed = d.get<std::uint64_t>("seed", 0);
      d.finish();
      net->data = wedge::generate_dataset(kind, n, noise, seed);
    }
    o.finish();
    if (net->spec.input_dim() != net->data.inputs.cols())
      throw wedge::DimensionMismatch("network input layer", static_cast<std::size_t>(net->data.inputs.cols()),
                                     static_cast<std::size_t>(net->spec.input_dim()));
    net->train = net->data.train();
    *out = net.release();
  });
}

void ws_network_destroy(ws_network* n) { delete n; }

ws_status ws_network_param_count(const ws_network* n, size_t* count) {
  return guarded([&] {
    need(n, "network");
    need(count, "count");
    *count = n->spec.param_count();
  });
}

ws_status ws_network_init_params(const ws_network* n, double* out, size_t len) {
  return guarded([&] {
    need(n, "network");
    copy_out(wedge::init_params(n->spec), out, len, "params buffer");
  });
}

ws_status ws_network_train(const ws_network* n, const char* train_json, double* params_out,
                           size_t len, char** report_json) {
  return guarded([&] {
    need(n, "network");
    const auto cfg = wedge::train_config_from_json(parse(train_json, "train config"));
    const auto r = wedge::train(n->spec, n->data, cfg);
    copy_out(r.params, params_out, len, "params_out");
    if (report_json) {
      const auto& e = r.epochs.back();
      const wedge::Json j{{"epochs", e.epoch},
                          {"train_loss", e.train_loss},
                          {"train_accuracy", e.train_accuracy},
                          {"test_loss", e.test_loss},
                          {"test_accuracy", e.test_accuracy},
                          {"radius", e.radius}};
      *report_json = dup(j.dump());
    }
  });
}

ws_status ws_network_loss(const ws_network* n, const double* params, size_t len, double l2_coeff,
                          double* loss, double* grad) {
  return guarded([&] {
    need(n, "network");
    need(loss, "loss");
    const auto p = vec(params, len, n->spec.param_count(), "params");
    wedge::ParamVector g;
    *loss = wedge::loss_and_grad(n->spec, p, n->train, l2_coeff, 0.0, 0, grad ? &g : nullptr);
    if (grad) copy_out(g, grad, len, "grad");
  });
}

ws_status ws_network_save_checkpoint(const ws_network* n, const double* params, size_t len,
                                     const char* path) {
  return guarded([&] {
    need(n, "network");
    need(path, "path");
    wedge::save_checkpoint(path, n->spec, vec(params, len, n->spec.param_count(), "params"));
  });
}

ws_status ws_experiment_names(char** names_json) {
  return guarded([&] {
    need(names_json, "names_json");
    *names_json = dup(wedge::Json(wedge::experiment_names()).dump());
  });
}

ws_status ws_experiment_run(const char* name, const char* config_json,
                            const ws_run_options* options, char** summary_json) {
  return guarded([&] {
    need(name, "name");
    need(config_json, "config_json");
    wedge::ExperimentContext ctx;
    if (options) {
      if (options->output_dir) ctx.output_dir = options->output_dir;
      if (options->has_seed) ctx.seed = options->seed;
      ctx.jobs = options->jobs;
      ctx.quiet = options->quiet != 0;
    }
    const auto r = wedge::run_experiment(name, parse(config_json, "config"), ctx);
    if (summary_json) *summary_json = dup(r.summary.dump());
  });
}

}  // extern "C"
