#pragma once

#include "wedgescope/connectors.hpp"
#include "wedgescope/ensembling.hpp"
#include "wedgescope/optimizers.hpp"
#include "wedgescope/probing.hpp"
#include "wedgescope/tinynet.hpp"
#include "wedgescope/wedge_landscape.hpp"

#include "json.hpp"

#include <initializer_list>
#include <optional>
#include <set>
#include <string>

namespace wedge {

using Json = nlohmann::ordered_json;

/// Reads one JSON object and rejects keys nobody asked for. `path` prefixes
/// error messages ("tunnel.inner_optimizer.learning_rate").
class StrictObject {
 public:
  StrictObject(const Json& j, std::string path);
  StrictObject(Json&&, std::string) = delete;  // keeps a reference to the object

  bool has(const std::string& key) const;
  const Json& required(const std::string& key);
  const Json* optional(const std::string& key);
  std::string child_path(const std::string& key) const;
  const std::string& path() const noexcept { return path_; }

  template <class T>
  T get(const std::string& key, T fallback) {
    const Json* v = optional(key);
    return v ? convert<T>(*v, key) : fallback;
  }
  template <class T>
  T get_required(const std::string& key) {
    return convert<T>(required(key), key);
  }

  /// Throws InvalidArgument naming the first unread key.
  void finish() const;

 private:
  template <class T>
  T convert(const Json& v, const std::string& key) const {
    try {
      return v.get<T>();
    } catch (const nlohmann::json::exception&) {
      throw InvalidArgument("config key '" + child_path(key) + "' has the wrong type");
    }
  }

  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Json to_json(const OptimizerConfig& cfg);
OptimizerConfig optimizer_config_from_json(const Json& j, const std::string& path = "optimizer",
                                           const OptimizerConfig& defaults = {});

struct LandscapeConfig {
  int dim = 0;
  int wedge_dim = 0;
  std::optional<std::uint64_t> rotation_seed;

  WedgeLandscape build() const;
};
Json to_json(const LandscapeConfig& cfg);
LandscapeConfig landscape_config_from_json(const Json& j, const std::string& path = "landscape");

Json to_json(const MLPSpec& spec, bool with_seed = true);
/// With allow_seed = false a "seed" key is rejected (experiments derive it).
MLPSpec mlp_spec_from_json(const Json& j, const std::string& path = "spec", bool allow_seed = true);
Json to_json(const TrainConfig& cfg, bool with_seed = true);
TrainConfig train_config_from_json(const Json& j, const std::string& path = "train",
                                   const TrainConfig& defaults = {}, bool allow_seed = true);
Json to_json(const CyclicalSchedule& s);
CyclicalSchedule schedule_from_json(const Json& j, const std::string& path = "schedule",
                                    const CyclicalSchedule& defaults = {});

Json to_json(const ParamVector& v);
ParamVector param_vector_from_json(const Json& j, const std::string& path);

Json to_json(const BarrierReport& r);
Json to_json(const CosineSummary& s);
Json to_json(const ShortDirectionReport& r);
Json to_json(const TunnelWidthReport& r);  // summary only, per-direction data goes to CSV
Json to_json(const SwaReport& r);
/// Sidecar for a connector CSV: m, endpoints, losses summary and the inner config.
Json connector_sidecar(const Connector& c, const OptimizerConfig& inner_cfg);

/// NaN and infinities are not representable in JSON; they become null.
Json number_or_null(double v);

}  // namespace wedge
