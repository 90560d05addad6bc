#include "lava/state_io.hpp"

#include <fstream>
#include <sstream>

#include "json_codec.hpp"
#include "lava/errors.hpp"

namespace lava {
namespace {

using codec::json;
using Eigen::Index;

json vec_to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json packed_upper(const Eigen::MatrixXd& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.rows() * (m.rows() + 1) / 2));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = i; j < m.cols(); ++j) out.push_back(m(i, j));
  }
  return json(out);
}

json row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  }
  return json(out);
}

const json& field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw DataError(std::string("model state: missing field '") + key + "'");
  return *it;
}

double number(const json& j, const char* key) {
  const json& f = field(j, key);
  if (!f.is_number()) throw DataError(std::string("model state: '") + key + "' is not a number");
  return f.get<double>();
}

Eigen::VectorXd vec_from_json(const json& j, const char* key, Index expected) {
  const json& f = field(j, key);
  if (!f.is_array() || static_cast<Index>(f.size()) != expected) {
    throw DataError(std::string("model state: '") + key + "' has the wrong length");
  }
  Eigen::VectorXd v(expected);
  for (Index i = 0; i < expected; ++i) {
    const json& x = f[static_cast<std::size_t>(i)];
    if (!x.is_number()) throw DataError(std::string("model state: non-numeric entry in '") + key + "'");
    v(i) = x.get<double>();
  }
  return v;
}

Eigen::MatrixXd unpack_upper(const json& j, const char* key, Index n) {
  const Eigen::VectorXd packed = vec_from_json(j, key, n * (n + 1) / 2);
  Eigen::MatrixXd m(n, n);
  Index k = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index c = i; c < n; ++c) {
      m(i, c) = packed(k);
      m(c, i) = packed(k);
      ++k;
    }
  }
  return m;
}

Eigen::MatrixXd unpack_rows(const json& j, const char* key, Index rows, Index cols) {
  const Eigen::VectorXd flat = vec_from_json(j, key, rows * cols);
  Eigen::MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index c = 0; c < cols; ++c) m(i, c) = flat(i * cols + c);
  }
  return m;
}

}  // namespace

std::string serialize_model(const StoredModel& model) {
  const ModelState& s = model.state;
  const SufficientStats& st = s.stats;
  json active = json::array();
  for (bool a : s.active) active.push_back(a ? 1 : 0);
  json doc = {
      {"format", "lava-model-state"},
      {"version", kStateFormatVersion},
      {"consumer_id", model.consumer_id},
      {"last_update", model.last_update ? json(format_timestamp(*model.last_update)) : json(nullptr)},
      {"config", {{"features", codec::features_to_json(model.features)},
                  {"estimator", codec::estimator_to_json(model.estimator, st.forgetting)}}},
      {"nominal_dim", s.nominal_dim()},
      {"latent_dim", s.latent_dim()},
      {"theta", vec_to_json(s.theta)},
      {"z_hat", vec_to_json(s.z_hat)},
      {"prior_var", vec_to_json(s.prior_var)},
      {"sigma2", s.sigma2},
      {"active", active},
      {"nonzero", s.nonzero_count()},
      {"posterior_cov_packed", packed_upper(s.posterior_cov)},
      {"stats",
       {{"n", st.n},
        {"forgetting", st.forgetting},
        {"yy", st.yy},
        {"y_sum", st.y_sum},
        {"phi_phi_packed", packed_upper(st.phi_phi)},
        {"gamma_gamma_packed", packed_upper(st.gamma_gamma)},
        {"gamma_phi", row_major(st.gamma_phi)},
        {"phi_y", vec_to_json(st.phi_y)},
        {"gamma_y", vec_to_json(st.gamma_y)}}},
  };
  return doc.dump(1) + "\n";
}

StoredModel deserialize_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("model state: invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != "lava-model-state") {
    throw DataError("model state: not a lava model-state document");
  }
  const int version = static_cast<int>(number(doc, "version"));
  if (version != kStateFormatVersion) {
    throw ConfigError("model state: unsupported version " + std::to_string(version));
  }

  StoredModel m;
  if (doc.contains("consumer_id") && doc["consumer_id"].is_string()) m.consumer_id = doc["consumer_id"];
  if (doc.contains("last_update") && !doc["last_update"].is_null()) {
    m.last_update = codec::timestamp_from_json(doc["last_update"], "last_update");
  }
  const json& cfg = field(doc, "config");
  m.features = codec::features_from_json(field(cfg, "features"));
  double forgetting = 1.0;
  m.estimator = codec::estimator_from_json(field(cfg, "estimator"), forgetting);

  const auto p = static_cast<Index>(number(doc, "nominal_dim"));
  const auto k = static_cast<Index>(number(doc, "latent_dim"));
  if (p != static_cast<Index>(m.features.nominal.dimension()) ||
      k != static_cast<Index>(m.features.latent.dimension())) {
    throw DataError("model state: dimensions disagree with the stored feature configuration");
  }

  ModelState& s = m.state;
  s.theta = vec_from_json(doc, "theta", p);
  s.z_hat = vec_from_json(doc, "z_hat", k);
  s.prior_var = vec_from_json(doc, "prior_var", k);
  s.sigma2 = number(doc, "sigma2");
  const json& active = field(doc, "active");
  if (!active.is_array() || static_cast<Index>(active.size()) != k) {
    throw DataError("model state: 'active' has the wrong length");
  }
  s.active.resize(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < s.active.size(); ++i) s.active[i] = active[i].get<int>() != 0;
  s.posterior_cov = unpack_upper(doc, "posterior_cov_packed", k);

  const json& st = field(doc, "stats");
  SufficientStats& stats = s.stats;
  stats.n = number(st, "n");
  stats.forgetting = number(st, "forgetting");
  stats.yy = number(st, "yy");
  stats.y_sum = number(st, "y_sum");
  stats.phi_phi = unpack_upper(st, "phi_phi_packed", p);
  stats.gamma_gamma = unpack_upper(st, "gamma_gamma_packed", k);
  stats.gamma_phi = unpack_rows(st, "gamma_phi", k, p);
  stats.phi_y = vec_from_json(st, "phi_y", p);
  stats.gamma_y = vec_from_json(st, "gamma_y", k);
  if (!(s.sigma2 > 0.0)) throw DataError("model state: sigma2 must be positive");
  return m;
}

void save_model(const std::filesystem::path& path, const StoredModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model state to " + path.string());
  out << serialize_model(model);
  if (!out) throw DataError("failed writing model state to " + path.string());
}

StoredModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model state " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace lava
