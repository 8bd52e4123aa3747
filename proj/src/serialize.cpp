#include "skinf/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace skinf {

using nlohmann::json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

[[noreturn]] void schema_error(const std::string& what) { throw std::invalid_argument("bundle: " + what); }

json vec_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_json(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

Vector json_vec(const json& j, const std::string& what) {
  if (!j.is_array()) schema_error(what + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) schema_error(what + " must contain numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Matrix json_mat(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) schema_error(what + " must be a non-empty array of rows");
  const Vector first = json_vec(j[0], what);
  Matrix m(static_cast<Eigen::Index>(j.size()), first.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Vector r = json_vec(j[i], what);
    if (r.size() != m.cols()) schema_error(what + " rows must have equal length");
    m.row(static_cast<Eigen::Index>(i)) = r.transpose();
  }
  return m;
}

std::vector<int> json_ints(const json& j, const std::string& what) {
  if (!j.is_array()) schema_error(what + " must be an array");
  std::vector<int> out;
  for (const auto& e : j) {
    if (!e.is_number_integer()) schema_error(what + " must contain integers");
    out.push_back(e.get<int>());
  }
  return out;
}

const json& field(const json& j, const char* key) {
  if (!j.contains(key)) schema_error(std::string("missing key '") + key + "'");
  return j.at(key);
}

int param_index(const std::vector<std::string>& params, const json& name) {
  if (!name.is_string()) schema_error("hazard parameters are referenced by name");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i] == name.get<std::string>()) return static_cast<int>(i);
  schema_error("unknown parameter '" + name.get<std::string>() + "'");
}

std::string obs_kind_name(ObservationKind k) {
  switch (k) {
    case ObservationKind::LinearGaussian: return "gaussian";
    case ObservationKind::Poisson: return "poisson";
    case ObservationKind::Exact: return "exact";
  }
  return "gaussian";
}

}  // namespace

json bundle_to_json(const ExperimentBundle& b) {
  if (!b.network.serializable()) throw std::invalid_argument("bundle: custom hazards cannot be serialized");
  const auto& params = b.network.param_names();
  json j;
  j["name"] = b.name;
  j["species"] = b.network.species_names();
  j["params"] = params;
  json rx = json::array();
  for (const auto& r : b.network.reactions()) {
    json e;
    e["name"] = r.name;
    e["reactants"] = r.reactants;
    e["products"] = r.products;
    if (const auto* ma = std::get_if<MassActionHazard>(&r.hazard)) {
      e["hazard"] = {{"kind", "mass_action"}, {"rate", params[static_cast<std::size_t>(ma->rate_index)]}};
    } else if (const auto* ph = std::get_if<PulseHazard>(&r.hazard)) {
      e["hazard"] = {{"kind", "pulse"},
                     {"amplitude", params[static_cast<std::size_t>(ph->amplitude)]},
                     {"width", params[static_cast<std::size_t>(ph->width)]},
                     {"centre", params[static_cast<std::size_t>(ph->centre)]},
                     {"baseline", params[static_cast<std::size_t>(ph->baseline)]}};
    }
    rx.push_back(e);
  }
  j["reactions"] = rx;

  json o;
  o["kind"] = obs_kind_name(b.obs.kind);
  o["G"] = mat_json(b.obs.G);
  if (b.obs.kind == ObservationKind::LinearGaussian) {
    if (b.obs.sd_param.empty()) {
      o["noise_cov"] = mat_json(b.obs.noise_cov);
    } else {
      json sds = json::array();
      for (int k : b.obs.sd_param) sds.push_back(params[static_cast<std::size_t>(k)]);
      o["sd_params"] = sds;
    }
  }
  j["observation"] = o;

  json pr = json::array();
  for (const auto& pc : b.prior.components()) {
    switch (pc.kind) {
      case PriorComponent::Kind::LogUniform:
        pr.push_back({{"kind", "log_uniform"}, {"lower", pc.a}, {"upper", pc.b}});
        break;
      case PriorComponent::Kind::Gamma:
        pr.push_back({{"kind", "gamma"}, {"shape", pc.a}, {"rate", pc.b}});
        break;
      case PriorComponent::Kind::Exponential:
        pr.push_back({{"kind", "exponential"}, {"rate", pc.a}});
        break;
    }
  }
  j["prior"] = pr;
  if (b.true_params) j["true_params"] = vec_json(*b.true_params);
  j["initial_params"] = vec_json(b.initial_params);
  j["pilot_sd"] = vec_json(b.pilot_sd);
  j["x1"] = vec_json(b.x1);
  json values = json::array();
  for (const auto& v : b.data.values) values.push_back(vec_json(v));
  j["data"] = {{"times", b.data.times}, {"values", values}};
  const auto& d = b.defaults;
  j["defaults"] = {{"tau", d.tau},
                   {"dt_max", d.dt_max},
                   {"lambda_pmmh", d.lambda_pmmh},
                   {"lambda_dapmmh_lna", d.lambda_dapmmh_lna},
                   {"lambda_dapmmh_cle", d.lambda_dapmmh_cle},
                   {"N", d.num_particles},
                   {"pilot_N", d.pilot_particles},
                   {"d_eff", d.d_eff}};
  if (b.data_seed) j["data_seed"] = *b.data_seed;
  return j;
}

ExperimentBundle bundle_from_json(const json& j) {
  if (!j.is_object()) schema_error("top level must be an object");
  try {
    ExperimentBundle b;
    b.name = field(j, "name").get<std::string>();
    const auto species = field(j, "species").get<std::vector<std::string>>();
    const auto params = field(j, "params").get<std::vector<std::string>>();
    std::vector<Reaction> reactions;
    for (const auto& e : field(j, "reactions")) {
      Reaction r;
      r.name = field(e, "name").get<std::string>();
      r.reactants = json_ints(field(e, "reactants"), "reactants");
      r.products = json_ints(field(e, "products"), "products");
      const json& h = field(e, "hazard");
      const std::string kind = field(h, "kind").get<std::string>();
      if (kind == "mass_action") {
        r.hazard = MassActionHazard{param_index(params, field(h, "rate"))};
      } else if (kind == "pulse") {
        r.hazard = PulseHazard{param_index(params, field(h, "amplitude")), param_index(params, field(h, "width")),
                               param_index(params, field(h, "centre")), param_index(params, field(h, "baseline"))};
      } else {
        schema_error("unknown hazard kind '" + kind + "'");
      }
      reactions.push_back(std::move(r));
    }
    b.network = ReactionNetwork(species, params, std::move(reactions));

    const json& o = field(j, "observation");
    const std::string okind = field(o, "kind").get<std::string>();
    const Matrix G = json_mat(field(o, "G"), "observation G");
    if (okind == "gaussian") {
      if (o.contains("sd_params")) {
        std::vector<int> sds;
        for (const auto& n : o.at("sd_params")) sds.push_back(param_index(params, n));
        b.obs = ObservationModel::gaussian_with_sd_params(G, std::move(sds));
      } else {
        b.obs = ObservationModel::gaussian(G, json_mat(field(o, "noise_cov"), "noise_cov"));
      }
    } else if (okind == "poisson") {
      b.obs.kind = ObservationKind::Poisson;
      b.obs.G = G;
      b.obs.validate();
    } else if (okind == "exact") {
      b.obs = ObservationModel::exact(G);
    } else {
      schema_error("unknown observation kind '" + okind + "'");
    }

    std::vector<PriorComponent> pcs;
    for (const auto& p : field(j, "prior")) {
      const std::string kind = field(p, "kind").get<std::string>();
      if (kind == "log_uniform")
        pcs.push_back(PriorComponent::log_uniform(field(p, "lower").get<double>(), field(p, "upper").get<double>()));
      else if (kind == "gamma")
        pcs.push_back(PriorComponent::gamma(field(p, "shape").get<double>(), field(p, "rate").get<double>()));
      else if (kind == "exponential")
        pcs.push_back(PriorComponent::exponential(field(p, "rate").get<double>()));
      else
        schema_error("unknown prior kind '" + kind + "'");
    }
    b.prior = Prior(std::move(pcs));
    if (j.contains("true_params")) b.true_params = json_vec(j.at("true_params"), "true_params");
    b.initial_params = json_vec(field(j, "initial_params"), "initial_params");
    b.pilot_sd = json_vec(field(j, "pilot_sd"), "pilot_sd");
    b.x1 = json_vec(field(j, "x1"), "x1");
    const json& data = field(j, "data");
    b.data.times = field(data, "times").get<std::vector<double>>();
    for (const auto& v : field(data, "values")) b.data.values.push_back(json_vec(v, "data values"));
    if (j.contains("defaults")) {
      const json& d = j.at("defaults");
      auto& df = b.defaults;
      df.tau = d.value("tau", df.tau);
      df.dt_max = d.value("dt_max", df.dt_max);
      df.lambda_pmmh = d.value("lambda_pmmh", df.lambda_pmmh);
      df.lambda_dapmmh_lna = d.value("lambda_dapmmh_lna", df.lambda_dapmmh_lna);
      df.lambda_dapmmh_cle = d.value("lambda_dapmmh_cle", df.lambda_dapmmh_cle);
      df.num_particles = d.value("N", df.num_particles);
      df.pilot_particles = d.value("pilot_N", df.pilot_particles);
      df.d_eff = d.value("d_eff", df.d_eff);
    }
    if (j.contains("data_seed")) b.data_seed = j.at("data_seed").get<std::uint64_t>();
    b.validate();
    return b;
  } catch (const json::exception& e) {
    schema_error(std::string("malformed field: ") + e.what());
  }
}

namespace {

bool same_vec(const Vector& a, const Vector& b) { return a.size() == b.size() && a == b; }
bool same_mat(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

bool same_hazard(const HazardKind& a, const HazardKind& b) {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<MassActionHazard>(&a)) return x->rate_index == std::get<MassActionHazard>(b).rate_index;
  if (const auto* x = std::get_if<PulseHazard>(&a)) {
    const auto& y = std::get<PulseHazard>(b);
    return x->amplitude == y.amplitude && x->width == y.width && x->centre == y.centre && x->baseline == y.baseline;
  }
  return false;  // custom hazards have no comparable identity
}

}  // namespace

bool bundles_equal(const ExperimentBundle& a, const ExperimentBundle& b) {
  if (a.name != b.name) return false;
  const auto& na = a.network;
  const auto& nb = b.network;
  if (na.species_names() != nb.species_names() || na.param_names() != nb.param_names()) return false;
  if (na.num_reactions() != nb.num_reactions()) return false;
  for (int i = 0; i < na.num_reactions(); ++i) {
    const auto& ra = na.reactions()[static_cast<std::size_t>(i)];
    const auto& rb = nb.reactions()[static_cast<std::size_t>(i)];
    if (ra.name != rb.name || ra.reactants != rb.reactants || ra.products != rb.products) return false;
    if (!same_hazard(ra.hazard, rb.hazard)) return false;
  }
  if (a.obs.kind != b.obs.kind || !same_mat(a.obs.G, b.obs.G) || a.obs.sd_param != b.obs.sd_param) return false;
  if (a.obs.kind == ObservationKind::LinearGaussian && a.obs.sd_param.empty() &&
      !same_mat(a.obs.noise_cov, b.obs.noise_cov))
    return false;
  if (!(a.prior == b.prior)) return false;
  if (a.true_params.has_value() != b.true_params.has_value()) return false;
  if (a.true_params && !same_vec(*a.true_params, *b.true_params)) return false;
  if (!same_vec(a.initial_params, b.initial_params) || !same_vec(a.pilot_sd, b.pilot_sd) || !same_vec(a.x1, b.x1))
    return false;
  if (a.data.times != b.data.times || a.data.values.size() != b.data.values.size()) return false;
  for (std::size_t k = 0; k < a.data.values.size(); ++k)
    if (!same_vec(a.data.values[k], b.data.values[k])) return false;
  return a.defaults == b.defaults && a.data_seed == b.data_seed;
}

std::string to_csv(const CsvTable& t) {
  if (!t.header.empty() && static_cast<Eigen::Index>(t.header.size()) != t.values.cols())
    throw std::invalid_argument("to_csv: header width does not match the matrix");
  std::string out;
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (j) out += ',';
    out += t.header[j];
  }
  if (!t.header.empty()) out += '\n';
  for (Eigen::Index i = 0; i < t.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < t.values.cols(); ++j) {
      if (j) out += ',';
      out += format_double(t.values(i, j));
    }
    out += '\n';
  }
  return out;
}

CsvTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  CsvTable t;
  if (!std::getline(in, line)) throw std::invalid_argument("parse_csv: empty input");
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) t.header.push_back(cell);
  }
  const auto cols = static_cast<Eigen::Index>(t.header.size());
  std::vector<double> flat;
  Eigen::Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    Eigen::Index n = 0;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        throw std::invalid_argument("parse_csv: non-numeric cell '" + cell + "' on data row " + std::to_string(rows + 1));
      flat.push_back(v);
      ++n;
    }
    if (n != cols) throw std::invalid_argument("parse_csv: row " + std::to_string(rows + 1) + " has the wrong width");
    ++rows;
  }
  t.values.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) t.values(i, j) = flat[static_cast<std::size_t>(i * cols + j)];
  return t;
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << contents;
  f.flush();
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace skinf
