#include "zsmg/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace zsmg {

namespace {

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw ValidationError(std::string("missing key \"") + key + "\"");
  return j.at(key);
}

const Json& require_array(const Json& j, std::size_t size, const char* what) {
  if (!j.is_array() || j.size() != size)
    throw ValidationError(std::string(what) + " has the wrong shape");
  return j;
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) throw ValidationError(std::string(what) + " must be numeric");
  return j.get<double>();
}

int integer(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_number_integer()) throw ValidationError(std::string(key) + " must be an integer");
  return v.get<int>();
}

LayerTable layer_from_json(const Json& j, const Dims& dims, const char* what) {
  LayerTable t(dims);
  require_array(j, dims.num_states, what);
  for (int x = 0; x < dims.num_states; ++x) {
    require_array(j[x], dims.num_a, what);
    for (int a = 0; a < dims.num_a; ++a) {
      require_array(j[x][a], dims.num_b, what);
      for (int b = 0; b < dims.num_b; ++b) t(x, a, b) = number(j[x][a][b], what);
    }
  }
  return t;
}

}  // namespace

Json layer_to_json(const LayerTable& t) {
  Json out = Json::array();
  for (int x = 0; x < t.num_states(); ++x) {
    Json xs = Json::array();
    for (int a = 0; a < t.num_a(); ++a) {
      Json as = Json::array();
      for (int b = 0; b < t.num_b(); ++b) as.push_back(t(x, a, b));
      xs.push_back(std::move(as));
    }
    out.push_back(std::move(xs));
  }
  return out;
}

Json game_to_json(const TabularMG& mg) {
  const Dims& d = mg.dims();
  Json j;
  j["H"] = d.horizon;
  j["num_states"] = d.num_states;
  j["num_a"] = d.num_a;
  j["num_b"] = d.num_b;
  j["initial_state"] = mg.initial_state();
  Json reward = Json::array();
  Json transition = Json::array();
  for (int h = 0; h < d.horizon; ++h) {
    reward.push_back(layer_to_json(mg.reward(h)));
    Json hs = Json::array();
    for (int x = 0; x < d.num_states; ++x) {
      Json xs = Json::array();
      for (int a = 0; a < d.num_a; ++a) {
        Json as = Json::array();
        for (int b = 0; b < d.num_b; ++b) {
          const auto p = mg.next_state_dist(h, x, a, b);
          as.push_back(Json(std::vector<double>(p.begin(), p.end())));
        }
        xs.push_back(std::move(as));
      }
      hs.push_back(std::move(xs));
    }
    transition.push_back(std::move(hs));
  }
  j["reward"] = std::move(reward);
  j["transition"] = std::move(transition);
  return j;
}

TabularMG game_from_json(const Json& j) {
  Dims d;
  d.horizon = integer(j, "H");
  d.num_states = integer(j, "num_states");
  d.num_a = integer(j, "num_a");
  d.num_b = integer(j, "num_b");
  if (d.horizon < 1 || d.num_states < 1 || d.num_a < 1 || d.num_b < 1)
    throw ValidationError("instance dimensions must be positive");
  const int x1 = integer(j, "initial_state");
  const Json& rj = require_array(require(j, "reward"), d.horizon, "reward");
  const Json& tj = require_array(require(j, "transition"), d.horizon, "transition");
  std::vector<LayerTable> reward;
  std::vector<double> transition;
  for (int h = 0; h < d.horizon; ++h) {
    reward.push_back(layer_from_json(rj[h], d, "reward"));
    require_array(tj[h], d.num_states, "transition");
    for (int x = 0; x < d.num_states; ++x) {
      require_array(tj[h][x], d.num_a, "transition");
      for (int a = 0; a < d.num_a; ++a) {
        require_array(tj[h][x][a], d.num_b, "transition");
        for (int b = 0; b < d.num_b; ++b) {
          const Json& row = require_array(tj[h][x][a][b], d.num_states, "transition");
          for (const auto& p : row) transition.push_back(number(p, "transition"));
        }
      }
    }
  }
  return TabularMG(d, x1, std::move(reward), std::move(transition));
}

Json class_to_json(const FunctionClass& fc) {
  Json j;
  j["beta"] = fc.beta;
  Json layers = Json::array();
  for (const auto& step : fc.layers) {
    Json members = Json::array();
    for (const auto& t : step) members.push_back(layer_to_json(t));
    layers.push_back(std::move(members));
  }
  j["layers"] = std::move(layers);
  j["prior"] = fc.prior;
  return j;
}

FunctionClass class_from_json(const Json& j) {
  FunctionClass fc;
  fc.beta = number(require(j, "beta"), "beta");
  const Json& lj = require(j, "layers");
  const Json& pj = require(j, "prior");
  if (!lj.is_array() || lj.empty()) throw ValidationError("layers must be a non-empty array");
  if (!lj[0].is_array() || lj[0].empty() || !lj[0][0].is_array() || lj[0][0].empty() ||
      !lj[0][0][0].is_array() || lj[0][0][0].empty() || !lj[0][0][0][0].is_array())
    throw ValidationError("layers must be indexed [h][k][x][a][b]");
  fc.dims.horizon = static_cast<int>(lj.size());
  fc.dims.num_states = static_cast<int>(lj[0][0].size());
  fc.dims.num_a = static_cast<int>(lj[0][0][0].size());
  fc.dims.num_b = static_cast<int>(lj[0][0][0][0].size());
  require_array(pj, lj.size(), "prior");
  for (std::size_t h = 0; h < lj.size(); ++h) {
    if (!lj[h].is_array() || lj[h].empty()) throw ValidationError("empty function-class layer");
    std::vector<LayerTable> members;
    for (const auto& m : lj[h]) members.push_back(layer_from_json(m, fc.dims, "class member"));
    require_array(pj[h], members.size(), "prior");
    std::vector<double> prior;
    for (const auto& p : pj[h]) prior.push_back(number(p, "prior"));
    fc.layers.push_back(std::move(members));
    fc.prior.push_back(std::move(prior));
  }
  fc.validate();
  return fc;
}

Json linear_spec_to_json(const LinearMGSpec& spec) {
  Json j;
  j["d"] = spec.d;
  j["phi"] = spec.phi;
  j["theta"] = spec.theta;
  j["anchors"] = spec.anchors;
  return j;
}

Json nash_to_json(const NashSolution& nash) {
  Json j;
  j["value"] = nash.value();
  j["initial_state"] = nash.initial_state;
  j["v_star"] = nash.v_star;
  Json q = Json::array();
  for (const auto& t : nash.q_star) q.push_back(layer_to_json(t));
  j["q_star"] = std::move(q);
  auto policy = [](const MarkovPolicy& p) {
    Json out = Json::array();
    for (int h = 0; h < p.horizon(); ++h) {
      Json hs = Json::array();
      for (int x = 0; x < p.num_states(); ++x) {
        const auto r = p.row(h, x);
        hs.push_back(Json(std::vector<double>(r.begin(), r.end())));
      }
      out.push_back(std::move(hs));
    }
    return out;
  };
  j["mu_star"] = policy(nash.mu_star);
  j["nu_star"] = policy(nash.nu_star);
  return j;
}

std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace zsmg
