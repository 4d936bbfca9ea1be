#pragma once
// Seeded instance generators. Instance i of a batch draws from its own stream
// derived from (seed, i), so batches split across workers stay reproducible.

#include <map>

#include "nchs/io.hpp"
#include "nchs/random.hpp"

namespace nchs {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline Rng stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  return Rng(splitmix64(splitmix64(seed ^ splitmix64(tag)) + index));
}

enum class GenKind { PdWeight, UnitaryScaled, InvToepPlanted, HsWeightFamily };

inline GenKind parse_gen_kind(const std::string& s) {
  if (s == "pd_weight") return GenKind::PdWeight;
  if (s == "unitary_scaled") return GenKind::UnitaryScaled;
  if (s == "invtoep_planted") return GenKind::InvToepPlanted;
  if (s == "hs_weight_family") return GenKind::HsWeightFamily;
  fail(ErrorKind::InvalidArgument, "unknown generator kind '" + s + "'");
}

inline std::string_view to_string(GenKind k) {
  switch (k) {
    case GenKind::PdWeight: return "pd_weight";
    case GenKind::UnitaryScaled: return "unitary_scaled";
    case GenKind::InvToepPlanted: return "invtoep_planted";
    case GenKind::HsWeightFamily: return "hs_weight_family";
  }
  return "?";
}

/// key=value pairs, comma separated ("count=20,s_max=3").
struct GenParams {
  std::map<std::string, double> values;

  static GenParams parse(const std::string& text) {
    GenParams p;
    std::size_t pos = 0;
    while (pos < text.size()) {
      const std::size_t comma = std::min(text.find(',', pos), text.size());
      const std::string item = text.substr(pos, comma - pos);
      pos = comma + 1;
      if (item.empty()) continue;
      const std::size_t eq = item.find('=');
      if (eq == std::string::npos) fail(ErrorKind::InvalidArgument, "generator parameter '" + item + "' needs key=value");
      try {
        p.values[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
      } catch (const std::exception&) {
        fail(ErrorKind::InvalidArgument, "generator parameter '" + item + "' is not numeric");
      }
    }
    return p;
  }

  double get(const std::string& key, double dflt) const {
    auto it = values.find(key);
    return it == values.end() ? dflt : it->second;
  }

  Json to_json() const {
    Json j = Json::object();
    for (const auto& [k, v] : values) j[k] = v;
    return j;
  }
};

inline const std::vector<double>& default_alphas() {
  static const std::vector<double> a{0.1, 0.3, 0.45, 0.6, 0.8};
  return a;
}

/// One generated instance as a self-describing JSON record.
inline Json gen_instance(GenKind kind, const SubdiagonalModel& m, const GenParams& params, std::uint64_t seed, int index) {
  const int count = static_cast<int>(params.get("count", 10));
  Rng rng = stream(seed, static_cast<std::uint64_t>(kind) + 1, static_cast<std::uint64_t>(index));
  Json rec{{"id", std::string(to_string(kind)) + "-" + std::to_string(index)},
           {"kind", to_string(kind)},
           {"model", m.describe()},
           {"seed", seed},
           {"index", index},
           {"params", params.to_json()}};
  switch (kind) {
    case GenKind::PdWeight: {
      const double eps = params.get("eps", 0.1);
      if (!(eps >= 0.0)) fail(ErrorKind::InvalidArgument, "pd_weight: eps must be >= 0");
      rec["g"] = to_json(random_pd_element(rng, m, eps));
      break;
    }
    case GenKind::UnitaryScaled: {
      const double s_max = params.get("s_max", 3.0);
      const double s = count > 1 ? s_max * index / (count - 1) : 0.0;
      rec["s"] = s;
      rec["u"] = to_json(unitary_scaled(rng, m, s));
      break;
    }
    case GenKind::InvToepPlanted: {
      const PlantedInvToep p = invtoep_planted(rng, m, params.get("spread", 1.0));
      rec["u"] = to_json(ModelElement(p.u));
      rec["truth"] = Json{{"g0", to_json(ModelElement(p.g0))}, {"g1", to_json(ModelElement(p.g1))}, {"d", to_json(ModelElement(p.d))}};
      break;
    }
    case GenKind::HsWeightFamily: {
      const int M = static_cast<int>(params.get("M", 512));
      const double alpha = params.values.count("alpha") ? params.get("alpha", 0.3)
                                                         : default_alphas()[index % default_alphas().size()];
      rec["alpha"] = alpha;
      rec["w"] = to_json(w_alpha(alpha, M));
      break;
    }
  }
  return rec;
}

inline std::vector<Json> gen_instances(GenKind kind, const SubdiagonalModel& m, const GenParams& params, std::uint64_t seed) {
  const double c = params.get("count", kind == GenKind::HsWeightFamily ? double(default_alphas().size()) : 10.0);
  if (!(c >= 1.0)) fail(ErrorKind::InvalidArgument, "generator count must be >= 1");
  GenParams p = params;
  p.values["count"] = std::floor(c);
  std::vector<Json> out;
  for (int i = 0; i < static_cast<int>(c); ++i) out.push_back(gen_instance(kind, m, p, seed, i));
  return out;
}

}  // namespace nchs
