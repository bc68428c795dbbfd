#include "nestor/report.hpp"

#include "nestor/errors.hpp"

namespace nestor {

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::Alg1: return "alg1";
    case Mode::Alg2Geo: return "alg2-geo";
    case Mode::Alg2Trunc: return "alg2-trunc";
    case Mode::Alg3: return "alg3";
    case Mode::Alg4: return "alg4";
    case Mode::Alg6: return "alg6";
  }
  throw ParameterError("unknown mode");
}

Mode mode_from_name(const std::string& name) {
  if (name == "alg1") return Mode::Alg1;
  if (name == "alg2-geo") return Mode::Alg2Geo;
  if (name == "alg2-trunc") return Mode::Alg2Trunc;
  if (name == "alg3") return Mode::Alg3;
  if (name == "alg4") return Mode::Alg4;
  if (name == "alg6") return Mode::Alg6;
  throw ParameterError(
      "unknown estimator '" + name +
      "' (expected one of alg1, alg2-geo, alg2-trunc, alg3, alg4, alg6)");
}

}  // namespace nestor
