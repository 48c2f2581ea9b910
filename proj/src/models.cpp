#include "kbgan/models.hpp"

#include <stdexcept>

namespace kbgan {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::TransE: return "transe";
    case ModelKind::TransD: return "transd";
    case ModelKind::DistMult: return "distmult";
    case ModelKind::ComplEx: return "complex";
  }
  return "?";
}

std::string_view to_string(Norm norm) {
  switch (norm) {
    case Norm::None: return "none";
    case Norm::L1: return "l1";
    case Norm::L2: return "l2";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  for (auto k : {ModelKind::TransE, ModelKind::TransD, ModelKind::DistMult, ModelKind::ComplEx}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown model '" + std::string(name) + "' (expected transe, transd, distmult, complex)");
}

Norm parse_norm(std::string_view name) {
  for (auto n : {Norm::None, Norm::L1, Norm::L2}) {
    if (to_string(n) == name) return n;
  }
  throw std::invalid_argument("unknown norm '" + std::string(name) + "' (expected l1, l2)");
}

}  // namespace kbgan
