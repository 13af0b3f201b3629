#include "tnc/params.hpp"

namespace tnc::model {

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(shape[i]);
  }
  return out;
}

template class ParamStore<float>;
template class ParamStore<double>;

}  // namespace tnc::model
