#include "pathgan/nn/param_store.hpp"

#include <algorithm>
#include <numeric>

#include "pathgan/error.hpp"

namespace pathgan {

Array& ParamStore::add(const std::string& name, std::vector<std::size_t> shape, bool trainable) {
  if (contains(name)) fail(Err::ValidationError, "duplicate parameter name '" + name + "'");
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  Entry e;
  e.array.shape = std::move(shape);
  e.array.data.assign(n, 0.0);
  e.trainable = trainable;
  order_.push_back(name);
  return index_.emplace(name, std::move(e)).first->second.array;
}

Array& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) fail(Err::ValidationError, "unknown parameter '" + name + "'");
  return it->second.array;
}

const Array& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) fail(Err::ValidationError, "unknown parameter '" + name + "'");
  return it->second.array;
}

bool ParamStore::trainable(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) fail(Err::ValidationError, "unknown parameter '" + name + "'");
  return it->second.trainable;
}

std::size_t ParamStore::total_size() const {
  std::size_t n = 0;
  for (const auto& name : order_) n += at(name).size();
  return n;
}

ParamStore ParamStore::zeros_like() const {
  ParamStore out;
  for (const std::string& name : order_) {
    const auto& e = index_.at(name);
    out.add(name, e.array.shape, e.trainable);
  }
  return out;
}

void ParamStore::zero() {
  for (auto& [_, e] : index_) std::fill(e.array.data.begin(), e.array.data.end(), 0.0);
}

}  // namespace pathgan
