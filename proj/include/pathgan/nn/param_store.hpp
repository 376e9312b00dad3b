#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

namespace pathgan {

struct Array {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  std::size_t size() const { return data.size(); }
};

// Flat named parameter storage. Registration order is preserved so
// checkpoints and optimizer traversals are deterministic. Non-trainable
// arrays hold state that rides along with the parameters (batch-norm running
// statistics) but is never touched by the optimizer or gradient checks.
class ParamStore {
 public:
  Array& add(const std::string& name, std::vector<std::size_t> shape, bool trainable = true);
  Array& at(const std::string& name);
  const Array& at(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  bool trainable(const std::string& name) const;

  const std::vector<std::string>& names() const { return order_; }
  std::size_t total_size() const;

  // Same names and shapes, all zeros; gradient buffers.
  ParamStore zeros_like() const;
  void zero();

 private:
  struct Entry {
    Array array;
    bool trainable = true;
  };
  std::vector<std::string> order_;
  std::unordered_map<std::string, Entry> index_;
};

}  // namespace pathgan
