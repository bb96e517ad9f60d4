#ifndef BDHPD_PARAMS_HPP
#define BDHPD_PARAMS_HPP

#include <string>
#include <unordered_map>
#include <vector>

#include "bdhpd/errors.hpp"
#include "bdhpd/tensor.hpp"

namespace bdhpd {

// Named learnable tensors with paired gradient buffers. Entry order is the
// creation order and is the canonical order for the optimizer, gradient
// clipping, and checkpoint serialization.
template <typename T>
class ParamStore {
public:
  struct Entry {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;
  };

  std::size_t add(std::string name, Tensor<T> value) {
    if (index_.count(name)) throw UsageError("param '" + name + "' already registered");
    Entry e;
    e.grad = Tensor<T>::zeros(value.shape);
    e.value = std::move(value);
    e.name = std::move(name);
    index_[e.name] = entries_.size();
    entries_.push_back(std::move(e));
    return entries_.size() - 1;
  }

  std::size_t size() const { return entries_.size(); }
  Entry& operator[](std::size_t i) { return entries_[i]; }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw LookupError("unknown parameter '" + name + "'");
    return it->second;
  }

  Entry& at(const std::string& name) { return entries_[index_of(name)]; }
  const Entry& at(const std::string& name) const { return entries_[index_of(name)]; }

  void zero_grads() {
    for (Entry& e : entries_)
      std::fill(e.grad.data.begin(), e.grad.data.end(), T(0));
  }

  template <typename U>
  ParamStore<U> cast() const {
    ParamStore<U> out;
    for (const Entry& e : entries_) out.add(e.name, e.value.template cast<U>());
    return out;
  }

private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

} // namespace bdhpd

#endif
