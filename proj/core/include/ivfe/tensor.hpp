#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ivfe {

/// Dense row-major array of doubles. data.size() == product of shape.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims, double fill = 0.0);

  [[nodiscard]] static std::size_t element_count(const std::vector<std::size_t>& dims) noexcept;
  [[nodiscard]] std::size_t size() const noexcept { return data.size(); }
  [[nodiscard]] std::size_t dim(std::size_t i) const { return shape.at(i); }
  [[nodiscard]] bool consistent() const noexcept { return element_count(shape) == data.size(); }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

/// Ordered collection of named tensors; order is the declared serialization order.
class TensorSet {
 public:
  std::size_t add(std::string name, Tensor t);

  [[nodiscard]] std::size_t size() const noexcept { return items_.size(); }
  [[nodiscard]] bool empty() const noexcept { return items_.empty(); }
  [[nodiscard]] std::optional<std::size_t> find(std::string_view name) const noexcept;

  [[nodiscard]] Tensor& operator[](std::size_t i) { return items_[i].tensor; }
  [[nodiscard]] const Tensor& operator[](std::size_t i) const { return items_[i].tensor; }
  [[nodiscard]] const std::string& name(std::size_t i) const { return items_[i].name; }
  /// Throws InvalidArgument for unknown names.
  [[nodiscard]] const Tensor& at(std::string_view name) const;
  [[nodiscard]] Tensor& at(std::string_view name);

  [[nodiscard]] const std::vector<NamedTensor>& items() const noexcept { return items_; }
  [[nodiscard]] auto begin() const noexcept { return items_.begin(); }
  [[nodiscard]] auto end() const noexcept { return items_.end(); }

  /// Same names, same shapes, zero data.
  [[nodiscard]] TensorSet zeros_like() const;

  friend bool operator==(const TensorSet&, const TensorSet&) = default;

 private:
  std::vector<NamedTensor> items_;
};

}  // namespace ivfe
