#include "ivfe/tensor.hpp"

#include <functional>
#include <numeric>

#include "ivfe/error.hpp"

namespace ivfe {

Tensor::Tensor(std::vector<std::size_t> dims, double fill)
    : shape(std::move(dims)), data(element_count(shape), fill) {}

std::size_t Tensor::element_count(const std::vector<std::size_t>& dims) noexcept {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

std::size_t TensorSet::add(std::string name, Tensor t) {
  items_.push_back({std::move(name), std::move(t)});
  return items_.size() - 1;
}

std::optional<std::size_t> TensorSet::find(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (items_[i].name == name) return i;
  }
  return std::nullopt;
}

const Tensor& TensorSet::at(std::string_view name) const {
  auto i = find(name);
  if (!i) throw Error(ErrorCode::kInvalidArgument, "no tensor named '" + std::string(name) + "'");
  return items_[*i].tensor;
}

Tensor& TensorSet::at(std::string_view name) {
  auto i = find(name);
  if (!i) throw Error(ErrorCode::kInvalidArgument, "no tensor named '" + std::string(name) + "'");
  return items_[*i].tensor;
}

TensorSet TensorSet::zeros_like() const {
  TensorSet out;
  for (const auto& item : items_) out.add(item.name, Tensor(item.tensor.shape));
  return out;
}

}  // namespace ivfe
