#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "meg/types.hpp"

namespace meg {

/// Dense row-major matrix of node latent factors (rows = nodes, cols = d).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& values() noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Node-level main effect for one side of an edge: baseline rate, excitation
/// jump, and decay offset (the excitation decays at rate jump + decay_offset).
struct NodeEffects {
  std::vector<double> base;
  std::vector<double> jump;
  std::vector<double> decay_offset;

  friend bool operator==(const NodeEffects&, const NodeEffects&) = default;
};

/// d-dimensional latent factors for one side of the interaction term. The edge
/// baseline is the inner product of the two sides' `base` rows; dimension q
/// jumps by jump_i * jump'_j and decays at (jump_i + offset_i)(jump'_j + offset'_j).
struct LatentFactors {
  Matrix base;
  Matrix jump;
  Matrix decay_offset;

  friend bool operator==(const LatentFactors&, const LatentFactors&) = default;
};

/// All node-specific parameters of a model. Blocks of absent components are
/// empty. The canonical flattening order is source effects (base, jump,
/// offset), destination effects, source factors, destination factors.
struct Params {
  NodeEffects source;
  NodeEffects destination;
  LatentFactors source_factors;
  LatentFactors destination_factors;

  /// Correctly shaped parameters filled with `fill`.
  static Params filled(const GraphShape& shape, const ModelSpec& spec, double fill);

  std::size_t size() const;
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);

  friend bool operator==(const Params&, const Params&) = default;
};

/// Visits every parameter block in canonical order as (name, values).
template <class Params_, class Visitor>
void for_each_block(Params_& p, Visitor&& visit) {
  visit(std::string_view("source.base"), p.source.base);
  visit(std::string_view("source.jump"), p.source.jump);
  visit(std::string_view("source.decay_offset"), p.source.decay_offset);
  visit(std::string_view("destination.base"), p.destination.base);
  visit(std::string_view("destination.jump"), p.destination.jump);
  visit(std::string_view("destination.decay_offset"), p.destination.decay_offset);
  visit(std::string_view("source_factors.base"), p.source_factors.base.values());
  visit(std::string_view("source_factors.jump"), p.source_factors.jump.values());
  visit(std::string_view("source_factors.decay_offset"), p.source_factors.decay_offset.values());
  visit(std::string_view("destination_factors.base"), p.destination_factors.base.values());
  visit(std::string_view("destination_factors.jump"), p.destination_factors.jump.values());
  visit(std::string_view("destination_factors.decay_offset"),
        p.destination_factors.decay_offset.values());
}

/// Throws InvalidArgument unless every block has the shape implied by
/// (shape, spec) and every entry is finite and strictly positive.
void validate(const Params& params, const GraphShape& shape, const ModelSpec& spec);

}  // namespace meg
