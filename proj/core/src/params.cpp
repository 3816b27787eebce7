#include "meg/params.hpp"

#include <cmath>
#include <string>

namespace meg {

Params Params::filled(const GraphShape& shape, const ModelSpec& spec, double fill) {
  Params p;
  const std::size_t ns = shape.sources();
  const std::size_t nd = shape.destinations();
  if (spec.has_main()) {
    p.source.base.assign(ns, fill);
    p.destination.base.assign(nd, fill);
    if (spec.main_excites()) {
      p.source.jump.assign(ns, fill);
      p.source.decay_offset.assign(ns, fill);
      p.destination.jump.assign(nd, fill);
      p.destination.decay_offset.assign(nd, fill);
    }
  }
  if (spec.has_interaction()) {
    const std::size_t d = spec.dimension;
    p.source_factors.base = Matrix(ns, d, fill);
    p.destination_factors.base = Matrix(nd, d, fill);
    if (spec.interaction_excites()) {
      p.source_factors.jump = Matrix(ns, d, fill);
      p.source_factors.decay_offset = Matrix(ns, d, fill);
      p.destination_factors.jump = Matrix(nd, d, fill);
      p.destination_factors.decay_offset = Matrix(nd, d, fill);
    }
  }
  return p;
}

std::size_t Params::size() const {
  std::size_t total = 0;
  for_each_block(*this, [&](std::string_view, const std::vector<double>& v) { total += v.size(); });
  return total;
}

std::vector<double> Params::flatten() const {
  std::vector<double> flat;
  flat.reserve(size());
  for_each_block(*this, [&](std::string_view, const std::vector<double>& v) {
    flat.insert(flat.end(), v.begin(), v.end());
  });
  return flat;
}

void Params::assign(std::span<const double> flat) {
  if (flat.size() != size()) {
    throw InvalidArgument("flat parameter vector has " + std::to_string(flat.size()) +
                          " entries, expected " + std::to_string(size()));
  }
  std::size_t offset = 0;
  for_each_block(*this, [&](std::string_view, std::vector<double>& v) {
    for (double& x : v) x = flat[offset++];
  });
}

void validate(const Params& params, const GraphShape& shape, const ModelSpec& spec) {
  validate(spec);
  const Params expected = Params::filled(shape, spec, 1.0);
  // Matrices are compared by their flattened length and column count.
  const auto check_cols = [&](const Matrix& got, const Matrix& want, std::string_view name) {
    if (got.cols() != want.cols() || got.rows() != want.rows()) {
      throw InvalidArgument("parameter block " + std::string(name) + " has shape " +
                            std::to_string(got.rows()) + "x" + std::to_string(got.cols()) +
                            ", expected " + std::to_string(want.rows()) + "x" +
                            std::to_string(want.cols()));
    }
  };
  check_cols(params.source_factors.base, expected.source_factors.base, "source_factors.base");
  check_cols(params.source_factors.jump, expected.source_factors.jump, "source_factors.jump");
  check_cols(params.source_factors.decay_offset, expected.source_factors.decay_offset,
             "source_factors.decay_offset");
  check_cols(params.destination_factors.base, expected.destination_factors.base,
             "destination_factors.base");
  check_cols(params.destination_factors.jump, expected.destination_factors.jump,
             "destination_factors.jump");
  check_cols(params.destination_factors.decay_offset, expected.destination_factors.decay_offset,
             "destination_factors.decay_offset");

  std::vector<std::size_t> sizes;
  for_each_block(expected, [&](std::string_view, const std::vector<double>& v) {
    sizes.push_back(v.size());
  });
  std::size_t block = 0;
  for_each_block(params, [&](std::string_view name, const std::vector<double>& v) {
    if (v.size() != sizes[block++]) {
      throw InvalidArgument("parameter block " + std::string(name) + " has " +
                            std::to_string(v.size()) + " entries, expected " +
                            std::to_string(sizes[block - 1]));
    }
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!std::isfinite(v[k]) || !(v[k] > 0.0)) {
        throw InvalidArgument("parameter " + std::string(name) + "[" + std::to_string(k) +
                              "] must be finite and strictly positive");
      }
    }
  });
}

}  // namespace meg
