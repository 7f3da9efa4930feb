#include "riskrnn/params.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "riskrnn/errors.h"

namespace riskrnn {

ParamMatrix::ParamMatrix(std::string name, int rows, int cols)
    : name(std::move(name)),
      rows(rows),
      cols(cols),
      values(static_cast<size_t>(rows) * cols, 0.0),
      grad(static_cast<size_t>(rows) * cols, 0.0) {}

void ParamMatrix::ZeroGrad() { std::fill(grad.begin(), grad.end(), 0.0); }

ParamMatrix& ParameterStore::Add(ParamMatrix m) {
  if (m.rows <= 0 || m.cols <= 0) {
    throw ConfigError("parameter '" + m.name + "' has non-positive dims");
  }
  if (index_.count(m.name)) {
    throw ConfigError("duplicate parameter name '" + m.name + "'");
  }
  if (m.values.size() != static_cast<size_t>(m.rows) * m.cols) {
    throw ConfigError("parameter '" + m.name + "' value count mismatch");
  }
  m.grad.assign(m.values.size(), 0.0);
  index_[m.name] = matrices_.size();
  matrices_.push_back(std::move(m));
  return matrices_.back();
}

bool ParameterStore::Contains(const std::string& name) const {
  return index_.count(name) > 0;
}

ParamMatrix& ParameterStore::Get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return matrices_[it->second];
}

const ParamMatrix& ParameterStore::Get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return matrices_[it->second];
}

ParamMatrix* ParameterStore::Find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &matrices_[it->second];
}

size_t ParameterStore::NumValues() const {
  size_t n = 0;
  for (const auto& m : matrices_) n += m.size();
  return n;
}

void ParameterStore::ZeroGrad() {
  for (auto& m : matrices_) m.ZeroGrad();
}

ParameterStore InitParams(std::span<const ParamSpec> specs, uint64_t seed) {
  ParameterStore store;
  std::mt19937_64 rng(seed);
  for (const auto& spec : specs) {
    ParamMatrix m(spec.name, spec.rows, spec.cols);
    const double limit = std::sqrt(6.0 / (spec.rows + spec.cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (auto& v : m.values) v = dist(rng);
    if (spec.init == ParamInit::kLstmBias) {
      if (spec.rows % 4 != 0 || spec.cols != 1) {
        throw ConfigError("LSTM bias '" + spec.name + "' must be (4H x 1)");
      }
      // Gate order is input, forget, candidate, output.
      const int hidden = spec.rows / 4;
      for (int i = hidden; i < 2 * hidden; ++i) m.values[i] = 1.0;
    }
    store.Add(std::move(m));
  }
  return store;
}

}  // namespace riskrnn
