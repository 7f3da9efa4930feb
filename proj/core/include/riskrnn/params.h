#ifndef RISKRNN_PARAMS_H_
#define RISKRNN_PARAMS_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace riskrnn {

// Dense row-major matrix of trainable values with a same-shape gradient
// accumulator. Bias vectors are stored as (n x 1) matrices.
struct ParamMatrix {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::vector<double> values;
  std::vector<double> grad;

  ParamMatrix() = default;
  ParamMatrix(std::string name, int rows, int cols);

  size_t size() const { return values.size(); }
  double& at(int r, int c) { return values[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const {
    return values[static_cast<size_t>(r) * cols + c];
  }
  void ZeroGrad();
};

enum class ParamInit {
  kGlorotUniform,  // U(-sqrt(6/(rows+cols)), +sqrt(6/(rows+cols)))
  kLstmBias,       // Glorot entries, forget-gate quarter set to 1.0
};

struct ParamSpec {
  std::string name;
  int rows = 0;
  int cols = 0;
  ParamInit init = ParamInit::kGlorotUniform;
};

// Named collection of parameter matrices. Element addresses are stable for
// as long as no matrix is added, so tapes may hold pointers into the store.
class ParameterStore {
 public:
  // Throws ConfigError on a duplicate name or non-positive dims.
  ParamMatrix& Add(ParamMatrix m);

  bool Contains(const std::string& name) const;
  ParamMatrix& Get(const std::string& name);
  const ParamMatrix& Get(const std::string& name) const;
  ParamMatrix* Find(const std::string& name);

  std::vector<ParamMatrix>& matrices() { return matrices_; }
  const std::vector<ParamMatrix>& matrices() const { return matrices_; }

  size_t NumValues() const;
  void ZeroGrad();

 private:
  std::vector<ParamMatrix> matrices_;
  std::map<std::string, size_t> index_;
};

// Deterministic in (specs, seed). Throws ConfigError on duplicate names.
ParameterStore InitParams(std::span<const ParamSpec> specs, uint64_t seed);

}  // namespace riskrnn

#endif  // RISKRNN_PARAMS_H_
