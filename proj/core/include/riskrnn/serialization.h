#ifndef RISKRNN_SERIALIZATION_H_
#define RISKRNN_SERIALIZATION_H_

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "riskrnn/params.h"

namespace riskrnn {

// Versioned text format:
//
//   RISKRNN-MODEL v1
//   key = value            (optional config lines)
//   <name> <rows> <cols>
//   <row-major values, one matrix row per line, 17 significant digits>
//   ...
//   <checksum: sum of all values in file order>
//
// Round-trips bit-exactly.
inline constexpr const char* kModelFileHeader = "RISKRNN-MODEL v1";

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

struct ParameterFile {
  ConfigEntries config;
  ParameterStore params;
};

// Sum of all values in store order.
double ParameterChecksum(const ParameterStore& store);

// Formats with 17 significant digits.
std::string FormatDouble(double v);

void WriteParameterFile(std::ostream& out, const ConfigEntries& config,
                        const ParameterStore& store);
// Throws FormatError on a bad header, malformed block, or checksum mismatch.
ParameterFile ReadParameterFile(std::istream& in);

void SaveParameterFile(const std::string& path, const ConfigEntries& config,
                       const ParameterStore& store);
ParameterFile LoadParameterFile(const std::string& path);

}  // namespace riskrnn

#endif  // RISKRNN_SERIALIZATION_H_
