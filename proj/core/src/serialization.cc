#include "riskrnn/serialization.h"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "riskrnn/errors.h"

namespace riskrnn {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double ParseDouble(const std::string& tok, int line_no) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0' || errno == ERANGE) {
    throw FormatError("line " + std::to_string(line_no) +
                      ": not a number: '" + tok + "'");
  }
  return v;
}

std::vector<std::string> Tokens(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

}  // namespace

double ParameterChecksum(const ParameterStore& store) {
  double sum = 0.0;
  for (const auto& m : store.matrices()) {
    for (double v : m.values) sum += v;
  }
  return sum;
}

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void WriteParameterFile(std::ostream& out, const ConfigEntries& config,
                        const ParameterStore& store) {
  out << kModelFileHeader << '\n';
  for (const auto& [key, value] : config) out << key << " = " << value << '\n';
  for (const auto& m : store.matrices()) {
    out << m.name << ' ' << m.rows << ' ' << m.cols << '\n';
    for (int r = 0; r < m.rows; ++r) {
      for (int c = 0; c < m.cols; ++c) {
        if (c) out << ' ';
        out << FormatDouble(m.at(r, c));
      }
      out << '\n';
    }
  }
  out << FormatDouble(ParameterChecksum(store)) << '\n';
}

ParameterFile ReadParameterFile(std::istream& in) {
  ParameterFile file;
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line) || Trim(line) != kModelFileHeader) {
    throw FormatError("missing '" + std::string(kModelFileHeader) + "' header");
  }
  ++line_no;

  bool have_checksum = false;
  double checksum = 0.0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = Trim(line);
    if (t.empty()) continue;
    if (have_checksum) {
      throw FormatError("line " + std::to_string(line_no) +
                        ": content after checksum");
    }
    const auto eq = t.find('=');
    if (eq != std::string::npos) {
      if (!file.params.matrices().empty()) {
        throw FormatError("line " + std::to_string(line_no) +
                          ": config entry after parameter blocks");
      }
      file.config.emplace_back(Trim(t.substr(0, eq)), Trim(t.substr(eq + 1)));
      continue;
    }
    const auto toks = Tokens(t);
    if (toks.size() == 1) {
      checksum = ParseDouble(toks[0], line_no);
      have_checksum = true;
      continue;
    }
    if (toks.size() != 3) {
      throw FormatError("line " + std::to_string(line_no) +
                        ": expected '<name> <rows> <cols>'");
    }
    const int rows = std::atoi(toks[1].c_str());
    const int cols = std::atoi(toks[2].c_str());
    if (rows <= 0 || cols <= 0) {
      throw FormatError("line " + std::to_string(line_no) +
                        ": bad dims for '" + toks[0] + "'");
    }
    ParamMatrix m(toks[0], rows, cols);
    for (int r = 0; r < rows; ++r) {
      if (!std::getline(in, line)) {
        throw FormatError("truncated block '" + m.name + "'");
      }
      ++line_no;
      const auto vals = Tokens(line);
      if (static_cast<int>(vals.size()) != cols) {
        throw FormatError("line " + std::to_string(line_no) + ": expected " +
                          std::to_string(cols) + " values for '" + m.name +
                          "'");
      }
      for (int c = 0; c < cols; ++c) m.at(r, c) = ParseDouble(vals[c], line_no);
    }
    try {
      file.params.Add(std::move(m));
    } catch (const ConfigError& e) {
      throw FormatError(e.what());
    }
  }
  if (!have_checksum) throw FormatError("missing checksum line");
  const double actual = ParameterChecksum(file.params);
  if (FormatDouble(actual) != FormatDouble(checksum)) {
    throw FormatError("checksum mismatch: file says " + FormatDouble(checksum) +
                      ", values sum to " + FormatDouble(actual));
  }
  return file;
}

void SaveParameterFile(const std::string& path, const ConfigEntries& config,
                       const ParameterStore& store) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  WriteParameterFile(out, config, store);
  if (!out) throw FormatError("write to '" + path + "' failed");
}

ParameterFile LoadParameterFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return ReadParameterFile(in);
}

}  // namespace riskrnn
