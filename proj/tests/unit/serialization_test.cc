#include "riskrnn/serialization.h"

#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "riskrnn/errors.h"
#include "riskrnn/nn.h"
#include "riskrnn/params.h"

namespace riskrnn {
namespace {

ParameterStore SampleStore() {
  std::vector<ParamSpec> specs = {{"W_a", 3, 5, ParamInit::kGlorotUniform},
                                  {"b_a", 3, 1, ParamInit::kGlorotUniform}};
  for (const auto& s : LstmParamSpecs("rnn", 2, 3)) specs.push_back(s);
  return InitParams(specs, 42);
}

TEST(SerializationTest, RoundTripIsBitExact) {
  const ParameterStore store = SampleStore();
  const ConfigEntries config = {{"alpha", "1"}, {"name", "x y"}};
  std::stringstream ss;
  WriteParameterFile(ss, config, store);
  const ParameterFile back = ReadParameterFile(ss);
  EXPECT_EQ(back.config, config);
  ASSERT_EQ(back.params.matrices().size(), store.matrices().size());
  for (size_t i = 0; i < store.matrices().size(); ++i) {
    const auto& a = store.matrices()[i];
    const auto& b = back.params.matrices()[i];
    EXPECT_EQ(a.name, b.name);
    EXPECT_EQ(a.rows, b.rows);
    EXPECT_EQ(a.cols, b.cols);
    EXPECT_EQ(a.values, b.values);
  }
}

TEST(SerializationTest, LayoutHeaderBlocksAndChecksum) {
  ParameterStore store;
  ParamMatrix m("M", 2, 2);
  m.values = {1.5, -2, 0.25, 3};
  store.Add(m);
  std::stringstream ss;
  WriteParameterFile(ss, {}, store);
  EXPECT_EQ(ss.str(), "RISKRNN-MODEL v1\nM 2 2\n1.5 -2\n0.25 3\n2.75\n");
}

TEST(SerializationTest, RejectsBadHeader) {
  std::stringstream ss("RISKRNN-MODEL v2\n0\n");
  EXPECT_THROW(ReadParameterFile(ss), FormatError);
}

TEST(SerializationTest, RejectsChecksumMismatch) {
  std::stringstream ss("RISKRNN-MODEL v1\nM 1 2\n1 2\n4\n");
  EXPECT_THROW(ReadParameterFile(ss), FormatError);
}

TEST(SerializationTest, RejectsTruncatedBlock) {
  std::stringstream ss("RISKRNN-MODEL v1\nM 2 2\n1 2\n");
  EXPECT_THROW(ReadParameterFile(ss), FormatError);
}

TEST(SerializationTest, RejectsMissingChecksum) {
  std::stringstream ss("RISKRNN-MODEL v1\nM 1 1\n1\nN 1 1\n2\n");
  EXPECT_THROW(ReadParameterFile(ss), FormatError);
}

}  // namespace
}  // namespace riskrnn
