#ifndef RISKRNN_DATASET_IO_H_
#define RISKRNN_DATASET_IO_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "riskrnn/synthworld.h"

namespace riskrnn {

inline constexpr char kDatasetSchema[] = "riskrnn-dataset";
inline constexpr int kDatasetVersion = 1;

// JSON Lines: one header object, then one object per video.
//
//   {"schema":"riskrnn-dataset","version":1,"split":...,"count":N,
//    "scenario":{...}}
//   {"id":...,"label":"positive"|"negative","accident_frame":T,
//    "hazard_region":i,"region_classes":[...],
//    "frames":[{"agent":{"box":[cx,cy,w,h],"feature":[...]},
//               "regions":[{"box":[...],"feature":[...]}],
//               "risky":[[cx,cy,w,h],...],
//               "proposals":[{"box":[...],"score":s,"feature":[...],
//                             "source":k}]}]}
struct Dataset {
  std::string split;
  ScenarioConfig scenario;
  std::vector<Scenario> videos;
};

void WriteDataset(std::ostream& out, const Dataset& dataset);
// Throws FormatError on malformed input or a schema/version mismatch.
Dataset ReadDataset(std::istream& in);

void SaveDataset(const std::string& path, const Dataset& dataset);
Dataset LoadDataset(const std::string& path);

}  // namespace riskrnn

#endif  // RISKRNN_DATASET_IO_H_
