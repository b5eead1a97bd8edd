// Copyright 2026  The sekit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SEK_EVAL_METRICS_H_
#define SEK_EVAL_METRICS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "sek/head/head.h"

namespace sek::eval {

struct ScoreSet {
  std::vector<double> scores;
  std::vector<uint8_t> is_target;  // 1 target, 0 nontarget

  void Add(double score, bool target) {
    scores.push_back(score);
    is_target.push_back(target ? 1 : 0);
  }
  size_t size() const { return scores.size(); }
};

struct MetricResult {
  double value = 0;
  double threshold = 0;  // may be +inf (reject everything)
};

// Candidate thresholds are the sorted unique scores followed by +inf. A
// trial is accepted when score >= threshold.
//
// EER: first candidate where FRR >= FAR, linearly interpolated against the
// previous candidate.
MetricResult ComputeEer(const ScoreSet& s);

struct DcfParams {
  double p_target = 0.05;
  double c_miss = 1.0;
  double c_fa = 1.0;
};

// Normalized minimum detection cost over all candidate thresholds.
MetricResult ComputeMinDcf(const ScoreSet& s, const DcfParams& p = {});

struct Trial {
  bool target = false;
  std::string enroll;
  std::string test;
};

// "label enroll test" per line, label in {1, 0}.
std::vector<Trial> ReadTrials(const std::string& path);
void WriteTrials(const std::string& path, const std::vector<Trial>& trials);

// Cosine score per trial. Throws ValidationError naming a missing id.
ScoreSet EvaluateTrials(const std::vector<Trial>& trials,
                        const head::EmbeddingStore& store);

// "enroll test score" per line, in trial order.
void WriteScores(const std::string& path, const std::vector<Trial>& trials,
                 const ScoreSet& scores);
// Pairs a score file with its trial list (matched by line order and ids).
ScoreSet ReadScores(const std::string& path, const std::vector<Trial>& trials);

}  // namespace sek::eval

#endif  // SEK_EVAL_METRICS_H_
