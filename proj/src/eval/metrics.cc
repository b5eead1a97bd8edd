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

#include "sek/eval/metrics.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace sek::eval {

namespace {

struct Counts {
  int64_t targets = 0, nontargets = 0;
};

Counts Validate(const ScoreSet& s) {
  Check<ShapeError>(s.scores.size() == s.is_target.size(), "score set: ",
                    s.scores.size(), " scores vs ", s.is_target.size(), " labels");
  Counts c;
  for (size_t i = 0; i < s.size(); ++i) {
    Check<ValidationError>(std::isfinite(s.scores[i]), "score ", i, " is not finite");
    (s.is_target[i] ? c.targets : c.nontargets) += 1;
  }
  Check<ValidationError>(c.targets > 0 && c.nontargets > 0,
                         "metrics need at least one target and one nontarget trial (got ",
                         c.targets, " / ", c.nontargets, ")");
  return c;
}

struct RocPoint {
  double threshold, frr, far;
};

// One pass over the scores in ascending order.
std::vector<RocPoint> Sweep(const ScoreSet& s, const Counts& c) {
  std::vector<size_t> order(s.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return s.scores[a] < s.scores[b]; });
  std::vector<RocPoint> roc;
  int64_t targets_below = 0, nontargets_below = 0;
  size_t i = 0;
  while (i < order.size()) {
    const double t = s.scores[order[i]];
    roc.push_back({t, static_cast<double>(targets_below) / c.targets,
                   static_cast<double>(c.nontargets - nontargets_below) / c.nontargets});
    for (; i < order.size() && s.scores[order[i]] == t; ++i)
      (s.is_target[order[i]] ? targets_below : nontargets_below) += 1;
  }
  roc.push_back({std::numeric_limits<double>::infinity(), 1.0, 0.0});
  return roc;
}

}  // namespace

MetricResult ComputeEer(const ScoreSet& s) {
  const Counts c = Validate(s);
  const std::vector<RocPoint> roc = Sweep(s, c);
  for (size_t i = 0; i < roc.size(); ++i) {
    const double d = roc[i].frr - roc[i].far;
    if (d < 0) continue;
    if (i == 0) return {(roc[i].frr + roc[i].far) / 2, roc[i].threshold};
    const double dp = roc[i - 1].frr - roc[i - 1].far;
    const double a = dp / (dp - d);
    return {roc[i - 1].frr + a * (roc[i].frr - roc[i - 1].frr), roc[i].threshold};
  }
  return {1.0, roc.back().threshold};  // unreachable: the +inf point has FRR 1
}

MetricResult ComputeMinDcf(const ScoreSet& s, const DcfParams& p) {
  Check<ValidationError>(p.p_target > 0 && p.p_target < 1 && p.c_miss > 0 && p.c_fa > 0,
                         "DCF needs 0 < p_target < 1 and positive costs");
  const Counts c = Validate(s);
  const double norm = std::min(p.c_miss * p.p_target, p.c_fa * (1 - p.p_target));
  MetricResult best{std::numeric_limits<double>::infinity(), 0};
  for (const RocPoint& r : Sweep(s, c)) {
    const double dcf =
        (p.c_miss * p.p_target * r.frr + p.c_fa * (1 - p.p_target) * r.far) / norm;
    if (dcf < best.value) best = {dcf, r.threshold};
  }
  return best;
}

std::vector<Trial> ReadTrials(const std::string& path) {
  std::ifstream in(path);
  Check<IoError>(static_cast<bool>(in), "cannot open '", path, "'");
  std::vector<Trial> trials;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string label;
    Trial t;
    if (!(ss >> label)) continue;
    Check<ValidationError>((label == "1" || label == "0") && (ss >> t.enroll >> t.test),
                           path, ":", lineno, ": expected 'label enroll test'");
    t.target = label == "1";
    trials.push_back(std::move(t));
  }
  return trials;
}

void WriteTrials(const std::string& path, const std::vector<Trial>& trials) {
  std::ofstream out(path);
  Check<IoError>(static_cast<bool>(out), "cannot open '", path, "' for writing");
  for (const Trial& t : trials)
    out << (t.target ? 1 : 0) << ' ' << t.enroll << ' ' << t.test << '\n';
  Check<IoError>(static_cast<bool>(out), "write failed for '", path, "'");
}

ScoreSet EvaluateTrials(const std::vector<Trial>& trials,
                        const head::EmbeddingStore& store) {
  ScoreSet s;
  for (const Trial& t : trials)
    s.Add(head::CosineScore(store.Get(t.enroll), store.Get(t.test)), t.target);
  return s;
}

void WriteScores(const std::string& path, const std::vector<Trial>& trials,
                 const ScoreSet& scores) {
  Check<ShapeError>(trials.size() == scores.size(), "write_scores: ", trials.size(),
                    " trials vs ", scores.size(), " scores");
  std::ofstream out(path);
  Check<IoError>(static_cast<bool>(out), "cannot open '", path, "' for writing");
  char buf[32];
  for (size_t i = 0; i < trials.size(); ++i) {
    auto res = std::to_chars(buf, buf + sizeof(buf), scores.scores[i]);
    out << trials[i].enroll << ' ' << trials[i].test << ' '
        << std::string_view(buf, res.ptr - buf) << '\n';
  }
  Check<IoError>(static_cast<bool>(out), "write failed for '", path, "'");
}

ScoreSet ReadScores(const std::string& path, const std::vector<Trial>& trials) {
  std::ifstream in(path);
  Check<IoError>(static_cast<bool>(in), "cannot open '", path, "'");
  ScoreSet s;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string enroll, test, tok;
    if (!(ss >> enroll)) continue;
    Check<ValidationError>(static_cast<bool>(ss >> test >> tok), path, ":", lineno,
                           ": expected 'enroll test score'");
    double v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    Check<ValidationError>(res.ec == std::errc(), path, ":", lineno, ": bad score '",
                           tok, "'");
    const size_t k = s.size();
    Check<ValidationError>(k < trials.size() && trials[k].enroll == enroll &&
                               trials[k].test == test,
                           path, ":", lineno, ": does not match trial ", k + 1);
    s.Add(v, trials[k].target);
  }
  Check<ValidationError>(s.size() == trials.size(), path, ": ", s.size(),
                         " scores for ", trials.size(), " trials");
  return s;
}

}  // namespace sek::eval
