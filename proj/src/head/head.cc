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

#include "sek/head/head.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sek/base/binary_io.h"

namespace sek::head {

template <typename T>
AttentiveStatsPooling<T>::AttentiveStatsPooling(nn::ParamScope<T> scope,
                                                int64_t input_dim,
                                                int64_t bottleneck) {
  projection_ = nn::Linear<T>(scope.Sub("projection"), input_dim, bottleneck);
  vector_ = scope.Uniform("vector", {bottleneck, 1}, 1.0 / std::sqrt(bottleneck));
}

template <typename T>
Tensor<T> AttentiveStatsPooling<T>::Forward(const Tensor<T>& frames,
                                            Tensor<T>* weights) const {
  Check<ShapeError>(frames.ndim() == 3 && frames.dim(2) == input_dim(),
                    "ASP expects [B, T, ", input_dim(), "], got ",
                    ShapeToString(frames.shape()));
  Tensor<T> e = MatMul(Tanh(projection_.Forward(frames)), vector_);  // [B, T, 1]
  Tensor<T> alpha = Softmax(e, 1);
  if (weights != nullptr) *weights = alpha;
  Tensor<T> mu = Sum(Mul(frames, alpha), {1});
  Tensor<T> second = Sum(Mul(Square(frames), alpha), {1});
  Tensor<T> sigma =
      Sqrt(ClampMin(Sub(second, Square(mu)), static_cast<T>(kVarianceFloor)));
  return Concat(std::vector<Tensor<T>>{mu, sigma}, -1);
}

template <typename T>
EmbeddingHead<T>::EmbeddingHead(nn::ParamScope<T> scope, int64_t frame_dim,
                                int64_t embed_dim, int64_t bottleneck) {
  pooling_ = AttentiveStatsPooling<T>(scope.Sub("pooling"), frame_dim, bottleneck);
  embedding_ = nn::Linear<T>(scope.Sub("embedding"), 2 * frame_dim, embed_dim);
}

template <typename T>
Tensor<T> AMSoftmaxLogits(const Tensor<T>& embeddings, const Tensor<T>& weight,
                          const std::vector<int64_t>& labels, T margin, T scale) {
  Check<ShapeError>(embeddings.ndim() == 2 && weight.ndim() == 2 &&
                        embeddings.dim(1) == weight.dim(1),
                    "am_softmax: embeddings ", ShapeToString(embeddings.shape()),
                    " vs class weights ", ShapeToString(weight.shape()),
                    " (axis 1 must agree)");
  Check<ValidationError>(margin >= 0 && scale > 0, "am_softmax needs m >= 0, s > 0");
  const int64_t b = embeddings.dim(0), k = weight.dim(0);
  Check<ValidationError>(b > 0, "am_softmax: empty batch");
  Check<ShapeError>(static_cast<int64_t>(labels.size()) == b, "am_softmax: ",
                    labels.size(), " labels for batch of ", b);
  std::vector<T> shift(b * k, T(0));
  for (int64_t r = 0; r < b; ++r) {
    Check<ValidationError>(labels[r] >= 0 && labels[r] < k, "label ", labels[r],
                           " out of range [0, ", k, ")");
    shift[r * k + labels[r]] = margin;
  }
  Tensor<T> cos = MatMul(NormalizeLastAxis(embeddings),
                         Permute(NormalizeLastAxis(weight), {1, 0}));
  return Scale(Sub(cos, Tensor<T>({b, k}, std::move(shift))), scale);
}

template <typename T>
Tensor<T> AMSoftmaxLoss(const Tensor<T>& embeddings, const Tensor<T>& weight,
                        const std::vector<int64_t>& labels, T margin, T scale) {
  return SoftmaxCrossEntropy(
      AMSoftmaxLogits(embeddings, weight, labels, margin, scale), labels);
}

template <typename T>
AMSoftmax<T>::AMSoftmax(nn::ParamScope<T> scope, int64_t embed_dim,
                        int64_t classes, T margin, T scale)
    : margin_(margin), scale_(scale) {
  weight_ = scope.Uniform("weight", {classes, embed_dim},
                          std::sqrt(6.0 / (classes + embed_dim)));
}

double CosineScore(std::span<const float> a, std::span<const float> b) {
  Check<ShapeError>(a.size() == b.size(), "cosine_score: dims ", a.size(), " vs ",
                    b.size());
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

void EmbeddingStore::BuildIndex() const {
  if (order_.size() == ids.size()) return;
  order_.resize(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) order_[i] = i;
  std::sort(order_.begin(), order_.end(),
            [this](size_t x, size_t y) { return ids[x] < ids[y]; });
  for (size_t i = 1; i < order_.size(); ++i) {
    Check<ValidationError>(ids[order_[i - 1]] != ids[order_[i]],
                           "duplicate embedding id '", ids[order_[i]], "'");
  }
}

const std::vector<float>& EmbeddingStore::Get(const std::string& id) const {
  BuildIndex();
  auto it = std::lower_bound(order_.begin(), order_.end(), id,
                             [this](size_t x, const std::string& k) { return ids[x] < k; });
  Check<ValidationError>(it != order_.end() && ids[*it] == id,
                         "embedding for utterance '", id, "' not found");
  return vectors[*it];
}

void EmbeddingStore::Add(std::string id, std::vector<float> v) {
  BuildIndex();
  auto it = std::lower_bound(order_.begin(), order_.end(), id,
                             [this](size_t x, const std::string& k) { return ids[x] < k; });
  Check<ValidationError>(it == order_.end() || ids[*it] != id,
                         "duplicate embedding id '", id, "'");
  order_.insert(it, ids.size());
  ids.push_back(std::move(id));
  vectors.push_back(std::move(v));
}

void WriteEmbeddingBinary(const std::string& path, std::span<const float> v) {
  std::ofstream out(path, std::ios::binary);
  Check<IoError>(static_cast<bool>(out), "cannot open '", path, "' for writing");
  out.write("SEKE", 4);
  io::WriteLE(out, static_cast<uint32_t>(v.size()));
  for (float x : v) io::WriteLE(out, x);
  Check<IoError>(static_cast<bool>(out), "write failed for '", path, "'");
}

std::vector<float> ReadEmbeddingBinary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Check<IoError>(static_cast<bool>(in), "cannot open '", path, "'");
  io::ExpectMagic(in, "SEKE", path);
  std::vector<float> v(io::ReadLE<uint32_t>(in, path));
  for (float& x : v) x = io::ReadLE<float>(in, path);
  return v;
}

void WriteEmbeddingText(const std::string& path, const EmbeddingStore& store) {
  std::ofstream out(path);
  Check<IoError>(static_cast<bool>(out), "cannot open '", path, "' for writing");
  char buf[32];
  for (size_t i = 0; i < store.size(); ++i) {
    out << store.ids[i];
    for (float x : store.vectors[i]) {
      auto res = std::to_chars(buf, buf + sizeof(buf), x);
      out << ' ' << std::string_view(buf, res.ptr - buf);
    }
    out << '\n';
  }
  Check<IoError>(static_cast<bool>(out), "write failed for '", path, "'");
}

EmbeddingStore ReadEmbeddingText(const std::string& path) {
  std::ifstream in(path);
  Check<IoError>(static_cast<bool>(in), "cannot open '", path, "'");
  EmbeddingStore store;
  std::string line;
  size_t lineno = 0, dim = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string id, tok;
    if (!(ss >> id)) continue;
    std::vector<float> v;
    while (ss >> tok) {
      float x = 0;
      auto res = std::from_chars(tok.data(), tok.data() + tok.size(), x);
      Check<ValidationError>(res.ec == std::errc() && res.ptr == tok.data() + tok.size(),
                             path, ":", lineno, ": bad number '", tok, "'");
      v.push_back(x);
    }
    if (store.size() == 0) dim = v.size();
    Check<ValidationError>(!v.empty() && v.size() == dim, path, ":", lineno,
                           ": expected ", dim, " values, got ", v.size());
    store.Add(std::move(id), std::move(v));
  }
  return store;
}

template class AttentiveStatsPooling<float>;
template class AttentiveStatsPooling<double>;
template class EmbeddingHead<float>;
template class EmbeddingHead<double>;
template class AMSoftmax<float>;
template class AMSoftmax<double>;
template Tensor<float> AMSoftmaxLogits(const Tensor<float>&, const Tensor<float>&,
                                       const std::vector<int64_t>&, float, float);
template Tensor<double> AMSoftmaxLogits(const Tensor<double>&, const Tensor<double>&,
                                        const std::vector<int64_t>&, double, double);
template Tensor<float> AMSoftmaxLoss(const Tensor<float>&, const Tensor<float>&,
                                     const std::vector<int64_t>&, float, float);
template Tensor<double> AMSoftmaxLoss(const Tensor<double>&, const Tensor<double>&,
                                      const std::vector<int64_t>&, double, double);

}  // namespace sek::head
