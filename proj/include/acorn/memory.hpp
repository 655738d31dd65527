#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "acorn/matrix.hpp"
#include "acorn/rng.hpp"

namespace acorn {

// Replay memory policy. Rows are offered one at a time in stream order; the
// policy decides what to retain. Labels are stored exactly as offered (-1
// for unlabeled memories).
class ReplayMemory {
 public:
  virtual ~ReplayMemory() = default;

  virtual void offer(std::span<const double> row, int label) = 0;
  virtual std::size_t capacity() const = 0;
  virtual std::size_t seen() const = 0;
  virtual std::size_t size() const = 0;
  virtual LabeledRows snapshot() const = 0;

  void offer_all(const LabeledRows& batch);
};

// Algorithm R: the first `capacity` items are kept, afterwards item number t
// (0-based) replaces a uniformly chosen slot with probability capacity/(t+1).
class ReservoirBuffer final : public ReplayMemory {
 public:
  ReservoirBuffer(std::size_t capacity, Rng rng);

  void offer(std::span<const double> row, int label) override;
  std::size_t capacity() const override { return capacity_; }
  std::size_t seen() const override { return seen_; }
  std::size_t size() const override { return labels_.size(); }
  LabeledRows snapshot() const override;

  std::size_t dim() const { return dim_; }

  nlohmann::json to_json() const;
  static ReservoirBuffer from_json(const nlohmann::json& j);

 private:
  std::size_t capacity_;
  std::size_t seen_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
  std::vector<int> labels_;
  Rng rng_;
};

// Memory contents followed by `batch`; the memory is not modified.
LabeledRows merge_with(const ReplayMemory& memory, const LabeledRows& batch);

// Attach a constant label to every row.
LabeledRows with_label(const Matrix& rows, int label);

}  // namespace acorn
