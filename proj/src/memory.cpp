#include "acorn/memory.hpp"

#include "acorn/errors.hpp"

namespace acorn {

void ReplayMemory::offer_all(const LabeledRows& batch) {
  const auto cols = static_cast<std::size_t>(batch.rows.cols());
  for (Eigen::Index i = 0; i < batch.rows.rows(); ++i) {
    offer(std::span<const double>(batch.rows.row(i).data(), cols), batch.labels[static_cast<std::size_t>(i)]);
  }
}

ReservoirBuffer::ReservoirBuffer(std::size_t capacity, Rng rng) : capacity_(capacity), rng_(std::move(rng)) {}

void ReservoirBuffer::offer(std::span<const double> row, int label) {
  if (dim_ == 0 && seen_ == 0) dim_ = row.size();
  if (row.size() != dim_) throw DataError("reservoir: row width " + std::to_string(row.size()) +
                                          " does not match buffer width " + std::to_string(dim_));
  if (seen_ < capacity_) {
    data_.insert(data_.end(), row.begin(), row.end());
    labels_.push_back(label);
  } else if (capacity_ > 0) {
    std::uniform_int_distribution<std::size_t> slot(0, seen_);
    const std::size_t j = slot(rng_);
    if (j < capacity_) {
      std::copy(row.begin(), row.end(), data_.begin() + static_cast<std::ptrdiff_t>(j * dim_));
      labels_[j] = label;
    }
  }
  ++seen_;
}

LabeledRows ReservoirBuffer::snapshot() const {
  LabeledRows out;
  out.rows = Eigen::Map<const Matrix>(data_.data(), static_cast<Eigen::Index>(labels_.size()),
                                      static_cast<Eigen::Index>(dim_));
  out.labels = labels_;
  return out;
}

nlohmann::json ReservoirBuffer::to_json() const {
  return {{"capacity", capacity_}, {"seen", seen_},     {"dim", dim_},
          {"rows", data_},         {"labels", labels_}, {"rng", save_rng(rng_)}};
}

ReservoirBuffer ReservoirBuffer::from_json(const nlohmann::json& j) {
  try {
    ReservoirBuffer b(j.at("capacity").get<std::size_t>(), load_rng(j.at("rng").get<std::string>()));
    b.seen_ = j.at("seen").get<std::size_t>();
    b.dim_ = j.at("dim").get<std::size_t>();
    b.data_ = j.at("rows").get<std::vector<double>>();
    b.labels_ = j.at("labels").get<std::vector<int>>();
    if (b.data_.size() != b.labels_.size() * b.dim_ || b.labels_.size() != std::min(b.seen_, b.capacity_)) {
      throw DataError("malformed reservoir checkpoint: inconsistent sizes");
    }
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed reservoir checkpoint: ") + e.what());
  }
}

LabeledRows merge_with(const ReplayMemory& memory, const LabeledRows& batch) {
  LabeledRows stored = memory.snapshot();
  if (stored.empty()) return batch;
  if (batch.empty()) return stored;
  if (stored.rows.cols() != batch.rows.cols()) {
    throw DataError("merge_with: memory rows have " + std::to_string(stored.rows.cols()) +
                    " columns, batch has " + std::to_string(batch.rows.cols()));
  }
  LabeledRows out;
  out.rows = vstack(stored.rows, batch.rows);
  out.labels = std::move(stored.labels);
  out.labels.insert(out.labels.end(), batch.labels.begin(), batch.labels.end());
  return out;
}

LabeledRows with_label(const Matrix& rows, int label) {
  return {rows, Labels(static_cast<std::size_t>(rows.rows()), label)};
}

}  // namespace acorn
