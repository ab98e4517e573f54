#pragma once
// Time-indexed categorical responses with an explicit missingness mask.
// Levels are 0-based inside the library; file formats carry 1-based codes.
// A masked entry stores no level (code fixed at -1) so downstream counts
// can never observe it.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "dptf/schema.hpp"

namespace dptf {

class ObservationBlock {
 public:
  ObservationBlock(int num_subjects, int num_vars)
      : n_(num_subjects), p_(num_vars),
        codes_(static_cast<std::size_t>(num_subjects) * num_vars, -1),
        mask_(static_cast<std::size_t>(num_subjects) * num_vars, 1) {}

  int num_subjects() const { return n_; }
  int num_vars() const { return p_; }

  bool missing(int i, int j) const { return mask_[idx(i, j)] != 0; }
  // level of an observed entry; masked entries must not be read
  int level(int i, int j) const { return codes_[idx(i, j)]; }

  void set(int i, int j, int level) {
    codes_[idx(i, j)] = static_cast<std::int16_t>(level);
    mask_[idx(i, j)] = 0;
  }
  void set_missing(int i, int j) {
    codes_[idx(i, j)] = -1;
    mask_[idx(i, j)] = 1;
  }

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * p_ + j;
  }

  int n_ = 0;
  int p_ = 0;
  std::vector<std::int16_t> codes_;
  std::vector<std::uint8_t> mask_;
};

class Dataset {
 public:
  Dataset(CategoricalSchema schema, std::vector<ObservationBlock> waves,
          std::vector<double> time_labels)
      : schema_(std::move(schema)), waves_(std::move(waves)),
        time_labels_(std::move(time_labels)) {
    if (waves_.empty()) throw std::invalid_argument("dataset: need at least one wave");
    if (time_labels_.size() != waves_.size()) {
      throw std::invalid_argument("dataset: one time label per wave");
    }
    for (const auto& wave : waves_) {
      if (wave.num_vars() != schema_.num_vars()) {
        throw std::invalid_argument("dataset: wave variable count mismatch");
      }
      for (int i = 0; i < wave.num_subjects(); ++i) {
        for (int j = 0; j < wave.num_vars(); ++j) {
          if (!wave.missing(i, j) &&
              (wave.level(i, j) < 0 || wave.level(i, j) >= schema_.levels(j))) {
            throw std::invalid_argument("dataset: level out of schema range");
          }
        }
      }
    }
  }

  const CategoricalSchema& schema() const { return schema_; }
  int num_waves() const { return static_cast<int>(waves_.size()); }
  const ObservationBlock& wave(int t) const { return waves_.at(t); }
  // narrow mutation surface for harnesses that resimulate observed entries
  ObservationBlock& wave_for_update(int t) { return waves_.at(t); }
  double time_label(int t) const { return time_labels_.at(t); }
  const std::vector<double>& time_labels() const { return time_labels_; }

  int total_subjects() const {
    int n = 0;
    for (const auto& w : waves_) n += w.num_subjects();
    return n;
  }

  // dataset restricted to a single wave (for per-time baseline fits)
  Dataset single_wave(int t) const {
    return Dataset(schema_, {waves_.at(t)}, {time_labels_.at(t)});
  }

 private:
  CategoricalSchema schema_;
  std::vector<ObservationBlock> waves_;
  std::vector<double> time_labels_;
};

}  // namespace dptf
