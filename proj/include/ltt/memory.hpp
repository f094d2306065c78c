#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ltt/learner.hpp"

namespace ltt {

struct MemoryConfig {
  std::size_t k_max = 32;       // bound on stored samples
  double eta = 0.9;             // age decay, in (0, 1]
  std::size_t n_init = 20;      // solver iterations on frame 0
  std::size_t n_update = 3;     // solver iterations per model update
  std::size_t update_period = 1;  // frames between updates

  void validate() const;
};

struct UpdateDecision {
  bool update = false;
  std::size_t iterations = 0;
};

// Frame 0 always updates with the n_init budget; frame f >= 1 updates with
// the n_update budget when f is a multiple of update_period. A period of n
// with a budget of 1 spreads single iterations across every n-th frame.
UpdateDecision should_update(const MemoryConfig& config, std::size_t frame_index);

// Bounded, decay-weighted few-shot training set maintained while tracking.
// The first frame (index 0) is never evicted; beyond k_max entries the
// oldest other sample is dropped. Per-entry global weights decay with age,
// gamma_t proportional to eta^(current_frame - t), normalized to sum to one.
class SampleMemory {
 public:
  struct Entry {
    std::size_t frame_index = 0;
    TrainingSample sample;
  };

  explicit SampleMemory(MemoryConfig config);

  // frame_index must exceed all stored indices; the very first insertion
  // must be frame 0.
  void insert(std::size_t frame_index, TrainingSample sample);

  // Normalized weights for evaluating the stored set at current_frame.
  std::vector<double> weights(std::size_t current_frame) const;

  // Stored samples with frame weights set for the most recent frame.
  LearnerProblem problem(double lambda, std::size_t kernel_size) const;

  const std::vector<Entry>& entries() const { return entries_; }
  const MemoryConfig& config() const { return config_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t latest_frame() const;

  // {"config": {...}, "frames": [...], "weights": [...]}, weights taken at
  // the latest stored frame.
  std::string to_json() const;

 private:
  MemoryConfig config_;
  std::vector<Entry> entries_;
};

}  // namespace ltt
