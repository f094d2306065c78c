#include "ltt/memory.hpp"

#include <cmath>

#include <json.hpp>

#include "ltt/errors.hpp"

namespace ltt {

void MemoryConfig::validate() const {
  if (k_max < 1) throw dim_error("k_max must be at least 1");
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw dim_error("eta must lie in (0, 1]");
  }
  if (update_period < 1) throw dim_error("update_period must be at least 1");
}

UpdateDecision should_update(const MemoryConfig& config, std::size_t frame_index) {
  config.validate();
  if (frame_index == 0) return {true, config.n_init};
  if (frame_index % config.update_period == 0) return {true, config.n_update};
  return {false, 0};
}

SampleMemory::SampleMemory(MemoryConfig config) : config_(config) {
  config_.validate();
}

void SampleMemory::insert(std::size_t frame_index, TrainingSample sample) {
  if (entries_.empty()) {
    if (frame_index != 0) {
      throw order_error("the first inserted sample must be frame 0, got frame " +
                        std::to_string(frame_index));
    }
  } else if (frame_index <= entries_.back().frame_index) {
    throw order_error("frame " + std::to_string(frame_index) +
                      " does not follow stored frame " +
                      std::to_string(entries_.back().frame_index));
  }
  entries_.push_back({frame_index, std::move(sample)});
  if (entries_.size() > config_.k_max) {
    // Oldest non-first entry goes. With k_max = 1 that is the newcomer
    // itself, leaving only the reference frame.
    entries_.erase(entries_.begin() + 1);
  }
}

std::vector<double> SampleMemory::weights(std::size_t current_frame) const {
  if (entries_.empty()) {
    throw order_error("weights requested from an empty memory");
  }
  std::vector<double> raw(entries_.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const double age = static_cast<double>(current_frame) -
                       static_cast<double>(entries_[i].frame_index);
    raw[i] = std::pow(config_.eta, age);
    sum += raw[i];
  }
  for (double& v : raw) v /= sum;
  return raw;
}

std::size_t SampleMemory::latest_frame() const {
  if (entries_.empty()) {
    throw order_error("latest_frame requested from an empty memory");
  }
  return entries_.back().frame_index;
}

LearnerProblem SampleMemory::problem(double lambda, std::size_t kernel_size) const {
  const std::vector<double> gamma = weights(latest_frame());
  LearnerProblem p;
  p.lambda = lambda;
  p.kernel_size = kernel_size;
  p.samples.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    TrainingSample s = entries_[i].sample;
    s.frame_weight = gamma[i];
    p.samples.push_back(std::move(s));
  }
  return p;
}

std::string SampleMemory::to_json() const {
  nlohmann::ordered_json j;
  j["config"] = {{"k_max", config_.k_max},
                 {"eta", config_.eta},
                 {"n_init", config_.n_init},
                 {"n_update", config_.n_update},
                 {"update_period", config_.update_period}};
  auto frames = nlohmann::ordered_json::array();
  for (const auto& e : entries_) frames.push_back(e.frame_index);
  j["frames"] = std::move(frames);
  auto w = nlohmann::ordered_json::array();
  if (!entries_.empty()) {
    for (double v : weights(latest_frame())) w.push_back(v);
  }
  j["weights"] = std::move(w);
  return j.dump(2);
}

}  // namespace ltt
