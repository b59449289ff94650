#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "salem/io.hpp"

namespace salem {

class StepError : public Error {
 public:
  StepError(std::string step, const std::string& what) : Error(step + ": " + what), step_(std::move(step)) {}
  const std::string& step() const { return step_; }

 private:
  std::string step_;
};

struct PipelineOptions {
  std::optional<std::uint64_t> seed;  // overrides the config seed
  std::string base_dir;               // relative input paths resolve here
  int threads = 0;
};

// {"type": "bump" | "indicator" | "ball-indicator", "grid", ...} sampled on its support box.
GridFunction test_function(const io::json& spec, int n);

// Runs gen-measure, fourier, decay-fit, mollify, lambda and search, writing
// artifacts plus manifest.json into out_dir. Returns the manifest.
io::json run_pipeline(const io::json& config, const std::string& out_dir, const PipelineOptions& options = {});

}  // namespace salem
