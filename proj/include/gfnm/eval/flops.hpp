// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace gfnm::eval {

enum class Technique { kLsOmp, kDAud, kLstmCs, kProposed };

const char* to_string(Technique t);
/// Accepts ls-omp, d-aud, lstm-cs, proposed; anything else is a ConfigError
/// listing those names.
Technique parse_technique(const std::string& text);
std::vector<Technique> all_techniques();

struct FlopModel {
  Technique technique = Technique::kProposed;
  std::size_t devices = 200;     // K
  std::size_t subcarriers = 100; // N
  std::size_t hidden_layers = 3; // L
  std::size_t width = 1000;      // α
  std::size_t sparsity = 10;     // S
  /// Slots fed per network step: 1 for per-slot input, J for full-frame. Only
  /// the network input terms scale with it.
  std::size_t input_slots = 1;
};

/// Shared equalization cost 2N + S·(14/3·N³ + N² − N).
double mmse_flops(std::size_t subcarriers, std::size_t sparsity);

/// Closed-form operation count. Throws ConfigError on a zero parameter.
double flops(const FlopModel& model);

}  // namespace gfnm::eval
