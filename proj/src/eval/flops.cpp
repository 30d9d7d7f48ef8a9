// SPDX-License-Identifier: Apache-2.0
#include "gfnm/eval/flops.hpp"

#include "gfnm/errors.hpp"

namespace gfnm::eval {

const char* to_string(Technique t) {
  switch (t) {
    case Technique::kLsOmp: return "ls-omp";
    case Technique::kDAud: return "d-aud";
    case Technique::kLstmCs: return "lstm-cs";
    case Technique::kProposed: return "proposed";
  }
  return "?";
}

Technique parse_technique(const std::string& text) {
  for (Technique t : all_techniques())
    if (text == to_string(t)) return t;
  throw ConfigError("technique: unknown '" + text + "' (valid: ls-omp, d-aud, lstm-cs, proposed)");
}

std::vector<Technique> all_techniques() {
  return {Technique::kLsOmp, Technique::kDAud, Technique::kLstmCs, Technique::kProposed};
}

double mmse_flops(std::size_t subcarriers, std::size_t sparsity) {
  const double n = static_cast<double>(subcarriers);
  const double s = static_cast<double>(sparsity);
  return 2.0 * n + s * (14.0 / 3.0 * n * n * n + n * n - n);
}

double flops(const FlopModel& m) {
  if (m.devices == 0) throw ConfigError("K: must be >= 1");
  if (m.subcarriers == 0) throw ConfigError("N: must be >= 1");
  if (m.hidden_layers == 0) throw ConfigError("L: must be >= 1");
  if (m.width == 0) throw ConfigError("alpha: must be >= 1");
  if (m.sparsity == 0) throw ConfigError("S: must be >= 1");
  if (m.input_slots == 0) throw ConfigError("input_slots: must be >= 1");
  const double k = static_cast<double>(m.devices);
  const double n = static_cast<double>(m.subcarriers);
  const double l = static_cast<double>(m.hidden_layers);
  const double a = static_cast<double>(m.width);
  const double s = static_cast<double>(m.sparsity);
  const double n_in = n * static_cast<double>(m.input_slots);  // network input width / 2
  switch (m.technique) {
    case Technique::kLsOmp:
      return 2.0 * s * n * n * k +
             (s * s * s * s + 6.0 * s * s * s + 7.0 * s * s + 2.0 * s) / 12.0 * n * n * n +
             s * (s + 1.0) * n * n - s;
    case Technique::kDAud:
      return 2.0 * l * a * a + (4.0 * n_in + 7.0 * l + 2.0 * n_in + 4.0) * a + (s + 3.0) * k -
             s * (s + 1.0) / 2.0 - 1.0 + mmse_flops(m.subcarriers, m.sparsity);
    case Technique::kLstmCs:
      return 2.0 * a * a * (4.0 * l + 3.0) + 2.0 * a * (8.0 * n_in + k) + a * (3.0 * l - 1.0) +
             3.0 * k - 1.0 + mmse_flops(m.subcarriers, m.sparsity);
    case Technique::kProposed:
      return 2.0 * a * a * (8.0 * l + 3.0) + 2.0 * a * (16.0 * n_in + k) - a * (l + 3.0) + 3.0 * k -
             1.0 + mmse_flops(m.subcarriers, m.sparsity);
  }
  throw ConfigError("technique: unknown id");
}

}  // namespace gfnm::eval
