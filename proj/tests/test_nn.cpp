// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <iostream>

#include "gfnm/errors.hpp"
#include "nn_fixtures.hpp"

using namespace gfnm;
using namespace gfnm::nn;

namespace {

void report(const test::GradientCheck& check) {
  for (std::size_t i = 0; i < std::min<std::size_t>(check.failures.size(), 10); ++i) {
    const auto& f = check.failures[i];
    std::cerr << f.tensor << "[" << f.index << "] analytic " << f.analytic << " numeric "
              << f.numeric << " rel " << f.relative << "\n";
  }
}

}  // namespace

TEST_CASE("finite-difference gradients, both heads, with dropout and L2") {
  for (HeadMode head : {HeadMode::kSigmoid, HeadMode::kSoftmax}) {
    CAPTURE(to_string(head));
    const NetworkShape shape = test::tiny_shape(head);
    TrainConfig config;
    config.dropout = 0.3;
    config.seed = 5;
    const auto params = initialize(shape, 11);
    const auto input = test::random_batch(shape, 4, 3);
    const auto labels = test::random_labels(shape, 4, 4);
    const auto check = test::check_gradients(params, input, labels, config);
    report(check);
    MESSAGE("worst relative error " << check.worst_relative);
    CHECK(check.checked == parameter_count(shape));
    CHECK(check.failures.empty());
  }
}

TEST_CASE("finite-difference gradients across architecture variants") {
  struct Variant {
    const char* name;
    bool bidirectional;
    bool attention;
    std::size_t span;
    std::size_t slots_per_step;
    double positive_weight;
  };
  const Variant variants[] = {
      {"unidirectional, no attention", false, false, 0, 1, 1.0},
      {"attention span 1", true, true, 1, 1, 1.0},
      {"full-frame head", true, true, 0, 2, 1.0},
      {"weighted positives", true, true, 0, 1, 4.0},
  };
  for (const auto& v : variants) {
    for (HeadMode head : {HeadMode::kSigmoid, HeadMode::kSoftmax}) {
      CAPTURE(v.name);
      CAPTURE(to_string(head));
      NetworkShape shape = test::tiny_shape(head);
      shape.bidirectional = v.bidirectional;
      shape.attention = v.attention;
      shape.attention_span = v.span;
      if (v.slots_per_step > 1) {
        shape.slots_per_step = v.slots_per_step;
        shape.input_width *= v.slots_per_step;
        shape.steps = 1;
      }
      TrainConfig config;
      config.positive_weight = v.positive_weight;
      const auto params = initialize(shape, 21);
      const auto check =
          test::check_gradients(params, test::random_batch(shape, 3, 8),
                                test::random_labels(shape, 3, 9), config, 1e-4, 1e-4,
                                test::Stencil::kFourthOrder);
      report(check);
      CHECK(check.checked == parameter_count(shape));
      CHECK(check.failures.empty());
    }
  }
}
