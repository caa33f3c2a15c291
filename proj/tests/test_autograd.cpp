// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "shufflepose/autograd.hpp"
#include "shufflepose/ops.hpp"

using namespace shufflepose;

TEST_CASE("no tape is active outside a Tape scope") {
  CHECK(Tape::active() == nullptr);
  {
    Tape t;
    CHECK(Tape::active() == &t);
  }
  CHECK(Tape::active() == nullptr);
}

TEST_CASE("tape scopes nest and restore the previous tape") {
  Tape outer;
  CHECK(Tape::active() == &outer);
  {
    Tape inner;
    CHECK(Tape::active() == &inner);
  }
  CHECK(Tape::active() == &outer);
}

TEST_CASE("ops outside a tape do not record") {
  Tensor x = Tensor::full({1, 1, 1, 2}, 1.5);
  Tensor y = ops::relu(x);
  CHECK(y.at(0, 0, 0, 0) == 1.5);
  CHECK_FALSE(x.has_grad());
  CHECK_THROWS_AS(backward(y), Error);  // free backward needs an active tape
}

TEST_CASE("backward seeds the loss gradient with one") {
  Tensor x = Tensor::full({1, 1, 1, 1}, 2.0);
  Tape tape;
  Tensor y = ops::scale(x, 3.0);
  tape.backward(y);
  CHECK(y.grad()[0] == 1.0);
  CHECK(x.grad()[0] == 3.0);
}

TEST_CASE("adjoints accumulate across fan-out") {
  // y = x*x + x  =>  dy/dx = 2x + 1
  Tensor x = Tensor::full({1, 1, 1, 1}, 5.0);
  Tape tape;
  Tensor y = ops::add(ops::mul(x, x), x);
  tape.backward(y);
  CHECK(x.grad()[0] == doctest::Approx(11.0).epsilon(1e-14));
}

TEST_CASE("each backward pass starts from clean gradients") {
  Tensor x = Tensor::full({1, 1, 1, 1}, 1.0);
  {
    Tape tape;
    Tensor y = ops::scale(x, 2.0);
    tape.backward(y);
  }
  CHECK(x.grad()[0] == 2.0);
  {
    Tape tape;
    Tensor y = ops::scale(x, 7.0);
    tape.backward(y);
  }
  // 7, not 9: the second pass zeroes graph tensors before replay.
  CHECK(x.grad()[0] == 7.0);
}

TEST_CASE("backward requires a scalar loss") {
  Tensor x(1, 1, 1, 3);
  Tape tape;
  Tensor y = ops::relu(x);
  CHECK_THROWS_AS(tape.backward(y), ShapeError);
}

TEST_CASE("custom recorded node runs its adjoint in reverse order") {
  Tensor x = Tensor::full({1, 1, 1, 1}, 1.0);
  std::vector<int> order;
  {
    Tape tape;
    tape.record({x}, [&order] { order.push_back(1); });
    tape.record({x}, [&order] { order.push_back(2); });
    Tensor loss = Tensor::full({1, 1, 1, 1}, 0.0);
    tape.record({loss}, [&order] { order.push_back(3); });
    tape.backward(loss);
  }
  CHECK(order == std::vector<int>{3, 2, 1});
}
