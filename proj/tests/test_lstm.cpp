#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "seqembed/error.hpp"
#include "seqembed/grad_check.hpp"
#include "seqembed/lstm.hpp"
#include "seqembed/rng.hpp"
#include "test_util.hpp"

using namespace seqembed;
using namespace seqembed::testutil;

namespace {

void randomize_lstm(LstmParams& p, RngStream& rng) {
  for (double& v : p.w_input.value.data) v = rand_value(rng);
  for (double& v : p.w_recur.value.data) v = rand_value(rng);
  for (double& v : p.bias.value.data) v = rand_value(rng);
}

}  // namespace

TEST_CASE("lstm with all-zero parameters produces an all-zero state") {
  RngStream rng(20);
  LstmParams p = make_lstm_params("z", 3, 4);
  MaskedSequence in = rand_masked(6, 3, 5, rng);
  LstmCache cache;
  lstm_forward(in, p, cache);
  Tensor last = lstm_last_hidden(cache);
  for (double v : last.data) CHECK(v == 0.0);
}

TEST_CASE("lstm with valid_len 1 ignores padded rows entirely") {
  RngStream rng(21);
  LstmParams p = make_lstm_params("m", 2, 3);
  randomize_lstm(p, rng);

  MaskedSequence a(5, 2, 1);
  a.steps.at(0, 0) = 0.3;
  a.steps.at(0, 1) = -0.8;
  MaskedSequence b(9, 2, 1);
  b.steps.at(0, 0) = 0.3;
  b.steps.at(0, 1) = -0.8;

  LstmCache ca, cb;
  lstm_forward(a, p, ca);
  lstm_forward(b, p, cb);
  Tensor la = lstm_last_hidden(ca);
  Tensor lb = lstm_last_hidden(cb);
  for (std::size_t i = 0; i < la.size(); ++i) CHECK(la.data[i] == lb.data[i]);
}

TEST_CASE("lstm rejects a zero hidden dimension") {
  LstmParams p;  // no shapes set: hidden_dim() == 0
  p.w_input = Parameter("w", {4, 2});
  p.w_recur = Parameter("u", {4, 1});
  MaskedSequence in(2, 2, 2);
  LstmCache cache;
  CHECK_THROWS_AS(lstm_forward(in, p, cache), ConfigError);
}

TEST_CASE("lstm last-step gradient matches finite differences") {
  RngStream rng(22);
  LstmParams p = make_lstm_params("g", 3, 2);
  randomize_lstm(p, rng);
  MaskedSequence in = rand_masked(3, 3, 3, rng);
  Parameter x("x", {3, 3});
  x.value = in.steps;

  Tensor coeff = rand_tensor({2}, rng);
  auto run = [&]() {
    MaskedSequence input;
    input.steps = x.value;
    input.valid_len = in.valid_len;
    LstmCache cache;
    lstm_forward(input, p, cache);
    return lstm_last_hidden(cache);
  };

  LstmCache cache;
  lstm_forward(in, p, cache);
  Tensor d_hidden({3, 2});
  for (std::size_t u = 0; u < 2; ++u) d_hidden.at(2, u) = coeff.data[u];
  MaskedSequence d_in;
  lstm_backward(in, p, cache, d_hidden, p.w_input.grad, p.w_recur.grad, p.bias.grad,
                &d_in);
  x.grad = d_in.steps;

  auto loss = [&]() { return weighted_sum(run(), coeff); };
  GradCheckReport report =
      grad_check({&p.w_input, &p.w_recur, &p.bias, &x}, loss, 1e-5);
  CHECK(report.passed());
  CHECK(report.max_rel_error < 1e-5);
}

TEST_CASE("lstm all-step gradient matches finite differences") {
  RngStream rng(23);
  LstmParams p = make_lstm_params("g", 2, 3);
  randomize_lstm(p, rng);
  MaskedSequence in = rand_masked(5, 2, 4, rng);
  Parameter x("x", {5, 2});
  x.value = in.steps;

  LstmCache cache0;
  lstm_forward(in, p, cache0);
  Tensor coeff = rand_tensor(cache0.hidden.shape, rng);
  for (std::size_t t = cache0.valid; t < 5; ++t) {
    for (std::size_t u = 0; u < 3; ++u) coeff.at(t, u) = 0.0;
  }

  auto run = [&]() {
    MaskedSequence input;
    input.steps = x.value;
    input.valid_len = in.valid_len;
    LstmCache cache;
    lstm_forward(input, p, cache);
    return lstm_all_hidden(cache).steps;
  };

  MaskedSequence d_in;
  lstm_backward(in, p, cache0, coeff, p.w_input.grad, p.w_recur.grad, p.bias.grad,
                &d_in);
  x.grad = d_in.steps;

  auto loss = [&]() { return weighted_sum(run(), coeff); };
  GradCheckReport report =
      grad_check({&p.w_input, &p.w_recur, &p.bias, &x}, loss, 1e-5);
  CHECK(report.passed());
}

TEST_CASE("bilstm doubles the channel count") {
  RngStream rng(24);
  BiLstmParams p = make_bilstm_params("b", 5, 320);
  for (auto* lp : {&p.fwd, &p.bwd}) randomize_lstm(*lp, rng);
  MaskedSequence in = rand_masked(4, 5, 4, rng);
  BiLstmCache cache;
  MaskedSequence out = bilstm_forward(in, p, cache);
  CHECK(out.channels() == 640);
}

TEST_CASE("bilstm on a palindrome with shared weights is mirror-symmetric") {
  RngStream rng(25);
  BiLstmParams p = make_bilstm_params("b", 2, 3);
  randomize_lstm(p.fwd, rng);
  p.bwd.w_input.value = p.fwd.w_input.value;
  p.bwd.w_recur.value = p.fwd.w_recur.value;
  p.bwd.bias.value = p.fwd.bias.value;

  const std::size_t len = 7;
  MaskedSequence in(len, 2, len);
  for (std::size_t t = 0; t < (len + 1) / 2; ++t) {
    for (std::size_t c = 0; c < 2; ++c) {
      const double v = rand_value(rng);
      in.steps.at(t, c) = v;
      in.steps.at(len - 1 - t, c) = v;
    }
  }

  BiLstmCache cache;
  MaskedSequence out = bilstm_forward(in, p, cache);
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t u = 0; u < 3; ++u) {
      CHECK(out.steps.at(t, u) ==
            doctest::Approx(out.steps.at(len - 1 - t, 3 + u)).epsilon(1e-12));
    }
  }
}

TEST_CASE("bilstm with zero parameters emits zeros") {
  RngStream rng(26);
  BiLstmParams p = make_bilstm_params("b", 3, 2);
  MaskedSequence in = rand_masked(5, 3, 4, rng);
  BiLstmCache cache;
  MaskedSequence out = bilstm_forward(in, p, cache);
  for (double v : out.steps.data) CHECK(v == 0.0);
}

TEST_CASE("bilstm gradient matches finite differences") {
  RngStream rng(27);
  BiLstmParams p = make_bilstm_params("b", 2, 2);
  randomize_lstm(p.fwd, rng);
  randomize_lstm(p.bwd, rng);
  MaskedSequence in = rand_masked(4, 2, 4, rng);
  Parameter x("x", {4, 2});
  x.value = in.steps;

  auto run = [&]() {
    MaskedSequence input;
    input.steps = x.value;
    input.valid_len = in.valid_len;
    BiLstmCache cache;
    return bilstm_forward(input, p, cache);
  };
  MaskedSequence out0 = run();
  Tensor coeff = rand_tensor(out0.steps.shape, rng);

  BiLstmCache cache;
  bilstm_forward(in, p, cache);
  MaskedSequence d_out;
  d_out.steps = coeff;
  d_out.valid_len = out0.valid_len;
  MaskedSequence d_in;
  bilstm_backward(in, p, cache, d_out, p.fwd.w_input.grad, p.fwd.w_recur.grad,
                  p.fwd.bias.grad, p.bwd.w_input.grad, p.bwd.w_recur.grad,
                  p.bwd.bias.grad, &d_in);
  x.grad = d_in.steps;

  auto loss = [&]() { return weighted_sum(run().steps, coeff); };
  GradCheckReport report =
      grad_check({&p.fwd.w_input, &p.fwd.w_recur, &p.fwd.bias, &p.bwd.w_input,
                  &p.bwd.w_recur, &p.bwd.bias, &x},
                 loss, 1e-5);
  CHECK(report.passed());
  CHECK(report.max_rel_error < 1e-5);
}

TEST_CASE("lstm masking: content is invariant to padding length") {
  RngStream rng(28);
  LstmParams p = make_lstm_params("m", 3, 4);
  randomize_lstm(p, rng);

  for (int it = 0; it < 20; ++it) {
    const std::size_t valid = 1 + rng.uniform_index(6);
    MaskedSequence tight = rand_masked(valid, 3, valid, rng);
    const std::size_t padded_len = valid + 1 + rng.uniform_index(10);
    MaskedSequence padded(padded_len, 3, valid);
    for (std::size_t t = 0; t < valid; ++t) {
      for (std::size_t c = 0; c < 3; ++c) padded.steps.at(t, c) = tight.steps.at(t, c);
    }

    LstmCache c1, c2;
    lstm_forward(tight, p, c1);
    lstm_forward(padded, p, c2);
    Tensor l1 = lstm_last_hidden(c1);
    Tensor l2 = lstm_last_hidden(c2);
    for (std::size_t i = 0; i < l1.size(); ++i) CHECK(l1.data[i] == l2.data[i]);
  }
}
