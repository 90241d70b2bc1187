#include "doctest.h"

#include "fixtures.hpp"
#include "gmp/errors.hpp"
#include "gmp/multimodal_encoder.hpp"
#include "gmp/nn/gradcheck.hpp"
#include "gmp/nstream_decoders.hpp"

using namespace gmp;

namespace {

struct Setup {
  Instance inst = testing::fixed_instance(6);
  std::vector<Instance> data{inst};
  GmpModel model{testing::tiny_config(Task::kJmasa), nn::Vocab::build(data)};
};

}  // namespace

TEST_SUITE("nstream_decoders") {

TEST_CASE("count head") {
  Setup s;
  nn::Tape tape(false);
  const auto em = assemble_multimodal(tape, s.model, embed_instance(tape, s.model, s.inst));
  const nn::Var h = encode_aspect_branch(tape, s.model, em);
  const nn::Var logits = predict_aspect_count(tape, s.model, h);
  CHECK(logits.cols() == 5);
  const Eigen::ArrayXd p = (logits.value().array() - logits.value().maxCoeff()).exp();
  CHECK(p.sum() > 0.0);
  const int n = predicted_count(logits);
  CHECK(n >= 1);
  CHECK(n <= 5);

  nn::Var uniform = tape.constant(nn::Matrix::Zero(1, 5));
  CHECK(nn::scalar(count_loss(uniform, 2)) == doctest::Approx(std::log(5.0)));
  nn::Var peaked = tape.constant(nn::Matrix{{0.1, 0.3, -2.0, 0.7, 1.1}});
  CHECK(nn::scalar(count_loss(peaked, 7)) == nn::scalar(count_loss(peaked, 5)));
  CHECK_THROWS_AS(count_loss(peaked, 0), DataError);
  CHECK(predicted_count(tape.constant(nn::Matrix{{0.0, 2.0, 2.0, 1.0, 0.0}})) == 2);
}

TEST_CASE("count loss gradcheck") {
  Setup s;
  auto& params = s.model.params();
  const nn::Matrix memory = nn::Matrix::Random(3, 8);
  const auto res = nn::gradcheck(
      [&](nn::Tape& t) {
        nn::Var h = t.constant(memory);
        return count_loss(predict_aspect_count(t, s.model, h), 2);
      },
      params);
  CHECK(res.max_rel_error < 1e-4);
}

TEST_CASE("aspect prompts: shapes, head distinctness, determinism") {
  Setup s;
  nn::Tape tape(false);
  nn::Var h = tape.constant(nn::Matrix::Random(5, 8));
  CHECK(generate_aspect_prompts(tape, s.model, h, 1).rows() == 2);
  const nn::Var ap = generate_aspect_prompts(tape, s.model, h, 5);
  CHECK(ap.rows() == 10);
  CHECK(ap.cols() == 8);
  for (int k = 1; k < 5; ++k) {
    CHECK((ap.value().middleRows(0, 2) - ap.value().middleRows(2 * k, 2)).cwiseAbs().maxCoeff() > 1e-9);
  }
  CHECK((generate_aspect_prompts(tape, s.model, h, 5).value().array() == ap.value().array()).all());
  CHECK_THROWS_AS(generate_aspect_prompts(tape, s.model, h, 0), DataError);
  CHECK_THROWS_AS(generate_aspect_prompts(tape, s.model, h, 6), DataError);
}

TEST_CASE("sentiment prompt repetition and dependence on its memory") {
  Setup s;
  nn::Tape tape(false);
  nn::Matrix m = nn::Matrix::Random(5, 8);
  const nn::Var sp = generate_sentiment_prompt(tape, s.model, tape.constant(m), 3);
  CHECK(sp.rows() == 3);
  CHECK((sp.value().row(0).array() == sp.value().row(2).array()).all());
  m(2, 3) += 0.5;
  const nn::Var sp2 = generate_sentiment_prompt(tape, s.model, tape.constant(m), 3);
  CHECK((sp2.value() - sp.value()).cwiseAbs().maxCoeff() > 1e-9);
  const nn::Var dsp = generate_sentiment_prompt(tape, s.model, tape.constant(m), 3, true);
  CHECK(dsp.rows() == 3);
  CHECK((dsp.value().row(0).array() == sp2.value().row(0).array()).all());
  CHECK((dsp.value().row(1) - dsp.value().row(0)).cwiseAbs().maxCoeff() > 1e-9);
}

TEST_CASE("APD reads only the aspect memory") {
  Setup s;
  nn::Tape tape(false);
  const auto em = assemble_multimodal(tape, s.model, embed_instance(tape, s.model, s.inst));
  const auto dual = encode_dual(tape, s.model, em);
  const nn::Var ap = generate_aspect_prompts(tape, s.model, dual.aspect, 2);
  // A different sentiment memory cannot influence AP: it is not an input.
  const nn::Var sp = generate_sentiment_prompt(tape, s.model, tape.constant(nn::Matrix::Random(4, 8)), 2);
  const nn::Var ap2 = generate_aspect_prompts(tape, s.model, dual.aspect, 2);
  CHECK((ap.value().array() == ap2.value().array()).all());
  CHECK(sp.rows() == 2);
}

}
