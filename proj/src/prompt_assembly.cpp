#include "gmp/prompt_assembly.hpp"

#include <functional>

#include "gmp/errors.hpp"

namespace gmp {

using nn::Special;

namespace {

void check_rows(const nn::Var& v, Eigen::Index rows, const char* what) {
  if (!v.valid() || v.rows() != rows) {
    throw DataError(std::string(what) + ": expected " + std::to_string(rows) + " rows, got " +
                    (v.valid() ? std::to_string(v.rows()) : std::string("none")));
  }
}

// E_M with the prompt segment spliced in after /cap.
PromptedEmbedding assemble(nn::Tape& tape, const GmpModel& model, const BaseSegments& base,
                           Task task, int groups, bool with_prompt,
                           const std::function<void(SequenceBuilder&, int k)>& group) {
  SequenceBuilder b(tape, model);
  b.special(Special::kImg, "img")
      .rows(base.image, "V")
      .special(Special::kImgEnd, "/img")
      .special(Special::kIs, "is")
      .special(Special::kCap, "cap")
      .rows(base.caption, "E_C")
      .special(Special::kCapEnd, "/cap");
  if (with_prompt) {
    b.special(Special::kProm, "prom");
    for (int k = 1; k <= groups; ++k) group(b, k);
    b.special(Special::kPromEnd, "/prom");
  }
  b.special(Special::kBos, "bos").rows(base.text, "E_T").special(Special::kEos, "eos");
  auto r = b.build();
  return {r.rows, std::move(r.layout), task, with_prompt ? groups : 0};
}

std::string tag(const char* name, int k) { return std::string(name) + "." + std::to_string(k); }

}  // namespace

PromptedEmbedding assemble_jmasa(nn::Tape& tape, const GmpModel& model, const BaseSegments& base,
                                 nn::Var aspect_prompts, nn::Var sentiment_prompts, int n,
                                 const PromptOptions& options) {
  if (options.no_prompt) return assemble(tape, model, base, Task::kJmasa, 0, false, {});
  if (!options.no_gap) check_rows(aspect_prompts, 2 * n, "aspect prompts");
  if (!options.no_gsp) check_rows(sentiment_prompts, n, "sentiment prompts");
  return assemble(tape, model, base, Task::kJmasa, n, true, [&](SequenceBuilder& b, int k) {
    if (options.no_gap) {
      b.special(Special::kGapPlaceholder, tag("P_a", k), 2);
    } else {
      b.rows(nn::slice_rows(aspect_prompts, 2 * (k - 1), 2), tag("P_a", k));
    }
    b.special(Special::kSenti, tag("senti", k));
    if (options.no_gsp) {
      b.special(Special::kGspPlaceholder, tag("SP", k));
    } else {
      b.rows(nn::slice_rows(sentiment_prompts, k - 1, 1), tag("SP", k));
    }
  });
}

PromptedEmbedding assemble_masc(nn::Tape& tape, const GmpModel& model, const BaseSegments& base,
                                nn::Var sentiment_prompts, std::span<const AspectSpan> spans,
                                const PromptOptions& options) {
  const int l_t = base.text_length();
  for (const auto& s : spans) {
    if (s.begin < 1 || s.end > l_t || s.begin > s.end) {
      throw RangeError("span (" + std::to_string(s.begin) + "," + std::to_string(s.end) +
                       ") outside text of length " + std::to_string(l_t));
    }
  }
  if (options.no_prompt) return assemble(tape, model, base, Task::kMasc, 0, false, {});
  const int n = static_cast<int>(spans.size());
  if (!options.no_gsp && n > 0) check_rows(sentiment_prompts, n, "sentiment prompts");
  return assemble(tape, model, base, Task::kMasc, n, true, [&](SequenceBuilder& b, int k) {
    const AspectSpan& s = spans[static_cast<std::size_t>(k - 1)];
    b.rows(nn::mean_rows(nn::slice_rows(base.text, s.begin - 1, s.width())), tag("a", k));
    b.special(Special::kSenti, tag("senti", k));
    if (options.no_gsp) {
      b.special(Special::kGspPlaceholder, tag("SP", k));
    } else {
      b.rows(nn::slice_rows(sentiment_prompts, k - 1, 1), tag("SP", k));
    }
  });
}

PromptedEmbedding assemble_mate(nn::Tape& tape, const GmpModel& model, const BaseSegments& base,
                                nn::Var aspect_prompts, int n, const PromptOptions& options) {
  if (options.no_gsp) throw ConfigError("no_gsp is not defined for MATE");
  if (options.no_prompt) return assemble(tape, model, base, Task::kMate, 0, false, {});
  if (!options.no_gap) check_rows(aspect_prompts, 2 * n, "aspect prompts");
  return assemble(tape, model, base, Task::kMate, n, true, [&](SequenceBuilder& b, int k) {
    if (options.no_gap) {
      b.special(Special::kGapPlaceholder, tag("P_a", k), 2);
    } else {
      b.rows(nn::slice_rows(aspect_prompts, 2 * (k - 1), 2), tag("P_a", k));
    }
  });
}

}  // namespace gmp
