#include "gmp/core_types.hpp"

#include "gmp/errors.hpp"

namespace gmp {

std::string_view to_string(Sentiment s) {
  switch (s) {
    case Sentiment::kPos:
      return "POS";
    case Sentiment::kNeu:
      return "NEU";
    case Sentiment::kNeg:
      return "NEG";
  }
  return "?";
}

Sentiment sentiment_from_string(std::string_view s) {
  if (s == "POS") return Sentiment::kPos;
  if (s == "NEU") return Sentiment::kNeu;
  if (s == "NEG") return Sentiment::kNeg;
  throw DataError("unknown sentiment label '" + std::string(s) + "'");
}

std::string_view to_string(Task t) {
  switch (t) {
    case Task::kJmasa:
      return "jmasa";
    case Task::kMasc:
      return "masc";
    case Task::kMate:
      return "mate";
  }
  return "?";
}

Task task_from_string(std::string_view s) {
  if (s == "jmasa" || s == "JMASA") return Task::kJmasa;
  if (s == "masc" || s == "MASC") return Task::kMasc;
  if (s == "mate" || s == "MATE") return Task::kMate;
  throw ConfigError("unknown task '" + std::string(s) + "'");
}

std::string_view to_string(SplitTag t) {
  switch (t) {
    case SplitTag::kTrain:
      return "train";
    case SplitTag::kDev:
      return "dev";
    case SplitTag::kTest:
      return "test";
  }
  return "?";
}

SplitTag split_from_string(std::string_view s) {
  if (s == "train") return SplitTag::kTrain;
  if (s == "dev") return SplitTag::kDev;
  if (s == "test") return SplitTag::kTest;
  throw DataError("unknown split tag '" + std::string(s) + "'");
}

void validate_instance(const Instance& instance) {
  auto fail = [&](const std::string& why) {
    throw ValidationError("instance '" + instance.id + "': " + why);
  };
  if (instance.aspects.size() != instance.sentiments.size()) {
    fail("aspect and sentiment lists differ in length");
  }
  const int l_t = instance.text_length();
  int previous_end = 0;
  for (const auto& span : instance.aspects) {
    if (span.begin < 1 || span.begin > span.end || span.end > l_t) {
      fail("span (" + std::to_string(span.begin) + "," + std::to_string(span.end) +
           ") outside text of length " + std::to_string(l_t));
    }
    if (span.begin <= previous_end) fail("spans overlap or are not sorted by begin");
    previous_end = span.end;
  }
}

std::string surface_term(const Instance& instance, std::size_t k) {
  const auto& span = instance.aspects.at(k);
  std::string out;
  for (int p = span.begin; p <= span.end; ++p) {
    if (!out.empty()) out += ' ';
    out += instance.text_tokens.at(static_cast<std::size_t>(p - 1));
  }
  return out;
}

TripletSequence gold_triplets(const Instance& instance, Task task) {
  TripletSequence seq{task, {}, false};
  for (std::size_t k = 0; k < instance.aspects.size(); ++k) {
    Triplet t{instance.aspects[k].begin, instance.aspects[k].end, std::nullopt};
    if (task_has_sentiment(task)) t.sentiment = instance.sentiments[k];
    seq.items.push_back(t);
  }
  return seq;
}

int symbol_to_index(const TargetSymbol& symbol, int text_length) {
  switch (symbol.kind) {
    case TargetSymbol::Kind::kEos:
      return kEosIndex;
    case TargetSymbol::Kind::kPointer:
      if (symbol.pointer < 1 || symbol.pointer > text_length) {
        throw RangeError("pointer " + std::to_string(symbol.pointer) + " outside [1, " +
                         std::to_string(text_length) + "]");
      }
      return symbol.pointer;
    case TargetSymbol::Kind::kSentiment:
      return sentiment_index(symbol.sentiment, text_length);
  }
  return kEosIndex;
}

TargetSymbol index_to_symbol(int index, int text_length) {
  if (index < 0 || index >= target_space_size(text_length)) {
    throw RangeError("target index " + std::to_string(index) + " outside target space of size " +
                     std::to_string(target_space_size(text_length)));
  }
  if (index == kEosIndex) return TargetSymbol::eos();
  if (index <= text_length) return TargetSymbol::at(index);
  return TargetSymbol::of(static_cast<Sentiment>(index - text_length - 1));
}

std::vector<int> encode_targets(const TripletSequence& triplets, int text_length) {
  const bool with_sentiment = task_has_sentiment(triplets.task);
  std::vector<int> out;
  out.reserve(triplets.items.size() * 3 + 1);
  for (const auto& t : triplets.items) {
    if (t.begin < 1 || t.begin > t.end || t.end > text_length) {
      throw RangeError("span (" + std::to_string(t.begin) + "," + std::to_string(t.end) +
                       ") outside [1, " + std::to_string(text_length) + "]");
    }
    out.push_back(t.begin);
    out.push_back(t.end);
    if (with_sentiment) {
      if (!t.sentiment) throw RangeError("triplet without sentiment for a sentiment task");
      out.push_back(sentiment_index(*t.sentiment, text_length));
    }
  }
  out.push_back(kEosIndex);
  return out;
}

TripletSequence decode_targets(std::span<const int> indices, int text_length, Task task) {
  const int arity = task_has_sentiment(task) ? 3 : 2;
  TripletSequence seq{task, {}, false};
  Triplet current;
  int slot = 0;
  for (std::size_t pos = 0; pos < indices.size(); ++pos) {
    const int index = indices[pos];
    if (index < 0 || index >= target_space_size(text_length)) {
      throw ParseError("index " + std::to_string(index) + " outside target space", pos);
    }
    const TargetSymbol sym = index_to_symbol(index, text_length);
    if (sym.kind == TargetSymbol::Kind::kEos) {
      if (slot != 0) throw ParseError("end of sequence inside a triplet", pos);
      if (pos + 1 != indices.size()) throw ParseError("symbols after end of sequence", pos + 1);
      return seq;
    }
    if (slot < 2) {
      if (sym.kind != TargetSymbol::Kind::kPointer) {
        throw ParseError("sentiment in a pointer slot", pos);
      }
      if (slot == 0) {
        current = Triplet{sym.pointer, sym.pointer, std::nullopt};
      } else {
        if (sym.pointer < current.begin) throw ParseError("span begin exceeds end", pos);
        current.end = sym.pointer;
      }
    } else {
      if (sym.kind != TargetSymbol::Kind::kSentiment) {
        throw ParseError("pointer in a sentiment slot", pos);
      }
      current.sentiment = sym.sentiment;
    }
    if (++slot == arity) {
      seq.items.push_back(current);
      slot = 0;
    }
  }
  throw ParseError("missing end of sequence", indices.size());
}

}  // namespace gmp
