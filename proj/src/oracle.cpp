#include "rst/oracle.hpp"

#include <algorithm>
#include <cctype>

#include "rst/error.hpp"

namespace rst {

std::string_view to_string(PromptKind kind) {
  switch (kind) {
    case PromptKind::Action:
      return "action";
    case PromptKind::Nuclearity:
      return "nuclearity";
    case PromptKind::Relation:
      return "relation";
    case PromptKind::Split:
      return "split";
  }
  return "";
}

PromptKind parse_prompt_kind(std::string_view text) {
  for (PromptKind k : kAllPromptKinds) {
    if (to_string(k) == text) return k;
  }
  throw SyntaxError("unknown prompt kind '" + std::string(text) + "'");
}

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return c >= '0' && c <= '9';
  });
}

std::string strip_leading_zeros(std::string_view s) {
  const auto nz = s.find_first_not_of('0');
  return nz == std::string_view::npos ? "0" : std::string(s.substr(nz));
}

std::string first_line_trimmed(std::string_view raw) {
  const auto nl = raw.find_first_of("\r\n");
  std::string_view line = raw.substr(0, nl);
  const auto b = line.find_first_not_of(" \t\f\v");
  if (b == std::string_view::npos) return {};
  const auto e = line.find_last_not_of(" \t\f\v");
  return std::string(line.substr(b, e - b + 1));
}

}  // namespace

std::optional<std::string> resolve_label(std::string_view raw,
                                         std::span<const std::string> valid) {
  const std::string cand = ascii_lower(first_line_trimmed(raw));
  if (cand.empty()) return std::nullopt;
  for (const auto& v : valid) {
    if (ascii_lower(v) == cand) return v;
  }
  if (all_digits(cand)) {
    const std::string value = strip_leading_zeros(cand);
    for (const auto& v : valid) {
      if (all_digits(v) && strip_leading_zeros(v) == value) return v;
    }
  }
  return std::nullopt;
}

std::vector<std::string> action_labels() { return {"shift", "reduce"}; }

std::vector<std::string> nuclearity_labels() {
  std::vector<std::string> out;
  for (Nuclearity n : kAllNuclearities) out.emplace_back(to_string(n));
  return out;
}

std::vector<std::string> split_labels(int max_k) {
  std::vector<std::string> out;
  for (int k = 0; k <= max_k; ++k) out.push_back(std::to_string(k));
  return out;
}

// ---------------------------------------------------------------------------

ReplayOracle ReplayOracle::for_shift_reduce(std::span<const Action> steps,
                                            int num_edus, bool skip_forced) {
  std::vector<Answer> answers;
  if (num_edus == 1) return ReplayOracle(std::move(answers));
  std::size_t stack = 0;
  auto queue = static_cast<std::size_t>(num_edus);
  for (const Action& a : steps) {
    const bool can_shift = queue > 0;
    const bool can_reduce = stack >= 2;
    if (!(skip_forced && can_shift != can_reduce)) {
      answers.push_back({PromptKind::Action, a.is_shift() ? "shift" : "reduce"});
    }
    if (a.is_shift()) {
      --queue;
      ++stack;
    } else {
      answers.push_back(
          {PromptKind::Nuclearity, std::string(to_string(a.nuclearity))});
      answers.push_back({PromptKind::Relation, a.relation});
      --stack;
    }
  }
  return ReplayOracle(std::move(answers));
}

ReplayOracle ReplayOracle::for_splits(std::span<const GoldSplit> splits,
                                      bool skip_forced) {
  std::vector<Answer> answers;
  for (const GoldSplit& g : splits) {
    if (!(skip_forced && g.span.length() == 2)) {
      answers.push_back({PromptKind::Split, std::to_string(g.k)});
    }
    answers.push_back(
        {PromptKind::Nuclearity, std::string(to_string(g.nuclearity))});
    answers.push_back({PromptKind::Relation, g.relation});
  }
  return ReplayOracle(std::move(answers));
}

std::string ReplayOracle::complete(const OracleQuery& query) {
  if (next_ >= answers_.size()) {
    throw ReplayExhausted("replay oracle queried past its " +
                          std::to_string(answers_.size()) + " answers");
  }
  const Answer& a = answers_[next_];
  if (a.kind != query.kind) {
    throw KindMismatch("replay answer " + std::to_string(next_) + " is a " +
                       std::string(to_string(a.kind)) + " label but a " +
                       std::string(to_string(query.kind)) +
                       " query arrived");
  }
  ++next_;
  return a.label;
}

// ---------------------------------------------------------------------------

std::string RandomOracle::fingerprint() const {
  return mode_ == Mode::Garbage ? "random-garbage" : "random-chaotic";
}

std::string RandomOracle::junk(const OracleQuery& query) {
  static const std::string kAlphabet =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 "
      "-_:;,.!?()[]{}\t\n";
  static const std::vector<std::string> kDecoys = {
      "shift",           "reduce",       "nucleus-satellite",
      "Elaboration",     "-1",           "1.5",
      "",                "   ",          "\n\nshift",
      "elaboration-of-sorts", "NS",      "split at 0"};
  for (;;) {
    std::string out;
    switch (std::uniform_int_distribution<int>(0, 2)(rng_)) {
      case 0: {
        const int len = std::uniform_int_distribution<int>(0, 24)(rng_);
        std::uniform_int_distribution<std::size_t> pick(0, kAlphabet.size() - 1);
        for (int i = 0; i < len; ++i) out.push_back(kAlphabet[pick(rng_)]);
        break;
      }
      case 1:
        out = std::to_string(
            std::uniform_int_distribution<int>(-5, 1000)(rng_));
        break;
      default:
        out = kDecoys[std::uniform_int_distribution<std::size_t>(
            0, kDecoys.size() - 1)(rng_)];
        break;
    }
    if (!resolve_label(out, query.valid_labels)) return out;
  }
}

std::string RandomOracle::complete(const OracleQuery& query) {
  std::lock_guard lock(mu_);
  if (mode_ == Mode::Chaotic && !query.valid_labels.empty() &&
      std::bernoulli_distribution(0.5)(rng_)) {
    return query.valid_labels[std::uniform_int_distribution<std::size_t>(
        0, query.valid_labels.size() - 1)(rng_)];
  }
  return junk(query);
}

}  // namespace rst
