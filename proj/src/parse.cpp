#include "rst/parse.hpp"

#include <charconv>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rst/error.hpp"
#include "rst/hash.hpp"

namespace rst {

std::string_view to_string(Resolution r) {
  switch (r) {
    case Resolution::Oracle:
      return "oracle";
    case Resolution::Forced:
      return "forced";
    case Resolution::Unparseable:
      return "unparseable";
    case Resolution::OutOfRange:
      return "out-of-range";
    case Resolution::Illegal:
      return "illegal";
  }
  return "";
}

Resolution parse_resolution(std::string_view text) {
  for (Resolution r : {Resolution::Oracle, Resolution::Forced,
                       Resolution::Unparseable, Resolution::OutOfRange,
                       Resolution::Illegal}) {
    if (to_string(r) == text) return r;
  }
  throw SyntaxError("unknown resolution '" + std::string(text) + "'");
}

std::string TraceEntry::prompt_id() const {
  const std::string kind_name(to_string(kind));
  if (forced()) return kind_name + ":forced";
  return kind_name + ":" + sha256_hex(prompt).substr(0, 16);
}

std::size_t ParseTrace::count(PromptKind kind) const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.kind == kind;
  return n;
}

std::size_t ParseTrace::queried(PromptKind kind) const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.kind == kind && !e.forced();
  return n;
}

std::size_t ParseTrace::corrected(PromptKind kind) const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.kind == kind && e.corrected();
  return n;
}

std::size_t ParseTrace::corrected() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.corrected();
  return n;
}

std::string to_jsonl(const ParseTrace& trace) {
  std::string out;
  for (const auto& e : trace.entries) {
    nlohmann::ordered_json j;
    j["step"] = e.step;
    j["state"] = e.state;
    j["kind"] = std::string(to_string(e.kind));
    j["prompt_id"] = e.prompt_id();
    j["raw"] = e.raw;
    j["resolved"] = e.resolved;
    j["resolution"] = std::string(to_string(e.resolution));
    j["corrected"] = e.corrected();
    out += j.dump() + "\n";
  }
  return out;
}

ParseTrace parse_jsonl_trace(std::string_view text) {
  ParseTrace trace;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TraceEntry e;
      e.step = j.at("step").get<int>();
      e.state = j.at("state").get<std::string>();
      e.kind = parse_prompt_kind(j.at("kind").get<std::string>());
      e.raw = j.at("raw").get<std::string>();
      e.resolved = j.at("resolved").get<std::string>();
      e.resolution = parse_resolution(j.at("resolution").get<std::string>());
      trace.entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw SyntaxError(std::string("bad trace record: ") + ex.what());
    }
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Shared labelling steps

namespace {

class Session {
 public:
  Session(Oracle& oracle, const LabelInventory& inventory,
          const ParsePolicy& policy)
      : oracle_(oracle), inventory_(inventory), policy_(policy) {}

  ParseTrace& trace() { return trace_; }
  const PromptOptions& prompt_options() const { return policy_.prompt; }

  TraceEntry& ask(PromptKind kind, std::string state, std::string prompt,
                  std::vector<std::string> options) {
    OracleQuery q{kind, std::move(prompt), std::move(options)};
    std::string raw = oracle_.complete(q);
    TraceEntry e;
    e.step = next_step();
    e.state = std::move(state);
    e.kind = kind;
    e.prompt = std::move(q.prompt);
    if (auto label = resolve_label(raw, q.valid_labels)) {
      e.resolved = *label;
      e.resolution = Resolution::Oracle;
    } else {
      e.resolution = Resolution::Unparseable;
    }
    e.raw = std::move(raw);
    trace_.entries.push_back(std::move(e));
    return trace_.entries.back();
  }

  void record_forced(PromptKind kind, std::string state, std::string label) {
    TraceEntry e;
    e.step = next_step();
    e.state = std::move(state);
    e.kind = kind;
    e.resolved = std::move(label);
    e.resolution = Resolution::Forced;
    trace_.entries.push_back(std::move(e));
  }

  Nuclearity nuclearity(const std::string& state, const std::string& span2,
                        const std::string& span1) {
    TraceEntry& e =
        ask(PromptKind::Nuclearity, state,
            render_nuclearity_prompt(span2, span1, policy_.prompt),
            nuclearity_labels());
    if (e.corrected()) {
      e.resolved = std::string(to_string(inventory_.default_nuclearity()));
    }
    return parse_nuclearity(e.resolved);
  }

  std::string relation(const std::string& state, const std::string& span2,
                       const std::string& span1, Nuclearity predicted) {
    TraceEntry& e = ask(PromptKind::Relation, state,
                        render_relation_prompt(span2, span1, predicted,
                                               inventory_, policy_.prompt),
                        inventory_.relations());
    if (e.corrected()) e.resolved = inventory_.default_relation();
    return e.resolved;
  }

  bool skip_forced() const { return policy_.skip_forced; }

 private:
  int next_step() { return static_cast<int>(trace_.entries.size()); }

  Oracle& oracle_;
  const LabelInventory& inventory_;
  const ParsePolicy& policy_;
  ParseTrace trace_;
};

std::string span_key(Span s) {
  return "span=" + std::to_string(s.first) + "-" + std::to_string(s.last);
}

}  // namespace

// ---------------------------------------------------------------------------
// Bottom-up

ParseResult parse_bottom_up(const Document& document, Oracle& oracle,
                            const LabelInventory& inventory,
                            const ParsePolicy& policy) {
  ParserState state = initial_state(document);
  Session session(oracle, inventory, policy);
  const int fuse = 4 * state.num_edus();
  if (state.num_edus() == 1) {
    // Nothing to decide, even when forced moves are normally queried.
    session.record_forced(PromptKind::Action, state.summary(), "shift");
    state = apply(state, Action::shift());
  }

  while (!state.terminal()) {
    if (state.step_count >= fuse) {
      throw std::logic_error("shift-reduce loop exceeded 4n steps");
    }
    const LegalActions legal = legal_actions(state);
    const std::string summary = state.summary();
    Action::Kind kind;
    if (legal.forced() && session.skip_forced()) {
      kind = legal.sole();
      session.record_forced(PromptKind::Action, summary,
                            kind == Action::Kind::Shift ? "shift" : "reduce");
    } else {
      TraceEntry& e =
          session.ask(PromptKind::Action, summary,
                      render_action_prompt(state, policy.prompt),
                      action_labels());
      if (e.corrected()) {
        kind = legal.shift ? Action::Kind::Shift : Action::Kind::Reduce;
      } else {
        kind = e.resolved == "shift" ? Action::Kind::Shift
                                     : Action::Kind::Reduce;
        const bool ok = kind == Action::Kind::Shift ? legal.shift : legal.reduce;
        if (!ok) {
          kind = legal.sole();
          e.resolution = Resolution::Illegal;
        }
      }
      e.resolved = kind == Action::Kind::Shift ? "shift" : "reduce";
    }

    if (kind == Action::Kind::Shift) {
      state = apply(state, Action::shift());
      continue;
    }
    const std::string span2 = join_edu_texts(state.stack_at(1)->edus());
    const std::string span1 = join_edu_texts(state.stack_at(0)->edus());
    const Nuclearity nuc = session.nuclearity(summary, span2, span1);
    std::string rel = session.relation(summary, span2, span1, nuc);
    state = apply(state, Action::reduce(nuc, std::move(rel)));
  }
  return {state.stack.back(), std::move(session.trace())};
}

// ---------------------------------------------------------------------------
// Top-down

std::pair<int, int> relative_index_bounds(Span span) {
  if (span.last <= span.first) {
    throw DegenerateSpan("span " + std::to_string(span.first) + "-" +
                         std::to_string(span.last) + " cannot be split");
  }
  return {0, span.last - span.first - 1};
}

namespace {

std::optional<long long> parse_integer(std::string_view raw) {
  const auto nl = raw.find_first_of("\r\n");
  std::string line = normalize_whitespace(raw.substr(0, nl));
  if (line.empty()) return std::nullopt;
  long long value = 0;
  const char* begin = line.data();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, line.data() + line.size(), value);
  if (ec != std::errc() || ptr != line.data() + line.size()) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

ParseResult parse_top_down(const Document& document, Oracle& oracle,
                           const LabelInventory& inventory,
                           const ParsePolicy& policy) {
  if (document.edus.empty()) {
    throw EmptyDocument("document '" + document.id + "' has no EDUs");
  }
  Session session(oracle, inventory, policy);
  const std::span<const Edu> edus(document.edus);
  const int base = edus.front().index;
  auto slice = [&](Span s) {
    return edus.subspan(static_cast<std::size_t>(s.first - base),
                        static_cast<std::size_t>(s.length()));
  };

  std::vector<GoldSplit> splits;
  std::vector<Span> todo{{base, edus.back().index}};
  while (!todo.empty()) {
    const Span span = todo.back();
    todo.pop_back();
    if (span.length() == 1) continue;

    const auto [lo, hi] = relative_index_bounds(span);
    const std::string state = span_key(span);
    int k = 0;
    if (span.length() == 2 && session.skip_forced()) {
      session.record_forced(PromptKind::Split, state, "0");
    } else {
      TraceEntry& e =
          session.ask(PromptKind::Split, state,
                      render_split_prompt(slice(span), policy.prompt),
                      split_labels(hi));
      if (e.corrected()) {
        if (auto v = parse_integer(e.raw); v && (*v < lo || *v > hi)) {
          e.resolution = Resolution::OutOfRange;
        }
        e.resolved = "0";
      }
      k = std::stoi(e.resolved);
    }

    const Span left{span.first, span.first + k};
    const Span right{span.first + k + 1, span.last};
    const std::string span2 = join_edu_texts(slice(left));
    const std::string span1 = join_edu_texts(slice(right));
    const Nuclearity nuc = session.nuclearity(state, span2, span1);
    std::string rel = session.relation(state, span2, span1, nuc);
    splits.push_back({span, k, nuc, std::move(rel)});

    todo.push_back(right);
    todo.push_back(left);
  }
  return {build_from_splits(edus, splits), std::move(session.trace())};
}

ParseResult parse_document(Strategy strategy, const Document& document,
                           Oracle& oracle, const LabelInventory& inventory,
                           const ParsePolicy& policy) {
  return strategy == Strategy::BottomUp
             ? parse_bottom_up(document, oracle, inventory, policy)
             : parse_top_down(document, oracle, inventory, policy);
}

ReplayOracle gold_replay_oracle(Strategy strategy, const Document& document,
                                bool skip_forced) {
  if (!document.gold) {
    throw MissingGoldTree("document '" + document.id + "' has no gold tree");
  }
  if (strategy == Strategy::BottomUp) {
    const auto steps = derive_shift_reduce_sequence(*document.gold);
    return ReplayOracle::for_shift_reduce(steps, document.num_edus(),
                                          skip_forced);
  }
  const auto splits = derive_split_sequence(*document.gold);
  return ReplayOracle::for_splits(splits, skip_forced);
}

}  // namespace rst
