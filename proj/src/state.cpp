#include "rst/state.hpp"

#include "rst/error.hpp"

namespace rst {

namespace {

std::string span_label(Span s) {
  return s.first == s.last
             ? std::to_string(s.first)
             : std::to_string(s.first) + "-" + std::to_string(s.last);
}

}  // namespace

std::string ParserState::summary() const {
  std::string out = "stack=[";
  for (std::size_t i = 0; i < stack.size(); ++i) {
    if (i) out += ",";
    out += span_label(stack[i].span());
  }
  out += "] queue=";
  if (next == edus->size()) {
    out += "-";
  } else {
    out += span_label({(*edus)[next].index, edus->back().index});
  }
  return out;
}

ParserState initial_state(std::shared_ptr<const std::vector<Edu>> edus) {
  if (!edus || edus->empty()) throw EmptyDocument("document has no EDUs");
  ParserState s;
  s.edus = std::move(edus);
  return s;
}

ParserState initial_state(const Document& document) {
  if (document.edus.empty()) {
    throw EmptyDocument("document '" + document.id + "' has no EDUs");
  }
  return initial_state(std::make_shared<const std::vector<Edu>>(document.edus));
}

LegalActions legal_actions(const ParserState& state) {
  if (state.terminal()) throw TerminalState("parser state is terminal");
  return {state.next < state.edus->size(), state.stack.size() >= 2};
}

ParserState apply(const ParserState& state, const Action& action) {
  const bool ok = !state.terminal() &&
                  (action.is_shift() ? state.next < state.edus->size()
                                     : state.stack.size() >= 2);
  if (!ok) {
    throw IllegalAction(to_string(action) + " is illegal in " +
                        state.summary());
  }
  ParserState out = state;
  if (action.is_shift()) {
    out.stack.push_back(RstTree::leaf((*state.edus)[state.next]));
    ++out.next;
  } else {
    RstTree s0 = std::move(out.stack.back());
    out.stack.pop_back();
    RstTree s1 = std::move(out.stack.back());
    out.stack.pop_back();
    out.stack.push_back(RstTree::node(std::move(s1), std::move(s0),
                                      action.nuclearity, action.relation));
  }
  ++out.step_count;
  return out;
}

}  // namespace rst
