#pragma once

#include <stdexcept>
#include <string>

namespace rst {

// Base for every error this library raises on purpose. Anything else escaping
// a public function (std::logic_error and friends) is a bug.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define RST_DEFINE_ERROR(Name, Base)              \
  class Name : public Base {                      \
   public:                                        \
    using Base::Base;                             \
  };

// Input data problems: treebank files, trees, corpora.
RST_DEFINE_ERROR(DataError, Error)
RST_DEFINE_ERROR(SyntaxError, DataError)
RST_DEFINE_ERROR(InconsistentSpan, DataError)
RST_DEFINE_ERROR(MalformedTree, DataError)
RST_DEFINE_ERROR(UnmappableRelation, DataError)
RST_DEFINE_ERROR(SpanOutOfRange, DataError)
RST_DEFINE_ERROR(DegenerateSpan, DataError)
RST_DEFINE_ERROR(EmptyDocument, DataError)
RST_DEFINE_ERROR(MissingDocument, DataError)
RST_DEFINE_ERROR(OverlappingSplits, DataError)
RST_DEFINE_ERROR(MissingGoldTree, DataError)
RST_DEFINE_ERROR(MissingPrediction, DataError)
RST_DEFINE_ERROR(SegmentationMismatch, DataError)
RST_DEFINE_ERROR(EmptyCorpus, DataError)

// Transition-system misuse.
RST_DEFINE_ERROR(StateError, Error)
RST_DEFINE_ERROR(TerminalState, StateError)
RST_DEFINE_ERROR(IllegalAction, StateError)

// Oracle side.
RST_DEFINE_ERROR(OracleFailure, Error)
RST_DEFINE_ERROR(ConfigError, Error)
RST_DEFINE_ERROR(ReplayExhausted, Error)
RST_DEFINE_ERROR(KindMismatch, Error)
RST_DEFINE_ERROR(StoreCorrupt, Error)

// Numeric scorer.
RST_DEFINE_ERROR(DimensionMismatch, Error)
RST_DEFINE_ERROR(NoCandidates, Error)

#undef RST_DEFINE_ERROR

}  // namespace rst
