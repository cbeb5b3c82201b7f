#include "fairscope/error.hpp"

namespace fairscope {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kDuplication: return "duplication";
    case ErrorKind::kInvalidScore: return "invalid-score";
    case ErrorKind::kTaxonomyMismatch: return "taxonomy-mismatch";
    case ErrorKind::kEmptyGroup: return "empty-group";
    case ErrorKind::kUndefinedRate: return "undefined-rate";
    case ErrorKind::kIncompleteTable: return "incomplete-table";
    case ErrorKind::kInfeasibleSplit: return "infeasible-split";
    case ErrorKind::kInfeasibleClustering: return "infeasible-clustering";
    case ErrorKind::kInfeasibleSelection: return "infeasible-selection";
    case ErrorKind::kCorruptedFixture: return "corrupted-fixture";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

}  // namespace fairscope
