#include "shapq/errors.hpp"

namespace shapq {

const char* errc_name(errc code) {
  switch (code) {
    case errc::fact_not_endogenous: return "FactNotEndogenous";
    case errc::fact_absent: return "FactAbsent";
    case errc::unknown_relation: return "UnknownRelation";
    case errc::syntax_error: return "SyntaxError";
    case errc::unsafe_head: return "UnsafeHead";
    case errc::unknown_variable: return "UnknownVariable";
    case errc::schema_mismatch: return "SchemaMismatch";
    case errc::non_numeric_constant: return "NonNumericConstant";
    case errc::out_of_range: return "OutOfRange";
    case errc::instance_too_large: return "InstanceTooLarge";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::not_all_hierarchical: return "NotAllHierarchical";
    case errc::not_q_hierarchical: return "NotQHierarchical";
    case errc::not_exists_hierarchical: return "NotExistsHierarchical";
    case errc::not_connected_sq: return "NotConnectedSQ";
    case errc::not_sq_hierarchical: return "NotSQHierarchical";
    case errc::self_join: return "SelfJoin";
    case errc::intractable_class: return "IntractableClass";
    case errc::variant_mismatch: return "VariantMismatch";
    case errc::singular_matrix: return "SingularMatrix";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::precondition_violated: return "PreconditionViolated";
    case errc::non_injective_on_domain: return "NonInjectiveOnDomain";
  }
  return "UnknownError";
}

}  // namespace shapq
