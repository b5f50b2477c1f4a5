#ifndef SHAPQ_ERRORS_HPP
#define SHAPQ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace shapq {

// Every failure mode of the library carries one of these codes. The CLI maps
// them onto process exit codes; tests match on them.
enum class errc {
  fact_not_endogenous,
  fact_absent,
  unknown_relation,
  syntax_error,
  unsafe_head,
  unknown_variable,
  schema_mismatch,
  non_numeric_constant,
  out_of_range,
  instance_too_large,
  length_mismatch,
  not_all_hierarchical,
  not_q_hierarchical,
  not_exists_hierarchical,
  not_connected_sq,
  not_sq_hierarchical,
  self_join,
  intractable_class,
  variant_mismatch,
  singular_matrix,
  dimension_mismatch,
  precondition_violated,
  non_injective_on_domain,
};

const char* errc_name(errc code);

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace shapq

#endif  // SHAPQ_ERRORS_HPP
