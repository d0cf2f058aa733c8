#include "qa/errors.hpp"

namespace qa {

const char* errc_name(errc code) {
  switch (code) {
    case errc::unknown_action: return "UnknownAction";
    case errc::arity_mismatch: return "ArityMismatch";
    case errc::malformed_syntax: return "MalformedSyntax";
    case errc::unexpected_argument: return "UnexpectedArgument";
    case errc::type_mismatch: return "TypeMismatch";
    case errc::empty_input: return "EmptyInput";
    case errc::io_failure: return "IoFailure";
    case errc::format_error: return "FormatError";
    case errc::validation_error: return "ValidationError";
    case errc::invalid_skeleton: return "InvalidSkeleton";
    case errc::unknown_slot_reference: return "UnknownSlotReference";
    case errc::slot_unfillable: return "SlotUnfillable";
    case errc::exhausted_after_retries: return "ExhaustedAfterRetries";
    case errc::empty_dataset: return "EmptyDataset";
    case errc::zero_vector: return "ZeroVector";
    case errc::single_class: return "SingleClass";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::no_template_for_skeleton: return "NoTemplateForSkeleton";
    case errc::alignment_failure: return "AlignmentFailure";
    case errc::empty_result: return "EmptyResult";
    case errc::date_unavailable: return "DateUnavailable";
    case errc::number_unavailable: return "NumberUnavailable";
    case errc::missing_argument: return "MissingArgument";
  }
  return "Error";
}

}  // namespace qa
