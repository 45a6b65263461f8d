#ifndef BRANCH_ERRORS_H
#define BRANCH_ERRORS_H

#include <stdexcept>
#include <string>

namespace branch
{
/// Invalid or inconsistent input; the CLI maps this family to exit code 2.
struct BadInput : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

/// Numerical failure during computation; the CLI maps this family to exit code 3.
struct NumericError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct DegenerateSkeleton : BadInput { using BadInput::BadInput; };
struct OutOfRange : BadInput { using BadInput::BadInput; };
struct EmptyCloud : BadInput { using BadInput::BadInput; };
struct EmptySkeleton : BadInput { using BadInput::BadInput; };
struct EmptyView : BadInput { using BadInput::BadInput; };
struct TooFewPoints : BadInput { using BadInput::BadInput; };
struct TooSparse : BadInput { using BadInput::BadInput; };
struct InvalidParams : BadInput { using BadInput::BadInput; };
struct LengthMismatch : BadInput { using BadInput::BadInput; };
struct ZeroGroundTruth : BadInput { using BadInput::BadInput; };
struct DuplicateBranchId : BadInput { using BadInput::BadInput; };
struct UnknownBranchId : BadInput { using BadInput::BadInput; };
struct IoError : BadInput { using BadInput::BadInput; };
struct Divergence : NumericError { using NumericError::NumericError; };

}  // namespace branch

#endif  // BRANCH_ERRORS_H
