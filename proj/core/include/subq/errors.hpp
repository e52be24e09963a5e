#pragma once

#include <stdexcept>
#include <string>

namespace subq {

struct SubqError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingInput : SubqError { using SubqError::SubqError; };
struct UnexpectedInput : SubqError { using SubqError::SubqError; };
struct EmptyDataset : SubqError { using SubqError::SubqError; };
struct DegenerateData : SubqError { using SubqError::SubqError; };
struct IncompatibleMode : SubqError { using SubqError::SubqError; };
struct UnsplittableNode : SubqError { using SubqError::SubqError; };
struct MissingObservation : SubqError { using SubqError::SubqError; };
struct InvalidSnapshot : SubqError { using SubqError::SubqError; };
struct NoFeasibleAction : SubqError { using SubqError::SubqError; };
struct MissingManifest : SubqError { using SubqError::SubqError; };

}  // namespace subq
