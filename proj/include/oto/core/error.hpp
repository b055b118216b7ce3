#pragma once

#include <stdexcept>
#include <string>

namespace oto {

/// Base for every error the library raises. `is_validation()` separates bad
/// input (exit code 1 at the CLI) from failures during execution (exit code 2).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, bool validation = false)
      : std::runtime_error(what), validation_(validation) {}
  bool is_validation() const noexcept { return validation_; }

 private:
  bool validation_;
};

#define OTO_DEFINE_ERROR(Name, validation)                       \
  class Name : public Error {                                    \
   public:                                                       \
    explicit Name(const std::string& what)                       \
        : Error(std::string(#Name ": ") + what, validation) {}   \
  }

// Input / contract violations.
OTO_DEFINE_ERROR(ParseError, true);
OTO_DEFINE_ERROR(ValidationError, true);
OTO_DEFINE_ERROR(ConfigError, true);
OTO_DEFINE_ERROR(InvalidArgument, true);
OTO_DEFINE_ERROR(TooFewRecords, true);
OTO_DEFINE_ERROR(NoPositiveAvailable, true);
OTO_DEFINE_ERROR(NoNegativeAvailable, true);
OTO_DEFINE_ERROR(DecodeError, true);
OTO_DEFINE_ERROR(ShapeError, true);
OTO_DEFINE_ERROR(UnknownPlaceholder, true);
OTO_DEFINE_ERROR(DoubleEncoding, true);
OTO_DEFINE_ERROR(OddDimension, true);
OTO_DEFINE_ERROR(LengthMismatch, true);
OTO_DEFINE_ERROR(EmptyCorpus, true);
OTO_DEFINE_ERROR(EmptyRatings, true);
OTO_DEFINE_ERROR(EmptyTrainSet, true);
OTO_DEFINE_ERROR(EmptyVocabulary, true);
OTO_DEFINE_ERROR(DegenerateProportion, true);
OTO_DEFINE_ERROR(MissingReference, true);
OTO_DEFINE_ERROR(AlreadyExists, true);

// Runtime failures.
OTO_DEFINE_ERROR(NonFiniteLoss, false);
OTO_DEFINE_ERROR(CheckpointError, false);
OTO_DEFINE_ERROR(IoError, false);

#undef OTO_DEFINE_ERROR

}  // namespace oto
