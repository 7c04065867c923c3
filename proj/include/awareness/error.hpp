#pragma once

#include <stdexcept>
#include <string>

namespace awareness {

/// Base of every error raised by the library. Each subclass names one failure
/// kind so callers can catch exactly what they expect.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define AWARENESS_DEFINE_ERROR(Name)                                  \
    class Name : public Error {                                       \
    public:                                                           \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

AWARENESS_DEFINE_ERROR(NonFiniteNumber);
AWARENESS_DEFINE_ERROR(InvalidConfig);
AWARENESS_DEFINE_ERROR(OutOfBounds);
AWARENESS_DEFINE_ERROR(IoError);
AWARENESS_DEFINE_ERROR(DecodeError);
AWARENESS_DEFINE_ERROR(MissingClass);
AWARENESS_DEFINE_ERROR(DegenerateCrop);
AWARENESS_DEFINE_ERROR(DimensionMismatch);
AWARENESS_DEFINE_ERROR(NoMessage);
AWARENESS_DEFINE_ERROR(UnsortedLog);
AWARENESS_DEFINE_ERROR(EmptyInput);
AWARENESS_DEFINE_ERROR(MissingCalibration);
AWARENESS_DEFINE_ERROR(MissingArtifact);
AWARENESS_DEFINE_ERROR(BindError);
AWARENESS_DEFINE_ERROR(ConnectError);

#undef AWARENESS_DEFINE_ERROR

}  // namespace awareness
