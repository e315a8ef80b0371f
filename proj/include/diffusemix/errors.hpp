#pragma once

#include <stdexcept>
#include <string>

namespace diffusemix {

// Base of every recoverable failure raised by the library. Precondition
// violations use std::invalid_argument instead.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define DIFFUSEMIX_ERROR(Name)                                                 \
  class Name : public Error {                                                  \
  public:                                                                      \
    using Error::Error;                                                        \
  }

DIFFUSEMIX_ERROR(FileNotFound);
DIFFUSEMIX_ERROR(DecodeError);
DIFFUSEMIX_ERROR(IoError);
DIFFUSEMIX_ERROR(UnknownPrompt);
DIFFUSEMIX_ERROR(DimensionMismatch);
DIFFUSEMIX_ERROR(LambdaOutOfRange);
DIFFUSEMIX_ERROR(EmptyFractalSet);
DIFFUSEMIX_ERROR(EmptyDataset);
DIFFUSEMIX_ERROR(NonPositiveBaseline);
DIFFUSEMIX_ERROR(ConfigError);
DIFFUSEMIX_ERROR(ManifestFormatError);

// Remote generation failures.
DIFFUSEMIX_ERROR(NetworkError);
DIFFUSEMIX_ERROR(ProtocolError);
DIFFUSEMIX_ERROR(RemoteError);

#undef DIFFUSEMIX_ERROR

} // namespace diffusemix
