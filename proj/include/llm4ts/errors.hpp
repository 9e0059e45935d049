#pragma once

#include <stdexcept>
#include <string>

namespace llm4ts {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct NumericalError : Error { using Error::Error; };
struct StepAfterTermination : Error { using Error::Error; };
struct TemplateError : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct GenerationStalled : Error { using Error::Error; };

// Failures talking to an inference endpoint. Timeout covers transport-level
// failures after retries are exhausted; HttpError carries the status of a
// non-retryable (or final) HTTP response; MalformedResponse means the body
// did not contain a usable completion.
struct EndpointError : Error { using Error::Error; };

struct Timeout : EndpointError { using EndpointError::EndpointError; };

struct HttpError : EndpointError {
  int status;
  HttpError(int status_, const std::string& message)
      : EndpointError(message), status(status_) {}
};

struct MalformedResponse : EndpointError {
  using EndpointError::EndpointError;
};

}  // namespace llm4ts
