#ifndef MFCNN_ERRORS_HPP
#define MFCNN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mfcnn {

enum class ErrorCode {
  Length,
  Shape,
  Domain,
  ZeroEnergy,
  Config,
  TapeMismatch,
  Io,
};

// Base of every exception thrown by the core. The C API maps code() onto
// mfcnn_status values one to one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define MFCNN_DEFINE_ERROR(Name, Code)                               \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(Code, what) {}    \
  };

MFCNN_DEFINE_ERROR(LengthError, ErrorCode::Length)
MFCNN_DEFINE_ERROR(ShapeError, ErrorCode::Shape)
MFCNN_DEFINE_ERROR(DomainError, ErrorCode::Domain)
MFCNN_DEFINE_ERROR(ZeroEnergyError, ErrorCode::ZeroEnergy)
MFCNN_DEFINE_ERROR(ConfigError, ErrorCode::Config)
MFCNN_DEFINE_ERROR(TapeMismatchError, ErrorCode::TapeMismatch)
MFCNN_DEFINE_ERROR(IoError, ErrorCode::Io)

#undef MFCNN_DEFINE_ERROR

}  // namespace mfcnn

#endif  // MFCNN_ERRORS_HPP
