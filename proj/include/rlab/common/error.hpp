#pragma once

#include <stdexcept>
#include <string>

namespace rlab {

// Base for every error raised by the library. The kind() string is stable and
// used by the CLI to map failures onto exit codes and diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define RLAB_DEFINE_ERROR(Name)                                          \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

RLAB_DEFINE_ERROR(IoError);
RLAB_DEFINE_ERROR(ConfigError);
RLAB_DEFINE_ERROR(EmptyCorpus);
RLAB_DEFINE_ERROR(SizeError);
RLAB_DEFINE_ERROR(ShapeError);
RLAB_DEFINE_ERROR(NumericError);
RLAB_DEFINE_ERROR(GraphError);
RLAB_DEFINE_ERROR(AlignmentError);
RLAB_DEFINE_ERROR(DegenerateInput);
RLAB_DEFINE_ERROR(SingularMatrix);
RLAB_DEFINE_ERROR(EmptyClass);
RLAB_DEFINE_ERROR(EmptyInput);
RLAB_DEFINE_ERROR(FormatError);

#undef RLAB_DEFINE_ERROR

}  // namespace rlab
