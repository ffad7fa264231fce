#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace har
{
enum class ErrorKind
{
   Parse,
   Validation,
   Shape,
   EmptyDataset,
   InsufficientDepth,
   DegeneratePose,
   NonMonotonicTime,
   EmptyInput,
   LayoutMismatch,
   Diverged,
   InsufficientData,
   DimMismatch,
   EmptySequence,
   ClassTooSmall,
   CoincidentPositions,
   ScriptOrder,
   Config,
   Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error
{
 public:
   Error(ErrorKind kind, const std::string& message);

   ErrorKind kind() const noexcept { return kind_; }

 private:
   ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

// Warnings go to stderr; tests may silence them.
void log_warning(const std::string& message);
void set_warnings_enabled(bool enabled) noexcept;

} // namespace har
