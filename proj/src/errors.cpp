#include "har/errors.hpp"

#include <atomic>
#include <iostream>

namespace har
{
namespace
{
std::atomic<bool> g_warnings{true};
}

std::string_view to_string(ErrorKind kind) noexcept
{
   switch(kind) {
   case ErrorKind::Parse: return "ParseError";
   case ErrorKind::Validation: return "ValidationError";
   case ErrorKind::Shape: return "ShapeError";
   case ErrorKind::EmptyDataset: return "EmptyDataset";
   case ErrorKind::InsufficientDepth: return "InsufficientDepth";
   case ErrorKind::DegeneratePose: return "DegeneratePose";
   case ErrorKind::NonMonotonicTime: return "NonMonotonicTime";
   case ErrorKind::EmptyInput: return "EmptyInput";
   case ErrorKind::LayoutMismatch: return "LayoutMismatch";
   case ErrorKind::Diverged: return "Diverged";
   case ErrorKind::InsufficientData: return "InsufficientData";
   case ErrorKind::DimMismatch: return "DimMismatch";
   case ErrorKind::EmptySequence: return "EmptySequence";
   case ErrorKind::ClassTooSmall: return "ClassTooSmall";
   case ErrorKind::CoincidentPositions: return "CoincidentPositions";
   case ErrorKind::ScriptOrder: return "ScriptOrderError";
   case ErrorKind::Config: return "ConfigError";
   case ErrorKind::Io: return "IoError";
   }
   return "Error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message)
    , kind_(kind)
{}

void fail(ErrorKind kind, const std::string& message)
{
   throw Error(kind, message);
}

void log_warning(const std::string& message)
{
   if(g_warnings.load(std::memory_order_relaxed)) std::clog << "warning: " << message << '\n';
}

void set_warnings_enabled(bool enabled) noexcept
{
   g_warnings.store(enabled, std::memory_order_relaxed);
}

} // namespace har
