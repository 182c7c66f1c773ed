#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "polyvm/value.hpp"

namespace polyvm {

/// A guest-level exception in flight: what guest handlers match on and what
/// the debugger shows in its title.
struct ExceptionValue {
    std::string class_name;
    std::string message;
    /// The guest object carrying the exception (an exception object or a
    /// raised user instance).
    std::optional<Value> payload;

    std::string title() const { return class_name + ": " + message; }
};

/// Base of all host-side errors. `code()` is the stable machine-readable name
/// used on the wire.
class VmError : public std::runtime_error {
public:
    VmError(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

class UnknownLanguage : public VmError {
public:
    explicit UnknownLanguage(const std::string& name)
        : VmError("unknown_language", "unknown language '" + name + "'") {}
};

class DuplicatePlugin : public VmError {
public:
    explicit DuplicatePlugin(const std::string& name)
        : VmError("duplicate_plugin", "plugin '" + name + "' is already registered") {}
};

class MissingCapability : public VmError {
public:
    explicit MissingCapability(std::string capability)
        : VmError("missing_capability", "plugin lacks capability '" + capability + "'"),
          capability_(std::move(capability)) {}
    const std::string& capability() const { return capability_; }

private:
    std::string capability_;
};

/// Source did not compile. Line and column are 1-based.
class CompileError : public VmError {
public:
    CompileError(int line, int column, const std::string& message)
        : VmError("compile_error", std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line), column_(column), detail_(message) {}
    int line() const { return line_; }
    int column() const { return column_; }
    const std::string& detail() const { return detail_; }

private:
    int line_;
    int column_;
    std::string detail_;
};

/// Parse failure; first error wins.
class SyntaxError : public CompileError {
public:
    using CompileError::CompileError;
};

class StaleHandle : public VmError {
public:
    StaleHandle() : VmError("stale_handle", "object handle is not valid") {}
};

class NoSuchSlot : public VmError {
public:
    explicit NoSuchSlot(const std::string& name) : VmError("no_such_slot", "no slot named '" + name + "'") {}
};

class NoSuchMethod : public VmError {
public:
    explicit NoSuchMethod(const std::string& selector)
        : VmError("no_such_method", "no method named '" + selector + "'") {}
};

class InvalidBudget : public VmError {
public:
    InvalidBudget() : VmError("bad_params", "budget must be a positive instruction count") {}
};

class NotRunnable : public VmError {
public:
    explicit NotRunnable(const std::string& message) : VmError("not_runnable", message) {}
};

class NotInterruptible : public VmError {
public:
    explicit NotInterruptible(const std::string& message) : VmError("not_runnable", message) {}
};

class UnknownProcess : public VmError {
public:
    explicit UnknownProcess(std::uint64_t pid)
        : VmError("bad_params", "no process with id " + std::to_string(pid)) {}
};

class SessionClosed : public VmError {
public:
    SessionClosed() : VmError("session_closed", "debug session is closed") {}
};

class UnknownSession : public VmError {
public:
    explicit UnknownSession(std::uint64_t id)
        : VmError("bad_params", "no debug session with id " + std::to_string(id)) {}
};

class NotSteppable : public VmError {
public:
    NotSteppable()
        : VmError("not_runnable", "stepping needs a resumable session (interrupt or restarted frame)") {}
};

class ArityChanged : public VmError {
public:
    ArityChanged(std::size_t old_arity, std::size_t new_arity)
        : VmError("compile_error", "parameter list changed from " + std::to_string(old_arity) + " to " +
                                       std::to_string(new_arity) + " parameters"),
          old_arity_(old_arity), new_arity_(new_arity) {}
    std::size_t old_arity() const { return old_arity_; }
    std::size_t new_arity() const { return new_arity_; }

private:
    std::size_t old_arity_;
    std::size_t new_arity_;
};

class BadIndex : public VmError {
public:
    explicit BadIndex(std::size_t index)
        : VmError("bad_params", "frame index " + std::to_string(index) + " is out of range") {}
};

/// A guest exception escaped an out-of-band evaluation (debugger context
/// pane, inspector pane, synchronous MOP invoke).
class EvaluationError : public VmError {
public:
    explicit EvaluationError(ExceptionValue exception)
        : VmError("evaluation_error", exception.title()), exception_(std::move(exception)) {}
    const ExceptionValue& exception() const { return exception_; }

private:
    ExceptionValue exception_;
};

/// Kernel invariant violated. Always a bug in this code base, never a guest error.
class InternalFault : public VmError {
public:
    explicit InternalFault(const std::string& message) : VmError("internal_fault", message) {}
};

}  // namespace polyvm
