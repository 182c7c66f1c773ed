#pragma once

#include <json.hpp>

#include "polyvm/debug/session.hpp"
#include "polyvm/kernel/introspection.hpp"
#include "polyvm/runtime.hpp"

namespace polyvm::service {

using json = nlohmann::json;

class BadParams : public VmError {
public:
    explicit BadParams(const std::string& message) : VmError("bad_params", message) {}
};

class UnknownOp : public VmError {
public:
    explicit UnknownOp(const std::string& op) : VmError("unknown_op", "unknown op '" + op + "'") {}
};

/// Scalars inline; integers beyond 2^53 as {"int": "<digits>"}; non-finite
/// floats as {"float": "inf"|"-inf"|"nan"}; lists as arrays; objects as
/// {"ref": {"lang": id, "handle": n}} naming the owning language.
json encode_value(const Runtime& runtime, const Value& value);
/// Inverse of encode_value. References come back as ObjectRefs of their
/// owner. Throws BadParams or UnknownLanguage.
Value decode_value(const Runtime& runtime, const json& data);

json encode_frame_summary(const kernel::FrameView& frame, std::size_t index);
json encode_frame(const Runtime& runtime, const kernel::FrameView& frame, std::size_t index);
json encode_stack(const std::vector<kernel::FrameView>& stack);
json encode_inspect(const Runtime& runtime, const debug::InspectView& view);
json encode_session(const debug::DebugSession& session);
json encode_exception(const ExceptionValue& exception);

}  // namespace polyvm::service
