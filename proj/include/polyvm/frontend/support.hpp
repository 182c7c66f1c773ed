#pragma once

#include <functional>
#include <memory>
#include <string>

#include "polyvm/kernel/builtin.hpp"
#include "polyvm/plugin.hpp"

/// Small pieces both language plugins build their builtins from.
namespace polyvm::frontend {

inline std::shared_ptr<const kernel::Builtin> builtin(std::string name,
                                                      std::function<kernel::BuiltinResult(kernel::BuiltinCall&)> fn) {
    return std::make_shared<const kernel::Builtin>(kernel::Builtin{std::move(name), std::move(fn)});
}

/// Arity error unless `call` has between `min` and `max` arguments.
inline std::optional<ExceptionValue> check_arity(const LanguagePlugin& plugin, std::string_view name,
                                                 const kernel::BuiltinCall& call, std::size_t min, std::size_t max) {
    const auto n = call.args.size();
    if (n >= min && n <= max) return std::nullopt;
    const auto expected = n < min ? min : max;
    return plugin.error(ErrorKind::Arity, {std::string(name), std::to_string(expected), std::to_string(n)});
}

/// Seconds argument of a sleep builtin to a wake-up time.
std::variant<kernel::Clock::time_point, ExceptionValue> sleep_until(const LanguagePlugin& plugin,
                                                                     const kernel::BuiltinCall& call);

}  // namespace polyvm::frontend
