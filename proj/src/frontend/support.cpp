#include "polyvm/frontend/support.hpp"

#include <chrono>

namespace polyvm::frontend {

std::variant<kernel::Clock::time_point, ExceptionValue> sleep_until(const LanguagePlugin& plugin,
                                                                     const kernel::BuiltinCall& call) {
    if (auto err = check_arity(plugin, "sleep", call, 1, 1)) return *err;
    const auto& arg = call.args[0];
    if (!arg.is_number()) return plugin.error(ErrorKind::ValueError, {"sleep length must be a number"});
    const double seconds = arg.to_double();
    if (seconds < 0) return plugin.error(ErrorKind::ValueError, {"sleep length must be non-negative"});
    const auto delta = std::chrono::duration_cast<kernel::Clock::duration>(std::chrono::duration<double>(seconds));
    return call.context.now + delta;
}

}  // namespace polyvm::frontend
