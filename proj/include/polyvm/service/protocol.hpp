#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "polyvm/bridge/pipeline.hpp"
#include "polyvm/debug/session.hpp"
#include "polyvm/service/wire.hpp"

namespace polyvm::service {

inline constexpr std::string_view kProtocolVersion = "1";

/// The message catalog. Lives on the VM lane; transports hand it decoded
/// requests and forward its replies and pushes.
class Protocol {
public:
    using Push = std::function<void(const json&)>;

    Protocol(vm::Vm& vm, Push push);
    ~Protocol();
    Protocol(const Protocol&) = delete;
    Protocol& operator=(const Protocol&) = delete;

    /// One reply per request: {id, result} or {id, error: {code, message}}.
    json handle(const json& request);
    /// Parses first; malformed JSON gets an error reply with id 0.
    json handle_text(std::string_view text);

    debug::SessionManager& sessions() { return sessions_; }

    static json error_reply(std::int64_t id, std::string_view code, std::string_view message);

private:
    json dispatch(const std::string& op, const json& params);
    void push(json event);
    void finished(const vm::Finished& event);

    json hello();
    json eval(const json& params);
    json inspect(const json& params);
    json inspect_eval(const json& params);
    json processes();
    json interrupt(const json& params);
    json stack(const json& params);
    json frame(const json& params);
    json eval_in_frame(const json& params);
    json restart_frame(const json& params);
    json proceed(const json& params);
    json step_over(const json& params);
    json set_budget(const json& params);
    json highlight(const json& params);
    json pipeline(const json& params);

    LangId viewer_for(const Value& value, const json& params) const;

    vm::Vm& vm_;
    Push push_;
    debug::SessionManager sessions_;
    std::size_t listener_ = 0;
    /// Processes started by eval, with their mode.
    std::map<vm::Pid, std::string> evals_;
    std::vector<std::unique_ptr<bridge::Pipeline>> pipelines_;
};

}  // namespace polyvm::service
