#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "polyvm/object_space.hpp"
#include "polyvm/plugin.hpp"

namespace polyvm {

/// Registered plugins, their heaps, builtins and the active conversion
/// policy. Everything here runs on the VM lane only.
class Runtime {
public:
    Runtime() = default;
    Runtime(const Runtime&) = delete;
    Runtime& operator=(const Runtime&) = delete;

    /// Throws DuplicatePlugin or MissingCapability.
    LangId register_plugin(std::unique_ptr<LanguagePlugin> plugin);

    std::optional<LangId> find_language(std::string_view id) const;
    /// Throws UnknownLanguage.
    LangId language(std::string_view id) const;
    const std::string& language_name(LangId lang) const;
    std::vector<LangId> languages() const;
    std::vector<PluginDescriptor> descriptors() const;
    const LanguagePlugin& plugin(LangId lang) const;
    /// Language of the plugin whose file extension is `extension` (with dot).
    std::optional<LangId> language_for_extension(std::string_view extension) const;

    ObjectSpace& objects() { return objects_; }
    const ObjectSpace& objects() const { return objects_; }

    const ConversionPolicy& policy() const { return policy_; }
    void set_policy(ConversionPolicy policy) { policy_ = policy; }

    /// Moves a value across the boundary from `from` to `to`.
    Value convert(const Value& value, LangId from, LangId to, const ConversionPolicy& policy);
    Value convert(const Value& value, LangId from, LangId to) { return convert(value, from, to, policy_); }

    MopView mop_reflect(const Value& ref) const;
    Value mop_slot_get(const Value& ref, std::string_view name, LangId caller);
    std::string mop_display(const Value& value, LangId language) const;

    /// Installs a builtin visible in every language, including ones
    /// registered later.
    void add_shared_builtin(std::shared_ptr<const kernel::Builtin> builtin);
    const Value* builtin(LangId lang, std::string_view name) const;

    /// Allocates an exception object in `lang`'s heap and returns the
    /// exception with that object as payload.
    ExceptionValue materialize(LangId lang, ExceptionValue exception);
    /// Exception described by a raised guest value.
    ExceptionValue exception_from_value(const Value& raised, LangId raiser);

    /// Owner language and heap object behind an ObjectRef/ForeignRef.
    std::pair<LangId, HeapHandle> resolve(const Value& ref) const;

    /// Class name the MOP reports for any value.
    std::string class_name_of(const Value& value) const;

private:
    struct Entry {
        std::unique_ptr<LanguagePlugin> plugin;
        PluginDescriptor descriptor;
        NameTable builtins;
    };

    void install_builtin(LangId lang, const std::shared_ptr<const kernel::Builtin>& builtin);

    std::vector<Entry> entries_;
    std::vector<std::shared_ptr<const kernel::Builtin>> shared_builtins_;
    ObjectSpace objects_;
    ConversionPolicy policy_;
};

}  // namespace polyvm
