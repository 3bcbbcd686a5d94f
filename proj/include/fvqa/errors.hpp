#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fvqa {

/// Base class for all engine errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A name was looked up in a registry (taxonomy, index, bundle) and is not there.
class RegistryMissError : public Error {
public:
    using Error::Error;
};

/// Bad input data: unreadable file, malformed schema, duplicate qid, etc.
class InputError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value (ratio out of range, negative quota, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A template slot had no binding at render time.
class RenderError : public Error {
public:
    RenderError(const std::string& slot, const std::string& template_id)
        : Error("missing binding for slot {" + slot + "} in template " + template_id),
          slot_(slot) {}
    const std::string& slot() const { return slot_; }

private:
    std::string slot_;
};

/// One validation finding. Errors make validate (and generate) fail.
struct Diagnostic {
    enum class Level { warning, error };
    Level level = Level::error;
    std::string code;    // stable machine-readable id, e.g. "taxonomy.asymmetric_alternatives"
    std::string message; // human-readable detail
};

using Diagnostics = std::vector<Diagnostic>;

inline bool has_errors(const Diagnostics& diags) {
    for (const auto& d : diags)
        if (d.level == Diagnostic::Level::error) return true;
    return false;
}

} // namespace fvqa
