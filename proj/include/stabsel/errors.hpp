#pragma once

#include <stdexcept>
#include <string>

namespace stabsel {

/// Base of all library failures. The category maps onto the CLI exit code.
class Error : public std::runtime_error {
public:
    enum class Category { config, data, numerical };

    Error(Category category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    Category category() const noexcept { return category_; }

    /// Copy of this error with `context` prepended to the message.
    Error with_context(const std::string& context) const {
        return Error(category_, context + ": " + what());
    }

private:
    Category category_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(Category::config, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(Category::data, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(Category::numerical, what) {}
};

}  // namespace stabsel
