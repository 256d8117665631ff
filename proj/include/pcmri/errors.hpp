#pragma once

#include <stdexcept>
#include <string>

namespace pcmri {

enum class ErrorKind { Data, Config, Numeric };

// All toolkit errors derive from this; kind() maps to the CLI exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string msg)
        : std::runtime_error(std::move(msg)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    int exit_code() const noexcept {
        switch (kind_) {
            case ErrorKind::Data: return 1;
            case ErrorKind::Config: return 2;
            case ErrorKind::Numeric: return 3;
        }
        return 3;
    }

private:
    ErrorKind kind_;
};

struct DataError : Error {
    explicit DataError(std::string m) : Error(ErrorKind::Data, std::move(m)) {}
};

struct ConfigError : Error {
    explicit ConfigError(std::string m) : Error(ErrorKind::Config, std::move(m)) {}
};

struct NumericError : Error {
    explicit NumericError(std::string m) : Error(ErrorKind::Numeric, std::move(m)) {}
};

}  // namespace pcmri
