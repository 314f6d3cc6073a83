#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bugenrich {

/// Process exit status used by the CLI.
enum class ExitCode : int { ok = 0, usage = 1, data = 2, runtime = 3 };

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual ExitCode exit_code() const noexcept { return ExitCode::runtime; }
};

/// Violated operation precondition (bad window, empty graph, out-of-range position...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Malformed input record. `line` is 1-based, 0 when not line-oriented.
class ParseError : public Error {
public:
    ParseError(std::string source, std::size_t line, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": " + what), source_(std::move(source)), line_(line) {}

    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }
    ExitCode exit_code() const noexcept override { return ExitCode::data; }

private:
    std::string source_;
    std::size_t line_;
};

/// Well-formed input that breaks a data invariant; `offenders` names the keys involved.
class ValidationError : public Error {
public:
    ValidationError(const std::string& what, std::vector<std::string> offenders = {})
        : Error(what), offenders_(std::move(offenders)) {}

    const std::vector<std::string>& offenders() const noexcept { return offenders_; }
    ExitCode exit_code() const noexcept override { return ExitCode::data; }

private:
    std::vector<std::string> offenders_;
};

class ConfigError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::usage; }
};

/// Input path that cannot be opened.
class FileError : public Error {
public:
    explicit FileError(const std::string& path, const std::string& what = "cannot open file")
        : Error(what + ": " + path), path_(path) {}

    const std::string& path() const noexcept { return path_; }
    ExitCode exit_code() const noexcept override { return ExitCode::usage; }

private:
    std::string path_;
};

}  // namespace bugenrich
