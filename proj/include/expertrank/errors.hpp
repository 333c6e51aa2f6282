#pragma once

#include <stdexcept>
#include <string>

namespace expertrank {

// Base class for everything this library throws.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input data. Carries a 1-based line number when one is known.
class parse_error : public error {
public:
    parse_error(const std::string& msg, std::size_t line)
        : error("line " + std::to_string(line) + ": " + msg), line_(line) {}
    explicit parse_error(const std::string& msg) : error(msg), line_(0) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Well-formed input that violates a data invariant (duplicate ids, empty
// author lists, inconsistent judgments, ...).
class validation_error : public error {
public:
    explicit validation_error(const std::string& msg) : error(msg) {}
};

// Lookup of an id that does not exist in the corpus.
class not_found_error : public error {
public:
    explicit not_found_error(const std::string& msg) : error(msg) {}
};

} // namespace expertrank
