#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace metapolicy {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class InvalidName : public Error
{
public:
    using Error::Error;
};

// Raised by parse() with the 1-based line where it gave up. Line 0 means the
// failure concerns the document as a whole (e.g. a missing section).
class ParseError : public Error
{
public:
    ParseError(std::size_t line, const std::string& reason)
        : Error("line " + std::to_string(line) + ": " + reason)
        , line_(line)
        , reason_(reason)
    {}

    std::size_t line() const noexcept { return line_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t line_;
    std::string reason_;
};

class StructureError : public Error
{
public:
    using Error::Error;
};

class CodecError : public Error
{
public:
    enum class Kind { empty_input, missing_part, count_mismatch, oversize_part, parts_mismatch, malformed };

    CodecError(Kind kind, std::uint32_t index, const std::string& what)
        : Error(what)
        , kind_(kind)
        , index_(index)
    {}

    Kind kind() const noexcept { return kind_; }
    // Part index the error refers to, 0 when not part-specific.
    std::uint32_t index() const noexcept { return index_; }

private:
    Kind kind_;
    std::uint32_t index_;
};

class CryptoError : public Error
{
public:
    using Error::Error;
};

class SignError : public Error
{
public:
    enum class Kind { key_leaf_mismatch, domain_not_covered, unsupported_key };

    SignError(Kind kind, const std::string& what)
        : Error(what)
        , kind_(kind)
    {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

class ResolutionError : public Error
{
public:
    // absent: the name answered but carries no metapolicy (NXDOMAIN / empty).
    // Otherwise the resolver itself failed (timeout, SERVFAIL, transport).
    ResolutionError(bool absent, const std::string& what)
        : Error(what)
        , absent_(absent)
    {}

    bool absent() const noexcept { return absent_; }

private:
    bool absent_;
};

class PreconditionError : public Error
{
public:
    using Error::Error;
};

class MonotonicityError : public Error
{
public:
    using Error::Error;
};

class ConfigError : public Error
{
public:
    using Error::Error;
};

} // namespace metapolicy
