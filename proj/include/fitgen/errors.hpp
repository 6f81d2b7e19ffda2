#pragma once

#include <stdexcept>
#include <string>

namespace fitgen {

// Base of every error the toolkit raises on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Structurally invalid text where JSON or a label was expected.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error("format error: " + what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config error: " + what) {}
};

class TransportError : public Error {
public:
    explicit TransportError(const std::string& what) : Error("transport error: " + what) {}
};

// Prompt digest absent from a fixture recording.
class FixtureMiss : public Error {
public:
    explicit FixtureMiss(std::string digest)
        : Error("fixture miss: no recorded response for digest " + digest),
          digest_(std::move(digest)) {}
    const std::string& digest() const noexcept { return digest_; }

private:
    std::string digest_;
};

class UnknownChannel : public Error {
public:
    explicit UnknownChannel(std::string channel)
        : Error("unknown channel: " + channel), channel_(std::move(channel)) {}
    const std::string& channel() const noexcept { return channel_; }

private:
    std::string channel_;
};

class ConcurrencyBoundExceeded : public Error {
public:
    explicit ConcurrencyBoundExceeded(const std::string& what)
        : Error("concurrency bound exceeded: " + what) {}
};

class InvalidTestCase : public Error {
public:
    explicit InvalidTestCase(const std::string& what) : Error("invalid test case: " + what) {}
};

class LengthMismatch : public Error {
public:
    explicit LengthMismatch(const std::string& what) : Error("length mismatch: " + what) {}
};

class EmptyInput : public Error {
public:
    explicit EmptyInput(const std::string& what) : Error("empty input: " + what) {}
};

class EmptyClassSet : public Error {
public:
    EmptyClassSet() : Error("empty class set") {}
};

class TimeBaseMismatch : public Error {
public:
    explicit TimeBaseMismatch(const std::string& what) : Error("time base mismatch: " + what) {}
};

class UnsupportedFormat : public Error {
public:
    explicit UnsupportedFormat(const std::string& what) : Error("unsupported format: " + what) {}
};

// Golden trace and current configuration disagree on their digests.
class DigestMismatch : public Error {
public:
    explicit DigestMismatch(const std::string& what) : Error("digest mismatch: " + what) {}
};

}  // namespace fitgen
