#ifndef STILLACT_ERRORS_HPP
#define STILLACT_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stillact {

/// Base class for every error raised by the pipeline.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MissingHead : public Error {
public:
    explicit MissingHead(const std::string& image_id)
        : Error("no head detection in image '" + image_id + "'") {}
};

class DegenerateHead : public Error {
public:
    explicit DegenerateHead(const std::string& image_id)
        : Error("head central line has zero length in image '" + image_id + "'") {}
};

class MissingLabel : public Error {
public:
    explicit MissingLabel(const std::string& image_id)
        : Error("image '" + image_id + "' has no action label") {}
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class EmptyBatch : public Error {
public:
    EmptyBatch() : Error("batch is empty") {}
};

class EmptyDataset : public Error {
public:
    EmptyDataset() : Error("dataset is empty") {}
};

class LabelOutOfRange : public Error {
public:
    explicit LabelOutOfRange(int label)
        : Error("label " + std::to_string(label) + " outside 0..6") {}
};

class NoPositives : public Error {
public:
    NoPositives() : Error("ranking contains no positive item") {}
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class MissingClass : public Error {
public:
    explicit MissingClass(int class_id)
        : Error("no AP result for class " + std::to_string(class_id)) {}
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class InvalidConfig : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss or parameter.
class NumericFailure : public Error {
public:
    using Error::Error;
};

/// File-format errors carry the 1-based line number of the offending record.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class UnknownEntityKind : public ParseError {
public:
    UnknownEntityKind(std::size_t line, const std::string& name)
        : ParseError(line, "unknown entity kind '" + name + "'") {}
};

class UnknownLabel : public ParseError {
public:
    UnknownLabel(std::size_t line, const std::string& name)
        : ParseError(line, "unknown action label '" + name + "'") {}
};

class VersionMismatch : public Error {
public:
    VersionMismatch(int found, int expected)
        : Error("model file format_version " + std::to_string(found) +
                ", expected " + std::to_string(expected)) {}
};

class CorruptFile : public Error {
public:
    using Error::Error;
};

}  // namespace stillact

#endif
