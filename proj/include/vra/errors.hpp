#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace vra {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or argument values (CLI exit code 1).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Problems with input data: files, ids, shapes (CLI exit code 2).
class DataError : public Error {
public:
    using Error::Error;
};

/// Numeric failures: degenerate statistics, non-finite values (CLI exit code 3).
class NumericError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public DataError {
public:
    using DataError::DataError;
};

class CorruptionError : public DataError {
public:
    using DataError::DataError;
};

class VersionError : public DataError {
public:
    using DataError::DataError;
};

class DimensionMismatch : public DataError {
public:
    using DataError::DataError;
};

class DuplicateIdError : public DataError {
public:
    using DataError::DataError;
};

class TooFewFrames : public DataError {
public:
    TooFewFrames(std::string video_id, std::size_t n_frames, std::size_t length)
        : DataError("video '" + video_id + "' has " + std::to_string(n_frames) +
                    " frames, fewer than the sequence length " + std::to_string(length)),
          m_video_id(std::move(video_id)) {}

    const std::string& video_id() const noexcept { return m_video_id; }

private:
    std::string m_video_id;
};

class NonFiniteError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Zero variance (or all ties) where a correlation needs spread.
class DegenerateInput : public NumericError {
public:
    using NumericError::NumericError;
};

/// Sample standard deviation requested for fewer than two frames.
class UndefinedStd : public NumericError {
public:
    using NumericError::NumericError;
};

} // namespace vra
