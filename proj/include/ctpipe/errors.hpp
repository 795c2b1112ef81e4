#ifndef CTPIPE_ERRORS_HPP_
#define CTPIPE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace ctpipe {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error {
    using Error::Error;
};

struct UnsupportedFormat : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct InvalidArgument : Error {
    using Error::Error;
};

// Thrown when a thresholding method is asked to split a constant image.
struct DegenerateHistogram : Error {
    using Error::Error;
};

struct ShapeError : Error {
    using Error::Error;
};

// Weight-file magic/version problems.
struct FormatError : Error {
    using Error::Error;
};

// Non-finite loss during training.
struct DivergenceError : Error {
    using Error::Error;
};

// Duplicate scan ids while indexing a dataset.
struct IndexError : Error {
    using Error::Error;
};

}  // namespace ctpipe

#endif
