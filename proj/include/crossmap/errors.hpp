#pragma once

#include <stdexcept>
#include <string>

namespace crossmap {

/// Invalid caller input: bad shapes, out-of-range arguments, unparsable files.
class ArgumentError : public std::invalid_argument {
public:
    explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

/// A matrix that must be symmetric is not, beyond tolerance.
class SymmetryError : public ArgumentError {
public:
    explicit SymmetryError(const std::string& what) : ArgumentError(what) {}
};

/// File-level parse failure; message carries file/row/column context.
class ParseError : public ArgumentError {
public:
    explicit ParseError(const std::string& what) : ArgumentError(what) {}
};

/// Data-dependent numerical failure (distinct exit code in the CLI).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Square system whose condition estimate is too poor to solve.
class SingularSystemError : public NumericalError {
public:
    explicit SingularSystemError(const std::string& what) : NumericalError(what) {}
};

/// Graph with an isolated vertex: the normalized Laplacian is undefined.
class DegenerateGraphError : public NumericalError {
public:
    explicit DegenerateGraphError(const std::string& what) : NumericalError(what) {}
};

/// All pairwise signature distances coincide; the similarity bandwidth is zero.
class DegenerateSimilarityError : public NumericalError {
public:
    explicit DegenerateSimilarityError(const std::string& what) : NumericalError(what) {}
};

/// Non-finite objective during map fitting; inputs are badly scaled.
class DivergenceError : public NumericalError {
public:
    explicit DivergenceError(const std::string& what) : NumericalError(what) {}
};

} // namespace crossmap
