#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaze_affect {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation (zero vector, point outside sphere, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Structurally malformed input: missing header, unparsable number, bad JSON.
class FormatError : public Error {
public:
    using Error::Error;
};

/// One rejected input row.
struct RowDiagnostic {
    std::string file;
    std::size_t line = 0;  // 1-based, header is line 1
    std::string field;
    std::string reason;

    std::string to_string() const;
};

/// Well-formed input that violates a data invariant. Carries every row diagnostic collected.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<RowDiagnostic> diagnostics);
    ValidationError(const std::string& message, std::vector<RowDiagnostic> diagnostics);

    const std::vector<RowDiagnostic>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<RowDiagnostic> diagnostics_;
};

class AlignmentError : public Error {
public:
    using Error::Error;
};

}  // namespace gaze_affect
