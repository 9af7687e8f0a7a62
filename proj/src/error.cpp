#include "gaze_affect/error.hpp"

namespace gaze_affect {
namespace {

std::string summarize(const std::vector<RowDiagnostic>& diagnostics)
{
    if (diagnostics.empty()) {
        return "validation failed";
    }
    std::string msg = diagnostics.front().to_string();
    if (diagnostics.size() > 1) {
        msg += " (+" + std::to_string(diagnostics.size() - 1) + " more)";
    }
    return msg;
}

}  // namespace

std::string RowDiagnostic::to_string() const
{
    std::string out = file;
    if (line > 0) {
        out += ":" + std::to_string(line);
    }
    if (!field.empty()) {
        out += ": field '" + field + "'";
    }
    out += ": " + reason;
    return out;
}

ValidationError::ValidationError(std::vector<RowDiagnostic> diagnostics)
    : Error(summarize(diagnostics)), diagnostics_(std::move(diagnostics))
{
}

ValidationError::ValidationError(const std::string& message, std::vector<RowDiagnostic> diagnostics)
    : Error(message), diagnostics_(std::move(diagnostics))
{
}

}  // namespace gaze_affect
