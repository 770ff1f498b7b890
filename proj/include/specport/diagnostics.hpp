#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace specport {

using WarningHandler = std::function<void(std::string_view)>;

/// Emits a warning through the installed handler (stderr by default).
void warn(std::string_view message);

/// Replaces the process-wide handler and returns the previous one.
WarningHandler set_warning_handler(WarningHandler handler);

/// Collects warnings for the lifetime of the object, restoring the previous
/// handler on destruction. Intended for tests and for the CLI report.
class WarningCapture {
public:
    /// With `forward`, messages also reach the previously installed handler.
    explicit WarningCapture(bool forward = false);
    ~WarningCapture();
    WarningCapture(const WarningCapture&) = delete;
    WarningCapture& operator=(const WarningCapture&) = delete;

    const std::vector<std::string>& messages() const { return messages_; }
    bool contains(std::string_view fragment) const;

private:
    std::vector<std::string> messages_;
    WarningHandler previous_;
    bool forward_;
};

}  // namespace specport
