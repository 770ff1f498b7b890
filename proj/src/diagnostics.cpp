#include "specport/diagnostics.hpp"

#include <iostream>
#include <mutex>

namespace specport {
namespace {

std::mutex& handler_mutex() {
    static std::mutex m;
    return m;
}

WarningHandler& handler_slot() {
    static WarningHandler h = [](std::string_view msg) {
        std::cerr << "warning: " << msg << '\n';
    };
    return h;
}

}  // namespace

void warn(std::string_view message) {
    WarningHandler h;
    {
        std::lock_guard lock(handler_mutex());
        h = handler_slot();
    }
    if (h) h(message);
}

WarningHandler set_warning_handler(WarningHandler handler) {
    std::lock_guard lock(handler_mutex());
    auto previous = std::move(handler_slot());
    handler_slot() = std::move(handler);
    return previous;
}

WarningCapture::WarningCapture(bool forward) : forward_(forward) {
    previous_ = set_warning_handler([this](std::string_view msg) {
        messages_.emplace_back(msg);
        if (forward_ && previous_) previous_(msg);
    });
}

WarningCapture::~WarningCapture() { set_warning_handler(std::move(previous_)); }

bool WarningCapture::contains(std::string_view fragment) const {
    for (const auto& m : messages_)
        if (m.find(fragment) != std::string::npos) return true;
    return false;
}

}  // namespace specport
