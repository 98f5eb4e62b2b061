#pragma once

#include <chrono>
#include <thread>
#include <utility>

#include "synthctl/error.hpp"

namespace synthctl {

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{200};
};

/// Call `fn` until it succeeds or `policy.attempts` calls have failed,
/// doubling the pause between attempts. The last failure is rethrown as a
/// ProviderError tagged with `stage`.
template <typename Fn>
auto with_retries(Stage stage, const RetryPolicy& policy, Fn&& fn) -> decltype(fn()) {
    auto backoff = policy.initial_backoff;
    std::string last;
    for (int attempt = 1; attempt <= policy.attempts; ++attempt) {
        try {
            return fn();
        } catch (const MalformedResponse&) {
            throw;
        } catch (const std::exception& e) {
            last = e.what();
        }
        if (attempt < policy.attempts) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    throw ProviderError(stage, "gave up after " + std::to_string(policy.attempts) +
                                   " attempts: " + last);
}

} // namespace synthctl
