#pragma once

#include <optional>
#include <string>

#include "hetcons/message.hpp"

namespace hetcons {

struct RetryPolicy {
    std::uint64_t base = 4;
    std::uint64_t multiplier = 2;
    std::uint64_t jitter_seed = 0;
};

// Builds 1as with (time, value-hash) ballots and a deterministic
// exponential-backoff retry schedule.
class Proposer {
public:
    explicit Proposer(std::string me, RetryPolicy retry = {})
        : me_(std::move(me)), retry_(retry) {}

    const std::string& me() const { return me_; }

    Message propose(const Value& v, std::uint64_t now, std::uint64_t slot = 0,
                    std::optional<MessageId> prev_slot_1a = {}) const;

    // base * multiplier^attempt + seeded jitter in [0, base).
    std::uint64_t next_retry(std::uint32_t attempt) const;

private:
    std::string me_;
    RetryPolicy retry_;
};

}  // namespace hetcons
