#include "hetcons/proposer.hpp"

namespace hetcons {

Message Proposer::propose(const Value& v, std::uint64_t now, std::uint64_t slot,
                          std::optional<MessageId> prev_slot_1a) const {
    std::vector<MessageId> refs;
    if (prev_slot_1a) refs.push_back(*prev_slot_1a);
    return make_1a(me_, v, now, slot, std::move(refs));
}

std::uint64_t Proposer::next_retry(std::uint32_t attempt) const {
    std::uint64_t delay = retry_.base;
    for (std::uint32_t i = 0; i < attempt; ++i) delay *= retry_.multiplier;
    std::uint64_t jitter =
        retry_.base ? splitmix64(retry_.jitter_seed + attempt) % retry_.base : 0;
    return delay + jitter;
}

}  // namespace hetcons
