#pragma once

#include <functional>
#include <queue>
#include <tuple>

#include "hetcons/sim.hpp"

namespace hetcons::detail {

struct Engine;

struct SimNode {
    std::string name;
    explicit SimNode(std::string n) : name(std::move(n)) {}
    virtual ~SimNode() = default;
    virtual void on_deliver(Engine& e, std::uint64_t t, const std::string& from,
                            int msg_idx) = 0;
    virtual void on_script(Engine&, std::uint64_t, const ScriptEntry&) {}
    // Honest acceptors hold a 1a until their clock reaches its ballot time.
    virtual bool delay_1a() const { return false; }
};

struct QueueItem {
    std::uint64_t t = 0;
    std::string to;
    MessageId id;
    std::uint64_t seq = 0;
    std::string from;
    int script = -1;  // >= 0: fire this script entry instead of delivering

    // Simultaneous deliveries order by (recipient, message id); seq breaks
    // exact duplicates by scheduling order.
    bool operator>(const QueueItem& o) const {
        return std::tie(t, to, id, seq) > std::tie(o.t, o.to, o.id, o.seq);
    }
};

struct Engine {
    const Scenario* sc = nullptr;
    RecordLevel level = RecordLevel::Full;
    std::shared_ptr<MessageStore> store;
    std::unique_ptr<Context> ctx;
    std::map<std::string, std::unique_ptr<SimNode>> nodes;
    std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<QueueItem>> queue;
    std::uint64_t seq = 0;
    std::uint64_t now = 0;
    Trace trace;
    std::vector<std::pair<std::string, ScriptEntry>> scripts;  // (node, entry)

    // `scenario` must outlive the engine; its graph must be condensed+valid.
    void init(const Scenario& scenario, RecordLevel lvl);

    bool full() const { return level == RecordLevel::Full; }
    void event(std::uint64_t t, const char* ev, nlohmann::ordered_json data);
    std::uint64_t latency(const std::string& from, const std::string& to) const;
    void send(std::uint64_t t, const std::string& from, const std::string& to,
              const MessageId& id, std::optional<std::uint64_t> override_latency = {});
    // Send to every node except `from`.
    void broadcast(std::uint64_t t, const std::string& from, const MessageId& id,
                   std::optional<std::uint64_t> override_latency = {});
    void requeue(std::uint64_t t, const QueueItem& item);
    void note_violation(std::uint64_t t, const std::string& node, const ViolationRecord& v);
    void note_decision(std::uint64_t t, const DecisionEvent& ev);
    void note_honest_emits(std::uint64_t t, const std::string& node,
                           const std::vector<MessageId>& outbound);
    void run_loop();

    bool crashed_at(const std::string& node, std::uint64_t t) const;
};

// Node factories shared by single-shot and chain runs.
std::unique_ptr<SimNode> make_honest_acceptor(const std::string& name, Context& ctx);
std::unique_ptr<SimNode> make_learner_node(const std::string& name, Context& ctx);
std::unique_ptr<SimNode> make_byzantine(const std::string& name, const RoleSpec& spec,
                                        Engine& e);

// Condense + validate a scenario; throws InvalidScenario.
Scenario prepare_scenario(const Scenario& scenario);
// Instantiate acceptor-side nodes (honest or Byzantine) and queue scripts.
void setup_common_nodes(Engine& e, const Scenario& s);
// proposer -> slot -> that proposer's 1a for the slot (filled as built).
using SlotOneAs = std::map<std::string, std::map<std::uint64_t, MessageId>>;
// Build + enqueue all proposal 1as; when slot_1as is given, slot-s 1as
// reference the proposer's slot-(s-1) 1a (chain strategy B).
void schedule_proposals(Engine& e, const Scenario& s, SlotOneAs* slot_1as);

}  // namespace hetcons::detail
