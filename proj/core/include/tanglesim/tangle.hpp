#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "tanglesim/rng.hpp"

namespace tanglesim {

/// Opaque transaction identifier, unique within one ledger instance.
struct TxId {
    std::uint64_t value = 0;

    friend bool operator==(TxId a, TxId b) { return a.value == b.value; }
    friend bool operator!=(TxId a, TxId b) { return a.value != b.value; }
};

struct Transaction {
    TxId id;
    TxId trunk;
    TxId branch;
    std::vector<std::uint8_t> payload;
    double timestamp = 0.0;
    bool is_milestone = false;
};

/// Append-only DAG ledger. Every transaction approves two existing ones
/// (trunk and branch); acyclicity holds by construction because references
/// may only point at already-appended ids. The genesis transaction is the
/// single self-referencing root.
class Tangle {
public:
    Tangle();

    /// Two tips drawn uniformly at random with replacement. Never mutates.
    std::pair<TxId, TxId> select_tips(RngStream& rng) const;

    /// Appends a transaction approving (trunk, branch). Throws
    /// std::invalid_argument if either reference is unknown.
    TxId attach(std::vector<std::uint8_t> payload, TxId trunk, TxId branch,
                double timestamp);

    /// Issues a coordinator milestone. Its trunk is pinned to the previous
    /// milestone (when one exists) so the confirmation cone only grows; the
    /// branch comes from tip selection.
    TxId issue_milestone(double timestamp, RngStream& rng);

    /// true iff `id` is reachable from the latest milestone through approval
    /// edges (the milestone itself counts). false when no milestone exists.
    /// Throws std::invalid_argument for unknown ids.
    bool is_confirmed(TxId id) const;

    /// Membership flags of the latest milestone's confirmation cone, indexed
    /// by TxId value. One traversal, for bulk queries.
    std::vector<bool> confirmation_cone() const;

    const Transaction& transaction(TxId id) const;
    bool contains(TxId id) const { return id.value < transactions_.size(); }

    std::size_t size() const { return transactions_.size(); }
    std::size_t tip_count() const { return tips_.size(); }
    const std::vector<TxId>& tips() const { return tips_; }
    std::optional<TxId> latest_milestone() const { return latest_milestone_; }
    TxId genesis() const { return TxId{0}; }

    /// Debug dump, one line per transaction:
    /// id,trunk,branch,timestamp,is_milestone,payload_len
    void dump(std::ostream& out) const;

private:
    void check_known(TxId id, const char* what) const;
    void remove_tip(TxId id);

    std::vector<Transaction> transactions_;
    std::vector<TxId> tips_;
    // Position of each transaction in tips_, or -1 once approved.
    std::vector<std::int64_t> tip_pos_;
    std::optional<TxId> latest_milestone_;
};

} // namespace tanglesim
