#include "tanglesim/tangle.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

namespace tanglesim {

Tangle::Tangle() {
    Transaction genesis;
    genesis.id = TxId{0};
    genesis.trunk = genesis.id;
    genesis.branch = genesis.id;
    transactions_.push_back(std::move(genesis));
    tips_.push_back(TxId{0});
    tip_pos_.push_back(0);
}

void Tangle::check_known(TxId id, const char* what) const {
    if (!contains(id)) {
        throw std::invalid_argument(std::string("Tangle: unknown ") + what +
                                    " id " + std::to_string(id.value));
    }
}

std::pair<TxId, TxId> Tangle::select_tips(RngStream& rng) const {
    const auto n = static_cast<std::uint64_t>(tips_.size());
    const TxId a = tips_[rng.uniform_index(n)];
    const TxId b = tips_[rng.uniform_index(n)];
    return {a, b};
}

void Tangle::remove_tip(TxId id) {
    const std::int64_t pos = tip_pos_[id.value];
    if (pos < 0) {
        return;
    }
    const TxId moved = tips_.back();
    tips_[static_cast<std::size_t>(pos)] = moved;
    tip_pos_[moved.value] = pos;
    tips_.pop_back();
    tip_pos_[id.value] = -1;
}

TxId Tangle::attach(std::vector<std::uint8_t> payload, TxId trunk, TxId branch,
                    double timestamp) {
    check_known(trunk, "trunk");
    check_known(branch, "branch");

    Transaction tx;
    tx.id = TxId{transactions_.size()};
    tx.trunk = trunk;
    tx.branch = branch;
    tx.payload = std::move(payload);
    tx.timestamp = timestamp;

    const TxId id = tx.id;
    transactions_.push_back(std::move(tx));
    tip_pos_.push_back(static_cast<std::int64_t>(tips_.size()));
    tips_.push_back(id);
    remove_tip(trunk);
    remove_tip(branch);
    return id;
}

TxId Tangle::issue_milestone(double timestamp, RngStream& rng) {
    const auto [a, b] = select_tips(rng);
    const TxId trunk = latest_milestone_.value_or(a);
    const TxId id = attach({}, trunk, b, timestamp);
    transactions_[id.value].is_milestone = true;
    latest_milestone_ = id;
    return id;
}

bool Tangle::is_confirmed(TxId id) const {
    check_known(id, "transaction");
    if (!latest_milestone_) {
        return false;
    }
    // Ancestor walk from the milestone; ids only reference smaller ids, so a
    // visited bitmap over [0, id of milestone] suffices.
    const TxId root = *latest_milestone_;
    if (root == id) {
        return true;
    }
    std::vector<bool> visited(root.value + 1, false);
    std::vector<TxId> stack{root};
    visited[root.value] = true;
    while (!stack.empty()) {
        const Transaction& tx = transactions_[stack.back().value];
        stack.pop_back();
        for (TxId parent : {tx.trunk, tx.branch}) {
            if (parent == id) {
                return true;
            }
            if (parent != tx.id && !visited[parent.value]) {
                visited[parent.value] = true;
                stack.push_back(parent);
            }
        }
    }
    return false;
}

std::vector<bool> Tangle::confirmation_cone() const {
    std::vector<bool> cone(transactions_.size(), false);
    if (!latest_milestone_) {
        return cone;
    }
    std::vector<TxId> stack{*latest_milestone_};
    cone[latest_milestone_->value] = true;
    while (!stack.empty()) {
        const Transaction& tx = transactions_[stack.back().value];
        stack.pop_back();
        for (TxId parent : {tx.trunk, tx.branch}) {
            if (parent != tx.id && !cone[parent.value]) {
                cone[parent.value] = true;
                stack.push_back(parent);
            }
        }
    }
    return cone;
}

const Transaction& Tangle::transaction(TxId id) const {
    check_known(id, "transaction");
    return transactions_[id.value];
}

void Tangle::dump(std::ostream& out) const {
    out << "id,trunk,branch,timestamp,is_milestone,payload_len\n";
    char buf[64];
    for (const Transaction& tx : transactions_) {
        std::snprintf(buf, sizeof(buf), "%.6f", tx.timestamp);
        out << tx.id.value << ',' << tx.trunk.value << ',' << tx.branch.value
            << ',' << buf << ',' << (tx.is_milestone ? 1 : 0) << ','
            << tx.payload.size() << '\n';
    }
}

} // namespace tanglesim
