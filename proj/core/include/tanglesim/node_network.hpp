#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "tanglesim/mam.hpp"
#include "tanglesim/rng.hpp"

namespace tanglesim::net {

enum class QualityClass { Good, Mediocre, Bad };

enum class DistFamily { Constant, LogNormal, Exponential };

/// Service-time distribution. `scale` is the constant value, the log-normal
/// median, or the exponential mean depending on the family; `sigma` is the
/// log-normal shape and is ignored otherwise.
struct ServiceDist {
    DistFamily family = DistFamily::LogNormal;
    double scale = 1.0;
    double sigma = 0.5;

    double sample(RngStream& rng) const;
    double mean() const;
};

struct NodeProfile {
    ServiceDist tip_selection_time;
    ServiceDist pow_time_per_tx;
    double failure_prob = 0.0;
    bool is_synced = true;
    bool allows_remote_pow = true;
    double base_rtt = 0.1; // mean client<->node round trip, seconds
    QualityClass quality = QualityClass::Good;
    // Concurrent requests the node can serve; queueing starts beyond this.
    // Weak nodes are single-server, capable ones handle parallel requests.
    int workers = 1;

    /// Expected service time for one 3-transaction bundle, ignoring load.
    double mean_bundle_service() const {
        return tip_selection_time.mean() + 3.0 * pow_time_per_tx.mean();
    }
};

struct ClassParams {
    ServiceDist tip;
    ServiceDist pow;
    double failure_prob = 0.0;
    int workers = 1;
};

struct PoolConfig {
    int size = 60;
    double good_fraction = 0.25;
    double mediocre_fraction = 0.50;
    double bad_fraction = 0.25;
    ClassParams good{{DistFamily::LogNormal, 2.0, 0.5},
                     {DistFamily::LogNormal, 4.5, 0.5},
                     0.002,
                     4};
    ClassParams mediocre{{DistFamily::LogNormal, 4.0, 0.8},
                         {DistFamily::LogNormal, 5.0, 0.8},
                         0.18,
                         2};
    ClassParams bad{{DistFamily::LogNormal, 6.0, 1.0},
                    {DistFamily::LogNormal, 18.0, 1.0},
                    0.15,
                    8};
    double sync_fraction = 1.0;
    double remote_pow_fraction = 1.0;
    // Per-node multiplicative spread applied to the class service scales, so
    // nodes inside one class still differ from each other.
    double node_jitter = 0.35;
    double failure_load_factor = 0.05; // queue-length inflation of failure_prob
    double service_scale = 1.0;       // calibration multiplier on all service scales
    double rtt_min = 0.05;
    double rtt_max = 0.5;
};

struct AttachRequest {
    std::uint64_t request_id = 0;
    int bus_index = -1;
    mam::MamBundle bundle;
    double submit_time = 0.0;
};

struct AttachOutcome {
    std::uint64_t request_id = 0;
    int bus_index = -1;
    int node_id = -1;
    bool success = false;
    double tip_selection_latency = 0.0; // includes any queue wait at the node
    double pow_latency = 0.0;
    double network_latency = 0.0;
    double total_latency = 0.0;
    double completion_time = 0.0;
};

/// Base failure probability inflated by the load present when service
/// starts: min(1, p * (1 + load_factor * queue_len)).
double effective_failure_prob(double base_prob, std::size_t queue_len, double load_factor);

/// Draws `config.size` node profiles per the quality-class mix. Deterministic
/// for a fixed rng stream. Throws std::invalid_argument on an invalid mix.
std::vector<NodeProfile> build_pool(const PoolConfig& config, RngStream& rng);

/// Ids of nodes that are fully synchronized and allow remote PoW, in pool
/// order.
std::vector<int> filter_pool(std::span<const NodeProfile> pool);

/// Timing of one request's service, fixed when the node starts serving it.
/// Absolute event times; the scenario layer turns them into events.
struct ServicePlan {
    AttachRequest request;
    bool failed = false;
    double service_start = 0.0;
    double tip_done_time = 0.0; // failure surfaces at this time too
    double pow_done_time = 0.0; // success only
    double network_delay = 0.0; // both directions
};

/// One simulated full node: a FIFO queue drained by `profile.workers`
/// parallel servers. Service draws happen in a fixed order when service
/// begins, so replays are reproducible.
class FullNode {
public:
    FullNode(int id, NodeProfile profile)
        : id_(id), profile_(std::move(profile)) {}

    /// Enqueues a request at `now`; returns its plan when the node was idle
    /// and service starts immediately.
    std::optional<ServicePlan> submit(AttachRequest request, double now, RngStream& rng,
                                      double load_factor);

    /// Marks the running service finished; starts the next queued request.
    std::optional<ServicePlan> finish_service(double now, RngStream& rng,
                                              double load_factor);

    int id() const { return id_; }
    const NodeProfile& profile() const { return profile_; }
    std::size_t queue_length() const { return queue_.size(); }
    int in_service() const { return in_service_; }
    bool busy() const { return in_service_ > 0; }

private:
    ServicePlan begin_service(AttachRequest request, double now, RngStream& rng,
                              double load_factor);

    int id_;
    NodeProfile profile_;
    std::deque<AttachRequest> queue_;
    int in_service_ = 0;
};

} // namespace tanglesim::net
