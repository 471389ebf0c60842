#include "tanglesim/node_network.hpp"

#include <cmath>
#include <stdexcept>

namespace tanglesim::net {

double ServiceDist::sample(RngStream& rng) const {
    switch (family) {
    case DistFamily::Constant:
        return scale;
    case DistFamily::LogNormal:
        return rng.lognormal(scale, sigma);
    case DistFamily::Exponential:
        return rng.exponential(scale);
    }
    return scale;
}

double ServiceDist::mean() const {
    switch (family) {
    case DistFamily::Constant:
    case DistFamily::Exponential:
        return scale;
    case DistFamily::LogNormal:
        return scale * std::exp(0.5 * sigma * sigma);
    }
    return scale;
}

double effective_failure_prob(double base_prob, std::size_t queue_len, double load_factor) {
    const double p = base_prob * (1.0 + load_factor * static_cast<double>(queue_len));
    return std::min(1.0, p);
}

std::vector<NodeProfile> build_pool(const PoolConfig& config, RngStream& rng) {
    if (config.size < 1) {
        throw std::invalid_argument("pool: size must be >= 1");
    }
    const double mix = config.good_fraction + config.mediocre_fraction + config.bad_fraction;
    if (config.good_fraction < 0 || config.mediocre_fraction < 0 || config.bad_fraction < 0 ||
        std::abs(mix - 1.0) > 1e-9) {
        throw std::invalid_argument("pool: class mix fractions must be >= 0 and sum to 1");
    }

    const auto scaled = [&](ClassParams params) {
        params.tip.scale *= config.service_scale;
        params.pow.scale *= config.service_scale;
        return params;
    };
    const ClassParams good = scaled(config.good);
    const ClassParams mediocre = scaled(config.mediocre);
    const ClassParams bad = scaled(config.bad);

    std::vector<NodeProfile> pool;
    pool.reserve(static_cast<std::size_t>(config.size));
    for (int i = 0; i < config.size; ++i) {
        NodeProfile profile;
        const double u = rng.uniform01();
        const ClassParams* params = nullptr;
        if (u < config.good_fraction) {
            profile.quality = QualityClass::Good;
            params = &good;
        } else if (u < config.good_fraction + config.mediocre_fraction) {
            profile.quality = QualityClass::Mediocre;
            params = &mediocre;
        } else {
            profile.quality = QualityClass::Bad;
            params = &bad;
        }
        profile.tip_selection_time = params->tip;
        profile.pow_time_per_tx = params->pow;
        const double jitter =
            1.0 + config.node_jitter * (2.0 * rng.uniform01() - 1.0);
        profile.tip_selection_time.scale *= jitter;
        profile.pow_time_per_tx.scale *= jitter;
        profile.failure_prob = params->failure_prob;
        profile.workers = params->workers;
        profile.base_rtt = rng.uniform_range(config.rtt_min, config.rtt_max);
        profile.is_synced = rng.bernoulli(config.sync_fraction);
        profile.allows_remote_pow = rng.bernoulli(config.remote_pow_fraction);
        pool.push_back(profile);
    }
    return pool;
}

std::vector<int> filter_pool(std::span<const NodeProfile> pool) {
    std::vector<int> eligible;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool[i].is_synced && pool[i].allows_remote_pow) {
            eligible.push_back(static_cast<int>(i));
        }
    }
    return eligible;
}

ServicePlan FullNode::begin_service(AttachRequest request, double now, RngStream& rng,
                                    double load_factor) {
    ServicePlan plan;
    plan.request = std::move(request);
    plan.service_start = now;

    // Fixed draw order: failure, tip selection, PoW x3 (success only), then
    // the two one-way network legs.
    const double p_eff =
        effective_failure_prob(profile_.failure_prob, queue_.size(), load_factor);
    plan.failed = rng.bernoulli(p_eff);
    const double tip_time = profile_.tip_selection_time.sample(rng);
    plan.tip_done_time = now + tip_time;
    if (!plan.failed) {
        double pow_total = 0.0;
        for (int tx = 0; tx < 3; ++tx) {
            pow_total += profile_.pow_time_per_tx.sample(rng);
        }
        plan.pow_done_time = plan.tip_done_time + pow_total;
    }
    plan.network_delay =
        profile_.base_rtt > 0.0
            ? rng.exponential(profile_.base_rtt / 2.0) +
                  rng.exponential(profile_.base_rtt / 2.0)
            : 0.0;
    ++in_service_;
    return plan;
}

std::optional<ServicePlan> FullNode::submit(AttachRequest request, double now,
                                            RngStream& rng, double load_factor) {
    if (in_service_ >= profile_.workers) {
        queue_.push_back(std::move(request));
        return std::nullopt;
    }
    return begin_service(std::move(request), now, rng, load_factor);
}

std::optional<ServicePlan> FullNode::finish_service(double now, RngStream& rng,
                                                    double load_factor) {
    --in_service_;
    if (queue_.empty()) {
        return std::nullopt;
    }
    AttachRequest next = std::move(queue_.front());
    queue_.pop_front();
    return begin_service(std::move(next), now, rng, load_factor);
}

} // namespace tanglesim::net
