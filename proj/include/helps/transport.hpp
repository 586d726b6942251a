// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

// Deterministic in-simulation links between SMEs and the LCS.

#ifndef HELPS_TRANSPORT_HPP
#define HELPS_TRANSPORT_HPP

#include <algorithm>
#include <deque>
#include <limits>
#include <random>
#include <vector>

#include "helps/params.hpp"
#include "helps/rng.hpp"

namespace helps {

struct LinkParams {
    double loss_probability = 0.01;
    double latency_min_s = 0.03;
    double latency_max_s = 0.12;

    static LinkParams from(const NetworkParams& n) { return {n.loss_probability, n.latency_min_s, n.latency_max_s}; }
};

struct TransportDecision {
    bool dropped = false;
    double deliver_at_s = 0.0;
};

/// Bernoulli drop, otherwise a uniform latency. fifo_tail holds the latest
/// delivery time on the link so deliveries never overtake each other.
inline TransportDecision transport(const LinkParams& link, Rng& rng, double now_s, double& fifo_tail) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) < link.loss_probability) return {true, 0.0};
    const double latency = link.latency_min_s + (link.latency_max_s - link.latency_min_s) * unit(rng);
    fifo_tail = std::max(fifo_tail, now_s + latency);
    return {false, fifo_tail};
}

/// One-directional FIFO link carrying values of type T.
template <class T>
class VirtualLink {
public:
    VirtualLink(LinkParams params, std::uint64_t seed, bool reliable = false, double retry_timeout_s = 1.0)
        : params_(params), rng_(seed), reliable_(reliable), retry_timeout_s_(retry_timeout_s) {}

    /// Returns false when the message was lost. Reliable links resend after
    /// each retry timeout until an attempt gets through.
    bool send(T value, double now_s) {
        double attempt = now_s;
        for (;;) {
            const TransportDecision d = transport(params_, rng_, attempt, tail_);
            if (!d.dropped) {
                queue_.push_back({d.deliver_at_s, std::move(value)});
                return true;
            }
            ++dropped_;
            if (!reliable_) return false;
            attempt += retry_timeout_s_;
        }
    }

    /// Pops every message due at or before now, in send order.
    std::vector<T> receive(double now_s) {
        std::vector<T> out;
        while (!queue_.empty() && queue_.front().first <= now_s + 1e-12) {
            out.push_back(std::move(queue_.front().second));
            queue_.pop_front();
        }
        return out;
    }

    std::size_t in_flight() const { return queue_.size(); }
    std::size_t dropped() const { return dropped_; }

private:
    LinkParams params_;
    Rng rng_;
    bool reliable_;
    double retry_timeout_s_;
    double tail_ = -std::numeric_limits<double>::infinity();
    std::size_t dropped_ = 0;
    std::deque<std::pair<double, T>> queue_;
};

}  // namespace helps

#endif  // HELPS_TRANSPORT_HPP
