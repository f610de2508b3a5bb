#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <vector>

#include "iqp/error.hpp"
#include "iqp/quantum.hpp"

namespace iqp {

// Reads IQP_TRAJECTORY_CAP, falling back to the default cap.
inline std::size_t configured_trajectory_cap() {
    if (const char* env = std::getenv("IQP_TRAJECTORY_CAP"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != nullptr && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
        throw InvalidArgument("trajectory-events", std::string("invalid IQP_TRAJECTORY_CAP value '") + env + "'");
    }
    return kDefaultTrajectoryCap;
}

// X^T for |X| = m labels and n grid times. Trajectory index is the mixed-radix
// number sum_t lambda(t) * m^(n-1-t), so lambda(0) is the most significant digit.
class TrajectorySpace {
public:
    TrajectorySpace(std::size_t num_labels, std::size_t num_times, std::size_t cap = kDefaultTrajectoryCap)
        : m_(num_labels), n_(num_times) {
        if (m_ == 0 || n_ == 0) throw InvalidArgument("trajectory-events", "trajectory space needs m >= 1 and n >= 1");
        QuantumSystem::check_trajectory_cap(m_, n_, cap);
        size_ = 1;
        for (std::size_t i = 0; i < n_; ++i) size_ *= m_;
        place_.assign(n_, 1);
        for (std::size_t t = n_ - 1; t-- > 0;) place_[t] = place_[t + 1] * m_;
    }

    static TrajectorySpace of(const QuantumSystem& sys, std::size_t cap = kDefaultTrajectoryCap) {
        return TrajectorySpace(sys.num_labels(), sys.num_times(), cap);
    }

    std::size_t num_labels() const { return m_; }
    std::size_t num_times() const { return n_; }
    std::size_t size() const { return size_; }

    // lambda(t) for the trajectory with the given index.
    std::size_t label_at(std::size_t index, std::size_t t) const { return (index / place_[t]) % m_; }

    std::vector<std::size_t> decode(std::size_t index) const {
        std::vector<std::size_t> labels(n_);
        for (std::size_t t = 0; t < n_; ++t) labels[t] = label_at(index, t);
        return labels;
    }

    std::size_t encode(std::span<const std::size_t> labels) const {
        if (labels.size() != n_) throw InvalidArgument("trajectory-events", "trajectory length mismatch");
        std::size_t index = 0;
        for (std::size_t t = 0; t < n_; ++t) {
            if (labels[t] >= m_) throw InvalidArgument("trajectory-events", "label out of range");
            index += labels[t] * place_[t];
        }
        return index;
    }

    friend bool operator==(const TrajectorySpace& a, const TrajectorySpace& b) {
        return a.m_ == b.m_ && a.n_ == b.n_;
    }

private:
    std::size_t m_;
    std::size_t n_;
    std::size_t size_ = 0;
    std::vector<std::size_t> place_;
};

// A set of trajectories, as a bitset over trajectory indices.
class Event {
public:
    Event() = default;
    explicit Event(std::size_t size) : size_(size), words_((size + 63) / 64, 0) {}

    static Event full(std::size_t size) {
        Event e(size);
        for (auto& w : e.words_) w = ~std::uint64_t{0};
        e.trim();
        return e;
    }

    std::size_t size() const { return size_; }

    bool test(std::size_t i) const { return ((words_[i / 64] >> (i % 64)) & 1U) != 0; }
    void set(std::size_t i, bool value = true) {
        const std::uint64_t bit = std::uint64_t{1} << (i % 64);
        if (value)
            words_[i / 64] |= bit;
        else
            words_[i / 64] &= ~bit;
    }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }
    bool empty() const { return count() == 0; }

    std::vector<std::size_t> members() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < size_; ++i)
            if (test(i)) out.push_back(i);
        return out;
    }

    Event operator&(const Event& o) const { return zip(o, [](auto a, auto b) { return a & b; }); }
    Event operator|(const Event& o) const { return zip(o, [](auto a, auto b) { return a | b; }); }
    Event operator!() const {
        Event e(*this);
        for (auto& w : e.words_) w = ~w;
        e.trim();
        return e;
    }

    bool is_subset_of(const Event& o) const {
        check(o);
        for (std::size_t k = 0; k < words_.size(); ++k)
            if ((words_[k] & ~o.words_[k]) != 0) return false;
        return true;
    }
    bool disjoint_from(const Event& o) const { return (*this & o).empty(); }

    friend bool operator==(const Event&, const Event&) = default;

private:
    template <typename F>
    Event zip(const Event& o, F f) const {
        check(o);
        Event e(size_);
        for (std::size_t k = 0; k < words_.size(); ++k) e.words_[k] = f(words_[k], o.words_[k]);
        return e;
    }

    void check(const Event& o) const {
        if (o.size_ != size_)
            throw InvalidArgument("trajectory-events", "event length mismatch (" + std::to_string(size_) + " vs " +
                                                           std::to_string(o.size_) + ")");
    }

    void trim() {
        if (size_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
    }

    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

enum class EventOp { And, Or, Not };

inline Event combine(const Event& a, const Event& b, EventOp op) {
    switch (op) {
        case EventOp::And: return a & b;
        case EventOp::Or: return a | b;
        case EventOp::Not: return !a;
    }
    throw InvalidArgument("trajectory-events", "unknown event operator");
}

inline Event sset_event(const TrajectorySpace& space, const SSet& s) {
    if (s.time >= space.num_times())
        throw InvalidArgument("trajectory-events", "time index " + std::to_string(s.time) + " out of range");
    if (s.region.num_labels() != space.num_labels())
        throw InvalidArgument("trajectory-events", "region dimension " + std::to_string(s.region.num_labels()) +
                                                       " does not match m = " + std::to_string(space.num_labels()));
    Event e(space.size());
    for (std::size_t i = 0; i < space.size(); ++i)
        if (s.region.contains(space.label_at(i, s.time))) e.set(i);
    return e;
}

// A probability vector over trajectory indices.
struct TrajectoryMeasure {
    std::vector<double> probs;

    std::size_t size() const { return probs.size(); }

    static TrajectoryMeasure uniform(std::size_t size) {
        return TrajectoryMeasure{std::vector<double>(size, 1.0 / static_cast<double>(size))};
    }

    // Throws unless entries are >= -tol and sum to 1 within tol.
    void validate(double tol = 1e-9) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (!(probs[i] >= -tol))
                throw InvalidArgument("credal-lp", "measure has negative mass at trajectory " + std::to_string(i));
            sum += probs[i];
        }
        if (std::abs(sum - 1.0) > tol)
            throw InvalidArgument("credal-lp", "measure sums to " + std::to_string(sum));
    }
};

inline double event_probability(const TrajectoryMeasure& p, const Event& a) {
    if (p.size() != a.size())
        throw InvalidArgument("trajectory-events", "measure has " + std::to_string(p.size()) +
                                                       " entries, event has " + std::to_string(a.size()));
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.test(i)) sum += p.probs[i];
    return sum;
}

}  // namespace iqp
