#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "iqp/error.hpp"

namespace iqp {

using complex = std::complex<double>;
using StateVector = Eigen::VectorXcd;
using Operator = Eigen::MatrixXcd;

inline constexpr std::size_t kDefaultTrajectoryCap = 100000;
inline constexpr double kUnitarityTolerance = 1e-9;

// A subset of the configuration labels, stored as a bitmask of length m.
class Region {
public:
    Region() = default;
    explicit Region(std::size_t num_labels) : bits_(num_labels, false) {}

    static Region full(std::size_t num_labels) {
        Region r(num_labels);
        std::fill(r.bits_.begin(), r.bits_.end(), true);
        return r;
    }

    static Region of(std::size_t num_labels, std::initializer_list<std::size_t> labels) {
        return of(num_labels, std::span<const std::size_t>(labels.begin(), labels.size()));
    }

    static Region of(std::size_t num_labels, std::span<const std::size_t> labels) {
        Region r(num_labels);
        for (std::size_t label : labels) {
            if (label >= num_labels) {
                throw InvalidArgument("quantum-core", "label " + std::to_string(label) +
                                                          " out of range (m = " +
                                                          std::to_string(num_labels) + ")");
            }
            r.bits_[label] = true;
        }
        return r;
    }

    // Bit i of `mask` selects label i.
    static Region from_mask(std::size_t num_labels, unsigned long long mask) {
        Region r(num_labels);
        for (std::size_t i = 0; i < num_labels; ++i) r.bits_[i] = ((mask >> i) & 1ULL) != 0;
        return r;
    }

    std::size_t num_labels() const { return bits_.size(); }
    bool contains(std::size_t label) const { return bits_.at(label); }
    std::size_t count() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true)); }
    bool empty() const { return count() == 0; }
    bool is_full() const { return count() == bits_.size(); }

    std::vector<std::size_t> labels() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < bits_.size(); ++i)
            if (bits_[i]) out.push_back(i);
        return out;
    }

    Region complement() const {
        Region r(*this);
        r.bits_.flip();
        return r;
    }

    Region intersect(const Region& other) const {
        check_same(other);
        Region r(*this);
        for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] = bits_[i] && other.bits_[i];
        return r;
    }

    Region unite(const Region& other) const {
        check_same(other);
        Region r(*this);
        for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] = bits_[i] || other.bits_[i];
        return r;
    }

    bool is_subset_of(const Region& other) const {
        check_same(other);
        for (std::size_t i = 0; i < bits_.size(); ++i)
            if (bits_[i] && !other.bits_[i]) return false;
        return true;
    }

    friend bool operator==(const Region&, const Region&) = default;

private:
    void check_same(const Region& other) const {
        if (other.bits_.size() != bits_.size())
            throw InvalidArgument("quantum-core", "region size mismatch");
    }

    std::vector<bool> bits_;
};

// The single-time cylinder {trajectories lambda : lambda(time) in region}.
struct SSet {
    std::size_t time = 0;
    Region region;

    friend bool operator==(const SSet&, const SSet&) = default;
};

// Pulled-back projected state U^dagger(t) E(region) U(t) psi0 and its squared norm.
struct SSetState {
    StateVector amplitudes;
    double weight = 0.0;
};

// Finite configuration space, finite time grid and a unitary step per grid
// interval. Immutable after construction; cumulative propagators are cached.
class QuantumSystem {
public:
    QuantumSystem(std::vector<std::string> labels, std::size_t num_times, std::vector<Operator> steps,
                  StateVector psi0, std::size_t trajectory_cap = kDefaultTrajectoryCap)
        : labels_(std::move(labels)), num_times_(num_times), steps_(std::move(steps)), psi0_(std::move(psi0)) {
        const std::size_t m = labels_.size();
        if (m == 0) throw InvalidArgument("quantum-core", "configuration space must have at least one label");
        if (num_times_ == 0) throw InvalidArgument("quantum-core", "time grid must have at least one point");
        if (steps_.size() + 1 != num_times_) {
            throw InvalidArgument("quantum-core", "expected " + std::to_string(num_times_ - 1) +
                                                      " step matrices, got " + std::to_string(steps_.size()));
        }
        check_trajectory_cap(m, num_times_, trajectory_cap);
        if (static_cast<std::size_t>(psi0_.size()) != m)
            throw InvalidArgument("quantum-core", "initial state has dimension " + std::to_string(psi0_.size()) +
                                                      ", expected " + std::to_string(m));
        if (std::abs(psi0_.norm() - 1.0) > kUnitarityTolerance)
            throw InvalidArgument("quantum-core", "initial state is not normalized (norm " +
                                                      std::to_string(psi0_.norm()) + ")");
        const Operator identity = Operator::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        for (std::size_t k = 0; k < steps_.size(); ++k) {
            const Operator& u = steps_[k];
            if (static_cast<std::size_t>(u.rows()) != m || static_cast<std::size_t>(u.cols()) != m)
                throw InvalidArgument("quantum-core", "step " + std::to_string(k) + " is not " + std::to_string(m) +
                                                          "x" + std::to_string(m));
            const double defect = (u * u.adjoint() - identity).cwiseAbs().maxCoeff();
            if (defect > kUnitarityTolerance)
                throw InvalidArgument("quantum-core", "step " + std::to_string(k) +
                                                          " is not unitary (max deviation " +
                                                          std::to_string(defect) + ")");
        }

        propagators_.reserve(num_times_);
        propagators_.push_back(identity);
        for (const Operator& u : steps_) propagators_.push_back(u * propagators_.back());
        states_.reserve(num_times_);
        for (const Operator& u : propagators_) states_.push_back(u * psi0_);
    }

    // Throws when m^n exceeds the cap; the message carries the computed m^n.
    static void check_trajectory_cap(std::size_t m, std::size_t n, std::size_t cap) {
        long double count = 1.0L;
        for (std::size_t i = 0; i < n; ++i) count *= static_cast<long double>(m);
        if (count > static_cast<long double>(cap)) {
            throw InvalidArgument("quantum-core", "trajectory count m^n = " + std::to_string(m) + "^" +
                                                      std::to_string(n) + " = " +
                                                      std::to_string(static_cast<unsigned long long>(count)) +
                                                      " exceeds the cap " + std::to_string(cap));
        }
    }

    std::size_t num_labels() const { return labels_.size(); }
    std::size_t num_times() const { return num_times_; }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<Operator>& steps() const { return steps_; }
    const StateVector& initial_state() const { return psi0_; }

    // U(t): product of the first t steps.
    const Operator& propagator(std::size_t t) const {
        check_time(t);
        return propagators_[t];
    }

    // Psi(t) = U(t) psi0.
    const StateVector& state(std::size_t t) const {
        check_time(t);
        return states_[t];
    }

    void check_time(std::size_t t) const {
        if (t >= num_times_)
            throw InvalidArgument("quantum-core", "time index " + std::to_string(t) + " out of range 0.." +
                                                      std::to_string(num_times_ - 1));
    }

    void check_sset(const SSet& s) const {
        check_time(s.time);
        if (s.region.num_labels() != labels_.size())
            throw InvalidArgument("quantum-core", "region has " + std::to_string(s.region.num_labels()) +
                                                      " labels, system has " + std::to_string(labels_.size()));
    }

private:
    std::vector<std::string> labels_;
    std::size_t num_times_;
    std::vector<Operator> steps_;
    StateVector psi0_;
    std::vector<Operator> propagators_;
    std::vector<StateVector> states_;
};

// E(region) applied to a state: zero the coordinates outside the region.
inline StateVector project(const Region& region, const StateVector& v) {
    StateVector out = v;
    for (Eigen::Index i = 0; i < out.size(); ++i)
        if (!region.contains(static_cast<std::size_t>(i))) out[i] = complex{0.0, 0.0};
    return out;
}

inline StateVector evolve(const QuantumSystem& sys, std::size_t t) { return sys.state(t); }

inline SSetState sset_state(const QuantumSystem& sys, const SSet& s) {
    sys.check_sset(s);
    const Operator& u = sys.propagator(s.time);
    SSetState out;
    out.amplitudes = u.adjoint() * project(s.region, sys.state(s.time));
    out.weight = out.amplitudes.squaredNorm();
    return out;
}

// Born weight ||E(region) Psi(t)||^2, computed without the pullback.
inline double born_weight(const QuantumSystem& sys, const SSet& s) {
    sys.check_sset(s);
    return project(s.region, sys.state(s.time)).squaredNorm();
}

inline double sset_distance(const QuantumSystem& sys, const SSet& s1, const SSet& s2) {
    if (s1 == s2) {
        sys.check_sset(s1);
        return 0.0;
    }
    return (sset_state(sys, s1).amplitudes - sset_state(sys, s2).amplitudes).squaredNorm();
}

// ||E(D_n) U(t_n - t_{n-1}) ... E(D_1) Psi(t_1)||^2: Born rule plus reduction.
// Not additive in the regions, so it is never used as a measure.
inline double sequential_probability(const QuantumSystem& sys, std::span<const SSet> ssets) {
    if (ssets.empty()) return 1.0;
    for (std::size_t i = 0; i < ssets.size(); ++i) {
        sys.check_sset(ssets[i]);
        if (i > 0 && ssets[i].time < ssets[i - 1].time)
            throw InvalidArgument("quantum-core", "sequential probability needs non-decreasing times");
    }
    StateVector v = project(ssets.front().region, sys.state(ssets.front().time));
    for (std::size_t i = 1; i < ssets.size(); ++i) {
        for (std::size_t k = ssets[i - 1].time; k < ssets[i].time; ++k) v = sys.steps()[k] * v;
        v = project(ssets[i].region, v);
    }
    return v.squaredNorm();
}

inline double sequential_probability(const QuantumSystem& sys, std::initializer_list<SSet> ssets) {
    return sequential_probability(sys, std::span<const SSet>(ssets.begin(), ssets.size()));
}

namespace gates {

inline Operator identity(std::size_t m) {
    return Operator::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
}

inline Operator hadamard() {
    Operator h(2, 2);
    const double r = 1.0 / std::sqrt(2.0);
    h << r, r, r, -r;
    return h;
}

// Unitary discrete Fourier transform, F_jk = exp(2 pi i j k / m) / sqrt(m).
inline Operator dft(std::size_t m) {
    const auto n = static_cast<Eigen::Index>(m);
    Operator f(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) {
            const double angle = 2.0 * M_PI * static_cast<double>((j * k) % n) / static_cast<double>(m);
            f(j, k) = std::polar(scale, angle);
        }
    return f;
}

// Real rotation by `angle` in the plane of labels (a, b).
inline Operator rotation(std::size_t m, std::size_t a, std::size_t b, double angle) {
    Operator r = identity(m);
    const auto i = static_cast<Eigen::Index>(a);
    const auto j = static_cast<Eigen::Index>(b);
    r(i, i) = std::cos(angle);
    r(j, j) = std::cos(angle);
    r(j, i) = std::sin(angle);
    r(i, j) = -std::sin(angle);
    return r;
}

}  // namespace gates

}  // namespace iqp
